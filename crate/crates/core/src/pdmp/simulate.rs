use serde::{Deserialize, Serialize};

use super::ode::Rk4;
use super::rng::{categorical, exponential, stream, Stream};
use super::system::{Rates, SwitchedSystem};
use super::trajectory::{Jump, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// RK4 step `h`.
    pub step: f64,
    /// Record every `sample_stride`-th grid point (jumps are always recorded).
    pub sample_stride: usize,
    /// Stop and flag the trajectory as truncated after this many jumps.
    pub max_jumps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            sample_stride: 10,
            max_jumps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Config(format!("step {} must be positive", self.step)));
        }
        if self.sample_stride == 0 {
            return Err(Error::Config("sample stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Simulates `Z = (X, I)` from `(x0, i0)` on `[0, horizon]`.
///
/// Between jumps `X` follows the active field with RK4 on the grid `n·h`,
/// with partial steps to land on jump times. Constant rates draw holding
/// times directly; state-dependent rates use thinning against the system's
/// majorant.
pub fn simulate(
    system: &SwitchedSystem,
    x0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    simulate_replicate(system, x0, i0, horizon, seed, 0, config)
}

/// As [`simulate`], on random stream `replicate` of `seed`.
pub fn simulate_replicate(
    system: &SwitchedSystem,
    x0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    replicate: u64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut rng = stream(seed, replicate);
    let (mut out, _) = drive(system, &[x0], i0, horizon, seed, config, &mut rng, None)?;
    Ok(out.pop().expect("one trajectory"))
}

/// As [`simulate_replicate`], stopping at the first step end where `stop`
/// holds. Returns the trajectory and that time, or `None` if the horizon
/// came first.
#[allow(clippy::too_many_arguments)]
pub fn simulate_until(
    system: &SwitchedSystem,
    x0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    replicate: u64,
    config: &IntegratorConfig,
    stop: &dyn Fn(&[f64]) -> bool,
) -> Result<(Trajectory, Option<f64>)> {
    let mut rng = stream(seed, replicate);
    let (mut out, hit) = drive(system, &[x0], i0, horizon, seed, config, &mut rng, Some(stop))?;
    Ok((out.pop().expect("one trajectory"), hit))
}

/// Two states driven by one switching signal: identical jump times and
/// modes, each state following its own flow. Constant rates only.
pub fn simulate_synchronous_pair(
    system: &SwitchedSystem,
    x0: &[f64],
    y0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<(Trajectory, Trajectory)> {
    synchronous_pair_replicate(system, x0, y0, i0, horizon, seed, 0, config)
}

#[allow(clippy::too_many_arguments)]
pub fn synchronous_pair_replicate(
    system: &SwitchedSystem,
    x0: &[f64],
    y0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    replicate: u64,
    config: &IntegratorConfig,
) -> Result<(Trajectory, Trajectory)> {
    if !matches!(system.rates(), Rates::Constant(_)) {
        return Err(Error::Precondition(
            "synchronous coupling needs constant rates".into(),
        ));
    }
    let mut rng = stream(seed, replicate);
    let (mut out, _) = drive(system, &[x0, y0], i0, horizon, seed, config, &mut rng, None)?;
    let second = out.pop().expect("two trajectories");
    let first = out.pop().expect("two trajectories");
    Ok((first, second))
}

#[allow(clippy::too_many_arguments)]
type StopRule<'a> = &'a dyn Fn(&[f64]) -> bool;

#[allow(clippy::too_many_arguments)]
fn drive(
    system: &SwitchedSystem,
    starts: &[&[f64]],
    i0: usize,
    horizon: f64,
    seed: u64,
    config: &IntegratorConfig,
    rng: &mut Stream,
    stop: Option<StopRule>,
) -> Result<(Vec<Trajectory>, Option<f64>)> {
    config.validate()?;
    let d = system.dim();
    let n_modes = system.modes();
    let family = system.family();
    let domain = family.domain();
    if i0 >= n_modes {
        return Err(Error::Domain(format!("initial mode {i0} out of range")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Domain(format!("horizon {horizon} must be finite and nonnegative")));
    }
    for x0 in starts {
        if x0.len() != d {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: d,
                found: x0.len(),
            });
        }
        if !domain.contains(x0, 0.0) {
            return Err(Error::Domain(format!("initial state {x0:?} outside the domain")));
        }
    }
    if let Rates::StateDependent(r) = system.rates() {
        r.matrix_at(starts[0])?.ensure_irreducible()?;
    }

    let h = config.step;
    let n_full = (horizon / h).floor() as u64;
    let stride = config.sample_stride as u64;
    let majorant = system.majorant();

    let mut states: Vec<Vec<f64>> = starts.iter().map(|x| x.to_vec()).collect();
    let mut trajs: Vec<Trajectory> = starts.iter().map(|_| Trajectory::new(d, seed)).collect();
    let mut rk = Rk4::new(d);
    let mut row = vec![0.0; n_modes];

    let mut t = 0.0;
    let mut n: u64 = 0;
    let mut on_grid = true;
    let mut mode = i0;
    for (tr, x) in trajs.iter_mut().zip(&states) {
        tr.record(t, x, mode);
    }
    if let Some(stop) = stop {
        if stop(&states[0]) {
            return Ok((trajs, Some(t)));
        }
    }

    let clock_rate = |mode: usize| match system.rates() {
        Rates::Constant(q) => q.exit_rate(mode),
        Rates::StateDependent(_) => majorant,
    };
    let mut next_event = t + exponential(rng, clock_rate(mode));

    loop {
        let grid_next = if n < n_full { (n + 1) as f64 * h } else { horizon };
        let event_first = next_event < grid_next;
        let target = if event_first { next_event } else { grid_next };
        let dt = if !event_first && on_grid && n < n_full {
            h
        } else {
            target - t
        };
        if dt > 0.0 {
            let field = family.field(mode);
            for x in states.iter_mut() {
                rk.step(field.as_ref(), x, dt);
                domain.clamp(x, field.as_ref())?;
            }
        }
        t = target;
        if let Some(stop) = stop {
            if dt > 0.0 && stop(&states[0]) {
                for (tr, x) in trajs.iter_mut().zip(&states) {
                    tr.record(t, x, mode);
                }
                return Ok((trajs, Some(t)));
            }
        }

        if event_first {
            on_grid = false;
            let jump_to = match system.rates() {
                Rates::Constant(q) => {
                    for (j, r) in row.iter_mut().enumerate() {
                        *r = q.rate(mode, j);
                    }
                    Some(categorical(rng, &row, q.exit_rate(mode)))
                }
                Rates::StateDependent(rates) => {
                    rates.row_into(&states[0], mode, &mut row);
                    let total: f64 = row.iter().sum();
                    if total > majorant {
                        return Err(Error::MajorantExceeded {
                            majorant,
                            rate: total,
                            state: states[0].clone(),
                        });
                    }
                    use rand::Rng;
                    if rng.random::<f64>() * majorant < total {
                        Some(categorical(rng, &row, total))
                    } else {
                        None
                    }
                }
            };
            if let Some(to) = jump_to {
                let from = mode;
                mode = to;
                for (tr, x) in trajs.iter_mut().zip(&states) {
                    tr.record(t, x, mode);
                    let sample = tr.len() - 1;
                    tr.jumps.push(Jump {
                        time: t,
                        from,
                        to,
                        sample,
                    });
                }
                if trajs[0].jumps.len() >= config.max_jumps {
                    for tr in trajs.iter_mut() {
                        tr.truncated = true;
                    }
                    break;
                }
            }
            next_event = t + exponential(rng, clock_rate(mode));
        } else if n < n_full {
            n += 1;
            on_grid = true;
            if n.is_multiple_of(stride) {
                for (tr, x) in trajs.iter_mut().zip(&states) {
                    tr.record(t, x, mode);
                }
            }
        } else {
            for (tr, x) in trajs.iter_mut().zip(&states) {
                tr.record(t, x, mode);
            }
            break;
        }
    }
    Ok((trajs, None))
}
