//! The angular process `Θ = Y/‖Y‖` of the linear switching system and its
//! log-radius integrand `⟨A^J Θ, Θ⟩`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::system::{ConeTag, LinearSwitchedSystem};
use crate::error::{Error, Result};
use crate::matrixcore::SquareMatrix;
use crate::pdmp::rng::{categorical, exponential, stream, Stream};

const UNIT_TOL: f64 = 1e-9;
const CONE_TOL: f64 = 1e-9;

/// `G(θ) = Aθ − ⟨Aθ, θ⟩θ`, tangent to the sphere at `θ`.
pub fn angular_drift(a: &SquareMatrix, theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            what: "angular state",
            expected: a.dim(),
            found: theta.len(),
        });
    }
    let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    let at = a.mul_vec(theta);
    let g: f64 = at.iter().zip(theta).map(|(u, v)| u * v).sum();
    Ok(at.iter().zip(theta).map(|(u, v)| u - g * v).collect())
}

/// Sampled angular path with the running integral `∫₀ᵗ ⟨A^{J_s}Θ_s, Θ_s⟩ ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularTrajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major unit vectors.
    pub thetas: Vec<f64>,
    pub modes: Vec<usize>,
    pub integral: Vec<f64>,
}

impl AngularTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn theta(&self, k: usize) -> &[f64] {
        &self.thetas[k * self.dim..(k + 1) * self.dim]
    }

    fn record(&mut self, t: f64, theta: &[f64], mode: usize, integral: f64) {
        if self.times.last() == Some(&t) {
            let k = self.times.len() - 1;
            self.thetas[k * self.dim..].copy_from_slice(theta);
            self.modes[k] = mode;
            self.integral[k] = integral;
            return;
        }
        self.times.push(t);
        self.thetas.extend_from_slice(theta);
        self.modes.push(mode);
        self.integral.push(integral);
    }
}

/// RK4 for the projective system `θ̇ = Aθ − q(θ)θ`, `ṙ = q(θ)` with
/// `q(y) = ⟨Ay, y⟩/⟨y, y⟩`. On the sphere this is exactly `(G(θ), ⟨Aθ,θ⟩)`;
/// the Rayleigh-quotient extension keeps the stage points consistent so the
/// log-radius quadrature inherits fourth order.
pub(crate) struct AngularStepper {
    d: usize,
    ay: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl AngularStepper {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            d,
            ay: vec![0.0; d],
            k: [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]],
            tmp: vec![0.0; d],
        }
    }

    #[inline]
    fn drift(d: usize, a: &[f64], y: &[f64], ay: &mut [f64], out: &mut [f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..d {
            let row = &a[i * d..(i + 1) * d];
            let v: f64 = row.iter().zip(y).map(|(p, q)| p * q).sum();
            ay[i] = v;
            num += v * y[i];
            den += y[i] * y[i];
        }
        let q = num / den;
        for i in 0..d {
            out[i] = ay[i] - q * y[i];
        }
        q
    }

    /// Advances `theta` by `h` and returns the log-radius increment.
    #[inline]
    pub(crate) fn step(&mut self, a: &[f64], theta: &mut [f64], h: f64) -> f64 {
        let d = self.d;
        let [k1, k2, k3, k4] = &mut self.k;
        let g1 = Self::drift(d, a, theta, &mut self.ay, k1);
        for i in 0..d {
            self.tmp[i] = theta[i] + 0.5 * h * k1[i];
        }
        let g2 = Self::drift(d, a, &self.tmp, &mut self.ay, k2);
        for i in 0..d {
            self.tmp[i] = theta[i] + 0.5 * h * k2[i];
        }
        let g3 = Self::drift(d, a, &self.tmp, &mut self.ay, k3);
        for i in 0..d {
            self.tmp[i] = theta[i] + h * k3[i];
        }
        let g4 = Self::drift(d, a, &self.tmp, &mut self.ay, k4);
        let sixth = h / 6.0;
        let mut norm2 = 0.0;
        for i in 0..d {
            theta[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            norm2 += theta[i] * theta[i];
        }
        let inv = 1.0 / norm2.sqrt();
        theta.iter_mut().for_each(|v| *v *= inv);
        sixth * (g1 + 2.0 * (g2 + g3) + g4)
    }
}

/// Uniform draw on the unit sphere, or on its positive-orthant patch via
/// normalized absolute Gaussians.
pub fn random_direction(rng: &mut Stream, d: usize, cone: ConeTag) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if cone == ConeTag::Orthant {
            v.iter_mut().for_each(|x| *x = x.abs());
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Draws the initial mode from the stationary law of the chain.
pub(crate) fn stationary_mode(rng: &mut Stream, sys: &LinearSwitchedSystem) -> usize {
    categorical(rng, sys.stationary().as_slice(), 1.0)
}

pub(crate) struct AngularRun {
    pub integral: f64,
    pub integral_at_burn_in: f64,
}

/// Shared driver for the recorder and the streaming estimator. Stops are
/// the grid `n·h`, jump times, the burn-in instant and the horizon.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_angular(
    sys: &LinearSwitchedSystem,
    theta: &mut [f64],
    i0: usize,
    horizon: f64,
    burn_in: f64,
    h: f64,
    rng: &mut Stream,
    mut recorder: Option<(&mut AngularTrajectory, usize)>,
) -> Result<AngularRun> {
    let d = sys.dim();
    let n_modes = sys.modes();
    let q = sys.rates();
    let orthant = sys.cone() == ConeTag::Orthant;
    let mats: Vec<&[f64]> = sys.matrices().iter().map(|m| m.as_slice()).collect();
    let mut stepper = AngularStepper::new(d);
    let mut row = vec![0.0; n_modes];

    let n_full = (horizon / h).floor() as u64;
    let mut n: u64 = 0;
    let mut on_grid = true;
    let mut t = 0.0;
    let mut mode = i0;
    let mut integral = 0.0;
    let mut at_burn = if burn_in <= 0.0 { Some(0.0) } else { None };
    let mut next_jump = exponential(rng, q.exit_rate(mode));

    if let Some((rec, _)) = recorder.as_mut() {
        rec.record(0.0, theta, mode, 0.0);
    }

    loop {
        let grid_next = if n < n_full { (n + 1) as f64 * h } else { horizon };
        let mut target = grid_next;
        let mut kind = 0u8; // 0 grid, 1 jump, 2 burn-in
        if next_jump < target {
            target = next_jump;
            kind = 1;
        }
        if at_burn.is_none() && burn_in < target {
            target = burn_in;
            kind = 2;
        }
        let dt = if kind == 0 && on_grid && n < n_full { h } else { target - t };
        if dt > 0.0 {
            integral += stepper.step(mats[mode], theta, dt);
            if orthant {
                if let Some((i, &v)) = theta.iter().enumerate().find(|(_, v)| **v < -CONE_TOL) {
                    return Err(Error::ConeViolation {
                        component: i,
                        value: v,
                    });
                }
            }
        }
        t = target;
        match kind {
            1 => {
                on_grid = false;
                for (j, r) in row.iter_mut().enumerate() {
                    *r = q.rate(mode, j);
                }
                mode = categorical(rng, &row, q.exit_rate(mode));
                next_jump = t + exponential(rng, q.exit_rate(mode));
                if let Some((rec, _)) = recorder.as_mut() {
                    rec.record(t, theta, mode, integral);
                }
            }
            2 => {
                on_grid = false;
                at_burn = Some(integral);
            }
            _ => {
                if n < n_full {
                    n += 1;
                    on_grid = true;
                    if let Some((rec, stride)) = recorder.as_mut() {
                        if n.is_multiple_of(*stride as u64) {
                            rec.record(t, theta, mode, integral);
                        }
                    }
                } else {
                    if let Some((rec, _)) = recorder.as_mut() {
                        rec.record(t, theta, mode, integral);
                    }
                    break;
                }
            }
        }
    }
    Ok(AngularRun {
        integral,
        integral_at_burn_in: at_burn.unwrap_or(integral),
    })
}

fn check_start(sys: &LinearSwitchedSystem, theta0: &[f64], i0: usize) -> Result<()> {
    if theta0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            what: "angular state",
            expected: sys.dim(),
            found: theta0.len(),
        });
    }
    let norm = theta0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    if sys.cone() == ConeTag::Orthant {
        if let Some((i, &v)) = theta0.iter().enumerate().find(|(_, v)| **v < -CONE_TOL) {
            return Err(Error::ConeViolation {
                component: i,
                value: v,
            });
        }
    }
    if i0 >= sys.modes() {
        return Err(Error::Domain(format!("initial mode {i0} out of range")));
    }
    Ok(())
}

/// Integrates `dΘ/dt = G^{J_t}(Θ)` with RK4 (step `h`, renormalized after
/// every step) along a mode path drawn from `seed`, recording every
/// `stride`-th grid point and every jump.
pub fn simulate_angular(
    sys: &LinearSwitchedSystem,
    theta0: &[f64],
    i0: usize,
    horizon: f64,
    seed: u64,
    h: f64,
    stride: usize,
) -> Result<AngularTrajectory> {
    check_start(sys, theta0, i0)?;
    if !(h > 0.0) || stride == 0 {
        return Err(Error::Config("step must be positive and stride at least 1".into()));
    }
    let mut rng = stream(seed, 0);
    let mut theta = theta0.to_vec();
    let mut rec = AngularTrajectory {
        dim: sys.dim(),
        times: Vec::new(),
        thetas: Vec::new(),
        modes: Vec::new(),
        integral: Vec::new(),
    };
    run_angular(sys, &mut theta, i0, horizon, 0.0, h, &mut rng, Some((&mut rec, stride)))?;
    Ok(rec)
}
