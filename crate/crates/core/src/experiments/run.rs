use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use super::registry::FMG3D_PERIOD_ONE_RADIUS;
use super::report::{CheckResult, DiagnosticOutcome, Report, StepCounts};
use super::scenario::{Diagnostic, Expectation, Scenario, Sign};
use crate::error::{Error, Result};
use crate::lyapunov::{
    analytic_bounds, averaged_limit, estimate_lambda_angular, estimate_lambda_lognorm,
    hurwitz_hull_check, lambda_beta_sweep, period_switch_growth, write_sweep_csv,
    EstimatorOptions, GrowthRateEstimate, LinearSwitchedSystem,
};
use crate::matrixcore::{spectral_abscissa, stationary_distribution, SquareMatrix};
use crate::parallel::map_replicates;
use crate::pdmp::{simulate_replicate, IntegratorConfig, SwitchedSystem};
use crate::persistence::{
    ball_mass, convergence_rate, default_cells, extinction_rate, hitting_times,
    occupation_measure_after, part_metric_contraction, tail_moment_sweep, DecayCurve,
    ExtinctionFit, HittingTimeSample, OccupationHistogram, TailMoment,
};
use crate::vectorfields::{average_field, endemic_equilibrium};

/// Trajectories exported per scenario.
const EXPORTED_TRAJECTORIES: usize = 3;
/// Simplex grid points per edge of the hull scan.
const HULL_GRID: usize = 101;
/// Radius of the ball around the extinction set whose mass is reported.
const BALL_RADIUS: f64 = 0.02;
/// Half-width, in standard errors, of every Monte-Carlo band.
const SIGMAS: f64 = 3.0;

type Cached<T> = Option<std::result::Result<T, String>>;

fn cached<T: Clone>(slot: &mut Cached<T>, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, String> {
    if slot.is_none() {
        *slot = Some(f().map_err(|e| e.to_string()));
    }
    slot.clone().expect("filled above")
}

#[derive(Clone)]
struct ReplicateSummary {
    extinction: std::result::Result<ExtinctionFit, String>,
    convergence: Vec<std::result::Result<ExtinctionFit, String>>,
    tail: Vec<TailMoment>,
    final_state: Vec<f64>,
    samples: usize,
    jumps: usize,
    truncated: bool,
}

#[derive(Clone)]
struct Ensemble {
    replicates: Vec<ReplicateSummary>,
    occupation: Option<OccupationHistogram>,
    targets: Vec<Vec<f64>>,
}

struct Runner<'a> {
    s: &'a Scenario,
    out: &'a Path,
    artifacts: Vec<PathBuf>,
    steps: StepCounts,
    linear: Cached<LinearSwitchedSystem>,
    angular: Cached<GrowthRateEstimate>,
    lognorm: Cached<GrowthRateEstimate>,
    ensemble: Cached<Ensemble>,
    hitting: Cached<HittingTimeSample>,
    coupling: Cached<DecayCurve>,
    targets: Vec<Vec<f64>>,
}

/// Runs every requested diagnostic, writes CSV artifacts and `report.json`
/// into `out_dir`, and evaluates the expected bands.
///
/// Invalid scenarios fail before any work. Errors raised inside a
/// diagnostic are recorded in the report, which is then marked failed.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Report> {
    scenario.validate()?;
    fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut runner = Runner {
        s: scenario,
        out: out_dir,
        artifacts: Vec::new(),
        steps: StepCounts::default(),
        linear: None,
        angular: None,
        lognorm: None,
        ensemble: None,
        hitting: None,
        coupling: None,
        targets: Vec::new(),
    };
    runner.collect_targets();

    let mut diagnostics = Vec::new();
    for &d in &scenario.diagnostics {
        let t = Instant::now();
        let res = runner.diagnostic(d);
        let seconds = t.elapsed().as_secs_f64();
        diagnostics.push(match res {
            Ok(result) => DiagnosticOutcome { diagnostic: d, ok: true, error: None, result, seconds },
            Err(e) => DiagnosticOutcome {
                diagnostic: d,
                ok: false,
                error: Some(e.to_string()),
                result: Value::Null,
                seconds,
            },
        });
    }

    let checks: Vec<CheckResult> = scenario
        .expectations
        .iter()
        .map(|band| {
            let (passed, detail) = match runner.check(&band.expectation) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                check: check_name(&band.expectation).to_string(),
                provenance: band.provenance,
                source: band.source.clone(),
                passed,
                detail,
            }
        })
        .collect();

    let passed = diagnostics.iter().all(|d| d.ok) && checks.iter().all(|c| c.passed);
    let report_path = out_dir.join("report.json");
    runner.artifacts.push(report_path.clone());
    let report = Report {
        scenario: scenario.clone(),
        diagnostics,
        checks,
        artifacts: runner.artifacts,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        steps: runner.steps,
        passed,
    };
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

fn check_name(e: &Expectation) -> &'static str {
    match e {
        Expectation::ModeAbscissa { .. } => "mode_abscissa",
        Expectation::AverageAbscissa { .. } => "average_abscissa",
        Expectation::EndemicEquilibrium { .. } => "endemic_equilibrium",
        Expectation::CommonEquilibrium { .. } => "common_equilibrium",
        Expectation::Hull { .. } => "hull",
        Expectation::PeriodSwitchExplodes { .. } => "period_switch_explodes",
        Expectation::LambdaSign { .. } => "lambda_sign",
        Expectation::ExtinctionSlopesNegative => "extinction_slopes_negative",
        Expectation::BallMassBelow { .. } => "ball_mass_below",
        Expectation::BallMassAbove { .. } => "ball_mass_above",
        Expectation::NoCensoredHits => "no_censored_hits",
        Expectation::PartMetricContracts => "part_metric_contracts",
        Expectation::ConvergesTo { .. } => "converges_to",
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl Runner<'_> {
    fn options(&self) -> EstimatorOptions {
        EstimatorOptions {
            step: self.s.lyapunov.step,
            ..EstimatorOptions::default()
        }
    }

    fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_step(self.s.step)
    }

    fn system(&self) -> Result<SwitchedSystem> {
        self.s.switched_system()
    }

    fn linear(&mut self) -> Result<LinearSwitchedSystem> {
        let s = self.s;
        cached(&mut self.linear, || s.linear_system()).map_err(Error::Precondition)
    }

    fn angular(&mut self) -> Result<GrowthRateEstimate> {
        let sys = self.linear()?;
        let (l, opts) = (self.s.lyapunov, self.options());
        let seed = self.s.seed;
        cached(&mut self.angular, || {
            estimate_lambda_angular(&sys, l.horizon, l.replicates, seed, &opts)
        })
        .map_err(Error::Precondition)
    }

    fn lognorm(&mut self) -> Result<GrowthRateEstimate> {
        let sys = self.linear()?;
        let (l, opts) = (self.s.lyapunov, self.options());
        let seed = self.s.seed;
        cached(&mut self.lognorm, || {
            estimate_lambda_lognorm(&sys, l.horizon, l.replicates, seed, &opts)
        })
        .map_err(Error::Precondition)
    }

    /// Equilibrium targets for convergence fits, fixed before the ensemble runs.
    fn collect_targets(&mut self) {
        if self.s.diagnostics.contains(&Diagnostic::Convergence) {
            if let Ok(Some(x)) = self.averaged_equilibrium() {
                self.targets.push(x);
            }
        }
        for band in &self.s.expectations {
            if let Expectation::ConvergesTo { target } = &band.expectation {
                if !self.targets.contains(target) {
                    self.targets.push(target.clone());
                }
            }
        }
    }

    fn averaged_equilibrium(&self) -> Result<Option<Vec<f64>>> {
        let sys = self.system()?;
        let q = self.s.rates.matrix()?;
        let p = stationary_distribution(&q)?;
        let avg = average_field(sys.family(), &p)?;
        endemic_equilibrium(avg.as_ref())
    }

    fn ensemble(&mut self) -> Result<Ensemble> {
        if self.ensemble.is_none() {
            let res = self.build_ensemble();
            if let Ok((_, counts, paths)) = &res {
                self.steps = *counts;
                self.artifacts.extend(paths.iter().cloned());
            }
            self.ensemble = Some(res.map(|(e, _, _)| e).map_err(|e| e.to_string()));
        }
        self.ensemble.clone().expect("filled above").map_err(Error::Precondition)
    }

    fn build_ensemble(&self) -> Result<(Ensemble, StepCounts, Vec<PathBuf>)> {
        let s = self.s;
        let sys = self.system()?;
        let cfg = self.config();
        let domain = sys.family().domain().clone();
        let bounded = domain.is_bounded();
        let cells = default_cells(sys.dim());
        let export = s.diagnostics.contains(&Diagnostic::Trajectories);
        let burn_in = s.burn_in * s.horizon;
        let targets = self.targets.clone();
        let out = self.out.to_path_buf();

        let per_rep = map_replicates(s.replicates, |r| -> Result<(ReplicateSummary, Option<OccupationHistogram>, Option<PathBuf>)> {
            let x0 = &s.initial_conditions[r % s.initial_conditions.len()];
            let traj = simulate_replicate(&sys, x0, s.initial_mode, s.horizon, s.seed, r as u64, &cfg)?;
            let path = if export && r < EXPORTED_TRAJECTORIES {
                let p = out.join(format!("fig_trajectories_{}_{r}.csv", s.name));
                traj.write_csv(BufWriter::new(File::create(&p)?))?;
                Some(p)
            } else {
                None
            };
            let hist = if bounded {
                Some(occupation_measure_after(&traj, &domain, cells, sys.modes(), burn_in)?)
            } else {
                None
            };
            let summary = ReplicateSummary {
                extinction: extinction_rate(&traj, s.fit_window).map_err(|e| e.to_string()),
                convergence: targets
                    .iter()
                    .map(|c| convergence_rate(&traj, c, s.fit_window).map_err(|e| e.to_string()))
                    .collect(),
                tail: tail_moment_sweep(&traj)?,
                final_state: traj.final_state().to_vec(),
                samples: traj.len(),
                jumps: traj.jumps.len(),
                truncated: traj.truncated,
            };
            Ok((summary, hist, path))
        });

        let mut replicates = Vec::with_capacity(s.replicates);
        let mut occupation: Option<OccupationHistogram> = None;
        let mut counts = StepCounts::default();
        let mut paths = Vec::new();
        for res in per_rep {
            let (summary, hist, path) = res?;
            counts.trajectories += 1;
            counts.samples += summary.samples;
            counts.jumps += summary.jumps;
            counts.truncated += usize::from(summary.truncated);
            if let Some(h) = hist {
                match occupation.as_mut() {
                    Some(acc) => acc.merge(&h)?,
                    None => occupation = Some(h),
                }
            }
            paths.extend(path);
            replicates.push(summary);
        }
        Ok((Ensemble { replicates, occupation, targets }, counts, paths))
    }

    fn hitting(&mut self) -> Result<HittingTimeSample> {
        let h = self
            .s
            .hitting
            .clone()
            .ok_or_else(|| Error::Config("no hitting settings".into()))?;
        let sys = self.system()?;
        let (cfg, i0, seed) = (self.config(), self.s.initial_mode, self.s.seed);
        cached(&mut self.hitting, || {
            hitting_times(&sys, &h.starts, i0, h.epsilon, h.horizon, h.replicates, seed, &cfg)
        })
        .map_err(Error::Precondition)
    }

    fn coupling(&mut self) -> Result<DecayCurve> {
        let c = self
            .s
            .coupling
            .clone()
            .ok_or_else(|| Error::Config("no coupling settings".into()))?;
        let sys = self.system()?;
        let (cfg, i0, seed) = (self.config(), self.s.initial_mode, self.s.seed);
        cached(&mut self.coupling, || {
            part_metric_contraction(&sys, &c.x0, &c.y0, i0, c.horizon, c.replicates, seed, c.points, &cfg)
        })
        .map_err(Error::Precondition)
    }

    fn occupation(&mut self) -> Result<OccupationHistogram> {
        self.ensemble()?
            .occupation
            .ok_or_else(|| Error::Precondition("occupation measures need a bounded domain".into()))
    }

    fn write_artifact(&mut self, name: &str, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<String> {
        let p = self.out.join(name);
        f(BufWriter::new(File::create(&p)?))?;
        self.artifacts.push(p.clone());
        Ok(p.display().to_string())
    }

    fn diagnostic(&mut self, d: Diagnostic) -> Result<Value> {
        let s = self.s;
        match d {
            Diagnostic::Eigenvalues => {
                let mats = s.system.linearization();
                let modes: Vec<f64> = mats.iter().map(spectral_abscissa).collect::<Result<_>>()?;
                let p = stationary_distribution(&s.rates.matrix()?)?;
                let avg = SquareMatrix::combination(&mats, p.as_slice())?;
                Ok(json!({
                    "mode_abscissae": modes,
                    "stationary": p.as_slice(),
                    "average_abscissa": spectral_abscissa(&avg)?,
                }))
            }
            Diagnostic::Equilibrium => {
                if !s.system.is_epidemic() {
                    return Err(Error::Precondition("equilibria are computed for epidemic systems".into()));
                }
                Ok(json!({ "averaged_field_equilibrium": self.averaged_equilibrium()? }))
            }
            Diagnostic::HullCheck => {
                let hull = hurwitz_hull_check(&s.system.linearization(), HULL_GRID)?;
                Ok(serde_json::to_value(hull)?)
            }
            Diagnostic::PeriodSwitch => {
                let rho = period_switch_growth(&s.system.linearization(), 1.0)?;
                let mut v = json!({ "period": 1.0, "spectral_radius": rho, "explodes": rho > 1.0 });
                if s.name == "fmg3d" {
                    v["frozen_constant"] = json!(FMG3D_PERIOD_ONE_RADIUS);
                }
                Ok(v)
            }
            Diagnostic::Lyapunov => {
                let sys = self.linear()?;
                let angular = self.angular()?;
                let lognorm = self.lognorm()?;
                let bounds = analytic_bounds(&sys);
                let limit = averaged_limit(&sys).ok().map(|(l, _)| l);
                let lo = angular.value - SIGMAS * angular.stderr;
                let hi = angular.value + SIGMAS * angular.stderr;
                let combined = (angular.stderr.powi(2) + lognorm.stderr.powi(2)).sqrt();
                Ok(json!({
                    "angular": angular,
                    "lognorm": lognorm,
                    "estimators_agree": (angular.value - lognorm.value).abs() <= SIGMAS * combined,
                    "bounds": bounds,
                    "bounds_contain_estimate": bounds.symmetric_lower <= lo && hi <= bounds.symmetric_upper,
                    "trace_bound_below_estimate": bounds.trace_lower <= hi,
                    "averaged_limit": limit,
                }))
            }
            Diagnostic::Sweep => {
                let sys = self.linear()?;
                let l = s.lyapunov;
                let points = lambda_beta_sweep(
                    sys.matrices(),
                    &s.rates.base,
                    sys.cone(),
                    &s.sweep_betas,
                    l.horizon,
                    l.replicates,
                    s.seed,
                    &self.options(),
                )?;
                let path = self.write_artifact("fig_lambda_beta.csv", |w| write_sweep_csv(&points, w))?;
                Ok(json!({ "points": points, "csv": path }))
            }
            Diagnostic::Trajectories => {
                let e = self.ensemble()?;
                let finals: Vec<&Vec<f64>> = e.replicates.iter().map(|r| &r.final_state).collect();
                Ok(json!({ "final_states": finals, "steps": self.steps }))
            }
            Diagnostic::Extinction => {
                let e = self.ensemble()?;
                let fits: Vec<Value> = e
                    .replicates
                    .iter()
                    .map(|r| match &r.extinction {
                        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
                        Err(msg) => json!({ "error": msg }),
                    })
                    .collect();
                Ok(json!({ "window_fraction": s.fit_window, "fits": fits }))
            }
            Diagnostic::Convergence => {
                let e = self.ensemble()?;
                let target = self
                    .averaged_equilibrium()?
                    .ok_or_else(|| Error::Precondition("averaged field has no endemic equilibrium".into()))?;
                let k = e.targets.iter().position(|t| *t == target).expect("collected up front");
                let fits: Vec<Value> = e
                    .replicates
                    .iter()
                    .map(|r| match &r.convergence[k] {
                        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
                        Err(msg) => json!({ "error": msg }),
                    })
                    .collect();
                Ok(json!({ "target": target, "fits": fits }))
            }
            Diagnostic::Occupation => {
                let hist = self.occupation()?;
                let name = format!("occupation_{}.csv", s.name);
                let path = self.write_artifact(&name, |w| hist.write_csv(w))?;
                Ok(json!({
                    "cells_per_axis": hist.cells_per_axis,
                    "burn_in": s.burn_in * s.horizon,
                    "ball_radius": BALL_RADIUS,
                    "ball_mass": ball_mass(&hist, BALL_RADIUS)?,
                    "mode_marginal": hist.mode_marginal(),
                    "csv": path,
                }))
            }
            Diagnostic::TailMoment => {
                let e = self.ensemble()?;
                let tails: Vec<&Vec<TailMoment>> = e.replicates.iter().map(|r| &r.tail).collect();
                Ok(json!({ "per_replicate": tails }))
            }
            Diagnostic::HittingTimes => {
                let h = self.hitting()?;
                Ok(json!({
                    "epsilon": h.epsilon,
                    "horizon": h.horizon,
                    "replicates": h.times.len(),
                    "censored": h.censored_count(),
                    "mean_time": h.mean_time(),
                    "geometric_moments": h.geometric_moments(),
                }))
            }
            Diagnostic::PartMetric => {
                let curve = self.coupling()?;
                let name = format!("part_metric_{}.csv", s.name);
                let path = self.write_artifact(&name, |w| curve.write_csv(w))?;
                Ok(json!({
                    "initial_distance": curve.initial_distance,
                    "final_mean": curve.mean.last(),
                    "log_slope": curve.log_slope,
                    "excluded": curve.excluded,
                    "max_increase": curve.max_increase,
                    "nonexpansive_violations": curve.nonexpansive_violations,
                    "csv": path,
                }))
            }
        }
    }

    fn check(&mut self, e: &Expectation) -> Result<(bool, String)> {
        let s = self.s;
        Ok(match e {
            Expectation::ModeAbscissa { mode, value, tol } => {
                let mats = s.system.linearization();
                let a = mats
                    .get(*mode)
                    .ok_or_else(|| Error::Config(format!("mode {mode} out of range")))?;
                let l = spectral_abscissa(a)?;
                ((l - value).abs() <= *tol, format!("lambda(A{mode}) = {l:.12}, expected {value:.12} ± {tol:e}"))
            }
            Expectation::AverageAbscissa { value, tol } => {
                let mats = s.system.linearization();
                let p = stationary_distribution(&s.rates.matrix()?)?;
                let l = spectral_abscissa(&SquareMatrix::combination(&mats, p.as_slice())?)?;
                ((l - value).abs() <= *tol, format!("lambda(A^p) = {l:.12}, expected {value:.12} ± {tol:e}"))
            }
            Expectation::EndemicEquilibrium { point, tol } => match self.averaged_equilibrium()? {
                Some(x) => {
                    let err = sup_distance(&x, point);
                    (err <= *tol, format!("x* = {x:?}, error {err:e}"))
                }
                None => (false, "averaged field has no endemic equilibrium".into()),
            },
            Expectation::CommonEquilibrium { point } => {
                let sys = self.system()?;
                let norms: Vec<f64> = sys
                    .family()
                    .fields()
                    .iter()
                    .map(|f| f.eval(point).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
                    .collect();
                (norms.iter().all(|&n| n == 0.0), format!("max |F^i(x*)| per mode = {norms:?}"))
            }
            Expectation::Hull { all_hurwitz, worst_lambda, tol } => {
                let hull = hurwitz_hull_check(&s.system.linearization(), HULL_GRID)?;
                let mut ok = hull.all_hurwitz == *all_hurwitz;
                if let Some(w) = worst_lambda {
                    ok &= (hull.worst_lambda - w).abs() <= *tol;
                }
                (
                    ok,
                    format!(
                        "all Hurwitz: {}, worst lambda {:.12} at weights {:?}",
                        hull.all_hurwitz, hull.worst_lambda, hull.worst_weights
                    ),
                )
            }
            Expectation::PeriodSwitchExplodes { period } => {
                let rho = period_switch_growth(&s.system.linearization(), *period)?;
                (rho > 1.0, format!("monodromy spectral radius {rho:.12}"))
            }
            Expectation::LambdaSign { sign } => {
                let est = self.angular()?;
                let want = match sign {
                    Sign::Negative => -1.0,
                    Sign::Positive => 1.0,
                };
                (
                    est.significant_sign(SIGMAS) == Some(want),
                    format!("lambda_hat = {:.6} ± {:.6} (1 sigma)", est.value, est.stderr),
                )
            }
            Expectation::ExtinctionSlopesNegative => {
                let e = self.ensemble()?;
                let slopes: Vec<std::result::Result<f64, String>> =
                    e.replicates.iter().map(|r| r.extinction.clone().map(|f| f.slope)).collect();
                let ok = slopes.iter().all(|s| matches!(s, Ok(v) if *v < 0.0));
                let worst = slopes.iter().filter_map(|s| s.as_ref().ok()).fold(f64::NEG_INFINITY, |m, v| m.max(*v));
                (ok, format!("{} fits, largest slope {worst:.6}", slopes.len()))
            }
            Expectation::BallMassBelow { radius, max } => {
                let m = ball_mass(&self.occupation()?, *radius)?;
                (m < *max, format!("mass in B(0, {radius}) = {m:.6}"))
            }
            Expectation::BallMassAbove { radius, min } => {
                let m = ball_mass(&self.occupation()?, *radius)?;
                (m > *min, format!("mass in B(0, {radius}) = {m:.6}"))
            }
            Expectation::NoCensoredHits => {
                let h = self.hitting()?;
                (
                    h.censored_count() == 0,
                    format!("{} of {} runs censored, mean time {:.4}", h.censored_count(), h.times.len(), h.mean_time()),
                )
            }
            Expectation::PartMetricContracts => {
                let c = self.coupling()?;
                let end = *c.mean.last().expect("nonempty grid");
                let ok = end < c.mean[0]
                    && c.nonexpansive_violations == 0
                    && c.log_slope.is_some_and(|v| v < 0.0);
                (
                    ok,
                    format!(
                        "mean p {:.6} -> {end:.3e}, log slope {:?}, {} violations, {} excluded",
                        c.mean[0], c.log_slope, c.nonexpansive_violations, c.excluded
                    ),
                )
            }
            Expectation::ConvergesTo { target } => {
                let e = self.ensemble()?;
                let k = e.targets.iter().position(|t| t == target).expect("collected up front");
                let slopes: Vec<std::result::Result<f64, String>> =
                    e.replicates.iter().map(|r| r.convergence[k].clone().map(|f| f.slope)).collect();
                let ok = slopes.iter().all(|s| matches!(s, Ok(v) if *v < 0.0));
                let worst = slopes.iter().filter_map(|s| s.as_ref().ok()).fold(f64::NEG_INFINITY, |m, v| m.max(*v));
                (ok, format!("{} fits, largest slope {worst:.6}", slopes.len()))
            }
        })
    }
}
