use std::sync::Arc;

use pdmp_core::experiments::lookup;
use pdmp_core::experiments::registry::{astacoins_fields, nobra_fields};
use pdmp_core::matrixcore::{part_metric, stationary_distribution, RateMatrix, SquareMatrix};
use pdmp_core::pdmp::*;
use pdmp_core::vectorfields::{BoxDomain, Field, LinearField, SwitchedFieldFamily};

fn scenario_system(name: &str) -> SwitchedSystem {
    lookup(name).unwrap().switched_system().unwrap()
}

/// Asymptotic Kolmogorov tail probability for statistic `d` at effective size `n`.
fn kolmogorov_p(d: f64, n: f64) -> f64 {
    let l = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * l * l).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let n = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    kolmogorov_p(d, n)
}

#[test]
fn same_stream_same_path() {
    let sys = scenario_system("astacoins");
    let cfg = IntegratorConfig::default();
    let a = simulate_replicate(&sys, &[0.5, 0.5], 0, 20.0, 42, 3, &cfg).unwrap();
    let b = simulate_replicate(&sys, &[0.5, 0.5], 0, 20.0, 42, 3, &cfg).unwrap();
    let c = simulate_replicate(&sys, &[0.5, 0.5], 0, 20.0, 42, 4, &cfg).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.jumps, c.jumps);
}

#[test]
fn paths_stay_in_the_cube() {
    for name in ["ainscosta", "astacoins", "ly3d", "nobra"] {
        let sys = scenario_system(name);
        let d = sys.dim();
        let cfg = IntegratorConfig::default();
        for r in 0..5 {
            let t = simulate_replicate(&sys, &vec![0.999; d], 0, 20.0, 1, r, &cfg).unwrap();
            assert!(t.states.iter().all(|v| (0.0..=1.0).contains(v)), "{name}");
            assert!(!t.truncated);
            assert_eq!(t.final_time(), 20.0);
        }
    }
}

#[test]
fn mode_occupation_matches_the_stationary_law() {
    let q = RateMatrix::from_rows(vec![
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![3.0, 0.5, 0.0],
    ])
    .unwrap();
    let p = stationary_distribution(&q).unwrap();
    let f = nobra_fields();
    let fields: Vec<Field> = [0, 1, 0].iter().map(|&i| Arc::new(f[i].clone()) as Field).collect();
    let sys = SwitchedSystem::constant(SwitchedFieldFamily::new(fields, BoxDomain::unit_cube(2)).unwrap(), q).unwrap();
    let cfg = IntegratorConfig::with_step(1e-2);
    let n = 200;
    let horizon = 50.0;
    let occ: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let t = simulate_replicate(&sys, &[0.3, 0.6], 0, horizon, 8, r, &cfg).unwrap();
            let mut o = [0.0; 3];
            for k in 0..t.len() - 1 {
                o[t.modes[k]] += t.times[k + 1] - t.times[k];
            }
            o.iter().map(|v| v / horizon).collect()
        })
        .collect();
    for i in 0..3 {
        let xs: Vec<f64> = occ.iter().map(|o| o[i]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - p.as_slice()[i]).abs() <= 3.0 * se, "mode {i}: {mean} vs {}", p.as_slice()[i]);
    }
}

#[test]
fn switching_signal_matches_the_autonomous_chain() {
    let sys = scenario_system("astacoins");
    let q = RateMatrix::from_rows(vec![vec![0.0, 3.0], vec![1.0, 0.0]]).unwrap();
    let sys = SwitchedSystem::constant(sys.family().clone(), q.clone()).unwrap();
    let cfg = IntegratorConfig::with_step(1e-2);
    let horizon = 5.0;
    let probe = 2.5;
    let mut pdmp_first = Vec::new();
    let mut chain_first = Vec::new();
    let mut pdmp_mode = 0.0;
    let mut chain_mode = 0.0;
    let n = 1000;
    for r in 0..n {
        let t = simulate_replicate(&sys, &[0.5, 0.5], 0, horizon, 17, r, &cfg).unwrap();
        pdmp_first.push(t.jumps.first().map_or(horizon, |j| j.time));
        let k = t.times.partition_point(|&s| s <= probe) - 1;
        pdmp_mode += t.modes[k] as f64;
        let c = simulate_mode_chain(&q, 0, horizon, 10_000 + r).unwrap();
        chain_first.push(c.times.get(1).copied().unwrap_or(horizon));
        chain_mode += c.mode_at(probe) as f64;
    }
    assert!(two_sample_ks(pdmp_first, chain_first) > 0.01);
    // Mode 1 at a fixed time is Bernoulli; compare both frequencies to each other.
    let (a, b) = (pdmp_mode / n as f64, chain_mode / n as f64);
    let se = (a * (1.0 - a) / n as f64 + b * (1.0 - b) / n as f64).sqrt();
    assert!((a - b).abs() <= 3.0 * se, "{a} vs {b}");
}

#[test]
fn thinning_reproduces_state_dependent_intensity() {
    let zero: Field = Arc::new(LinearField::new(SquareMatrix::zeros(1)));
    let family = SwitchedFieldFamily::new(vec![zero.clone(), zero], BoxDomain::unit_cube(1)).unwrap();
    let rates = FnRates::new(2, |x: &[f64], i: usize, out: &mut [f64]| {
        out[i] = 0.0;
        out[1 - i] = 1.0 + x[0];
    });
    let sys = SwitchedSystem::new(family, Rates::StateDependent(Arc::new(rates))).unwrap();
    assert!(sys.majorant() >= 2.0);
    let cfg = IntegratorConfig::with_step(1e-2);
    let (n, horizon, x) = (2000, 2.0, 0.5);
    let total: usize = (0..n)
        .map(|r| simulate_replicate(&sys, &[x], 0, horizon, 5, r, &cfg).unwrap().jumps.len())
        .sum();
    let mean = total as f64 / n as f64;
    let expected = (1.0 + x) * horizon;
    assert!((mean - expected).abs() <= 3.0 * (expected / n as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn one_mode_is_the_deterministic_flow() {
    let f: Field = Arc::new(astacoins_fields()[1].clone());
    let dom = BoxDomain::unit_cube(2);
    let sys = SwitchedSystem::constant(SwitchedFieldFamily::new(vec![f.clone()], dom.clone()).unwrap(), RateMatrix::single()).unwrap();
    let cfg = IntegratorConfig::with_step(1e-3);
    let t = simulate(&sys, &[0.1, 0.9], 0, 5.0, 1, &cfg).unwrap();
    assert!(t.jumps.is_empty());
    let x = integrate_flow(f.as_ref(), &dom, &[0.1, 0.9], 5.0, 1e-3).unwrap();
    for (a, b) in t.final_state().iter().zip(&x) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn common_equilibrium_attracts() {
    let sys = scenario_system("nobra");
    let cfg = IntegratorConfig::with_step(1e-2);
    for r in 0..50 {
        let t = simulate_replicate(&sys, &[0.9, 0.2], 0, 200.0, 45, r, &cfg).unwrap();
        let x = t.final_state();
        let dist = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        assert!(dist < 1e-3, "replicate {r}: {dist}");
    }
}

#[test]
fn synchronous_copies_share_the_signal() {
    let sys = scenario_system("astacoins");
    let cfg = IntegratorConfig::with_step(1e-2);
    let (a, b) = simulate_synchronous_pair(&sys, &[0.3, 0.4], &[0.3, 0.4], 0, 20.0, 3, &cfg).unwrap();
    assert_eq!(a, b);
    let x0 = [0.2, 0.7];
    let y0 = [0.6, 0.3];
    let p0 = part_metric(&x0, &y0);
    for r in 0..50 {
        let (a, b) = synchronous_pair_replicate(&sys, &x0, &y0, 0, 100.0, 9, r, &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.modes, b.modes);
        let mut prev = p0;
        for k in 0..a.len() {
            let p = part_metric(a.state(k), b.state(k));
            assert!(p <= prev + 1e-9, "replicate {r} expands at t={}", a.times[k]);
            prev = p;
        }
        assert!(prev < p0);
    }
}

#[test]
fn csv_lists_both_modes_at_each_jump() {
    let sys = scenario_system("astacoins");
    let cfg = IntegratorConfig::with_step(1e-2);
    let t = simulate(&sys, &[0.5, 0.5], 0, 2.0, 7, &cfg).unwrap();
    assert!(!t.jumps.is_empty());
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,mode,x1,x2");
    assert_eq!(lines.len(), 1 + t.len() + t.jumps.len());
    let j = t.jumps[0];
    let rows: Vec<Vec<&str>> = lines[1..]
        .iter()
        .map(|l| l.split(',').collect())
        .filter(|r: &Vec<&str>| r[0].parse::<f64>().unwrap() == j.time)
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], j.from.to_string());
    assert_eq!(rows[1][1], j.to.to_string());
    assert_eq!(rows[0][2..], rows[1][2..]);
    for r in &rows {
        assert!(r.iter().all(|v| v.parse::<f64>().is_ok()));
    }
}

#[test]
fn stopping_rule_ends_the_path() {
    let sys = scenario_system("nobra");
    let cfg = IntegratorConfig::with_step(1e-2);
    let near = |x: &[f64]| (x[0] - 0.5).abs() < 1e-2 && (x[1] - 0.5).abs() < 1e-2;
    let (t, hit) = simulate_until(&sys, &[0.9, 0.2], 0, 100.0, 45, 0, &cfg, &near).unwrap();
    let at = hit.expect("reaches the equilibrium neighbourhood");
    assert_eq!(t.final_time(), at);
    assert!(near(t.final_state()));
    let (_, hit) = simulate_until(&sys, &[0.9, 0.2], 0, 100.0, 45, 0, &cfg, &|_: &[f64]| false).unwrap();
    assert!(hit.is_none());
    let (t, hit) = simulate_until(&sys, &[0.5, 0.5], 0, 100.0, 45, 0, &cfg, &near).unwrap();
    assert_eq!(hit, Some(0.0));
    assert_eq!(t.len(), 1);
}

#[test]
fn invalid_inputs_are_rejected() {
    let sys = scenario_system("nobra");
    let cfg = IntegratorConfig::default();
    assert!(simulate(&sys, &[1.5, 0.5], 0, 1.0, 1, &cfg).is_err());
    assert!(simulate(&sys, &[0.5, 0.5], 2, 1.0, 1, &cfg).is_err());
    assert!(simulate(&sys, &[0.5], 0, 1.0, 1, &cfg).is_err());
    assert!(simulate(&sys, &[0.5, 0.5], 0, 1.0, 1, &IntegratorConfig::with_step(0.0)).is_err());
}
