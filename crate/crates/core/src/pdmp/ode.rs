//! Classical fixed-step fourth-order Runge-Kutta.

use crate::error::{Error, Result};
use crate::vectorfields::{BoxDomain, VectorField};

/// Reusable RK4 stage buffers for a fixed dimension.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// One step of size `h` for `ẋ = f(x)`, in place.
    #[inline]
    pub fn step_with<F>(&mut self, mut f: F, x: &mut [f64], h: f64)
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let half = 0.5 * h;
        f(x, &mut self.k1);
        for ((t, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *t = xi + half * k;
        }
        f(&self.tmp, &mut self.k2);
        for ((t, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *t = xi + half * k;
        }
        f(&self.tmp, &mut self.k3);
        for ((t, &xi), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *t = xi + h * k;
        }
        f(&self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }

    #[inline]
    pub fn step<V: VectorField + ?Sized>(&mut self, field: &V, x: &mut [f64], h: f64) {
        self.step_with(|y, out| field.eval_into(y, out), x, h);
    }
}

/// Flow `Ψ_t(x0)` of `field`, fixed step `h` with a final partial step that
/// lands exactly on `t`. Every step's result is projected back onto `domain`
/// when the overshoot is within [`BoxDomain::CLAMP_TOLERANCE`]; larger
/// excursions are invariance violations.
pub fn integrate_flow<V: VectorField + ?Sized>(
    field: &V,
    domain: &BoxDomain,
    x0: &[f64],
    t: f64,
    h: f64,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("flow duration {t} must be finite and nonnegative")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step {h} must be positive")));
    }
    if x0.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: field.dim(),
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut rk = Rk4::new(field.dim());
    advance(field, domain, &mut rk, &mut x, t, h)?;
    Ok(x)
}

/// Advances `x` by duration `t` in steps of at most `h`, clamping after each.
pub(crate) fn advance<V: VectorField + ?Sized>(
    field: &V,
    domain: &BoxDomain,
    rk: &mut Rk4,
    x: &mut [f64],
    t: f64,
    h: f64,
) -> Result<()> {
    let full = (t / h).floor();
    let steps = full as u64;
    for _ in 0..steps {
        rk.step(field, x, h);
        domain.clamp(x, field)?;
    }
    let rest = t - full * h;
    if rest > 0.0 {
        rk.step(field, x, rest);
        domain.clamp(x, field)?;
    }
    Ok(())
}
