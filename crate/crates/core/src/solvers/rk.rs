//! Fixed-step classical fourth-order Runge–Kutta for `i∂ₜψ = H(t)ψ`.

use std::f64::consts::PI;

use super::{check_grid, ProbabilitySeries};
use crate::error::{Error, Result};
use crate::model::{DriveParams, Mat2, C64};

const DRIFT_LIMIT: f64 = 1e-6;
const MAX_HALVINGS: u32 = 4;

/// `h = 2π / (200·max(ω₀, ω₁, ω₂, A₁, A₂))`.
pub fn rk_step_size(p: &DriveParams) -> f64 {
    2.0 * PI / (200.0 * p.max_scale())
}

/// Result of one fixed-step integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RkOutcome {
    pub series: ProbabilitySeries,
    pub step: f64,
    /// Largest `|‖ψ‖² − 1|` seen on the grid.
    pub drift: f64,
}

type Rhs<'a> = dyn Fn(f64) -> Mat2 + 'a;

fn deriv(h: &Mat2, v: [C64; 2]) -> [C64; 2] {
    let hv = h.apply(v);
    let mi = C64::new(0.0, -1.0);
    [mi * hv[0], mi * hv[1]]
}

fn axpy(v: [C64; 2], a: f64, k: [C64; 2]) -> [C64; 2] {
    [v[0] + k[0] * a, v[1] + k[1] * a]
}

fn rk4_step(ham: &Rhs, t: f64, dt: f64, v: [C64; 2]) -> [C64; 2] {
    let mid = ham(t + 0.5 * dt);
    let k1 = deriv(&ham(t), v);
    let k2 = deriv(&mid, axpy(v, 0.5 * dt, k1));
    let k3 = deriv(&mid, axpy(v, 0.5 * dt, k2));
    let k4 = deriv(&ham(t + dt), axpy(v, dt, k3));
    [
        v[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (dt / 6.0),
        v[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (dt / 6.0),
    ]
}

/// Advance `v` from `t` to `t_end` in equal sub-steps no longer than `h`.
fn advance(ham: &Rhs, t: f64, t_end: f64, h: f64, mut v: [C64; 2]) -> [C64; 2] {
    let span = t_end - t;
    if span <= 0.0 {
        return v;
    }
    let steps = (span / h).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    for k in 0..steps {
        v = rk4_step(ham, t + k as f64 * dt, dt, v);
    }
    v
}

/// Propagate both basis states from `t0` to `t` under `ham` with step at most `h`.
pub fn rk_propagate(ham: &dyn Fn(f64) -> Mat2, t0: f64, t: f64, h: f64) -> Mat2 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let a = advance(ham, t0, t, h, [one, zero]);
    let b = advance(ham, t0, t, h, [zero, one]);
    Mat2::new([[a[0], b[0]], [a[1], b[1]]])
}

/// Integrate from `|↓⟩` at `t₀` with a given maximal step.
pub fn rk_transient_with_step(p: &DriveParams, t0: f64, grid: &[f64], h: f64) -> RkOutcome {
    let ham = |t: f64| p.hamiltonian(t);
    let mut v = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let mut t = t0;
    let mut values = Vec::with_capacity(grid.len());
    let mut drift = 0.0f64;
    for &tg in grid {
        v = advance(&ham, t, tg, h, v);
        t = tg;
        drift = drift.max((v[0].norm_sqr() + v[1].norm_sqr() - 1.0).abs());
        values.push(v[0].norm_sqr());
    }
    RkOutcome { series: ProbabilitySeries { times: grid.to_vec(), values }, step: h, drift }
}

/// `P(t,t₀)` by direct integration; the step is halved up to four times while
/// the norm drifts by more than 1e-6.
pub fn rk_transient(p: &DriveParams, t0: f64, grid: &[f64]) -> Result<ProbabilitySeries> {
    let p = p.validate()?;
    check_grid(t0, grid)?;
    let mut h = rk_step_size(&p);
    let mut drift = 0.0;
    for _ in 0..=MAX_HALVINGS {
        let out = rk_transient_with_step(&p, t0, grid, h);
        if out.drift <= DRIFT_LIMIT {
            return Ok(out.series);
        }
        drift = out.drift;
        h *= 0.5;
    }
    Err(Error::StepTooLarge { drift })
}
