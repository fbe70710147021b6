//! Counter-rotating hybridized rotating-wave transformation.
//!
//! The unitary `exp[−S(t)]` with `S(t) = i(Z(t)/2)σ_x` and
//! `Z(t) = Σ_j (A_j ξ_j/ω_j) sin(ω_j t + φ_j)` maps the lab Hamiltonian onto an
//! effective one whose slow part is periodic in the beat `Δ = ω₂ − ω₁`. The
//! variational parameters ξ_j are fixed by requiring the single-photon
//! counter-rotating terms to cancel.

use serde::{Deserialize, Serialize};

use crate::bessel::{j1_over_z, j1_prime, jn};
use crate::error::{Error, Result};
use crate::model::{DriveParams, C64};

const XI_TOL: f64 = 1e-13;
const XI_MAX_ITER: usize = 100;
const XI_FLOOR: f64 = 1e-12;

/// How ξ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum XiMethod {
    /// Root of the full transcendental equations.
    #[default]
    Exact,
    /// Closed-form second-order expansion in the amplitudes.
    Taylor,
}

/// Solved ξ and the renormalized couplings derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrwParams {
    pub xi1: f64,
    pub xi2: f64,
    pub z1: f64,
    pub z2: f64,
    /// `Ã₀ = ω₀J₁(z₁)J₁(z₂)`
    pub a_tilde0: f64,
    /// `Ã₁ = 2A₁(1 − ξ₁)`
    pub a_tilde1: f64,
    /// `Ã₂ = 2A₂(1 − ξ₂)`
    pub a_tilde2: f64,
    /// `δ̃₁ = ω₀J₀(z₁)J₀(z₂) − ω₁`
    pub delta_tilde1: f64,
    /// `Δ = ω₂ − ω₁`
    pub delta: f64,
    /// `φ₂ − φ₁`
    pub delta_phi21: f64,
    /// `|F₁| + |F₂|` of the defining equations at the returned ξ.
    pub residual: f64,
    pub iterations: usize,
    pub method: XiMethod,
}

/// Second-order expansion of ξ in the drive amplitudes, clipped into (0, 1).
pub fn taylor_seed(p: &DriveParams) -> (f64, f64) {
    let w0 = p.omega0;
    let s1 = w0 + p.omega1;
    let s2 = w0 + p.omega2;
    let a1s = p.a1 * p.a1;
    let a2s = p.a2 * p.a2;
    let xi1 = p.omega1 / s1 * (1.0 + w0 / (8.0 * s1.powi(3)) * (a1s + 2.0 * a2s * (s1 / s2).powi(2)));
    let xi2 = p.omega2 / s2 * (1.0 + w0 / (8.0 * s2.powi(3)) * (a2s + 2.0 * a1s * (s2 / s1).powi(2)));
    (clip(xi1), clip(xi2))
}

fn clip(x: f64) -> f64 {
    x.clamp(XI_FLOOR, 1.0 - XI_FLOOR)
}

/// `(F₁, F₂)` where `F₁ = ω₀J₁(z₁)J₀(z₂) − A₁(1−ξ₁)/2` and
/// `F₂ = ω₀J₀(z₁)J₁(z₂) − A₂(1−ξ₂)/2`.
pub fn xi_equations(p: &DriveParams, xi1: f64, xi2: f64) -> (f64, f64) {
    let z1 = p.a1 * xi1 / p.omega1;
    let z2 = p.a2 * xi2 / p.omega2;
    (
        p.omega0 * jn(1, z1) * jn(0, z2) - 0.5 * p.a1 * (1.0 - xi1),
        p.omega0 * jn(0, z1) * jn(1, z2) - 0.5 * p.a2 * (1.0 - xi2),
    )
}

pub fn xi_residual(p: &DriveParams, xi1: f64, xi2: f64) -> f64 {
    let (f1, f2) = xi_equations(p, xi1, xi2);
    f1.abs() + f2.abs()
}

/// The equations divided by `A_j`, which stay regular as `A_j → 0`.
fn scaled_equations(p: &DriveParams, xi: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (w0, w1, w2) = (p.omega0, p.omega1, p.omega2);
    let (k1, k2) = (p.a1 / w1, p.a2 / w2);
    let z1 = k1 * xi[0];
    let z2 = k2 * xi[1];
    let (j0a, j1a, j0b, j1b) = (jn(0, z1), jn(1, z1), jn(0, z2), jn(1, z2));
    let (qa, qb) = (j1_over_z(z1), j1_over_z(z2));
    let (dpa, dpb) = (j1_prime(z1), j1_prime(z2));
    // G₁ = ω₀ (ξ₁/ω₁) [J₁(z₁)/z₁] J₀(z₂) − (1 − ξ₁)/2
    let g1 = w0 * xi[0] / w1 * qa * j0b - 0.5 * (1.0 - xi[0]);
    let g2 = w0 * xi[1] / w2 * qb * j0a - 0.5 * (1.0 - xi[1]);
    // d/dξ₁ of (ξ₁/ω₁)J₁(z₁)/z₁ = J₁'(z₁)/ω₁ ... since (ξ₁/ω₁)/z₁ = 1/A₁
    let jac = [
        [w0 / w1 * dpa * j0b + 0.5, -w0 * xi[0] / w1 * qa * j1b * k2],
        [-w0 * xi[1] / w2 * qb * j1a * k1, w0 / w2 * dpb * j0a + 0.5],
    ];
    ([g1, g2], jac)
}

/// Solve the ξ equations with the default (exact) method.
pub fn solve_xi(p: &DriveParams) -> Result<ChrwParams> {
    solve_xi_with(p, XiMethod::Exact)
}

pub fn solve_xi_with(p: &DriveParams, method: XiMethod) -> Result<ChrwParams> {
    let p = p.validate()?;
    let seed = taylor_seed(&p);
    match method {
        XiMethod::Taylor => Ok(from_xi(&p, seed.0, seed.1, 0, method)),
        XiMethod::Exact => {
            let (xi, iterations) = newton(&p, seed)?;
            Ok(from_xi(&p, xi[0], xi[1], iterations, method))
        }
    }
}

fn newton(p: &DriveParams, seed: (f64, f64)) -> Result<([f64; 2], usize)> {
    let limit1 = p.omega1 / (p.omega0 + p.omega1);
    let limit2 = p.omega2 / (p.omega0 + p.omega2);
    let active = [p.a1 > 0.0, p.a2 > 0.0];
    let mut xi = [
        if active[0] { seed.0 } else { limit1 },
        if active[1] { seed.1 } else { limit2 },
    ];
    let scaled_norm = |xi: [f64; 2]| {
        let (g, _) = scaled_equations(p, xi);
        (if active[0] { g[0].abs() } else { 0.0 }) + (if active[1] { g[1].abs() } else { 0.0 })
    };
    let target = XI_TOL * p.omega0.max(1e-300);
    let mut norm = scaled_norm(xi);
    for it in 0..XI_MAX_ITER {
        if xi_residual(p, xi[0], xi[1]) <= target || norm == 0.0 {
            return Ok((xi, it));
        }
        let (g, jac) = scaled_equations(p, xi);
        let step = match active {
            [true, true] => {
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det == 0.0 || !det.is_finite() {
                    break;
                }
                [
                    (jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
                    (jac[0][0] * g[1] - jac[1][0] * g[0]) / det,
                ]
            }
            [true, false] => [g[0] / jac[0][0], 0.0],
            [false, true] => [0.0, g[1] / jac[1][1]],
            [false, false] => return Ok((xi, it)),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [xi[0] - lambda * step[0], xi[1] - lambda * step[1]];
            let inside = trial.iter().all(|&x| x > 0.0 && x < 1.0);
            if inside {
                let n = scaled_norm(trial);
                if n < norm || lambda < 1e-6 {
                    xi = trial;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // At the floating-point floor the line search cannot improve further.
            let res = xi_residual(p, xi[0], xi[1]);
            if res <= 1e-12 * p.omega0 {
                return Ok((xi, it));
            }
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
    }
    let res = xi_residual(p, xi[0], xi[1]);
    if res <= 1e-12 * p.omega0 {
        Ok((xi, XI_MAX_ITER))
    } else {
        Err(Error::NoConvergence { iterations: XI_MAX_ITER, residual: res })
    }
}

/// Build all renormalized quantities from given ξ values.
pub fn from_xi(p: &DriveParams, xi1: f64, xi2: f64, iterations: usize, method: XiMethod) -> ChrwParams {
    let z1 = p.a1 * xi1 / p.omega1;
    let z2 = p.a2 * xi2 / p.omega2;
    let (j0a, j1a, j0b, j1b) = (jn(0, z1), jn(1, z1), jn(0, z2), jn(1, z2));
    ChrwParams {
        xi1,
        xi2,
        z1,
        z2,
        a_tilde0: p.omega0 * j1a * j1b,
        a_tilde1: 2.0 * p.a1 * (1.0 - xi1),
        a_tilde2: 2.0 * p.a2 * (1.0 - xi2),
        delta_tilde1: p.omega0 * j0a * j0b - p.omega1,
        delta: p.beat(),
        delta_phi21: p.phase_difference(),
        residual: xi_residual(p, xi1, xi2),
        iterations,
        method,
    }
}

/// Weights of the back transformation `e^{−S(t)} R†(t)` on the spin operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackTransform {
    pub f_z: f64,
    pub f_plus: C64,
    pub f_minus: C64,
}

/// `Z(t) = z₁ sin(ω₁t + φ₁) + z₂ sin(ω₂t + φ₂)`.
pub fn z_phase(p: &DriveParams, c: &ChrwParams, t: f64) -> f64 {
    c.z1 * (p.omega1 * t + p.phi1).sin() + c.z2 * (p.omega2 * t + p.phi2).sin()
}

/// `f_z = cos Z(t)`, `f_± = ∓ i sin Z(t) e^{±i(ω₁t+φ₁)}`.
pub fn back_transform_weights(p: &DriveParams, c: &ChrwParams, t: f64) -> BackTransform {
    let z = z_phase(p, c, t);
    let (s, co) = z.sin_cos();
    let rot = C64::from_polar(1.0, p.omega1 * t + p.phi1);
    BackTransform {
        f_z: co,
        f_plus: C64::new(0.0, -s) * rot,
        f_minus: C64::new(0.0, s) * rot.conj(),
    }
}

/// Largest coefficient, in units of ω₀, among the fast terms dropped from the
/// effective Hamiltonian with Bessel-index sum up to `max_order`.
///
/// Those terms carry `ω₀ J_a(z₁) J_b(z₂)` for every `a, b ≥ 0` with
/// `2 ≤ a + b`; only the slow `(1,1)` difference-frequency term is kept in the
/// dynamics, its sum-frequency partner is dropped and counted here.
pub fn h2_residual_diagnostic(_p: &DriveParams, c: &ChrwParams, max_order: usize) -> f64 {
    let ja = crate::bessel::orders(max_order, c.z1);
    let jb = crate::bessel::orders(max_order, c.z2);
    let mut worst = 0.0f64;
    for a in 0..=max_order {
        for b in 0..=(max_order - a) {
            if a + b >= 2 {
                worst = worst.max((ja[a] * jb[b]).abs());
            }
        }
    }
    worst
}
