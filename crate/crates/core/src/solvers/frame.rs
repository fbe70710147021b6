//! CHRW and RWA backends: Floquet solutions in the frame rotating at ω₁.

use serde::{Deserialize, Serialize};

use super::{AveragedResult, Method, ProbabilitySeries};
use crate::bessel::jn;
use crate::chrw::{solve_xi_with, z_phase, ChrwParams, XiMethod};
use crate::error::Result;
use crate::floquet::{converge_truncation, default_tolerance, solve, FloquetSolution, FourierHamiltonian};
use crate::model::{DriveParams, Mat2, C64, PAULI};

const BESSEL_CUTOFF: f64 = 1e-14;

/// Truncation control for the single-mode Floquet backends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetOptions {
    /// Fixed truncation; when absent the convergence schedule is used.
    pub truncation: Option<usize>,
    /// Convergence tolerance; defaults to `1e-10·max(|Δ|, ω₀)`.
    pub tol: Option<f64>,
    pub n_start: usize,
    pub n_max: usize,
    pub xi: XiMethod,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        FloquetOptions { truncation: None, tol: None, n_start: 8, n_max: 300, xi: XiMethod::Exact }
    }
}

/// `H^{(0)} = ½δ̃₁σ_z + (Ã₁/4)σ_x`, `H^{(1)} = ¼(Ã₂σ₋ − 2Ã₀σ_z)e^{iδφ₂₁}`, base frequency Δ.
pub fn chrw_fourier_hamiltonian(p: &DriveParams, c: &ChrwParams) -> Result<FourierHamiltonian> {
    let h0 = PAULI.sigma_z.scale_re(0.5 * c.delta_tilde1) + PAULI.sigma_x.scale_re(0.25 * c.a_tilde1);
    let h1 = (PAULI.sigma_minus.scale_re(c.a_tilde2) - PAULI.sigma_z.scale_re(2.0 * c.a_tilde0))
        .scale(C64::from_polar(0.25, c.delta_phi21));
    FourierHamiltonian::new(p.beat(), h0, &[(1, h1)])
}

/// `H^{(0)} = ½(ω₀−ω₁)σ_z + (A₁/4)σ_x`, `H^{(1)} = (A₂/4)σ₋e^{iδφ₂₁}`, base frequency Δ.
pub fn rwa_fourier_hamiltonian(p: &DriveParams) -> Result<FourierHamiltonian> {
    let h0 = PAULI.sigma_z.scale_re(0.5 * (p.omega0 - p.omega1)) + PAULI.sigma_x.scale_re(0.25 * p.a1);
    let h1 = PAULI.sigma_minus.scale(C64::from_polar(0.25 * p.a2, p.phase_difference()));
    FourierHamiltonian::new(p.beat(), h0, &[(1, h1)])
}

/// A solved rotating-frame problem together with what is needed to return to
/// the lab frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSolution {
    pub method: Method,
    pub params: DriveParams,
    /// Present for CHRW; RWA has no transformation.
    pub chrw: Option<ChrwParams>,
    pub floquet: FloquetSolution,
}

fn floquet_for(ham: &FourierHamiltonian, p: &DriveParams, opts: &FloquetOptions) -> Result<FloquetSolution> {
    match opts.truncation {
        Some(n) => solve(ham, n),
        None => {
            let tol = opts.tol.unwrap_or_else(|| default_tolerance(ham.base_frequency(), p.omega0));
            converge_truncation(ham, tol, opts.n_start, opts.n_max)
        }
    }
}

impl FrameSolution {
    pub fn chrw(p: &DriveParams, opts: &FloquetOptions) -> Result<Self> {
        let c = solve_xi_with(p, opts.xi)?;
        let ham = chrw_fourier_hamiltonian(p, &c)?;
        let floquet = floquet_for(&ham, p, opts)?;
        Ok(FrameSolution { method: Method::Chrw, params: *p, chrw: Some(c), floquet })
    }

    pub fn rwa(p: &DriveParams, opts: &FloquetOptions) -> Result<Self> {
        let p = p.validate()?;
        let ham = rwa_fourier_hamiltonian(&p)?;
        let floquet = floquet_for(&ham, &p, opts)?;
        Ok(FrameSolution { method: Method::Rwa, params: p, chrw: None, floquet })
    }

    pub fn new(method: Method, p: &DriveParams, opts: &FloquetOptions) -> Result<Self> {
        match method {
            Method::Rwa => FrameSolution::rwa(p, opts),
            _ => FrameSolution::chrw(p, opts),
        }
    }

    fn z_of(&self, t: f64) -> f64 {
        self.chrw.as_ref().map_or(0.0, |c| z_phase(&self.params, c, t))
    }

    /// Lab-frame `U(t,t₀) = e^{−S(t)} R†(t) Ũ(t,t₀) R(t₀) e^{S(t₀)}`.
    pub fn evolution_operator(&self, t: f64, t0: f64) -> Mat2 {
        let p = &self.params;
        let u = self.floquet.evolution_operator(t, t0);
        let rot_t = Mat2::rotation_z(-(p.omega1 * t + p.phi1));
        let rot_t0 = Mat2::rotation_z(p.omega1 * t0 + p.phi1);
        Mat2::exp_sigma_x(0.5 * self.z_of(t)) * rot_t * u * rot_t0 * Mat2::exp_sigma_x(-0.5 * self.z_of(t0))
    }

    /// `|⟨↑|U(t,t₀)|↓⟩|²`.
    pub fn transition_probability(&self, t: f64, t0: f64) -> f64 {
        self.evolution_operator(t, t0).get(0, 1).norm_sqr()
    }

    pub fn transient(&self, t0: f64, grid: &[f64]) -> ProbabilitySeries {
        ProbabilitySeries {
            times: grid.to_vec(),
            values: grid.iter().map(|&t| self.transition_probability(t, t0)).collect(),
        }
    }

    /// The resonance indicator `d` as a complex accumulator; its imaginary part
    /// should vanish.
    pub fn indicator(&self) -> C64 {
        let (z1, z2) = self.chrw.as_ref().map_or((0.0, 0.0), |c| (c.z1, c.z2));
        let dphi = self.params.phase_difference();
        let sol = &self.floquet;
        let reach = 2 * sol.truncation as i64;
        let xz = |n: i64| sol.harmonic_expectation(0, &PAULI.sigma_z, n);
        let xp = |n: i64| sol.harmonic_expectation(0, &PAULI.sigma_plus, n);
        let xm = |n: i64| sol.harmonic_expectation(0, &PAULI.sigma_minus, n);
        let mut d = C64::new(0.0, 0.0);
        let zmax = z1.max(z2);
        for k in 0..=reach {
            let mut small = true;
            for n in if k == 0 { vec![0] } else { vec![k, -k] } {
                let w0 = jn(n as i32, z1) * jn(-n as i32, z2);
                let w1 = jn(n as i32 + 1, z1) * jn(-n as i32, z2);
                if w0.abs() >= BESSEL_CUTOFF || w1.abs() >= BESSEL_CUTOFF {
                    small = false;
                }
                let ph = C64::from_polar(1.0, -(n as f64) * dphi);
                if w0 != 0.0 {
                    d += ph * w0 * xz(n);
                }
                if w1 != 0.0 {
                    d += w1 * (ph.conj() * xp(-n) + ph * xm(n));
                }
            }
            if small && k as f64 > zmax + 1.0 {
                break;
            }
        }
        d
    }

    pub fn averaged(&self) -> AveragedResult {
        let d = self.indicator();
        AveragedResult {
            method: self.method,
            p_bar: 0.5 * (1.0 - d.re * d.re),
            d: Some(d.re),
            d_imag: d.im,
            quasienergies: self.floquet.quasienergies,
            truncation_used: self.floquet.truncation,
            dimension: self.floquet.dimension(),
            p_bar_derivative: None,
        }
    }
}

pub fn chrw_transient(p: &DriveParams, t0: f64, grid: &[f64]) -> Result<ProbabilitySeries> {
    super::check_grid(t0, grid)?;
    Ok(FrameSolution::chrw(p, &FloquetOptions::default())?.transient(t0, grid))
}

pub fn chrw_averaged(p: &DriveParams) -> Result<AveragedResult> {
    Ok(FrameSolution::chrw(p, &FloquetOptions::default())?.averaged())
}

pub fn rwa_transient(p: &DriveParams, t0: f64, grid: &[f64]) -> Result<ProbabilitySeries> {
    super::check_grid(t0, grid)?;
    Ok(FrameSolution::rwa(p, &FloquetOptions::default())?.transient(t0, grid))
}

pub fn rwa_averaged(p: &DriveParams) -> Result<AveragedResult> {
    Ok(FrameSolution::rwa(p, &FloquetOptions::default())?.averaged())
}
