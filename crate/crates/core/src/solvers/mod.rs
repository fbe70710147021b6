//! Four interchangeable backends for the driven qubit.
//!
//! * CHRW: Floquet solution of the transformed Hamiltonian, periodic in Δ.
//! * RWA: Floquet solution of the rotating-wave Hamiltonian, periodic in Δ.
//! * GFT: exact two-mode Floquet matrix in the lab frame.
//! * RK: direct fixed-step integration of the Schrödinger equation.
//!
//! The qubit always starts in `|↓⟩` at `t₀`.

mod frame;
mod gft;
mod rk;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chrw::XiMethod;
use crate::error::{Error, Result};
use crate::model::DriveParams;

pub use frame::{
    chrw_averaged, chrw_fourier_hamiltonian, chrw_transient, rwa_averaged, rwa_fourier_hamiltonian, rwa_transient,
    FloquetOptions, FrameSolution,
};
pub use gft::{
    derivative_pbar, gft_averaged, gft_averaged_with, gft_build, gft_converged, gft_evolution_operator, gft_transient,
    full_dimension, gft_transient_unchecked, largest_symmetric_truncation, GftOptions, ParityBlock, TwoModeFloquetSolution,
    GFT_DIMENSION_CAP, GFT_SCHEDULE, SCAN_TOL, SCAN_TRUNCATION,
};
pub use rk::{rk_propagate, rk_step_size, rk_transient, rk_transient_with_step, RkOutcome};

/// Backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chrw,
    Rwa,
    Gft,
    Rk,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Chrw => "chrw",
            Method::Rwa => "rwa",
            Method::Gft => "gft",
            Method::Rk => "rk",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chrw" => Ok(Method::Chrw),
            "rwa" => Ok(Method::Rwa),
            "gft" => Ok(Method::Gft),
            "rk" => Ok(Method::Rk),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

/// One solver invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRequest {
    pub params: DriveParams,
    pub method: Method,
    pub t0: f64,
    pub time_grid: Vec<f64>,
    /// Fixed single-mode truncation for CHRW/RWA.
    pub truncation: Option<usize>,
    /// Fixed `(N1, N2)` for GFT.
    pub gft_truncation: Option<(usize, usize)>,
    pub xi: XiMethod,
}

impl SolverRequest {
    pub fn new(params: DriveParams, method: Method, t0: f64, time_grid: Vec<f64>) -> Self {
        SolverRequest { params, method, t0, time_grid, truncation: None, gft_truncation: None, xi: XiMethod::Exact }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        check_grid(self.t0, &self.time_grid)
    }

    fn floquet_options(&self) -> FloquetOptions {
        FloquetOptions { truncation: self.truncation, xi: self.xi, ..FloquetOptions::default() }
    }

    /// `P(t, t₀)` on the requested grid.
    pub fn transient(&self) -> Result<ProbabilitySeries> {
        self.validate()?;
        let p = &self.params;
        match self.method {
            Method::Chrw => Ok(FrameSolution::chrw(p, &self.floquet_options())?.transient(self.t0, &self.time_grid)),
            Method::Rwa => Ok(FrameSolution::rwa(p, &self.floquet_options())?.transient(self.t0, &self.time_grid)),
            Method::Gft => {
                let sol = match self.gft_truncation {
                    Some((n1, n2)) => TwoModeFloquetSolution::new(p, n1, n2, GFT_DIMENSION_CAP)?,
                    None => gft_converged(p, &GftOptions::default())?,
                };
                sol.transient_checked(self.t0, &self.time_grid)
            }
            Method::Rk => rk_transient(p, self.t0, &self.time_grid),
        }
    }

    /// Long-time average `P̄`. RK has no averaged form.
    pub fn averaged(&self) -> Result<AveragedResult> {
        self.params.validate()?;
        let p = &self.params;
        match self.method {
            Method::Chrw => Ok(FrameSolution::chrw(p, &self.floquet_options())?.averaged()),
            Method::Rwa => Ok(FrameSolution::rwa(p, &self.floquet_options())?.averaged()),
            Method::Gft => {
                let opts = GftOptions { truncation: self.gft_truncation, ..GftOptions::default() };
                gft_averaged_with(p, &opts)
            }
            Method::Rk => Err(Error::InvalidInput("the RK backend has no time-averaged form".into())),
        }
    }
}

pub(crate) fn check_grid(t0: f64, grid: &[f64]) -> Result<()> {
    if !t0.is_finite() {
        return Err(Error::InvalidInput("t0 is not finite".into()));
    }
    if let Some(&first) = grid.first() {
        if first < t0 {
            return Err(Error::InvalidInput("time grid starts before t0".into()));
        }
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `P(t, t₀)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProbabilitySeries {
    pub fn max_deviation(&self, other: &ProbabilitySeries) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Time-averaged transition probability and the data behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedResult {
    pub method: Method,
    pub p_bar: f64,
    /// Resonance indicator with `P̄ = (1 − d²)/2`; CHRW and RWA only.
    pub d: Option<f64>,
    /// Imaginary part left over when summing `d`.
    pub d_imag: f64,
    pub quasienergies: [f64; 2],
    /// `N` for CHRW/RWA, `N1 = N2` for GFT.
    pub truncation_used: usize,
    pub dimension: usize,
    /// GFT only: `P̄` from the quasienergy-derivative form.
    pub p_bar_derivative: Option<f64>,
}
