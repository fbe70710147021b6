//! Floquet simulation of a qubit under strong bichromatic driving.
//!
//! The drive `H(t) = ½ω₀σ_z + Σ_j (A_j/2) cos(ω_j t + φ_j) σ_x` is solved by
//! four backends (see [`solvers`]): the counter-rotating hybridized
//! rotating-wave (CHRW) effective Hamiltonian, the rotating-wave
//! approximation, the exact two-mode Floquet matrix (GFT) and direct
//! Runge–Kutta integration. [`resonance`] locates multiphoton resonances as
//! zeros of the indicator `d` and traces them over the drive amplitude.
//!
//! ```
//! use bichroma::model::DriveParams;
//! use bichroma::solvers::chrw_averaged;
//!
//! let p = DriveParams::with_ratio(1.2, 0.5, 1.0, 0.2);
//! let avg = chrw_averaged(&p).unwrap();
//! assert!(avg.p_bar >= 0.0 && avg.p_bar <= 0.5);
//! ```

pub mod bessel;
pub mod chrw;
pub mod cli;
pub mod error;
pub mod floquet;
pub mod model;
pub mod resonance;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{DriveParams, Mat2, C64};
pub use solvers::Method;

/// Crate version recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
