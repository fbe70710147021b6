//! Exact two-mode Floquet backend.
//!
//! The lab Hamiltonian expands as `H(t) = Σ H^{(n,m)} e^{i(nθ₁+mθ₂)}` with
//! `θ_j = ω_j t + φ_j`. In the basis `|s, n, m⟩` the Floquet matrix has
//! diagonal `½ω₀σ_z + nω₁ + mω₂` and `σ_x` couplings `A_j/4` between
//! neighbouring harmonics of mode j. Because `σ_x` flips the spin while moving
//! one harmonic, the parity of `s + n + m` is conserved, and the phases φ_j
//! are a diagonal gauge. Every solve therefore works on one real symmetric
//! parity block of dimension `(2N1+1)(2N2+1)`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{check_grid, AveragedResult, Method, ProbabilitySeries};
use crate::error::{Error, Result};
use crate::floquet::diagonalize_real;
use crate::model::{ComplexMatrix, DriveParams, Mat2, C64};

/// Symmetric truncations `N1 = N2` tried by [`gft_converged`].
pub const GFT_SCHEDULE: [usize; 7] = [6, 9, 14, 21, 31, 47, 70];
/// Largest full matrix dimension `2(2N1+1)(2N2+1)` the backend accepts.
pub const GFT_DIMENSION_CAP: usize = 20_000;
/// Largest per-mode truncation used for `P̄` scans and band maps.
pub const SCAN_TRUNCATION: usize = 31;
/// `P̄` convergence tolerance for scans and band maps.
pub const SCAN_TOL: f64 = 1e-5;

const FD_STEP: f64 = 1e-5;
const SKIP_AMPLITUDE: f64 = 1e-14;

/// Full dimension `2(2N1+1)(2N2+1)`.
pub fn full_dimension(n1: usize, n2: usize) -> usize {
    2 * (2 * n1 + 1) * (2 * n2 + 1)
}

/// Largest `N` with `2(2N+1)² ≤ cap`.
pub fn largest_symmetric_truncation(cap: usize) -> usize {
    let mut n = 0;
    while full_dimension(n + 1, n + 1) <= cap {
        n += 1;
    }
    n
}

/// The full complex two-mode Floquet matrix, basis index
/// `((n+N1)(2N2+1) + (m+N2))·2 + s`.
pub fn gft_build(p: &DriveParams, n1: usize, n2: usize) -> Result<ComplexMatrix> {
    gft_build_capped(p, n1, n2, GFT_DIMENSION_CAP)
}

pub fn gft_build_capped(p: &DriveParams, n1: usize, n2: usize, cap: usize) -> Result<ComplexMatrix> {
    let p = p.validate()?;
    if n1 < 1 || n2 < 1 {
        return Err(Error::TruncationTooSmall { n: n1.min(n2), needed: 1 });
    }
    let dim = full_dimension(n1, n2);
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let w2 = 2 * n2 + 1;
    let idx = |n: i64, m: i64, s: usize| (((n + n1 as i64) as usize * w2) + (m + n2 as i64) as usize) * 2 + s;
    let mut h = ComplexMatrix::zeros(dim);
    let c1 = C64::from_polar(0.25 * p.a1, p.phi1);
    let c2 = C64::from_polar(0.25 * p.a2, p.phi2);
    let (r1, r2) = (n1 as i64, n2 as i64);
    for n in -r1..=r1 {
        for m in -r2..=r2 {
            let shift = n as f64 * p.omega1 + m as f64 * p.omega2;
            h.set(idx(n, m, 0), idx(n, m, 0), C64::new(0.5 * p.omega0 + shift, 0.0));
            h.set(idx(n, m, 1), idx(n, m, 1), C64::new(-0.5 * p.omega0 + shift, 0.0));
            for s in 0..2 {
                // row (n, m) couples to (n−1, m) through H^{(1,0)} = (A₁/4)e^{iφ₁}σ_x
                if n > -r1 {
                    h.set(idx(n, m, s), idx(n - 1, m, 1 - s), c1);
                    h.set(idx(n - 1, m, 1 - s), idx(n, m, s), c1.conj());
                }
                if m > -r2 {
                    h.set(idx(n, m, s), idx(n, m - 1, 1 - s), c2);
                    h.set(idx(n, m - 1, 1 - s), idx(n, m, s), c2.conj());
                }
            }
        }
    }
    Ok(h)
}

/// Eigendecomposition of one spin-parity block of the phase-free matrix.
///
/// Block members are `(n, m)` pairs with spin fixed by
/// `s ≡ parity + n + m (mod 2)`; `parity = 1` holds `|↓,0,0⟩`.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub n1: usize,
    pub n2: usize,
    pub parity: u8,
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    vectors: Mat<f64>,
}

impl ParityBlock {
    pub fn new(p: &DriveParams, n1: usize, n2: usize, parity: u8) -> Result<Self> {
        let w2 = 2 * n2 + 1;
        let dim = (2 * n1 + 1) * w2;
        let decode = |i: usize| ((i / w2) as i64 - n1 as i64, (i % w2) as i64 - n2 as i64);
        let (h1, h2) = (0.25 * p.a1, 0.25 * p.a2);
        let entry = |i: usize, j: usize| {
            let (n, m) = decode(i);
            let (k, l) = decode(j);
            if i == j {
                let up = (parity as i64 + n + m).rem_euclid(2) == 0;
                let sz = if up { 0.5 * p.omega0 } else { -0.5 * p.omega0 };
                sz + n as f64 * p.omega1 + m as f64 * p.omega2
            } else if m == l && (n - k).abs() == 1 {
                h1
            } else if n == k && (m - l).abs() == 1 {
                h2
            } else {
                0.0
            }
        };
        let (values, vectors) = diagonalize_real(dim, entry)?;
        Ok(ParityBlock { n1, n2, parity, values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn index(&self, n: i64, m: i64) -> usize {
        (n + self.n1 as i64) as usize * (2 * self.n2 + 1) + (m + self.n2 as i64) as usize
    }

    pub fn harmonics(&self, i: usize) -> (i64, i64) {
        let w2 = 2 * self.n2 + 1;
        ((i / w2) as i64 - self.n1 as i64, (i % w2) as i64 - self.n2 as i64)
    }

    /// Spin of block member `i`: 0 for `|↑⟩`, 1 for `|↓⟩`.
    pub fn spin(&self, i: usize) -> usize {
        let (n, m) = self.harmonics(i);
        if (self.parity as i64 + n + m).rem_euclid(2) == 0 {
            0
        } else {
            1
        }
    }

    pub fn vector_entry(&self, i: usize, j: usize) -> f64 {
        self.vectors[(i, j)]
    }

    /// Weight of eigenvector `j` on spin-up members.
    pub fn up_weight(&self, j: usize) -> f64 {
        (0..self.dim()).filter(|&i| self.spin(i) == 0).map(|i| self.vectors[(i, j)].powi(2)).sum()
    }

    /// Amplitudes `(⟨↑|ψ(t)⟩, ⟨↓|ψ(t)⟩)` of the state starting at harmonic
    /// origin `(0,0)` of this block at `t₀`.
    ///
    /// `ψ_s(t) = Σ_{k,l} e^{i(kθ₁(t)+lθ₂(t))} ⟨s,k,l| e^{−iℋ₀(t−t₀)} |origin⟩`
    /// with `ℋ₀` the phase-free matrix.
    pub fn amplitudes(&self, p: &DriveParams, t0: f64, grid: &[f64]) -> Vec<[C64; 2]> {
        let dim = self.dim();
        let origin = self.index(0, 0);
        let active: Vec<usize> =
            (0..dim).filter(|&j| self.vectors[(origin, j)].abs() >= SKIP_AMPLITUDE).collect();
        let harm: Vec<(i64, i64, usize)> = (0..dim).map(|i| {
            let (n, m) = self.harmonics(i);
            (n, m, self.spin(i))
        }).collect();
        let mut out = Vec::with_capacity(grid.len());
        let mut weights = vec![C64::new(0.0, 0.0); active.len()];
        let mut comp = vec![C64::new(0.0, 0.0); dim];
        for &t in grid {
            let tau = t - t0;
            for (w, &j) in weights.iter_mut().zip(&active) {
                *w = C64::from_polar(self.vectors[(origin, j)], -self.values[j] * tau);
            }
            for (i, c) in comp.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (w, &j) in weights.iter().zip(&active) {
                    acc += w * self.vectors[(i, j)];
                }
                *c = acc;
            }
            let (th1, th2) = (p.omega1 * t + p.phi1, p.omega2 * t + p.phi2);
            let mut psi = [C64::new(0.0, 0.0); 2];
            for (i, c) in comp.iter().enumerate() {
                let (n, m, s) = harm[i];
                psi[s] += c * C64::from_polar(1.0, n as f64 * th1 + m as f64 * th2);
            }
            out.push(psi);
        }
        out
    }
}

/// The solved `|↓,0,0⟩` parity block.
#[derive(Debug, Clone)]
pub struct TwoModeFloquetSolution {
    pub params: DriveParams,
    pub n1: usize,
    pub n2: usize,
    pub block: ParityBlock,
}

impl TwoModeFloquetSolution {
    pub fn new(p: &DriveParams, n1: usize, n2: usize, cap: usize) -> Result<Self> {
        let p = p.validate()?;
        if n1 < 1 || n2 < 1 {
            return Err(Error::TruncationTooSmall { n: n1.min(n2), needed: 1 });
        }
        let dim = full_dimension(n1, n2);
        if dim > cap {
            return Err(Error::DimensionOverflow { dim, cap });
        }
        Ok(TwoModeFloquetSolution { params: p, n1, n2, block: ParityBlock::new(&p, n1, n2, 1)? })
    }

    /// Full matrix dimension this solution stands for.
    pub fn dimension(&self) -> usize {
        full_dimension(self.n1, self.n2)
    }

    /// All block eigenvalues (quasienergies, unfolded), ascending.
    pub fn quasienergies(&self) -> &[f64] {
        &self.block.values
    }

    /// Eigenvector with the largest weight on `|↓,0,0⟩`.
    pub fn representative(&self) -> usize {
        let o = self.block.index(0, 0);
        (0..self.block.dim())
            .max_by(|&a, &b| {
                self.block.vector_entry(o, a).abs().total_cmp(&self.block.vector_entry(o, b).abs())
            })
            .unwrap_or(0)
    }

    /// `(ε, −ε)` for the representative; the opposite parity block is the
    /// negated mirror image of this one, so its representative sits at `−ε`.
    pub fn quasienergy_pair(&self) -> [f64; 2] {
        let e = self.block.values[self.representative()];
        [e, -e]
    }

    /// Coefficient `⟨s,n,m|u_j⟩` of eigenvector `j` in the phased basis.
    pub fn coefficient(&self, j: usize, n: i64, m: i64, s: usize) -> C64 {
        if n.unsigned_abs() as usize > self.n1 || m.unsigned_abs() as usize > self.n2 {
            return C64::new(0.0, 0.0);
        }
        let i = self.block.index(n, m);
        if self.block.spin(i) != s {
            return C64::new(0.0, 0.0);
        }
        let p = &self.params;
        C64::from_polar(self.block.vector_entry(i, j), n as f64 * p.phi1 + m as f64 * p.phi2)
    }

    /// `P̄ = Σ_j |⟨↓,0,0|u_j⟩|² w↑_j`.
    pub fn pbar_projection(&self) -> f64 {
        let o = self.block.index(0, 0);
        (0..self.block.dim())
            .map(|j| {
                let a = self.block.vector_entry(o, j).powi(2);
                if a < SKIP_AMPLITUDE * SKIP_AMPLITUDE {
                    0.0
                } else {
                    a * self.block.up_weight(j)
                }
            })
            .sum()
    }

    /// Transition probabilities and the largest deviation of `|ψ↑|² + |ψ↓|²`
    /// from one.
    pub fn transient_unchecked(&self, t0: f64, grid: &[f64]) -> (ProbabilitySeries, f64) {
        let amps = self.block.amplitudes(&self.params, t0, grid);
        let defect = amps
            .iter()
            .map(|a| (a[0].norm_sqr() + a[1].norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        let values = amps.iter().map(|a| a[0].norm_sqr()).collect();
        (ProbabilitySeries { times: grid.to_vec(), values }, defect)
    }

    pub fn transient_checked(&self, t0: f64, grid: &[f64]) -> Result<ProbabilitySeries> {
        check_grid(t0, grid)?;
        let (series, defect) = self.transient_unchecked(t0, grid);
        if defect > 1e-6 {
            return Err(Error::NoTruncationConvergence { n_max: self.n1.max(self.n2), change: defect });
        }
        Ok(series)
    }
}

/// Truncation control for the GFT backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GftOptions {
    /// Fixed `(N1, N2)`; when absent the symmetric schedule is used.
    pub truncation: Option<(usize, usize)>,
    pub tol: f64,
    pub cap: usize,
    /// Run the finite-difference derivative cross-check.
    pub cross_check: bool,
    pub cross_check_tol: f64,
    /// Largest `|‖ψ(t)‖² − 1|` accepted over [`NORM_PROBE_BEATS`] beat
    /// periods; infinite to skip the probe.
    pub norm_tol: f64,
    /// Return the largest schedule truncation under `cap` instead of
    /// failing when `tol` is never met.
    pub accept_at_cap: bool,
}

/// Beat periods spanned by the norm probe of [`gft_converged`].
pub const NORM_PROBE_BEATS: f64 = 8.0;
const NORM_PROBE_POINTS: usize = 64;

impl Default for GftOptions {
    fn default() -> Self {
        GftOptions {
            truncation: None,
            tol: 1e-8,
            cap: GFT_DIMENSION_CAP,
            cross_check: true,
            cross_check_tol: 1e-4,
            norm_tol: 1e-10,
            accept_at_cap: false,
        }
    }
}

impl GftOptions {
    /// Settings for dense `P̄` scans: truncation at most [`SCAN_TRUNCATION`]
    /// per mode, tolerance [`SCAN_TOL`], no derivative cross-check.
    pub fn scan() -> Self {
        GftOptions {
            truncation: None,
            tol: SCAN_TOL,
            cap: full_dimension(SCAN_TRUNCATION, SCAN_TRUNCATION),
            cross_check: false,
            cross_check_tol: 1e-4,
            norm_tol: f64::INFINITY,
            accept_at_cap: false,
        }
    }
}

/// Grow `N1 = N2` through [`GFT_SCHEDULE`] until the representative
/// quasienergy and `P̄` both change by less than `tol` and the state norm
/// stays within `norm_tol` of one over a probe window; returns the larger
/// truncation of the agreeing pair.
pub fn gft_converged(p: &DriveParams, opts: &GftOptions) -> Result<TwoModeFloquetSolution> {
    if let Some((n1, n2)) = opts.truncation {
        return TwoModeFloquetSolution::new(p, n1, n2, opts.cap);
    }
    let mut prev: Option<(TwoModeFloquetSolution, f64)> = None;
    let mut change = f64::INFINITY;
    let mut last_n = 0;
    for &n in GFT_SCHEDULE.iter() {
        if full_dimension(n, n) > opts.cap {
            if prev.is_none() {
                return Err(Error::DimensionOverflow { dim: full_dimension(n, n), cap: opts.cap });
            }
            break;
        }
        last_n = n;
        let sol = TwoModeFloquetSolution::new(p, n, n, opts.cap)?;
        let pbar = sol.pbar_projection();
        if let Some((old, old_pbar)) = &prev {
            let e = sol.block.values[sol.representative()];
            let o = old.block.index(0, 0);
            // compare against the two eigenvalues of the old solution carrying
            // the most |↓,0,0⟩ weight, since near resonance they share it evenly
            let mut ranked: Vec<usize> = (0..old.block.dim()).collect();
            ranked.sort_by(|&a, &b| {
                old.block.vector_entry(o, b).abs().total_cmp(&old.block.vector_entry(o, a).abs())
            });
            let de = ranked.iter().take(2).map(|&j| (old.block.values[j] - e).abs()).fold(f64::INFINITY, f64::min);
            change = de.max((pbar - old_pbar).abs());
            if change < opts.tol && norm_defect(&sol) <= opts.norm_tol {
                return Ok(sol);
            }
        }
        prev = Some((sol, pbar));
    }
    match prev {
        Some((sol, _)) if opts.accept_at_cap => Ok(sol),
        _ => Err(Error::NoTruncationConvergence { n_max: last_n, change }),
    }
}

fn norm_defect(sol: &TwoModeFloquetSolution) -> f64 {
    let span = NORM_PROBE_BEATS * 2.0 * std::f64::consts::PI / sol.params.beat().abs();
    let grid: Vec<f64> = (0..NORM_PROBE_POINTS).map(|k| span * k as f64 / (NORM_PROBE_POINTS - 1) as f64).collect();
    sol.transient_unchecked(0.0, &grid).1
}

/// `P̄` from `½[1 − 4(∂ε/∂ω₀)²]`, the derivative taken by central
/// difference while following the representative eigenvector by overlap.
pub fn derivative_pbar(sol: &TwoModeFloquetSolution) -> Result<f64> {
    let rep = sol.representative();
    let dim = sol.block.dim();
    let mut slopes = [0.0; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let q = sol.params.with_omega0(sol.params.omega0 + sign * FD_STEP);
        let b = ParityBlock::new(&q, sol.n1, sol.n2, 1)?;
        let best = (0..dim)
            .map(|j| {
                let ov: f64 = (0..dim).map(|i| b.vector_entry(i, j) * sol.block.vector_entry(i, rep)).sum();
                (ov.abs(), j)
            })
            .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
        slopes[k] = b.values[best.1];
    }
    let de = (slopes[0] - slopes[1]) / (2.0 * FD_STEP);
    Ok(0.5 * (1.0 - 4.0 * de * de))
}

pub fn gft_averaged(p: &DriveParams, n1: usize, n2: usize) -> Result<AveragedResult> {
    gft_averaged_with(p, &GftOptions { truncation: Some((n1, n2)), ..GftOptions::default() })
}

pub fn gft_averaged_with(p: &DriveParams, opts: &GftOptions) -> Result<AveragedResult> {
    let sol = gft_converged(p, opts)?;
    let p_bar = sol.pbar_projection();
    let p_bar_derivative = if opts.cross_check {
        let alt = derivative_pbar(&sol)?;
        if (alt - p_bar).abs() > opts.cross_check_tol {
            return Err(Error::DerivativeCrossCheckFailed { projection: p_bar, derivative: alt });
        }
        Some(alt)
    } else {
        None
    };
    Ok(AveragedResult {
        method: Method::Gft,
        p_bar,
        d: None,
        d_imag: 0.0,
        quasienergies: sol.quasienergy_pair(),
        truncation_used: sol.n1.max(sol.n2),
        dimension: sol.dimension(),
        p_bar_derivative,
    })
}

/// Checked transient at fixed truncation.
pub fn gft_transient(p: &DriveParams, t0: f64, grid: &[f64], n1: usize, n2: usize) -> Result<ProbabilitySeries> {
    TwoModeFloquetSolution::new(p, n1, n2, GFT_DIMENSION_CAP)?.transient_checked(t0, grid)
}

/// Raw transient at fixed truncation plus the norm defect, for convergence studies.
pub fn gft_transient_unchecked(
    p: &DriveParams,
    t0: f64,
    grid: &[f64],
    n1: usize,
    n2: usize,
    cap: usize,
) -> Result<(ProbabilitySeries, f64)> {
    check_grid(t0, grid)?;
    Ok(TwoModeFloquetSolution::new(p, n1, n2, cap)?.transient_unchecked(t0, grid))
}

/// Full 2×2 evolution operator from both parity blocks.
pub fn gft_evolution_operator(p: &DriveParams, n1: usize, n2: usize, t: f64, t0: f64) -> Result<Mat2> {
    let p = p.validate()?;
    let mut u = Mat2::zero();
    for (col, parity) in [(1usize, 1u8), (0, 0)] {
        let b = ParityBlock::new(&p, n1, n2, parity)?;
        let psi = b.amplitudes(&p, t0, &[t])[0];
        u.0[0][col] = psi[0];
        u.0[1][col] = psi[1];
    }
    Ok(u)
}
