//! Floquet solver for a 2×2 Hamiltonian periodic in one frequency.
//!
//! `H(t) = Σ_m H^{(m)} e^{imΩt}` and a Floquet state
//! `e^{−iεt} Σ_n c(n) e^{inΩt}` satisfy
//! `Σ_m H^{(m)} c(n−m) + nΩ c(n) = ε c(n)`, a Hermitian eigenproblem in the
//! Sambe space truncated to harmonics `|n| ≤ N`. Index of `(n, s)` is
//! `2(n+N) + s` with `s = 0` for `|↑⟩`.

use std::collections::BTreeMap;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexMatrix, Mat2, C64};

/// Truncations tried by [`converge_truncation`].
pub const TRUNCATION_SCHEDULE: [usize; 12] = [8, 12, 18, 27, 40, 60, 90, 135, 200, 300, 450, 675];

const HERMITIAN_TOL: f64 = 1e-12;
/// Largest allowed amplitude on the two outermost harmonics of an accepted
/// truncation; keeps the evolution operator unitary to about 1e-10.
pub const STATE_TAIL_TOL: f64 = 1e-9;

/// Fourier blocks of a Hamiltonian periodic with angular frequency `base_frequency`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierHamiltonian {
    base_frequency: f64,
    blocks: BTreeMap<i32, Mat2>,
}

impl FourierHamiltonian {
    /// `h0` plus harmonics `m > 0`; the `−m` blocks are filled with adjoints.
    pub fn new(base_frequency: f64, h0: Mat2, harmonics: &[(i32, Mat2)]) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        blocks.insert(0, h0);
        for &(m, h) in harmonics {
            if m <= 0 {
                return Err(Error::InvalidInput(format!("harmonic {m} must be positive")));
            }
            blocks.insert(m, h);
            blocks.insert(-m, h.adjoint());
        }
        FourierHamiltonian::from_blocks(base_frequency, blocks)
    }

    /// Checks `H^{(−m)} = (H^{(m)})†` for every stored block.
    pub fn from_blocks(base_frequency: f64, blocks: BTreeMap<i32, Mat2>) -> Result<Self> {
        if base_frequency == 0.0 || !base_frequency.is_finite() {
            return Err(Error::InvalidInput("base frequency must be finite and nonzero".into()));
        }
        for (&m, h) in &blocks {
            let partner = blocks.get(&-m).copied().unwrap_or(Mat2::zero());
            let defect = (*h - partner.adjoint()).max_abs();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(FourierHamiltonian { base_frequency, blocks })
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn blocks(&self) -> &BTreeMap<i32, Mat2> {
        &self.blocks
    }

    pub fn block(&self, m: i32) -> Mat2 {
        self.blocks.get(&m).copied().unwrap_or(Mat2::zero())
    }

    pub fn max_harmonic(&self) -> usize {
        self.blocks
            .iter()
            .filter(|(_, h)| h.max_abs() > 0.0)
            .map(|(m, _)| m.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `H(t)`.
    pub fn evaluate(&self, t: f64) -> Mat2 {
        self.blocks.iter().fold(Mat2::zero(), |acc, (&m, h)| {
            acc + h.scale(C64::from_polar(1.0, m as f64 * self.base_frequency * t))
        })
    }
}

/// Assemble the truncated Floquet matrix of dimension `2(2N+1)`.
pub fn build_floquet_matrix(ham: &FourierHamiltonian, n: usize) -> Result<ComplexMatrix> {
    let needed = ham.max_harmonic();
    if n < 1 || n < needed {
        return Err(Error::TruncationTooSmall { n, needed: needed.max(1) });
    }
    let size = 2 * n + 1;
    let mut m = ComplexMatrix::zeros(2 * size);
    let omega = ham.base_frequency();
    for row in 0..size {
        let nh = row as i64 - n as i64;
        for (&k, h) in ham.blocks() {
            let col = row as i64 - k as i64;
            if col < 0 || col >= size as i64 {
                continue;
            }
            let col = col as usize;
            for a in 0..2 {
                for b in 0..2 {
                    m.set(2 * row + a, 2 * col + b, h.get(a, b));
                }
            }
        }
        for s in 0..2 {
            m.add_at(2 * row + s, 2 * row + s, C64::new(nh as f64 * omega, 0.0));
        }
    }
    Ok(m)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending, vectors stored by column.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    dim: usize,
    vectors: Vec<C64>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, j: usize) -> &[C64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

static SEQUENTIAL: std::sync::Once = std::sync::Once::new();

// faer would otherwise split work over the rayon pool, and the reduction
// order (hence the last bits of every result) would depend on the pool size
fn sequential_kernels() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Dense Hermitian eigendecomposition.
pub fn diagonalize(m: &ComplexMatrix) -> Result<Eigen> {
    let scale = m.max_abs().max(1.0);
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    sequential_kernels();
    let dim = m.dim();
    let mut vectors = Vec::with_capacity(dim * dim);
    let values: Vec<f64>;
    if m.is_real() {
        let a = Mat::<f64>::from_fn(dim, dim, |i, j| m.get(i, j).re);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let (u, s) = (evd.U(), evd.S().column_vector());
        values = (0..dim).map(|j| s[j]).collect();
        for j in 0..dim {
            vectors.extend((0..dim).map(|i| C64::new(u[(i, j)], 0.0)));
        }
    } else {
        let a = Mat::<C64>::from_fn(dim, dim, |i, j| m.get(i, j));
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let (u, s) = (evd.U(), evd.S().column_vector());
        values = (0..dim).map(|j| s[j].re).collect();
        for j in 0..dim {
            vectors.extend((0..dim).map(|i| u[(i, j)]));
        }
    }
    Ok(Eigen { values, dim, vectors })
}

/// Symmetric real eigendecomposition, used for the large two-mode blocks.
pub fn diagonalize_real(dim: usize, entry: impl Fn(usize, usize) -> f64) -> Result<(Vec<f64>, Mat<f64>)> {
    sequential_kernels();
    let a = Mat::<f64>::from_fn(dim, dim, |i, j| entry(i, j));
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..dim).map(|j| s[j]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Fold `e` into `(−|Ω|/2, |Ω|/2]`, returning the folded value and the integer
/// `k` with `folded = e − kΩ`.
pub fn fold(e: f64, omega: f64) -> (f64, i64) {
    let w = omega.abs();
    let mut k = (e / w).round();
    let mut f = e - k * w;
    if f <= -0.5 * w {
        f += w;
        k -= 1.0;
    } else if f > 0.5 * w {
        f -= w;
        k += 1.0;
    }
    let k = if omega < 0.0 { -k } else { k };
    (f, k as i64)
}

/// The two Floquet states of a periodically driven qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSolution {
    /// `[ε₊, ε₋]` with `ε₊ ≥ ε₋`, both in the first Brillouin zone.
    pub quasienergies: [f64; 2],
    /// Fourier coefficients `c_γ(n)` stored at index `n + N`.
    pub states: [Vec<[C64; 2]>; 2],
    pub truncation: usize,
    pub base_frequency: f64,
    /// Largest `‖c(n)‖` over the two outermost harmonics on each side of the
    /// raw eigenvectors, measured before zone folding moved the window.
    #[serde(default)]
    pub tail: f64,
}

impl FloquetSolution {
    pub fn dimension(&self) -> usize {
        2 * (2 * self.truncation + 1)
    }

    pub fn coefficient(&self, gamma: usize, n: i64) -> [C64; 2] {
        let idx = n + self.truncation as i64;
        if idx < 0 || idx >= self.states[gamma].len() as i64 {
            [C64::new(0.0, 0.0); 2]
        } else {
            self.states[gamma][idx as usize]
        }
    }

    /// `|ũ_γ(t)⟩ = Σ_n c_γ(n) e^{inΩt}`.
    pub fn state_at(&self, gamma: usize, t: f64) -> [C64; 2] {
        let n0 = -(self.truncation as i64);
        let step = C64::from_polar(1.0, self.base_frequency * t);
        let mut phase = C64::from_polar(1.0, n0 as f64 * self.base_frequency * t);
        let mut acc = [C64::new(0.0, 0.0); 2];
        for (k, c) in self.states[gamma].iter().enumerate() {
            if k > 0 && k % 64 == 0 {
                // resynchronize to keep the running phase accurate
                phase = C64::from_polar(1.0, (n0 + k as i64) as f64 * self.base_frequency * t);
            }
            acc[0] += c[0] * phase;
            acc[1] += c[1] * phase;
            phase *= step;
        }
        acc
    }

    /// `Ũ(t,t₀) = Σ_γ e^{−iε_γ(t−t₀)} |ũ_γ(t)⟩⟨ũ_γ(t₀)|`.
    pub fn evolution_operator(&self, t: f64, t0: f64) -> Mat2 {
        let mut u = Mat2::zero();
        for g in 0..2 {
            let a = self.state_at(g, t);
            let b = self.state_at(g, t0);
            let ph = C64::from_polar(1.0, -self.quasienergies[g] * (t - t0));
            for i in 0..2 {
                for j in 0..2 {
                    u.0[i][j] += ph * a[i] * b[j].conj();
                }
            }
        }
        u
    }

    /// `Σ_k ⟨c_γ(k)| op |c_γ(k+n)⟩`, the `n`-th Fourier component of `⟨ũ_γ(t)|op|ũ_γ(t)⟩`.
    pub fn harmonic_expectation(&self, gamma: usize, op: &Mat2, n: i64) -> C64 {
        let nt = self.truncation as i64;
        let mut acc = C64::new(0.0, 0.0);
        for k in -nt..=nt {
            let l = k + n;
            if l < -nt || l > nt {
                continue;
            }
            let a = self.coefficient(gamma, k);
            let b = op.apply(self.coefficient(gamma, l));
            acc += a[0].conj() * b[0] + a[1].conj() * b[1];
        }
        acc
    }

    /// Largest `‖c_γ(n)‖` over `|n| ≥ N − 1` for both states, or the tail
    /// recorded before folding if that is larger.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.truncation as i64;
        let mut worst = self.tail;
        for g in 0..2 {
            for k in [-n, 1 - n, n - 1, n] {
                let c = self.coefficient(g, k);
                worst = worst.max((c[0].norm_sqr() + c[1].norm_sqr()).sqrt());
            }
        }
        worst
    }

    /// `Σ_n ‖c_γ(n)‖²`.
    pub fn norm(&self, gamma: usize) -> f64 {
        self.states[gamma].iter().map(|c| c[0].norm_sqr() + c[1].norm_sqr()).sum()
    }

    /// `Σ_n ⟨c₊(n), c₋(n)⟩`.
    pub fn cross_overlap(&self) -> C64 {
        self.states[0]
            .iter()
            .zip(&self.states[1])
            .map(|(a, b)| a[0].conj() * b[0] + a[1].conj() * b[1])
            .sum()
    }

    /// The same physics with state `gamma` replaced by its replica
    /// `ε + kΩ`, `c(n) → c(n − k)`; the truncation grows by `|k|` so no
    /// coefficient is lost.
    pub fn shifted_replica(&self, gamma: usize, k: i64) -> FloquetSolution {
        let n_new = self.truncation + k.unsigned_abs() as usize;
        let size = 2 * n_new + 1;
        let zero = [C64::new(0.0, 0.0); 2];
        let mut states = [vec![zero; size], vec![zero; size]];
        for (g, st) in states.iter_mut().enumerate() {
            let shift = if g == gamma { k } else { 0 };
            for (idx, slot) in st.iter_mut().enumerate() {
                let n = idx as i64 - n_new as i64;
                *slot = self.coefficient(g, n - shift);
            }
        }
        let mut q = self.quasienergies;
        q[gamma] += k as f64 * self.base_frequency;
        FloquetSolution { quasienergies: q, states, truncation: n_new, base_frequency: self.base_frequency, tail: self.tail }
    }
}

fn harmonic_weights(v: &[C64]) -> Vec<f64> {
    v.chunks(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect()
}

/// Pick the two physical Floquet states out of the Sambe-space spectrum.
///
/// Each physical state appears once per harmonic shift. Replicas are ranked
/// by the distance of their harmonic centroid `Σ n‖c(n)‖²` from zero, the most
/// central one of each family is kept and then shifted so its quasienergy
/// lies in `(−|Ω|/2, |Ω|/2]`.
pub fn select_brillouin(eig: &Eigen, base_frequency: f64, n: usize) -> Result<FloquetSolution> {
    let size = 2 * n + 1;
    if eig.dim() != 2 * size {
        return Err(Error::InvalidInput("eigenpairs do not match the truncation".into()));
    }
    let centroids: Vec<f64> = (0..eig.dim())
        .map(|j| {
            harmonic_weights(eig.vector(j))
                .iter()
                .enumerate()
                .map(|(k, w)| (k as f64 - n as f64) * w)
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..eig.dim()).collect();
    order.sort_by(|&a, &b| {
        centroids[a]
            .abs()
            .total_cmp(&centroids[b].abs())
            .then(eig.values[a].total_cmp(&eig.values[b]))
    });
    let first = order[0];
    let overlap_shifted = |a: usize, b: usize, k: i64| -> f64 {
        // Σ_m ⟨v_a(m), v_b(m + k)⟩
        let (va, vb) = (eig.vector(a), eig.vector(b));
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..size as i64 {
            let l = m + k;
            if l < 0 || l >= size as i64 {
                continue;
            }
            let (m, l) = (m as usize, l as usize);
            acc += va[2 * m].conj() * vb[2 * l] + va[2 * m + 1].conj() * vb[2 * l + 1];
        }
        acc.norm()
    };
    let second = order[1..].iter().copied().find(|&j| {
        let k = ((eig.values[j] - eig.values[first]) / base_frequency).round() as i64;
        overlap_shifted(first, j, k) < 0.5
    });
    let second = match second {
        Some(j) if centroids[j].abs() < 0.5 * n as f64 => j,
        _ => return Err(Error::DegenerateSelection),
    };
    let tail = [first, second]
        .iter()
        .flat_map(|&j| {
            let w = harmonic_weights(eig.vector(j));
            [w[0], w[1.min(size - 1)], w[size - 1], w[size.saturating_sub(2)]]
        })
        .fold(0.0f64, f64::max)
        .sqrt();
    let mut picked = [first, second].map(|j| {
        let (eps, k) = fold(eig.values[j], base_frequency);
        // folded state: c'(m) = c(m + k)
        let v = eig.vector(j);
        let coeffs: Vec<[C64; 2]> = (0..size as i64)
            .map(|m| {
                let src = m + k;
                if src < 0 || src >= size as i64 {
                    [C64::new(0.0, 0.0); 2]
                } else {
                    let s = src as usize;
                    [v[2 * s], v[2 * s + 1]]
                }
            })
            .collect();
        (eps, coeffs)
    });
    if picked[1].0 > picked[0].0 {
        picked.swap(0, 1);
    }
    let [(e0, c0), (e1, c1)] = picked;
    Ok(FloquetSolution { quasienergies: [e0, e1], states: [c0, c1], truncation: n, base_frequency, tail })
}

/// Build, diagonalize and select at a fixed truncation.
pub fn solve(ham: &FourierHamiltonian, n: usize) -> Result<FloquetSolution> {
    let m = build_floquet_matrix(ham, n)?;
    let eig = diagonalize(&m)?;
    select_brillouin(&eig, ham.base_frequency(), n)
}

/// Distance between two quasienergies modulo `|Ω|`.
pub fn zone_distance(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).0.abs()
}

/// Grow N through the schedule until both quasienergies agree within `tol`
/// between successive truncations and the states have no weight left on the
/// outer harmonics ([`STATE_TAIL_TOL`]). Returns the smallest such N; when
/// only the larger member of the agreeing pair has a clean tail, the gap
/// between the two is bisected.
pub fn converge_truncation(
    ham: &FourierHamiltonian,
    tol: f64,
    n_start: usize,
    n_max: usize,
) -> Result<FloquetSolution> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let floor = n_start.max(ham.max_harmonic()).max(1);
    let mut schedule = vec![floor];
    schedule.extend(TRUNCATION_SCHEDULE.iter().copied().filter(|&n| n > floor));
    let omega = ham.base_frequency();
    let change = |a: &FloquetSolution, b: &FloquetSolution| {
        (0..2).map(|g| zone_distance(a.quasienergies[g], b.quasienergies[g], omega)).fold(0.0, f64::max)
    };
    let mut last_change = f64::INFINITY;
    let mut prev: Option<FloquetSolution> = None;
    for &n in schedule.iter().filter(|&&n| n <= n_max) {
        let sol = solve(ham, n)?;
        if let Some(p) = prev.take() {
            last_change = change(&p, &sol);
            if last_change < tol {
                if p.edge_amplitude() < STATE_TAIL_TOL {
                    return Ok(p);
                }
                if sol.edge_amplitude() < STATE_TAIL_TOL {
                    // smallest clean N in (p, sol]; tails shrink monotonically with N
                    let (mut lo, mut best) = (p.truncation, sol);
                    while best.truncation - lo > 1 {
                        let mid = lo + (best.truncation - lo) / 2;
                        let cand = solve(ham, mid)?;
                        if cand.edge_amplitude() < STATE_TAIL_TOL && change(&cand, &best) < tol {
                            best = cand;
                        } else {
                            lo = mid;
                        }
                    }
                    return Ok(best);
                }
            }
        }
        prev = Some(sol);
    }
    Err(Error::NoTruncationConvergence { n_max, change: last_change })
}

/// Default convergence tolerance `1e-10·max(|Ω|, scale)`.
pub fn default_tolerance(base_frequency: f64, scale: f64) -> f64 {
    1e-10 * base_frequency.abs().max(scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PAULI;

    #[test]
    fn fold_is_half_open() {
        let (f, k) = fold(0.1, 0.2);
        assert!((f - 0.1).abs() < 1e-15 && k == 0);
        let (f, k) = fold(-0.1, 0.2);
        assert!((f - 0.1).abs() < 1e-15 && k == -1);
        let (f, k) = fold(0.35, 0.2);
        assert!((f - (-0.05)).abs() < 1e-15 && k == 2);
        let (f, k) = fold(0.35, -0.2);
        assert!((f - (-0.05)).abs() < 1e-15 && k == -2);
    }

    #[test]
    fn rabi_block_diagonal() {
        let (d, a, om) = (0.3, 0.4, 0.2);
        let h0 = PAULI.sigma_z.scale_re(0.5 * d) + PAULI.sigma_x.scale_re(0.25 * a);
        let ham = FourierHamiltonian::new(om, h0, &[]).unwrap();
        let sol = solve(&ham, 3).unwrap();
        let e = 0.5 * (d * d + a * a / 4.0).sqrt();
        let want = [fold(e, om).0, fold(-e, om).0];
        let (hi, lo) = (want[0].max(want[1]), want[0].min(want[1]));
        assert!((sol.quasienergies[0] - hi).abs() < 1e-12);
        assert!((sol.quasienergies[1] - lo).abs() < 1e-12);
    }

    #[test]
    fn too_small_truncation() {
        let h = PAULI.sigma_x.scale_re(0.1);
        let ham = FourierHamiltonian::new(0.2, Mat2::zero(), &[(2, h)]).unwrap();
        assert!(matches!(build_floquet_matrix(&ham, 1), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn rejects_non_hermitian_pairs() {
        let mut blocks = BTreeMap::new();
        blocks.insert(1, PAULI.sigma_plus);
        blocks.insert(-1, PAULI.sigma_plus);
        assert!(FourierHamiltonian::from_blocks(0.2, blocks).is_err());
    }
}
