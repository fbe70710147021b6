//! Independent numerical routes used as oracles by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bichroma::chrw::back_transform_weights;
use bichroma::model::{ComplexMatrix, DriveParams, Mat2, C64, PAULI};
use bichroma::solvers::FrameSolution;

/// Ascending power series for `J_n(z)`, `n ≥ 0`, summed until the terms vanish.
pub fn bessel_series(n: u32, z: f64) -> f64 {
    let h = 0.5 * z;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 3 {
            break;
        }
        if k > 400 {
            break;
        }
    }
    sum
}

/// `J_n(z) = (1/π)∫₀^π cos(nτ − z sin τ) dτ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_integral(n: i32, z: f64) -> f64 {
    let m = 400;
    let h = PI / m as f64;
    let f = |tau: f64| (n as f64 * tau - z * tau.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        s += f(k as f64 * h);
    }
    s * h / PI
}

/// ξ by nested bisection: the inner solve finds ξ₂(ξ₁) from the second
/// equation, the outer one zeroes the first equation along that curve.
pub fn xi_nested_bisection(p: &DriveParams) -> (f64, f64) {
    let j = |n: u32, z: f64| bessel_series(n, z);
    let f1 = |x1: f64, x2: f64| {
        let (z1, z2) = (p.a1 * x1 / p.omega1, p.a2 * x2 / p.omega2);
        p.omega0 * j(1, z1) * j(0, z2) - 0.5 * p.a1 * (1.0 - x1)
    };
    let f2 = |x1: f64, x2: f64| {
        let (z1, z2) = (p.a1 * x1 / p.omega1, p.a2 * x2 / p.omega2);
        p.omega0 * j(0, z1) * j(1, z2) - 0.5 * p.a2 * (1.0 - x2)
    };
    let bisect = |g: &dyn Fn(f64) -> f64| {
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        let glo = g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == (glo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let inner = |x1: f64| bisect(&|x2| f2(x1, x2));
    let x1 = bisect(&|x1| f1(x1, inner(x1)));
    (x1, inner(x1))
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn jacobi_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].norm_sqr()).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                // rotate in the (p,q) plane: first strip the phase of a_pq
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // columns
                for row in a.iter_mut() {
                    let xp = row[p];
                    let xq = row[q] * phase.conj();
                    row[p] = xp * c - xq * s;
                    row[q] = xp * s + xq * c;
                }
                // rows
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    let xp = rp[k];
                    let xq = rq[k] * phase;
                    a[p][k] = xp * c - xq * s;
                    a[q][k] = xp * s + xq * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A random Hermitian matrix from a deterministic generator.
pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, C64::new(rng.gen_range(-2.0..2.0), 0.0));
        for j in (i + 1)..n {
            let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
    }
    m
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// `Δ = 0.2`, `r = 1` parameter family used throughout.
pub fn standard(omega0: f64, a1: f64) -> DriveParams {
    DriveParams::with_ratio(omega0, a1, 1.0, 0.2)
}

/// `P = ½ − ¼ Σ_{μν} f_μ(t) f_ν(t₀) Σ_{λγ} e^{−i(ε_γ−ε_λ)(t−t₀)} ⟨u_λ(t)|σ_μ|u_γ(t)⟩⟨u_γ(t₀)|σ_ν|u_λ(t₀)⟩`
pub fn trace_formula(sol: &FrameSolution, t: f64, t0: f64) -> f64 {
    let weights = |s: f64| match &sol.chrw {
        Some(c) => {
            let w = back_transform_weights(&sol.params, c, s);
            [(C64::new(w.f_z, 0.0), PAULI.sigma_z), (w.f_plus, PAULI.sigma_plus), (w.f_minus, PAULI.sigma_minus)]
        }
        None => {
            // no S(t): only the rotation, so f_z = 1 and f_± = 0
            let z = C64::new(0.0, 0.0);
            [(C64::new(1.0, 0.0), PAULI.sigma_z), (z, PAULI.sigma_plus), (z, PAULI.sigma_minus)]
        }
    };
    let fq = &sol.floquet;
    let ut = [fq.state_at(0, t), fq.state_at(1, t)];
    let u0 = [fq.state_at(0, t0), fq.state_at(1, t0)];
    let braket = |a: [C64; 2], op: &Mat2, b: [C64; 2]| {
        let ob = op.apply(b);
        a[0].conj() * ob[0] + a[1].conj() * ob[1]
    };
    let mut acc = C64::new(0.0, 0.0);
    for (fm, sm) in weights(t) {
        for (fn_, sn) in weights(t0) {
            for l in 0..2 {
                for g in 0..2 {
                    let ph = C64::from_polar(1.0, -(fq.quasienergies[g] - fq.quasienergies[l]) * (t - t0));
                    acc += fm * fn_ * ph * braket(ut[l], &sm, ut[g]) * braket(u0[g], &sn, u0[l]);
                }
            }
        }
    }
    assert!(acc.im.abs() < 1e-9, "trace formula not real: {}", acc.im);
    0.5 - 0.25 * acc.re
}
