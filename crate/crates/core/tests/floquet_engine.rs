mod common;

use std::f64::consts::PI;

use bichroma::chrw::solve_xi;
use bichroma::floquet::{
    build_floquet_matrix, converge_truncation, default_tolerance, diagonalize, fold, solve, FourierHamiltonian,
};
use bichroma::model::{ComplexMatrix, DriveParams, Mat2, C64, PAULI};
use bichroma::solvers::{chrw_fourier_hamiltonian, rk_propagate, rwa_fourier_hamiltonian};
use bichroma::Error;
use common::{jacobi_eigenvalues, random_hermitian, standard};
use proptest::prelude::*;

fn chrw_ham(p: &DriveParams) -> FourierHamiltonian {
    chrw_fourier_hamiltonian(p, &solve_xi(p).unwrap()).unwrap()
}

#[test]
fn brute_force_assembly_at_n35() {
    let p = standard(1.0, 0.5);
    let c = solve_xi(&p).unwrap();
    let m = build_floquet_matrix(&chrw_ham(&p), 35).unwrap();
    assert_eq!(m.dim(), 142);
    // direct evaluation of the blocks from the renormalized parameters
    let e = C64::from_polar(1.0, c.delta_phi21);
    let h0 = [[0.5 * c.delta_tilde1, 0.25 * c.a_tilde1], [0.25 * c.a_tilde1, -0.5 * c.delta_tilde1]];
    // |n+1⟩⟨n| carries ¼(Ã₂σ₋ − 2Ã₀σ_z)e^{iδφ}; σ₋ = |↓⟩⟨↑|
    let lower = [[-0.5 * c.a_tilde0 * e, C64::new(0.0, 0.0)], [0.25 * c.a_tilde2 * e, 0.5 * c.a_tilde0 * e]];
    let delta = p.omega2 - p.omega1;
    let mut worst = 0.0f64;
    for n in -35i64..=35 {
        for m2 in -35i64..=35 {
            for s in 0..2 {
                for s2 in 0..2 {
                    let i = ((n + 35) * 2) as usize + s;
                    let j = ((m2 + 35) * 2) as usize + s2;
                    let mut want = C64::new(0.0, 0.0);
                    if n == m2 {
                        want += h0[s][s2];
                        if s == s2 {
                            want += n as f64 * delta;
                        }
                    } else if n == m2 + 1 {
                        want += lower[s][s2];
                    } else if m2 == n + 1 {
                        want += lower[s2][s].conj();
                    }
                    worst = worst.max((m.get(i, j) - want).norm());
                }
            }
        }
    }
    assert!(worst < 1e-15, "{worst}");
    assert_eq!(m.hermitian_defect(), 0.0);
}

#[test]
fn jacobi_oracle_random_hermitian() {
    for seed in 0..5 {
        let m = random_hermitian(10, seed);
        let want = jacobi_eigenvalues(&m);
        let got = diagonalize(&m).unwrap();
        for (a, b) in got.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
        }
        // eigenvectors satisfy Mv = λv
        for j in 0..10 {
            let v = got.vector(j);
            let mv = m.mul_vec(v);
            let err = mv.iter().zip(v).map(|(x, y)| (x - y * got.values[j]).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }
}

#[test]
fn trivial_spectra() {
    let id = ComplexMatrix::from_fn(6, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    assert!(diagonalize(&id).unwrap().values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    let sx = ComplexMatrix::from_fn(2, |i, j| PAULI.sigma_x.get(i, j));
    let e = diagonalize(&sx).unwrap();
    assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    let bad = ComplexMatrix::from_fn(2, |i, j| if i == 0 && j == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    assert!(matches!(diagonalize(&bad), Err(Error::NotHermitian(_))));
}

#[test]
fn rabi_closed_form() {
    let (delta, a, omega) = (0.3, 0.4, 0.2);
    let h0 = PAULI.sigma_z.scale_re(0.5 * delta) + PAULI.sigma_x.scale_re(0.25 * a);
    let ham = FourierHamiltonian::new(omega, h0, &[]).unwrap();
    let e = 0.5 * (delta * delta + a * a / 4.0).sqrt();
    let sol = solve(&ham, 10).unwrap();
    let (ep, _) = fold(e, omega);
    let (em, _) = fold(-e, omega);
    let mut want = [ep, em];
    want.sort_by(|x, y| y.total_cmp(x));
    assert!((sol.quasienergies[0] - want[0]).abs() < 1e-13);
    assert!((sol.quasienergies[1] - want[1]).abs() < 1e-13);
    let eig = diagonalize(&build_floquet_matrix(&ham, 3).unwrap()).unwrap();
    for n in -3..=3 {
        for s in [e, -e] {
            let target = s + n as f64 * omega;
            assert!(eig.values.iter().any(|v| (v - target).abs() < 1e-12));
        }
    }
}

#[test]
fn truncation_stability_35_to_45() {
    let ham = chrw_ham(&standard(1.0, 0.5));
    let a = solve(&ham, 35).unwrap();
    let b = solve(&ham, 45).unwrap();
    for g in 0..2 {
        assert!((a.quasienergies[g] - b.quasienergies[g]).abs() < 1e-10);
    }
}

#[test]
fn convergence_sweeps() {
    for &(w0, a1) in &[(0.5, 0.5), (1.0, 0.5), (1.5, 1.0), (1.9, 1.0)] {
        let p = standard(w0, a1);
        let sol = converge_truncation(&chrw_ham(&p), default_tolerance(0.2, w0), 8, 300).unwrap();
        assert!(sol.truncation <= 30, "{w0} {a1}: N = {}", sol.truncation);
    }
    let p = DriveParams::with_ratio(1.0, 0.2, 1.0, 0.005);
    let sol = converge_truncation(&chrw_ham(&p), default_tolerance(0.005, 1.0), 8, 300).unwrap();
    assert!(sol.dimension() <= 142, "{}", sol.dimension());
    let p0 = standard(1.3, 0.0);
    let sol = converge_truncation(&chrw_ham(&p0), 1e-10, 8, 300).unwrap();
    assert_eq!(sol.truncation, 8);
}

#[test]
fn truncation_too_small_and_exhausted_schedule() {
    let ham = FourierHamiltonian::new(0.2, Mat2::zero(), &[(3, PAULI.sigma_x)]).unwrap();
    assert!(matches!(build_floquet_matrix(&ham, 2), Err(Error::TruncationTooSmall { .. })));
    let hard = chrw_ham(&DriveParams::with_ratio(1.0, 0.2, 1.0, 0.005));
    assert!(matches!(converge_truncation(&hard, 1e-14, 8, 12), Err(Error::NoTruncationConvergence { .. })));
}

#[test]
fn evolution_matches_rk_over_three_periods() {
    for p in [standard(1.0, 0.5), standard(1.436881, 0.5).with_phases(0.4, 1.3)] {
        let ham = chrw_ham(&p);
        let sol = solve(&ham, 30).unwrap();
        let period = 2.0 * PI / ham.base_frequency().abs();
        let t0 = 0.7;
        for k in 1..=6 {
            let t = t0 + 0.5 * k as f64 * period;
            let f = |s: f64| ham.evaluate(s);
            let reference = rk_propagate(&f, t0, t, 0.01);
            let u = sol.evolution_operator(t, t0);
            assert!((u - reference).max_abs() < 1e-6, "{}", (u - reference).max_abs());
        }
    }
}

#[test]
fn identity_and_period_composition() {
    let ham = chrw_ham(&standard(1.2, 0.5));
    let sol = solve(&ham, 30).unwrap();
    let t0 = 0.0;
    let period = 2.0 * PI / ham.base_frequency().abs();
    assert!((sol.evolution_operator(t0, t0) - Mat2::identity()).max_abs() < 1e-8);
    let one = sol.evolution_operator(t0 + period, t0);
    let two = sol.evolution_operator(t0 + 2.0 * period, t0);
    assert!((two - one * one).max_abs() < 1e-9);
}

#[test]
fn zone_folding_invariance() {
    let ham = chrw_ham(&standard(1.3, 0.7));
    let sol = solve(&ham, 25).unwrap();
    for (gamma, k) in [(0, 1), (0, -2), (1, 3), (1, -1)] {
        let moved = sol.shifted_replica(gamma, k);
        for &(t, t0) in &[(3.0, 0.0), (57.3, 12.1), (400.0, -33.0)] {
            let d = (moved.evolution_operator(t, t0) - sol.evolution_operator(t, t0)).max_abs();
            assert!(d < 1e-9, "{d}");
        }
    }
}

#[test]
fn rwa_single_tone_is_time_independent() {
    let p = DriveParams::new(1.3, 0.4, 0.0, 1.0, 1.2);
    let ham = rwa_fourier_hamiltonian(&p).unwrap();
    assert_eq!(ham.block(1).max_abs(), 0.0);
    let sol = solve(&ham, 8).unwrap();
    let e = 0.5 * (0.3f64.powi(2) + 0.04).sqrt();
    let mut want = [fold(e, 0.2).0, fold(-e, 0.2).0];
    want.sort_by(|x, y| y.total_cmp(x));
    assert!((sol.quasienergies[0] - want[0]).abs() < 1e-12 && (sol.quasienergies[1] - want[1]).abs() < 1e-12);
    let single = chrw_ham(&p);
    assert_eq!(single.block(1).max_abs(), 0.0);
}

#[test]
fn fourier_blocks_hermitian_pairing() {
    let p = standard(1.0, 0.5).with_phases(0.2, 0.9);
    let ham = chrw_ham(&p);
    assert!((ham.block(-1) - ham.block(1).adjoint()).max_abs() == 0.0);
    for t in [0.0, 1.3, 17.0] {
        let h = ham.evaluate(t);
        assert!((h - h.adjoint()).max_abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quasienergies_in_zone_and_phase_free(w0 in 0.3f64..2.0, a1 in 0.0f64..1.0, r in 0.2f64..1.2) {
        let mut reference: Option<[f64; 2]> = None;
        for (phi1, phi2) in [(0.0, 0.0), (0.0, PI / 3.0), (0.0, PI)] {
            let p = DriveParams::with_ratio(w0, a1, r, 0.2).with_phases(phi1, phi2);
            let sol = solve(&chrw_ham(&p), 30).unwrap();
            for q in sol.quasienergies {
                prop_assert!(q > -0.1 && q <= 0.1);
            }
            if let Some(r) = reference {
                for g in 0..2 {
                    prop_assert!((r[g] - sol.quasienergies[g]).abs() < 1e-10);
                }
            } else {
                reference = Some(sol.quasienergies);
            }
            let m = build_floquet_matrix(&chrw_ham(&p), 12).unwrap();
            prop_assert_eq!(m.hermitian_defect(), 0.0);
        }
    }

    #[test]
    fn pauli_commutator(_x in 0u8..1) {
        let c = PAULI.sigma_x.commutator(&PAULI.sigma_y);
        prop_assert!((c - PAULI.sigma_z.scale(C64::new(0.0, 2.0))).max_abs() < 1e-15);
    }
}
