mod common;

use std::f64::consts::PI;

use bichroma::model::{DriveParams, Mat2, C64, PAULI};
use bichroma::solvers::{
    chrw_averaged, chrw_transient, full_dimension, gft_averaged, gft_averaged_with, gft_build, gft_converged,
    gft_evolution_operator, rk_step_size, rk_transient, rk_transient_with_step, rwa_averaged, rwa_transient,
    FloquetOptions, FrameSolution, GftOptions, Method, SolverRequest, TwoModeFloquetSolution,
};
use bichroma::Error;
use common::{linspace, standard, trace_formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn trace_formula_matches_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let p = DriveParams::with_ratio(
            rng.gen_range(0.4..1.9),
            rng.gen_range(0.0..0.9),
            rng.gen_range(0.2..1.2),
            if k % 2 == 0 { 0.2 } else { -0.15 },
        )
        .with_phases(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let method = if k % 5 == 4 { Method::Rwa } else { Method::Chrw };
        let sol = FrameSolution::new(method, &p, &FloquetOptions::default()).unwrap();
        let t0 = rng.gen_range(-50.0..50.0);
        let t = t0 + rng.gen_range(0.0..300.0);
        let a = sol.transition_probability(t, t0);
        let b = trace_formula(&sol, t, t0);
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-10, "{worst}");
}

fn sampled_average(sol: &FrameSolution, seed: u64) -> f64 {
    let period = 2.0 * PI / sol.params.beat().abs();
    let span = 200.0 * period;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 200_000;
    let mut s = 0.0;
    for _ in 0..m {
        let t0 = rng.gen_range(0.0..span);
        let t = t0 + rng.gen_range(0.0..span);
        s += sol.transition_probability(t, t0);
    }
    s / m as f64
}

#[test]
fn long_time_average_oracle() {
    let cases = [
        (Method::Chrw, standard(1.0, 0.5)),
        (Method::Chrw, standard(1.436881, 0.5)),
        (Method::Chrw, standard(0.7, 0.3)),
        (Method::Chrw, DriveParams::with_ratio(1.3, 0.8, 0.5, 0.2).with_phases(0.5, 2.0)),
        (Method::Rwa, standard(1.15, 0.4)),
    ];
    for (i, (m, p)) in cases.iter().enumerate() {
        let sol = FrameSolution::new(*m, p, &FloquetOptions::default()).unwrap();
        let avg = sol.averaged();
        let sampled = sampled_average(&sol, i as u64);
        assert!((avg.p_bar - sampled).abs() < 5e-3, "{m} {p:?}: {} vs {sampled}", avg.p_bar);
    }
}

#[test]
fn starts_in_ground_state() {
    let p = standard(1.2, 0.5);
    let grid = [0.0, 1.0];
    for s in [
        chrw_transient(&p, 0.0, &grid).unwrap(),
        rwa_transient(&p, 0.0, &grid).unwrap(),
        rk_transient(&p, 0.0, &grid).unwrap(),
        gft_converged(&p, &GftOptions::default()).unwrap().transient_checked(0.0, &grid).unwrap(),
    ] {
        assert!(s.values[0] < 1e-20);
        assert!(s.values[1] > 0.0);
    }
}

#[test]
fn zero_drive() {
    let p = DriveParams::new(1.3, 0.0, 0.0, 1.0, 1.2);
    // "+" is the upper folded quasienergy, so the sign of d flips at every
    // crossing ω₀ = ω₁ + kΔ; only |d| is fixed
    for a in [chrw_averaged(&p).unwrap(), rwa_averaged(&p).unwrap()] {
        assert!((a.d.unwrap().abs() - 1.0).abs() < 1e-14);
        assert!(a.p_bar.abs() < 1e-14);
    }
    assert!(gft_averaged(&p, 6, 6).unwrap().p_bar.abs() < 1e-14);
    let grid = linspace(0.0, 40.0, 41);
    assert!(rk_transient(&p, 0.0, &grid).unwrap().values.iter().all(|&v| v == 0.0));
    let m = gft_build(&p, 2, 2).unwrap();
    let eig = bichroma::floquet::diagonalize(&m).unwrap();
    let mut want = Vec::new();
    for n in -2..=2 {
        for k in -2..=2 {
            for s in [0.65, -0.65] {
                want.push(s + n as f64 + 1.2 * k as f64);
            }
        }
    }
    want.sort_by(f64::total_cmp);
    for (a, b) in eig.values.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn rwa_rabi_formula() {
    let a = 0.1;
    let p = DriveParams::new(1.0, a, 0.0, 1.0, 1.2);
    let grid = linspace(0.0, 300.0, 301);
    let s = rwa_transient(&p, 0.0, &grid).unwrap();
    for (t, v) in grid.iter().zip(&s.values) {
        assert!((v - (a * t / 4.0).sin().powi(2)).abs() < 1e-10);
    }
    assert!((rwa_averaged(&p).unwrap().p_bar - 0.5).abs() < 1e-12);
}

#[test]
fn gft_hand_assembly() {
    let p = DriveParams::new(0.9, 0.3, 0.25, 1.0, 1.2).with_phases(0.4, 1.1);
    let m = gft_build(&p, 1, 1).unwrap();
    assert_eq!(m.dim(), 18);
    // Fourier components of H(t) indexed by (Δn, Δm)
    let comp = |dn: i64, dm: i64| -> Mat2 {
        match (dn, dm) {
            (0, 0) => PAULI.sigma_z.scale_re(0.5 * p.omega0),
            (1, 0) => PAULI.sigma_x.scale(C64::from_polar(0.25 * p.a1, p.phi1)),
            (-1, 0) => PAULI.sigma_x.scale(C64::from_polar(0.25 * p.a1, -p.phi1)),
            (0, 1) => PAULI.sigma_x.scale(C64::from_polar(0.25 * p.a2, p.phi2)),
            (0, -1) => PAULI.sigma_x.scale(C64::from_polar(0.25 * p.a2, -p.phi2)),
            _ => Mat2::zero(),
        }
    };
    let idx = |n: i64, k: i64, s: usize| (((n + 1) * 3 + (k + 1)) * 2) as usize + s;
    for n in -1..=1 {
        for k in -1..=1 {
            for n2 in -1..=1 {
                for k2 in -1..=1 {
                    let block = comp(n - n2, k - k2);
                    for s in 0..2 {
                        for s2 in 0..2 {
                            let mut want = block.get(s, s2);
                            if n == n2 && k == k2 && s == s2 {
                                want += n as f64 * p.omega1 + k as f64 * p.omega2;
                            }
                            let got = m.get(idx(n, k, s), idx(n2, k2, s2));
                            assert!((got - want).norm() < 1e-15, "({n},{k},{s}) ({n2},{k2},{s2})");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn gft_heavy_dimension() {
    assert_eq!(full_dimension(45, 45), 16562);
    assert_eq!(full_dimension(21, 21), 3698);
}

#[test]
fn gft_matches_rk_weak_single_tone() {
    let p = DriveParams::new(1.0, 0.05, 0.0, 1.0, 1.2);
    let grid = linspace(0.0, 200.0, 201);
    let g = gft_converged(&p, &GftOptions::default()).unwrap().transient_checked(0.0, &grid).unwrap();
    let r = rk_transient(&p, 0.0, &grid).unwrap();
    assert!(g.max_deviation(&r) < 1e-4, "{}", g.max_deviation(&r));
}

#[test]
fn gft_derivative_form_agrees_on_grid() {
    let mut worst = 0.0f64;
    for w0 in linspace(0.3, 1.9, 20) {
        let avg = gft_averaged_with(&standard(w0, 0.5), &GftOptions::default()).unwrap();
        let der = avg.p_bar_derivative.expect("cross-check value");
        worst = worst.max((avg.p_bar - der).abs());
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn gft_unitarity() {
    let p = standard(1.2, 0.5).with_phases(0.3, 0.8);
    for (t, t0) in [(5.0, 0.0), (40.0, 3.0)] {
        let u = gft_evolution_operator(&p, 14, 14, t, t0).unwrap();
        assert!(u.unitarity_defect() < 1e-8, "{}", u.unitarity_defect());
    }
    let sol = TwoModeFloquetSolution::new(&p, 14, 14, 20_000).unwrap();
    let q = sol.quasienergy_pair();
    assert_eq!(q[0], -q[1]);
}

#[test]
fn gft_overflow_is_reported() {
    let p = standard(1.0, 0.2);
    assert!(matches!(TwoModeFloquetSolution::new(&p, 45, 45, 4000), Err(Error::DimensionOverflow { .. })));
}

#[test]
fn schedule_stops_at_cap() {
    let p = standard(1.2, 0.5);
    let strict = GftOptions { tol: 1e-15, cap: full_dimension(9, 9), cross_check: false, ..GftOptions::default() };
    assert!(matches!(gft_converged(&p, &strict), Err(Error::NoTruncationConvergence { n_max: 9, .. })));
    let capped = gft_converged(&p, &GftOptions { accept_at_cap: true, ..strict }).unwrap();
    assert_eq!((capped.n1, capped.n2), (9, 9));
}

#[test]
fn rk_step_doubling_at_low_beat() {
    let p = DriveParams::with_ratio(1.0, 0.2, 1.0, 0.005);
    let grid = linspace(0.0, 1500.0, 1501);
    let h = rk_step_size(&p);
    let coarse = rk_transient_with_step(&p, 0.0, &grid, h);
    let fine = rk_transient_with_step(&p, 0.0, &grid, 0.5 * h);
    let diff = coarse.series.max_deviation(&fine.series);
    // fourth order: the fine run's error is about diff / 15
    assert!(diff / 15.0 < 1e-8, "{diff}");
    assert!(diff < 1e-7, "{diff}");
    assert!(coarse.drift < 1e-6);
}

#[test]
fn rwa_symmetric_about_mean_frequency() {
    for x in linspace(0.01, 0.6, 12) {
        let a = rwa_averaged(&standard(1.1 + x, 0.5)).unwrap().p_bar;
        let b = rwa_averaged(&standard(1.1 - x, 0.5)).unwrap().p_bar;
        assert!((a - b).abs() < 1e-8, "{x}: {a} {b}");
    }
}

#[test]
fn five_photon_resonance_dynamics() {
    let p = standard(1.436881, 0.5);
    let grid = linspace(0.0, 600.0, 4000);
    let chrw = chrw_transient(&p, 0.0, &grid).unwrap();
    let rwa = rwa_transient(&p, 0.0, &grid).unwrap();
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    assert!(max(&chrw.values) > 0.95, "{}", max(&chrw.values));
    // the RWA resonance sits a Bloch-Siegert shift away, so its Rabi
    // oscillation is detuned and peaks near 2/3
    assert!(max(&rwa.values) < 0.8, "{}", max(&rwa.values));
    let gft = gft_converged(&p, &GftOptions { cross_check: false, ..GftOptions::default() })
        .unwrap()
        .transient_checked(0.0, &grid)
        .unwrap();
    assert!(max(&gft.values) > 0.95);
}

#[test]
fn request_api_and_grid_checks() {
    let p = standard(1.2, 0.5);
    let req = SolverRequest::new(p, Method::Chrw, 0.0, vec![2.0, 1.0]);
    assert!(matches!(req.transient(), Err(Error::InvalidInput(_))));
    let req = SolverRequest::new(p, Method::Rk, 0.0, vec![1.0, 2.0]);
    assert!(req.averaged().is_err());
    assert_eq!(req.transient().unwrap().values.len(), 2);
    let req = SolverRequest::new(p, Method::Gft, 0.0, vec![1.0]);
    let a = req.averaged().unwrap();
    assert!(a.p_bar <= 0.5 + 1e-9);
}

#[test]
fn rwa_peaks_shift_from_chrw() {
    // five-photon region: the CHRW peak sits near 1.437, the RWA one near the band's RWA position
    let grid = linspace(1.38, 1.5, 241);
    let argmax = |m: Method| {
        grid.iter()
            .map(|&w| (w, FrameSolution::new(m, &standard(w, 0.5), &FloquetOptions::default()).unwrap().averaged().p_bar))
            .fold((0.0, -1.0), |a, b| if b.1 > a.1 { b } else { a })
            .0
    };
    let shift = argmax(Method::Chrw) - argmax(Method::Rwa);
    assert!(shift.abs() > 1e-3, "{shift}");
}
