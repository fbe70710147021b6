//! Invariants that must hold for every valid parameter set.

use std::f64::consts::PI;

use bichroma::model::DriveParams;
use bichroma::solvers::{
    gft_converged, rk_propagate, rk_step_size, FloquetOptions, FrameSolution, GftOptions, Method,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DriveParams> {
    (0.3f64..2.0, 0.0f64..1.0, 0.2f64..1.2, prop_oneof![Just(0.2), Just(-0.15), Just(0.1)], 0.0f64..6.3, 0.0f64..6.3)
        .prop_map(|(w0, a1, r, delta, p1, p2)| DriveParams::with_ratio(w0, a1, r, delta).with_phases(p1, p2))
}

fn frame(method: Method, p: &DriveParams) -> FrameSolution {
    FrameSolution::new(method, p, &FloquetOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn frame_evolution_is_unitary(p in params(), t0 in -40.0f64..40.0, span in 0.0f64..400.0) {
        for m in [Method::Chrw, Method::Rwa] {
            let s = frame(m, &p);
            prop_assert!(s.evolution_operator(t0 + span, t0).unitarity_defect() < 1e-8);
            prop_assert!(s.floquet.evolution_operator(t0 + span, t0).unitarity_defect() < 1e-8);
        }
    }

    #[test]
    fn probabilities_bounded(p in params(), t0 in -40.0f64..40.0) {
        for m in [Method::Chrw, Method::Rwa] {
            let s = frame(m, &p);
            let grid: Vec<f64> = (0..50).map(|k| t0 + 7.3 * k as f64).collect();
            for v in s.transient(t0, &grid).values {
                prop_assert!((0.0..=1.0 + 1e-9).contains(&v), "{}", v);
            }
            let a = s.averaged();
            prop_assert!(a.p_bar >= 0.0 && a.p_bar <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn indicator_real_and_consistent(p in params()) {
        for m in [Method::Chrw, Method::Rwa] {
            let a = frame(m, &p).averaged();
            prop_assert!(a.d_imag.abs() < 1e-10, "{}", a.d_imag);
            let d = a.d.unwrap();
            prop_assert_eq!(a.p_bar, 0.5 * (1.0 - d * d));
        }
    }

    #[test]
    fn averaged_probability_is_phase_free(w0 in 0.3f64..2.0, a1 in 0.0f64..1.0, r in 0.2f64..1.2) {
        for m in [Method::Chrw, Method::Rwa] {
            let values: Vec<f64> = [(0.0, 0.0), (0.0, PI / 2.0), (PI / 3.0, PI)]
                .iter()
                .map(|&(f1, f2)| frame(m, &DriveParams::with_ratio(w0, a1, r, 0.2).with_phases(f1, f2)).averaged().p_bar)
                .collect();
            let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - values.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(spread < 1e-8, "{} {:?}", m, values);
        }
    }

    #[test]
    fn rk_propagator_is_unitary(p in params(), t0 in -20.0f64..20.0, span in 0.0f64..60.0) {
        let h = |t: f64| p.hamiltonian(t);
        let u = rk_propagate(&h, t0, t0 + span, rk_step_size(&p));
        prop_assert!(u.unitarity_defect() < 1e-8, "{}", u.unitarity_defect());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gft_evolution_is_unitary(w0 in 0.4f64..1.8, a1 in 0.0f64..0.6, t0 in -20.0f64..20.0, span in 0.0f64..200.0) {
        let p = DriveParams::with_ratio(w0, a1, 1.0, 0.2);
        let sol = gft_converged(&p, &GftOptions { cross_check: false, ..GftOptions::default() }).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| t0 + span * k as f64 / 19.0).collect();
        let (series, defect) = sol.transient_unchecked(t0, &grid);
        prop_assert!(defect < 1e-8, "{}", defect);
        for v in series.values {
            prop_assert!((0.0..=1.0 + 1e-9).contains(&v));
        }
        let pbar = sol.pbar_projection();
        prop_assert!(pbar >= 0.0 && pbar <= 0.5 + 1e-9);
    }
}
