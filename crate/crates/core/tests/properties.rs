mod common;

use common::*;
use hrf_core::blowdown::symmetrize;
use hrf_core::flow::{pack_sym, unpack_sym};
use hrf_core::geometry::{curvature_package, ricci};
use hrf_core::lie::verify_torus;
use hrf_core::linalg::{max_abs, Mat};
use hrf_core::presets::PresetRegistry;
use hrf_core::report::to_json_string;
use hrf_core::scenario::Scenario;
use proptest::prelude::*;

fn su2_metric() -> impl Strategy<Value = Mat> {
    (any::<u64>(), 0.3f64..3.0, 1.0f64..4.0)
        .prop_map(|(seed, lo, spread)| random_spd(&mut rng(seed), 3, lo, lo * spread))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ricci_is_scale_invariant(g in su2_metric(), c in 0.1f64..10.0) {
        let sp = su2_space();
        let a = ricci(&metric(&sp, g.clone())).unwrap();
        let b = ricci(&metric(&sp, g * c)).unwrap();
        prop_assert!(max_abs(&(&a - &b)) <= 1e-10 * max_abs(&a).max(1.0));
    }

    #[test]
    fn curvature_has_algebraic_symmetries(g in su2_metric()) {
        let pkg = curvature_package(&metric(&su2_space(), g)).unwrap();
        prop_assert!(pkg.symmetry_defect() < 1e-10);
        prop_assert!(max_abs(&(&pkg.ric - pkg.ric.transpose())) < 1e-12);
    }

    #[test]
    fn ricci_commutes_with_cyclic_relabelling(x in prop::array::uniform3(0.2f64..5.0)) {
        // e1 -> e2 -> e3 -> e1 is an automorphism of su(2)
        let sp = su2_space();
        let a = ricci(&metric(&sp, diag(&x))).unwrap();
        let b = ricci(&metric(&sp, diag(&[x[2], x[0], x[1]]))).unwrap();
        for i in 0..3 {
            prop_assert!((a[(i, i)] - b[((i + 1) % 3, (i + 1) % 3)]).abs() <= 1e-12 * a[(i, i)].abs().max(1.0));
        }
    }

    #[test]
    fn milnor_oracle_agrees(x in prop::array::uniform3(0.2f64..5.0)) {
        let r = ricci(&metric(&su2_space(), diag(&x))).unwrap();
        let o = milnor_ricci(x);
        for i in 0..3 {
            prop_assert!((r[(i, i)] - o[i]).abs() <= 1e-10 * o.iter().fold(1.0_f64, |a, v| a.max(v.abs())));
        }
    }

    #[test]
    fn symmetrize_is_idempotent_and_invariant(g in su2_metric()) {
        let sp = su2_space();
        let torus = verify_torus(&sp, &Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let once = symmetrize(&metric(&sp, g), &torus).unwrap();
        let twice = symmetrize(&once, &torus).unwrap();
        prop_assert!(max_abs(&(&once.g - &twice.g)) < 1e-12 * max_abs(&once.g));
        // invariant under the e1 circle: e2/e3 block is a multiple of the identity
        prop_assert!((once.g[(1, 1)] - once.g[(2, 2)]).abs() < 1e-12 * max_abs(&once.g));
        prop_assert!(once.g[(1, 2)].abs() < 1e-12 * max_abs(&once.g));
    }

    #[test]
    fn packing_roundtrips(g in su2_metric()) {
        let mut y = vec![0.0; 6];
        pack_sym(&g, &mut y);
        prop_assert_eq!(unpack_sym(&y, 3), g);
    }

    #[test]
    fn floats_roundtrip_through_reports(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let text = to_json_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }

    #[test]
    fn scenarios_roundtrip(d in prop::array::uniform3(0.1f64..10.0), rtol in 1e-12f64..1e-6) {
        let mut sc = PresetRegistry::builtin().get("berger_s3").unwrap().scenario();
        sc.initial_metric = vec![vec![d[0], 0.0, 0.0], vec![0.0, d[1], 0.0], vec![0.0, 0.0, d[2]]];
        sc.flow.rtol = rtol;
        prop_assert_eq!(Scenario::from_json(&sc.to_json()).unwrap(), sc);
    }
}
