use bienayme::kernel::{
    classify_family, mean_matrix, preset, preset_names, solve_tilt, tilt, tilted_mean_formula,
    Criticality, FamilyConstants, TiltParams, TiltSolverOptions,
};
use proptest::prelude::*;

#[test]
fn binary_constants_are_exact() {
    let c = FamilyConstants::compute(&preset("monotype_binary").unwrap()).unwrap();
    assert!((c.sigma2 - 1.0).abs() < 1e-12);
    assert!((c.vectors.a[0] - 1.0).abs() < 1e-12);
    assert!((c.c_scal - 0.5).abs() < 1e-12);
}

#[test]
fn reducible_poisson_constants() {
    let c = FamilyConstants::compute(&preset("poisson_reducible").unwrap()).unwrap();
    assert!((c.vectors.a[0] - 1.0).abs() < 1e-10);
    assert!((c.vectors.a[1] - 2.0).abs() < 1e-10);
    assert!((c.c_scal - 3f64.sqrt() / 2.0).abs() < 1e-9);
    assert!((c.flattened.c1 - 3.0).abs() < 1e-9);
}

#[test]
fn presets_classify() {
    for name in preset_names() {
        let p = classify_family(&preset(name).unwrap()).unwrap();
        let expected = if name == "poisson2" {
            Criticality::Supercritical
        } else {
            Criticality::Critical
        };
        assert_eq!(p.classification, expected, "{name}");
    }
}

#[test]
fn poisson_two_tilts_to_minus_ln_two() {
    let fam = preset("poisson2").unwrap();
    let sol = solve_tilt(&fam, &[0], &[1.0], &TiltSolverOptions::default()).unwrap();
    assert!((sol.theta.theta[0] + 2f64.ln()).abs() < 1e-8);
    assert!((sol.radius - 1.0).abs() < 1e-10);
}

#[test]
fn critical_family_in_its_own_direction_needs_no_tilt() {
    let fam = preset("two_type").unwrap();
    let c = FamilyConstants::compute(&fam).unwrap();
    let dir: Vec<f64> = c.vectors.a.iter().copied().collect();
    let sol = solve_tilt(&fam, &[0, 1], &dir, &TiltSolverOptions::default()).unwrap();
    let t = tilt(&fam, &sol.theta).unwrap();
    assert!((classify_family(&t).unwrap().radius - 1.0).abs() < 1e-10);
    assert!(sol.direction_error < 1e-8);
}

#[test]
fn localized_direction_is_unreachable() {
    let fam = preset("localized").unwrap();
    let err = solve_tilt(&fam, &[0, 1], &[1.0, 1.0], &TiltSolverOptions::default()).unwrap_err();
    assert!(matches!(err, bienayme::Error::NoConvergence(_)), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tilted_mean_matches_formula(t0 in -1.5f64..1.5, t1 in -1.5f64..1.5) {
        for name in ["two_type", "poisson_reducible"] {
            let fam = preset(name).unwrap();
            let theta = TiltParams { theta: vec![t0, t1] };
            let direct = mean_matrix(&tilt(&fam, &theta).unwrap());
            let formula = tilted_mean_formula(&fam, &theta).unwrap();
            for (a, b) in direct.iter().zip(formula.iter()) {
                prop_assert!((a - b).abs() < 1e-12, "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tilts_compose(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        let fam = preset("two_type").unwrap();
        let p = TiltParams { theta: vec![a, b] };
        let q = TiltParams { theta: vec![c, d] };
        let both = TiltParams { theta: vec![a + c, b + d] };
        let twice = tilt(&tilt(&fam, &p).unwrap(), &q).unwrap();
        let once = tilt(&fam, &both).unwrap();
        for (l1, l2) in twice.laws().iter().zip(once.laws()) {
            for ((w1, p1), (w2, p2)) in l1.support().iter().zip(l2.support()) {
                prop_assert_eq!(w1, w2);
                prop_assert!((p1 - p2).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn zero_tilt_is_identity() {
    for name in preset_names() {
        let fam = preset(name).unwrap();
        let t = tilt(&fam, &TiltParams::zero(fam.num_types())).unwrap();
        for (l1, l2) in t.laws().iter().zip(fam.laws()) {
            for ((_, p1), (_, p2)) in l1.support().iter().zip(l2.support()) {
                assert!((p1 - p2).abs() < 1e-12);
            }
        }
    }
}
