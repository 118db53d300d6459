use extremal::analysis::*;
use extremal::Nonlinearity;
use proptest::prelude::*;

#[test]
fn diagonal_bounds_move_in_opposite_directions() {
    // The general bound rises with β on (½, 1) while the subunit bound falls.
    let samples: Vec<f64> = (1..1000).map(|k| 0.5 + 0.5 * k as f64 / 1000.0).collect();
    let general: Vec<f64> = samples.iter().map(|&b| dim_bound_general(b, b).unwrap()).collect();
    let subunit: Vec<f64> = samples.iter().map(|&b| dim_bound_subunit(b, b).unwrap()).collect();
    assert!(general.windows(2).all(|w| w[1] > w[0]));
    assert!(subunit.windows(2).all(|w| w[1] < w[0]));
    // Continuity: a tiny step moves either bound by a tiny relative amount.
    for &b in &samples {
        for bound in [dim_bound_general, dim_bound_subunit] {
            let (x, y) = (bound(b, b).unwrap(), bound(b + 1e-9, b + 1e-9).unwrap());
            assert!((x - y).abs() <= 1e-4 * x.abs().max(1.0), "{b}");
        }
    }
}

#[test]
fn subunit_bound_exceeds_nine_exactly_where_quadratic_is_negative() {
    for k in 0..300 {
        let beta = 0.7 + 0.3 * k as f64 / 300.0;
        let bound = dim_bound_subunit(beta, beta).unwrap();
        let quadratic = 68.0 * beta * beta + 49.0 - 124.0 * beta;
        assert!(bound > 9.0, "{beta}");
        assert_eq!(bound > 9.0, quadratic < 0.0, "{beta}");
    }
}

#[test]
fn shrinking_the_window_can_lose_the_general_bound() {
    // The general bound is not monotone in β₊: a wide window passes at n = 7
    // while the narrower (0.51, 1) does not.
    let wide = classify_regularity(7.0, BetaInput::analytic(0.51, 100.0));
    let narrow = classify_regularity(7.0, BetaInput::analytic(0.51, 1.0));
    assert!(wide.conclusion.is_linfty());
    assert!(!narrow.conclusion.is_linfty());
}

fn admissible_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.5001f64..0.999, 0.0f64..1.0).prop_map(|(lo, s)| (lo, lo + s * (0.9999 - lo)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn some_bound_exceeds_six((lo, hi) in admissible_pair()) {
        let g = dim_bound_general(lo, hi).unwrap();
        let s = dim_bound_subunit(lo, hi).unwrap();
        prop_assert!(g.max(s) > 6.0);
    }

    #[test]
    fn raising_beta_minus_keeps_linfty(
        (lo, hi) in (0.5001f64..3.0, 0.0f64..3.0).prop_map(|(lo, d)| (lo, lo + d)),
        lift in 0.0f64..1.0,
        n in 1u32..20,
    ) {
        let before = classify_regularity(f64::from(n), BetaInput::analytic(lo, hi));
        let raised = lo + lift * (hi - lo);
        let after = classify_regularity(f64::from(n), BetaInput::analytic(raised, hi));
        if before.conclusion.is_linfty() {
            prop_assert!(after.conclusion.is_linfty(), "{before:?} -> {after:?}");
        }
    }

    #[test]
    fn twice_gamma_two_is_the_subunit_bound(beta_1 in 0.5001f64..0.999, s in 0.0f64..1.0) {
        let beta_3 = beta_1 + s * (0.9999 - beta_1);
        let g = gamma_exponents(beta_1, beta_3).unwrap();
        let gamma_2 = g.gamma_2.expect("beta_3 < 1");
        let bound = dim_bound_subunit(beta_1, beta_3).unwrap();
        prop_assert!((2.0 * gamma_2 - bound).abs() <= 1e-12 * bound);
        prop_assert!((2.0 * g.gamma_1 - dim_bound_general(beta_1, beta_3).unwrap()).abs() <= 1e-12 * bound);
    }

    #[test]
    fn integer_dimension_is_below_bound(bound in 1.0f64..40.0) {
        let n = max_integer_dimension(bound);
        prop_assert!((n as f64) < bound);
        prop_assert!((n + 1) as f64 >= bound - 1e-12);
    }
}

#[test]
fn numeric_limits_match_catalog_values() {
    let cases = [
        (Nonlinearity::builtin("exp", &[]).unwrap(), 1.0, 600.0),
        (Nonlinearity::builtin("power", &[2.0]).unwrap(), 1e3, 1e7),
        (Nonlinearity::builtin("power", &[5.0]).unwrap(), 1e3, 1e7),
        (Nonlinearity::builtin("example_1_1", &[]).unwrap(), 1e3, 1e6),
    ];
    for (nl, start, end) in cases {
        let exact = nl.analytic_beta().unwrap();
        let est = estimate_beta_limits(&nl, start, end, 256).unwrap();
        assert!((est.beta_minus() - exact.lower).abs() < 1e-3, "{}: {est:?}", nl.name());
        assert!((est.beta_plus() - exact.upper).abs() < 1e-3, "{}: {est:?}", nl.name());
    }
}

#[test]
fn verdict_serializes_contract_keys() {
    let v = classify_regularity(15.0, Nonlinearity::builtin("example_1_1", &[]).unwrap().analytic_beta().unwrap());
    let json = v.to_json();
    assert_eq!(json["conclusion"], "Linfty_by_1_6");
    assert!(json["bound_1_5"].is_number() && json["bound_1_6"].is_number());
    assert!(v.csv_row().split(',').count() == VERDICT_CSV_HEADER.split(',').count());
}
