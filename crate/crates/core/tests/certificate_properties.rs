use extremal::analysis::beta_at;
use extremal::certificate::*;
use extremal::nonlinearity::QuadratureRule;
use extremal::Nonlinearity;

fn exp() -> Nonlinearity {
    Nonlinearity::builtin("exp", &[]).unwrap()
}

#[test]
fn first_integral_residual_tracks_quadrature_tolerance() {
    let xi = TestFunctionXi::thm11(&exp(), 0.8, 1.0).unwrap();
    let residuals: Vec<f64> = [1e-5, 1e-6, 1e-7, 1e-8]
        .iter()
        .map(|&tolerance| {
            let options = CertificateOptions { tolerance, samples: 101, rule: QuadratureRule::Simpson };
            verify_first_integral_with(&xi, 20.0, options).unwrap().residual
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[0] >= 5.0 * w[1], "{residuals:?}");
    }
}

#[test]
fn g_is_increasing_and_log_convex_for_exp() {
    let xi = TestFunctionXi::thm11(&exp(), 0.8, 1.0).unwrap();
    let profile = CertificateProfile::build(&xi, 20.0, CertificateOptions::default()).unwrap();
    let ln_g: Vec<f64> = profile.g.iter().map(|g| g.ln()).collect();
    assert!(profile.g.windows(2).all(|w| w[1] > w[0]));
    // On the uniform sample grid, log-convexity means nonnegative second differences.
    for w in ln_g.windows(3) {
        assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9 * w[1].abs().max(1.0));
    }
}

#[test]
fn half_coefficient_discriminant_sign_follows_beta() {
    for nl in [
        Nonlinearity::builtin("power", &[2.0]).unwrap(),
        Nonlinearity::builtin("example_1_1", &[]).unwrap(),
        Nonlinearity::builtin("example_1_2", &[]).unwrap(),
    ] {
        let xi = TestFunctionXi::thm12_half(&nl, 0.5).unwrap();
        for k in 0..400 {
            let t = 0.5 + 0.05 * k as f64;
            let d = xi.discriminant_at(t).unwrap();
            let b = beta_at(&nl, t).unwrap() - 0.5;
            if b.abs() > 1e-9 {
                assert_eq!(d > 0.0, b > 0.0, "{} at {t}", nl.name());
            }
        }
    }
}

#[test]
fn h_is_eventually_positive_when_the_chain_holds() {
    let xi = TestFunctionXi::thm11(&exp(), 0.9, 5.0).unwrap();
    assert!(verify_growth_chain(&xi, 1.1, 25.0).unwrap().all_hold());
    let profile = CertificateProfile::build(&xi, 25.0, CertificateOptions::default()).unwrap();
    let first_positive = profile.H.iter().position(|&h| h > 0.0).expect("H turns positive");
    assert!(profile.H[first_positive..].iter().all(|&h| h > 0.0));
}

fn e_over_f(nl: &Nonlinearity, beta_1: f64, beta_3: f64) -> (ChainReport, CertificateProfile) {
    let t0 = select_t0(nl, beta_1, beta_3, 0.1, 1e3).unwrap();
    let t_max = if nl.name() == "exp" { t0 + 20.0 } else { t0 * 1e3 };
    let xi = TestFunctionXi::thm11(nl, beta_1, t0).unwrap();
    let report = verify_growth_chain(&xi, beta_3, t_max).unwrap();
    let profile = CertificateProfile::build(&xi, t_max, CertificateOptions::default()).unwrap();
    (report, profile)
}

#[test]
fn e_over_f_increases_for_monotone_log_derivative() {
    for (nl, beta_1, beta_3) in [
        (exp(), 0.9, 1.1),
        (Nonlinearity::builtin("power", &[2.0]).unwrap(), 0.6, 0.7),
    ] {
        let (report, profile) = e_over_f(&nl, beta_1, beta_3);
        assert!(report.e_over_f_increasing, "{}", nl.name());
        let start = profile.E[1] / profile.f[1];
        assert!(report.e_over_f_end > 10.0 * start, "{}", nl.name());
    }
}

#[test]
fn e_over_f_grows_on_average_for_oscillating_entry() {
    // The cosine term makes E/f wiggle, so only the trend is monotone:
    // its minimum over each successive block of samples increases.
    let nl = Nonlinearity::builtin("example_1_1", &[]).unwrap();
    let (report, profile) = e_over_f(&nl, 0.6, 0.7);
    assert!(!report.e_over_f_increasing);
    let ratio: Vec<f64> = profile.E.iter().zip(&profile.f).map(|(e, f)| e / f).collect();
    let block = ratio.len() / 8;
    let minima: Vec<f64> = ratio[1..].chunks(block).map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    assert!(minima.windows(2).all(|w| w[1] > w[0]), "{minima:?}");
    assert!(report.e_over_f_end > 1e3 * minima[1], "{minima:?}");
}

#[test]
fn perturbed_xi_breaks_the_first_integral() {
    let nl = Nonlinearity::builtin("power", &[2.0]).unwrap();
    // β(0.5) < ½ for this f, so ξ′ + ξ² is negative there.
    let early = TestFunctionXi::thm12_half(&nl, 0.5).unwrap().validate(50.0, 200).unwrap();
    assert_eq!(early.negative_discriminant_at, Some(0.5));
    let xi = TestFunctionXi::thm12_half(&nl, 2.0).unwrap();
    assert!(xi.validate(50.0, 200).unwrap().passed());
    let pert = xi.perturbed(0.0, 10.0);
    let good = verify_first_integral(&xi, 20.0).unwrap().residual;
    let bad = verify_first_integral(&pert, 20.0).unwrap().residual;
    assert!(good < 1e-8 && bad > 1e-3, "{good} {bad}");
}
