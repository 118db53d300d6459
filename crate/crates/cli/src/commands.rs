//! The four workflows. Each reads a validated [`RunConfig`], writes its
//! artifacts and returns an error only for failures that should change
//! the exit code.

use std::fmt;

use extremal::analysis::*;
use extremal::certificate::*;
use extremal::nonlinearity::validate_hypothesis_h;
use extremal::radial::*;
use extremal::{Error, LimitQuality, Nonlinearity};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, RunConfig, XiChoice};
use crate::output::{gnuplot_preamble, Artifacts};

/// Samples and range used to check hypothesis (H).
const HYPOTHESIS_T_MAX: f64 = 50.0;
const HYPOTHESIS_SAMPLES: usize = 2001;
const BETA_SAMPLES_PER_DECADE: usize = 256;
/// Parameters of the sampled growth conditions fed to the classifier.
const H1_EPSILON: f64 = 0.1;
const LINFTY_DELTA: f64 = 0.5;
const CONDITION_T0: f64 = 10.0;
/// Approximate catalog pairs are replaced by the numeric estimate when
/// they differ by more than this.
const CATALOG_AGREEMENT: f64 = 1e-3;
const XI_VALIDATION_SAMPLES: usize = 400;
const DEFAULT_CERTIFICATE_WINDOW: f64 = 20.0;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric { message: String, witness: Option<f64> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric { message, witness: Some(t) } => {
                write!(f, "numeric failure: {message}\nwitness: t = {t}")
            }
            CliError::Numeric { message, witness: None } => write!(f, "numeric failure: {message}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric { witness: e.witness(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("cannot write output: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parse and lookup errors in `--f`/`--params` are configuration errors.
fn nonlinearity(config: &RunConfig) -> Result<Nonlinearity> {
    Nonlinearity::from_spec(&config.f, &config.params).map_err(|e| match e {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::UnknownName(_) | Error::BadParameter(_) => {
            CliError::Config(e.to_string())
        }
        other => other.into(),
    })
}

pub fn run(config: &RunConfig) -> Result<Artifacts> {
    config.validate()?;
    let nl = nonlinearity(config)?;
    let mut artifacts = Artifacts::create(config)?;
    match config.command {
        Command::Analyze => analyze(config, &nl, &mut artifacts)?,
        Command::Certificate => certificate(config, &nl, &mut artifacts)?,
        Command::Solve => solve(config, &nl, &mut artifacts)?,
        Command::Sweep => sweep(config, &nl, &mut artifacts)?,
    }
    Ok(artifacts)
}

/// Picks the `(β₋, β₊)` pair to classify with, and says why.
fn choose_beta(nl: &Nonlinearity, estimate: Option<&BetaEstimate>) -> Option<(BetaInput, String)> {
    match (nl.analytic_beta(), estimate) {
        (Some(pair), _) if pair.quality == LimitQuality::Exact => {
            Some((pair.into(), "closed-form limits".into()))
        }
        (Some(pair), Some(est)) => {
            let gap = (pair.lower - est.lower).abs().max((pair.upper - est.upper).abs());
            if gap > CATALOG_AGREEMENT {
                Some((
                    est.into(),
                    format!(
                        "numeric estimate ({:.6}, {:.6}) replaces the catalog approximation ({}, {})",
                        est.lower, est.upper, pair.lower, pair.upper
                    ),
                ))
            } else {
                Some((pair.into(), "catalog approximation, confirmed numerically".into()))
            }
        }
        (Some(pair), None) => Some((pair.into(), "catalog approximation, not confirmed".into())),
        (None, Some(est)) => Some((est.into(), "numeric tail estimate".into())),
        (None, None) => None,
    }
}

fn condition_window(config: &RunConfig, estimate: Option<&BetaEstimate>) -> (f64, f64) {
    let t0 = config.t0.unwrap_or(CONDITION_T0);
    // Stay clear of the first sample that overflowed.
    let end = estimate.and_then(|e| e.truncated_at).map_or(config.tail_end, |t| (0.95 * t).min(config.tail_end));
    (t0, end)
}

fn analyze(config: &RunConfig, nl: &Nonlinearity, out: &mut Artifacts) -> Result<()> {
    let hypothesis = validate_hypothesis_h(nl, HYPOTHESIS_T_MAX, HYPOTHESIS_SAMPLES);
    let mut notes = Vec::new();
    let estimate = match estimate_beta_limits(nl, config.tail_start, config.tail_end, BETA_SAMPLES_PER_DECADE) {
        Ok(e) => Some(e),
        Err(e) => {
            notes.push(format!("beta estimate failed: {e}"));
            None
        }
    };
    let tau = estimate_tau_limits(nl, config.tail_start, config.tail_end, BETA_SAMPLES_PER_DECADE)
        .map_err(|e| notes.push(format!("tau estimate failed: {e}")))
        .ok();
    let (beta, source) = choose_beta(nl, estimate.as_ref()).ok_or_else(|| CliError::Numeric {
        message: notes.join("; "),
        witness: None,
    })?;
    notes.push(format!("beta source: {source}"));

    let (t0, t_end) = condition_window(config, estimate.as_ref());
    let h1 = check_h1_condition(nl, H1_EPSILON, t0, t_end).map_err(|e| notes.push(format!("H1 condition: {e}"))).ok();
    let linfty =
        check_linfty_condition(nl, LINFTY_DELTA, t0, t_end).map_err(|e| notes.push(format!("Linfty condition: {e}"))).ok();
    let evidence = GrowthEvidence {
        h1_condition: h1.as_ref().map(|c| c.holds),
        linfty_condition: linfty.as_ref().map(|c| c.holds),
    };

    let failures = hypothesis.failures();
    let verdicts: Vec<RegularityVerdict> = config
        .n
        .iter()
        .map(|&n| {
            let mut v = classify_with_evidence(n, beta, evidence);
            v.downgrade_unverified(&failures);
            v
        })
        .collect();

    let mut csv = format!("{VERDICT_CSV_HEADER}\n");
    for v in &verdicts {
        csv.push_str(&v.csv_row());
        csv.push('\n');
    }
    out.csv("verdicts.csv", &csv)?;
    out.json(
        "verdict.json",
        json!({
            "command": "analyze",
            "nonlinearity": nl.name(),
            "hypothesis": {
                "passed": hypothesis.passed(),
                "failures": failures,
                "t_max": hypothesis.t_max,
                "samples": hypothesis.samples,
            },
            "beta_estimate": estimate,
            "beta_used": { "beta_minus": beta.beta_minus, "beta_plus": beta.beta_plus, "source": source },
            "tau_estimate": tau,
            "h1_condition": h1,
            "linfty_condition": linfty,
            "verdicts": verdicts.iter().map(RegularityVerdict::to_json).collect::<Vec<Value>>(),
            "notes": notes,
        }),
    )?;

    let mut summary = format!("nonlinearity: {}\n", nl.name());
    summary.push_str(&format!(
        "hypothesis (H): {}\n",
        if hypothesis.passed() { "passed".to_string() } else { format!("failed ({})", failures.join("; ")) }
    ));
    summary.push_str(&format!("beta: ({:.6}, {:.6}) from {source}\n", beta.beta_minus, beta.beta_plus));
    for v in &verdicts {
        let bound = |b: Option<f64>| b.map_or("none".to_string(), |x| format!("{x:.6}"));
        summary.push_str(&format!(
            "n = {}: {} ({}); bound_1_5 = {}, bound_1_6 = {}\n",
            v.n,
            v.conclusion,
            v.rule,
            bound(v.bound_general),
            bound(v.bound_subunit)
        ));
        for note in &v.notes {
            summary.push_str(&format!("  note: {note}\n"));
        }
    }
    for note in &notes {
        summary.push_str(&format!("note: {note}\n"));
    }
    out.text("summary.txt", &summary)?;

    // β over the sampled tail, for plotting.
    let end = estimate.as_ref().and_then(|e| e.truncated_at).map_or(config.tail_end, |t| 0.95 * t);
    let steps = 400;
    let mut samples = String::from("t,beta\n");
    for k in 0..steps {
        let t = config.tail_start * (end / config.tail_start).powf(k as f64 / steps as f64);
        if let Ok(b) = beta_at(nl, t) {
            samples.push_str(&format!("{t:e},{b:e}\n"));
        }
    }
    if out.wants(crate::config::Format::Gnuplot) {
        out.csv("beta.csv", &samples)?;
        let script = format!(
            "{}set logscale x\nset xlabel 't'\nset ylabel 'beta'\nplot 'beta.csv' using 1:2 with lines\n",
            gnuplot_preamble("beta.png")
        );
        out.gnuplot("beta.gp", &script)?;
    }
    print!("{summary}");
    Ok(())
}

/// `(β₁, β₃)` from the flags, or bracketing the limits of `β`.
fn beta_window(config: &RunConfig, nl: &Nonlinearity) -> Result<(f64, f64)> {
    if let (Some(b1), Some(b3)) = (config.beta1, config.beta3) {
        return Ok((b1, b3));
    }
    let estimate = estimate_beta_limits(nl, config.tail_start, config.tail_end, BETA_SAMPLES_PER_DECADE).ok();
    let (beta, _) = choose_beta(nl, estimate.as_ref()).ok_or_else(|| CliError::Numeric {
        message: "cannot derive a beta window: no limits available".into(),
        witness: None,
    })?;
    let beta_1 = config.beta1.unwrap_or(0.5 + 0.8 * (beta.beta_minus - 0.5));
    let beta_3 = config.beta3.unwrap_or(beta.beta_plus + 0.1);
    Ok((beta_1, beta_3))
}

fn certificate(config: &RunConfig, nl: &Nonlinearity, out: &mut Artifacts) -> Result<()> {
    let options = CertificateOptions { tolerance: config.tolerance, samples: config.samples, ..Default::default() };
    match config.xi {
        XiChoice::Thm11 => certificate_thm11(config, nl, options, out),
        XiChoice::Thm12 => certificate_half(config, nl, options, out),
    }
}

fn profile_plot(out: &mut Artifacts) -> Result<()> {
    let script = format!(
        "{}set xlabel 't'\nset logscale y\nplot 'profile.csv' using 1:3 with lines title 'g', \\\n     '' using 1:6 with lines title 'E'\n",
        gnuplot_preamble("profile.png")
    );
    out.gnuplot("profile.gp", &script)?;
    Ok(())
}

fn certificate_thm11(config: &RunConfig, nl: &Nonlinearity, options: CertificateOptions, out: &mut Artifacts) -> Result<()> {
    let (beta_1, beta_3) = beta_window(config, nl)?;
    let t0 = match config.t0 {
        Some(t) => t,
        None => select_t0(nl, beta_1, beta_3, 0.1, 1e3)?,
    };
    let t_max = config.t_max.unwrap_or(t0 + DEFAULT_CERTIFICATE_WINDOW);
    let xi = TestFunctionXi::thm11(nl, beta_1, t0)?;
    let validation = xi.validate(t_max, XI_VALIDATION_SAMPLES)?;
    if let Some(t) = validation.negative_discriminant_at {
        return Err(Error::NegativeDiscriminant { t, value: xi.discriminant_at(t)? }.into());
    }
    let profile = CertificateProfile::build(&xi, t_max, options)?;
    let first_integral = verify_first_integral_with(&xi, t_max, options)?;
    let chain = verify_growth_chain_with(&xi, beta_3, t_max, options)?;

    out.csv("profile.csv", &profile.to_csv())?;
    out.json(
        "certificate.json",
        json!({
            "command": "certificate",
            "nonlinearity": nl.name(),
            "xi": "thm11",
            "beta_1": beta_1,
            "beta_3": beta_3,
            "t0": t0,
            "t_max": t_max,
            "validation": validation,
            "first_integral": first_integral,
            "identity_residual": profile.identity_residual,
            "growth_chain": chain,
            "all_chain_checks_hold": chain.all_hold(),
        }),
    )?;
    profile_plot(out)?;
    println!("xi = {beta_1} f/F on [{t0}, {t_max}]");
    println!("first-integral residual: {:e}", first_integral.residual);
    if validation.exceeds_log_derivative_at.is_some() {
        println!("note: xi exceeds f'/f at t = {:?}", validation.exceeds_log_derivative_at);
    }
    println!("growth chain: {}", if chain.all_hold() { "all checks hold" } else { "some checks fail" });
    println!("E/f at window end: {:e}", chain.e_over_f_end);
    Ok(())
}

/// `ξ = f/(2F)`: reports the sign of `ξ′ + ξ²` against `β − ½` at every
/// sample, then builds the profile, which fails on a negative discriminant.
fn certificate_half(config: &RunConfig, nl: &Nonlinearity, options: CertificateOptions, out: &mut Artifacts) -> Result<()> {
    let t0 = config.t0.unwrap_or(1.0);
    let t_max = config.t_max.unwrap_or(t0 + DEFAULT_CERTIFICATE_WINDOW);
    let xi = TestFunctionXi::thm12_half(nl, t0)?;

    let mut table = String::from("t,discriminant,beta_minus_half,signs_match\n");
    let mut mismatches = Vec::new();
    let mut first_negative = None;
    for k in 0..XI_VALIDATION_SAMPLES {
        let t = t0 + (t_max - t0) * k as f64 / (XI_VALIDATION_SAMPLES - 1) as f64;
        let d = xi.discriminant_at(t)?;
        let b = beta_at(nl, t)? - 0.5;
        let matches = d.signum() == b.signum() || d == 0.0 || b == 0.0;
        if !matches {
            mismatches.push(t);
        }
        if d < 0.0 && first_negative.is_none() {
            first_negative = Some((t, d));
        }
        table.push_str(&format!("{t:e},{d:e},{b:e},{matches}\n"));
    }
    out.csv("discriminant.csv", &table)?;
    let mut report = json!({
        "command": "certificate",
        "nonlinearity": nl.name(),
        "xi": "thm12",
        "t0": t0,
        "t_max": t_max,
        "samples": XI_VALIDATION_SAMPLES,
        "sign_mismatches": mismatches,
        "signs_match_beta": mismatches.is_empty(),
        "first_negative_discriminant": first_negative.map(|(t, _)| t),
    });
    println!(
        "sign of xi' + xi^2 matches sign of beta - 1/2 at {}/{} samples",
        XI_VALIDATION_SAMPLES - mismatches.len(),
        XI_VALIDATION_SAMPLES
    );
    if let Some((t, value)) = first_negative {
        out.json("certificate.json", report)?;
        return Err(Error::NegativeDiscriminant { t, value }.into());
    }
    let profile = CertificateProfile::build(&xi, t_max, options)?;
    let first_integral = verify_first_integral_with(&xi, t_max, options)?;
    report["first_integral"] = serde_json::to_value(first_integral).expect("plain fields");
    report["identity_residual"] = json!(profile.identity_residual);
    out.csv("profile.csv", &profile.to_csv())?;
    out.json("certificate.json", report)?;
    profile_plot(out)?;
    println!("first-integral residual: {:e}", first_integral.residual);
    Ok(())
}

fn solve(config: &RunConfig, nl: &Nonlinearity, out: &mut Artifacts) -> Result<()> {
    let n = config.n[0];
    let problem = RadialProblem::with_grid(nl, n, config.grid, config.grid_kind)?;
    let branch = continue_branch(&problem, &config.continuation)?;
    if branch.points.is_empty() {
        return Err(CliError::Numeric { message: format!("no converged point for n = {n}"), witness: None });
    }
    out.csv("branch.csv", &branch.to_csv())?;
    let mut meta = branch.metadata();
    if let Some(gamma) = config.gamma {
        let rows = track_norms(&problem, &branch, gamma, config.sigma, None)?;
        let mut csv = format!("{NORM_CSV_HEADER}\n");
        for row in &rows {
            csv.push_str(&row.csv_row());
            csv.push('\n');
        }
        out.csv("norms.csv", &csv)?;
        meta["norms"] = json!({ "gamma": gamma, "sigma": config.sigma, "last": rows.last() });
    }
    meta["command"] = json!("solve");
    out.json("branch.json", meta)?;
    let script = format!(
        "{}set multiplot layout 1,2\nset xlabel 'lambda'\n\
         plot 'branch.csv' using 1:2 with linespoints title 'sup norm'\n\
         plot 'branch.csv' using 1:3 with linespoints title 'mu1'\nunset multiplot\n",
        gnuplot_preamble("branch.png")
    );
    out.gnuplot("branch.gp", &script)?;

    let last = branch.last().expect("checked non-empty");
    println!("termination: {}", branch.termination);
    match branch.lambda_star {
        Some(l) => println!("lambda* = {l:.9}"),
        None => println!("no fold; last lambda = {:.9} at sup norm {:.6}", last.lambda, last.sup_norm),
    }
    Ok(())
}

fn sweep(config: &RunConfig, nl: &Nonlinearity, out: &mut Artifacts) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", config.jobs)))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        config
            .n
            .par_iter()
            .map(|&n| sweep_row(nl, n, config.grid, config.grid_kind, &config.continuation))
            .collect()
    });
    out.csv("sweep.csv", &sweep_csv(&rows))?;
    out.json(
        "sweep.json",
        json!({
            "command": "sweep",
            "nonlinearity": nl.name(),
            "grid": config.grid,
            "rows": rows,
        }),
    )?;
    let script = format!(
        "{}set xlabel 'n'\nset ylabel 'lambda'\n\
         plot 'sweep.csv' using 1:4 with linespoints title 'lambda*', \\\n     '' using 1:7 with points title 'last lambda'\n",
        gnuplot_preamble("sweep.png")
    );
    out.gnuplot("sweep.gp", &script)?;
    for row in &rows {
        match (&row.error, row.lambda_star) {
            (Some(e), _) => println!("n = {}: failed ({e})", row.n),
            (None, Some(l)) => println!("n = {}: fold at lambda* = {l:.9}", row.n),
            (None, None) => println!("n = {}: {} without fold", row.n, row.termination),
        }
    }
    if rows.iter().all(SweepRow::is_failure) {
        return Err(CliError::Numeric { message: "every sweep row failed".into(), witness: None });
    }
    Ok(())
}
