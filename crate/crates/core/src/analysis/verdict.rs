//! Regularity verdicts from `(n, β₋, β₊)`.

use serde::{Deserialize, Serialize, Serializer};

use super::bounds::{dim_bound_general, dim_bound_subunit, max_integer_dimension};
use super::indicators::{BetaEstimate, ConvergenceFlag};
use crate::nonlinearity::{LimitPair, LimitQuality};

/// Absolute tolerance for `β₋ = β₊` on analytic values.
pub const EQUALITY_TOLERANCE: f64 = 1e-6;

/// `β₊` below this admits dimension nine without further conditions.
pub const SMALL_BETA_PLUS: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSource {
    Analytic(LimitQuality),
    Numeric(ConvergenceFlag),
}

/// The `(β₋, β₊)` pair a verdict is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInput {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub source: BetaSource,
}

impl BetaInput {
    pub fn analytic(beta_minus: f64, beta_plus: f64) -> Self {
        BetaInput {
            beta_minus,
            beta_plus,
            source: BetaSource::Analytic(LimitQuality::Exact),
        }
    }

    /// Whether the limits count as equal. Numeric estimates only qualify
    /// when the tail diagnostic reported convergence.
    pub fn limits_equal(&self) -> bool {
        match self.source {
            BetaSource::Analytic(_) => {
                (self.beta_plus - self.beta_minus).abs() <= EQUALITY_TOLERANCE
            }
            BetaSource::Numeric(flag) => flag == ConvergenceFlag::Converged,
        }
    }
}

impl From<LimitPair> for BetaInput {
    fn from(pair: LimitPair) -> Self {
        BetaInput {
            beta_minus: pair.lower,
            beta_plus: pair.upper,
            source: BetaSource::Analytic(pair.quality),
        }
    }
}

impl From<&BetaEstimate> for BetaInput {
    fn from(est: &BetaEstimate) -> Self {
        BetaInput {
            beta_minus: est.lower,
            beta_plus: est.upper,
            source: BetaSource::Numeric(est.convergence_flag),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    #[serde(rename = "Linfty_by_1_5")]
    LinftyByGeneralBound,
    #[serde(rename = "Linfty_by_1_6")]
    LinftyBySubunitBound,
    #[serde(rename = "Linfty_by_cor_a")]
    LinftyByLowDimension,
    #[serde(rename = "Linfty_by_cor_b")]
    LinftyByDimensionNine,
    #[serde(rename = "Linfty_by_thm_1_2_ii")]
    LinftyByGrowthCondition,
    #[serde(rename = "H1_only")]
    H1Only,
    Unknown,
}

impl Conclusion {
    pub fn is_linfty(self) -> bool {
        !matches!(self, Conclusion::H1Only | Conclusion::Unknown)
    }

    pub fn label(self) -> &'static str {
        match self {
            Conclusion::LinftyByGeneralBound => "Linfty_by_1_5",
            Conclusion::LinftyBySubunitBound => "Linfty_by_1_6",
            Conclusion::LinftyByLowDimension => "Linfty_by_cor_a",
            Conclusion::LinftyByDimensionNine => "Linfty_by_cor_b",
            Conclusion::LinftyByGrowthCondition => "Linfty_by_thm_1_2_ii",
            Conclusion::H1Only => "H1_only",
            Conclusion::Unknown => "Unknown",
        }
    }
}

impl std::fmt::Display for Conclusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Results of the sampled growth-condition checks, when they were run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvidence {
    pub h1_condition: Option<bool>,
    pub linfty_condition: Option<bool>,
}

fn join_notes<S: Serializer>(notes: &[String], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&notes.join("; "))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub n: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    #[serde(skip)]
    pub beta_source: BetaSource,
    #[serde(rename = "bound_1_5")]
    pub bound_general: Option<f64>,
    #[serde(rename = "bound_1_6")]
    pub bound_subunit: Option<f64>,
    pub rule: String,
    pub conclusion: Conclusion,
    #[serde(serialize_with = "join_notes")]
    pub notes: Vec<String>,
}

pub const VERDICT_CSV_HEADER: &str = "n,beta_minus,beta_plus,bound_1_5,bound_1_6,rule,conclusion";

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl RegularityVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("verdict fields are serializable")
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{},{},{},{}",
            self.n,
            self.beta_minus,
            self.beta_plus,
            csv_opt(self.bound_general),
            csv_opt(self.bound_subunit),
            self.rule.replace(',', ";"),
            self.conclusion
        )
    }

    /// Replaces the conclusion by `Unknown` when hypothesis (H) could not
    /// be confirmed on the sampled range.
    pub fn downgrade_unverified(&mut self, failures: &[String]) {
        if failures.is_empty() {
            return;
        }
        if self.conclusion != Conclusion::Unknown {
            self.notes.push(format!("would be {} if (H) held", self.conclusion));
        }
        self.conclusion = Conclusion::Unknown;
        self.rule = "hypothesis unverified".into();
        for failure in failures {
            self.notes.push(format!("(H) failed: {failure}"));
        }
    }
}

pub fn classify_regularity(n: f64, beta: impl Into<BetaInput>) -> RegularityVerdict {
    classify_with_evidence(n, beta, GrowthEvidence::default())
}

/// Applies, in order: the general bound, the subunit bound (`β₊ < 1`),
/// `n ≤ 6`, equal limits or `β₊ < 0.7` with `n ≤ 9`, the L∞ growth
/// condition for `n < 5` when it was checked, and finally H¹ regularity.
pub fn classify_with_evidence(
    n: f64,
    beta: impl Into<BetaInput>,
    evidence: GrowthEvidence,
) -> RegularityVerdict {
    let beta = beta.into();
    let (bm, bp) = (beta.beta_minus, beta.beta_plus);
    let mut verdict = RegularityVerdict {
        n,
        beta_minus: bm,
        beta_plus: bp,
        beta_source: beta.source,
        bound_general: None,
        bound_subunit: None,
        rule: "none".into(),
        conclusion: Conclusion::Unknown,
        notes: Vec::new(),
    };
    if !(bm.is_finite() && bp.is_finite() && n.is_finite()) {
        verdict.notes.push("non-finite input".into());
        return verdict;
    }
    if bp < 0.5 - 1e-6 {
        verdict.notes.push(format!("beta_plus = {bp} is below 1/2, which (H) excludes"));
    }
    if bm > 1.0 + 1e-6 {
        verdict.notes.push(format!("beta_minus = {bm} exceeds 1, which (H) excludes"));
    }
    if let BetaSource::Numeric(flag) = beta.source {
        if flag != ConvergenceFlag::Converged {
            let label = serde_json::to_value(flag).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            verdict.notes.push(format!("numeric beta tail is {label}"));
        }
    }

    verdict.bound_general = dim_bound_general(bm, bp).ok();
    verdict.bound_subunit = if bp < 1.0 { dim_bound_subunit(bm, bp).ok() } else { None };
    let admissible = verdict.bound_general.is_some();

    let conclude = |v: &mut RegularityVerdict, c: Conclusion, rule: String| {
        v.conclusion = c;
        v.rule = rule;
    };

    if let Some(b) = verdict.bound_general {
        if n < b {
            conclude(&mut verdict, Conclusion::LinftyByGeneralBound, format!("n < {b:.6} (general bound)"));
            return verdict;
        }
        verdict.notes.push(format!(
            "general bound {b:.6} does not exceed n; largest covered dimension {}",
            max_integer_dimension(b)
        ));
    } else {
        verdict.notes.push("beta_minus <= 1/2: dimension bounds do not apply".into());
    }
    if let Some(b) = verdict.bound_subunit {
        if n < b {
            conclude(&mut verdict, Conclusion::LinftyBySubunitBound, format!("n < {b:.6} (subunit bound)"));
            return verdict;
        }
        verdict.notes.push(format!(
            "subunit bound {b:.6} does not exceed n; largest covered dimension {}",
            max_integer_dimension(b)
        ));
    }
    if admissible && n <= 6.0 {
        conclude(&mut verdict, Conclusion::LinftyByLowDimension, "n <= 6".into());
        return verdict;
    }
    if admissible && n <= 9.0 {
        if beta.limits_equal() {
            conclude(&mut verdict, Conclusion::LinftyByDimensionNine, "n <= 9 with beta_minus = beta_plus".into());
            return verdict;
        }
        if bp < SMALL_BETA_PLUS {
            conclude(&mut verdict, Conclusion::LinftyByDimensionNine, "n <= 9 with beta_plus < 7/10".into());
            return verdict;
        }
    }
    if n < 5.0 && evidence.linfty_condition == Some(true) {
        conclude(&mut verdict, Conclusion::LinftyByGrowthCondition, "n < 5 with the L-infinity growth condition".into());
        return verdict;
    }
    if bm > 0.5 {
        conclude(&mut verdict, Conclusion::H1Only, "beta_minus > 1/2".into());
    } else if evidence.h1_condition == Some(true) {
        conclude(&mut verdict, Conclusion::H1Only, "H1 growth condition".into());
    }
    verdict
}
