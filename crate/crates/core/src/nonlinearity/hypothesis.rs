use serde::Serialize;

use super::Nonlinearity;

/// Sampled check of hypothesis (H): `f(0) > 0`, `f` nondecreasing and
/// `f(t)/t → ∞`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub t_max: f64,
    pub samples: usize,
    pub f_zero: f64,
    pub positive_at_zero: bool,
    /// Consecutive sample pairs `(t_i, t_{i+1})` with `f(t_{i+1}) < f(t_i)`.
    pub monotonicity_violations: Vec<(f64, f64)>,
    /// Over the samples in `[t_max/10, t_max]`, split into four consecutive
    /// blocks, the block minima of `f(t)/t` strictly increase.
    pub superlinear_trend: bool,
    pub evaluation_errors: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.positive_at_zero
            && self.monotonicity_violations.is_empty()
            && self.superlinear_trend
            && self.evaluation_errors.is_empty()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.positive_at_zero {
            out.push(format!("f(0) = {} is not positive", self.f_zero));
        }
        if let Some((a, b)) = self.monotonicity_violations.first() {
            out.push(format!(
                "f decreases between t = {a} and t = {b} ({} violations)",
                self.monotonicity_violations.len()
            ));
        }
        if !self.superlinear_trend {
            out.push("f(t)/t is not increasing over the last decade of samples".into());
        }
        out.extend(self.evaluation_errors.iter().cloned());
        out
    }
}

/// Samples `f` on a uniform grid over `[0, t_max]`.
pub fn validate_hypothesis_h(nl: &Nonlinearity, t_max: f64, samples: usize) -> HypothesisReport {
    let samples = samples.max(2);
    let mut values = Vec::with_capacity(samples);
    let mut errors = Vec::new();
    for i in 0..samples {
        let t = t_max * i as f64 / (samples - 1) as f64;
        match nl.f(t) {
            Ok(v) => values.push((t, v)),
            Err(e) => {
                errors.push(e.to_string());
                break;
            }
        }
    }

    let f_zero = values.first().map(|&(_, v)| v).unwrap_or(f64::NAN);
    let monotonicity_violations = values
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();

    let tail: Vec<f64> = values
        .iter()
        .filter(|&&(t, _)| t > 0.0 && t >= t_max / 10.0)
        .map(|&(t, v)| v / t)
        .collect();
    let superlinear_trend = increasing_block_minima(&tail, 4);

    HypothesisReport {
        t_max,
        samples,
        f_zero,
        positive_at_zero: f_zero > 0.0,
        monotonicity_violations,
        superlinear_trend,
        evaluation_errors: errors,
    }
}

pub(crate) fn increasing_block_minima(values: &[f64], blocks: usize) -> bool {
    if values.len() < blocks {
        return false;
    }
    let minima: Vec<f64> = (0..blocks)
        .map(|b| {
            let lo = b * values.len() / blocks;
            let hi = (b + 1) * values.len() / blocks;
            values[lo..hi].iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    minima.windows(2).all(|w| w[1] > w[0])
}
