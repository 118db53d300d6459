//! Pointwise indicators `β(t) = f′F/f²`, `τ(t) = f f″/f′²` and their tail
//! lim inf / lim sup estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Movement of window extremes below which a tail counts as settled.
pub const SETTLE_TOLERANCE: f64 = 1e-3;

/// Minimum geometric sampling density accepted by the estimators.
pub const MIN_SAMPLES_PER_DECADE: usize = 16;

pub fn beta_at(nl: &Nonlinearity, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(t, "beta is sampled at t > 0"));
    }
    let (f, fp) = nl.f_and_fprime(t)?;
    if !(f > 0.0) {
        return Err(Error::domain(t, "f(t) must be positive"));
    }
    let big_f = nl.F(t)?;
    // Ordered to avoid forming f² for large f.
    let value = (fp / f) * (big_f / f);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { t })
    }
}

pub fn tau_at(nl: &Nonlinearity, t: f64) -> Result<f64> {
    let (f, fp, fpp) = nl.second_order(t)?;
    if !(fp > 0.0) {
        return Err(Error::domain(t, "tau needs f'(t) > 0"));
    }
    let value = (f / fp) * (fpp / fp);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceFlag {
    Converged,
    OscillatoryPeriodic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub min: f64,
    pub max: f64,
}

/// Tail estimate of `(lim inf, lim sup)` for an indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub lower: f64,
    pub upper: f64,
    /// The final tail window the extremes were taken over.
    pub window: (f64, f64),
    pub sample_count: usize,
    pub convergence_flag: ConvergenceFlag,
    /// Up to three dyadic windows, oldest first; the last one is `window`.
    pub tail_history: Vec<TailWindow>,
    /// Set when evaluation overflowed before `t_end`; the estimate then
    /// covers `[t_start, truncated_at)` only.
    pub truncated_at: Option<f64>,
}

/// Estimate of `β₋ = lim inf β`, `β₊ = lim sup β`.
pub type BetaEstimate = LimitEstimate;

impl LimitEstimate {
    pub fn beta_minus(&self) -> f64 {
        self.lower
    }
    pub fn beta_plus(&self) -> f64 {
        self.upper
    }
}

fn geometric_grid(t_start: f64, t_end: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t_end / t_start).log10();
    let intervals = ((per_decade as f64) * decades).ceil().max(1.0) as usize;
    let ratio = t_end / t_start;
    (0..=intervals)
        .map(|k| {
            if k == intervals {
                t_end
            } else {
                t_start * ratio.powf(k as f64 / intervals as f64)
            }
        })
        .collect()
}

/// Golden-section refinement of a sampled extremum on `[a, b]`.
fn refine_extremum<F>(g: &F, a: f64, b: f64, seed: f64, maximize: bool) -> f64
where
    F: Fn(f64) -> Result<f64>,
{
    let sign = if maximize { -1.0 } else { 1.0 };
    let eval = |t: f64| g(t).map(|v| sign * v).unwrap_or(f64::INFINITY);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = eval(x2);
        }
    }
    let best = sign * f1.min(f2);
    if maximize {
        best.max(seed)
    } else {
        best.min(seed)
    }
}

fn window_extremes<F>(g: &F, samples: &[(f64, f64)], lo: f64, hi: f64) -> Option<TailWindow>
where
    F: Fn(f64) -> Result<f64>,
{
    let idx: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].0 >= lo && samples[i].0 <= hi)
        .collect();
    if idx.len() < 2 {
        return None;
    }
    let arg = |better: fn(f64, f64) -> bool| {
        let mut best = idx[0];
        for &i in &idx {
            if better(samples[i].1, samples[best].1) {
                best = i;
            }
        }
        best
    };
    let imin = arg(|a, b| a < b);
    let imax = arg(|a, b| a > b);
    let bracket = |i: usize| {
        let a = samples[i.saturating_sub(1).max(idx[0])].0;
        let b = samples[(i + 1).min(*idx.last().unwrap())].0;
        (a, b)
    };
    let (a, b) = bracket(imin);
    let min = refine_extremum(g, a, b, samples[imin].1, false);
    let (a, b) = bracket(imax);
    let max = refine_extremum(g, a, b, samples[imax].1, true);
    Some(TailWindow {
        t_lo: samples[idx[0]].0,
        t_hi: samples[*idx.last().unwrap()].0,
        min,
        max,
    })
}

/// Samples `indicator` on a geometric grid over `[t_start, t_end]` and
/// reads the extremes of the final dyadic window `[t_end/2, t_end]`.
///
/// The flag compares the last three dyadic windows: the tail is settled
/// when the newest pair of windows agrees to [`SETTLE_TOLERANCE`] and the
/// disagreement is not growing; a settled tail is `Converged` if its
/// spread is below the same tolerance and `OscillatoryPeriodic` otherwise.
pub fn estimate_limits<F>(
    indicator: F,
    t_start: f64,
    t_end: f64,
    samples_per_decade: usize,
) -> Result<LimitEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(t_start > 0.0 && t_end > t_start && t_end.is_finite()) {
        return Err(Error::precondition(format!(
            "need 0 < t_start < t_end, got [{t_start}, {t_end}]"
        )));
    }
    if samples_per_decade < MIN_SAMPLES_PER_DECADE {
        return Err(Error::precondition(format!(
            "samples_per_decade must be at least {MIN_SAMPLES_PER_DECADE}"
        )));
    }

    let mut samples = Vec::new();
    let mut truncated_at = None;
    for t in geometric_grid(t_start, t_end, samples_per_decade) {
        match indicator(t) {
            Ok(v) => samples.push((t, v)),
            Err(Error::Overflow { t }) => {
                truncated_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let end = match samples.last() {
        Some(&(t, _)) if samples.len() >= 2 => t,
        _ => return Err(Error::Overflow { t: truncated_at.unwrap_or(t_start) }),
    };
    let bounded = |t: f64| {
        if t > end {
            Err(Error::Overflow { t })
        } else {
            indicator(t)
        }
    };

    let mut history = Vec::new();
    for k in (0..3).rev() {
        let hi = end / f64::powi(2.0, k);
        let lo = (hi / 2.0).max(t_start);
        if hi <= t_start {
            continue;
        }
        if let Some(w) = window_extremes(&bounded, &samples, lo, hi) {
            history.push(w);
        }
    }
    let last = *history.last().ok_or_else(|| {
        Error::precondition("tail window holds fewer than two samples; widen the range")
    })?;

    let drift = |a: &TailWindow, b: &TailWindow| (a.min - b.min).abs().max((a.max - b.max).abs());
    let convergence_flag = match history.len() {
        0 | 1 => ConvergenceFlag::Inconclusive,
        n => {
            let newest = drift(&history[n - 1], &history[n - 2]);
            let settled = newest < SETTLE_TOLERANCE
                && (n < 3 || {
                    let older = drift(&history[n - 2], &history[n - 3]);
                    older < SETTLE_TOLERANCE || newest <= older
                });
            if !settled {
                ConvergenceFlag::Inconclusive
            } else if last.max - last.min < SETTLE_TOLERANCE {
                ConvergenceFlag::Converged
            } else {
                ConvergenceFlag::OscillatoryPeriodic
            }
        }
    };

    Ok(LimitEstimate {
        lower: last.min,
        upper: last.max,
        window: (last.t_lo, last.t_hi),
        sample_count: samples.len(),
        convergence_flag,
        tail_history: history,
        truncated_at,
    })
}

pub fn estimate_beta_limits(
    nl: &Nonlinearity,
    t_start: f64,
    t_end: f64,
    samples_per_decade: usize,
) -> Result<BetaEstimate> {
    estimate_limits(|t| beta_at(nl, t), t_start, t_end, samples_per_decade)
}

/// Outcome of checking `β₋ ≥ 1/(2−τ₋)`, meaningful when `τ₋ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRelation {
    pub required_beta_minus: f64,
    pub beta_minus: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub tau: LimitEstimate,
    pub relation: Option<TauRelation>,
}

impl TauEstimate {
    pub fn tau_minus(&self) -> f64 {
        self.tau.lower
    }
    pub fn tau_plus(&self) -> f64 {
        self.tau.upper
    }
}

/// Slack allowed in the `β₋ ≥ 1/(2−τ₋)` comparison.
pub const TAU_RELATION_TOLERANCE: f64 = 1e-6;

pub fn estimate_tau_limits(
    nl: &Nonlinearity,
    t_start: f64,
    t_end: f64,
    samples_per_decade: usize,
) -> Result<TauEstimate> {
    let tau = estimate_limits(|t| tau_at(nl, t), t_start, t_end, samples_per_decade)?;
    let relation = if tau.lower > 0.0 && tau.lower < 2.0 {
        let end = tau.truncated_at.map(|t| t.min(t_end)).unwrap_or(t_end);
        let beta = estimate_beta_limits(nl, t_start, end, samples_per_decade)?;
        let required = 1.0 / (2.0 - tau.lower);
        Some(TauRelation {
            required_beta_minus: required,
            beta_minus: beta.lower,
            holds: beta.lower >= required - TAU_RELATION_TOLERANCE,
        })
    } else {
        None
    };
    Ok(TauEstimate { tau, relation })
}
