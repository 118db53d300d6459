//! Adaptive Gauss–Kronrod (G7/K15) quadrature and a cached running integral.

use std::collections::BinaryHeap;
use std::sync::RwLock;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod abscissae (and the centre).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Requested accuracy: the estimated error must not exceed
/// `max(absolute, relative·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Tolerance {
    pub const fn new(absolute: f64, relative: f64) -> Self {
        Tolerance { absolute, relative }
    }

    /// Absolute tolerance proportional to the interval length, with a
    /// relative floor for integrals too large to meet it in double precision.
    pub fn per_unit_length(per_unit: f64, length: f64) -> Self {
        Tolerance {
            absolute: per_unit * length.abs().max(f64::MIN_POSITIVE),
            relative: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_gauss = fc * WG[3];
    let mut res_kronrod = fc * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(centre - x);
        let f2 = f(centre + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_kronrod - res_gauss) * half;
    let scale = half.abs();
    (
        res_kronrod * half,
        rescale_error(err, res_abs * scale, res_asc * scale),
    )
}

/// Maximum number of subintervals before giving up.
pub const SUBDIVISION_LIMIT: usize = 2000;

/// Integrates `f` over `[a, b]` by globally adaptive bisection of the
/// segment with the largest error estimate.
///
/// A non-finite integrand value surfaces as a `Domain` error at the
/// offending abscissa.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut bad_point: Option<f64> = None;
    let mut evaluations = 0usize;
    let mut g = |x: f64| {
        evaluations += 1;
        let y = f(x);
        if !y.is_finite() {
            if bad_point.is_none() {
                bad_point = Some(x);
            }
            return 0.0;
        }
        y
    };

    let (value, error) = kronrod15(&mut g, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_error = error;
    let mut segments = 1usize;

    loop {
        if total_error <= tol.absolute.max(tol.relative * total.abs()) {
            break;
        }
        if segments >= SUBDIVISION_LIMIT {
            return Err(Error::QuadratureFailure {
                a,
                b,
                error: total_error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            return Err(Error::QuadratureFailure {
                a,
                b,
                error: total_error,
            });
        }
        let (v1, e1) = kronrod15(&mut g, worst.a, mid);
        let (v2, e2) = kronrod15(&mut g, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        segments += 1;
    }

    if let Some(x) = bad_point {
        return Err(Error::domain(x, "integrand is not finite"));
    }
    // Re-sum to shed the drift of incremental updates.
    let value: f64 = {
        let mut parts: Vec<Segment> = heap.into_vec();
        parts.sort_by(|p, q| p.a.total_cmp(&q.a));
        parts.iter().map(|s| s.value).sum()
    };
    Ok(Integral {
        value,
        error: total_error.max(0.0),
        evaluations,
    })
}

/// Depth limit of the recursive Simpson rule.
pub const SIMPSON_DEPTH_LIMIT: usize = 50;

/// Adaptive Simpson quadrature without Richardson extrapolation.
///
/// Its error tracks the requested tolerance instead of landing far below
/// it, which makes it the rule of choice for convergence studies.
pub fn integrate_simpson<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 0usize;
    let mut bad_point: Option<f64> = None;
    let mut g = |x: f64| {
        evaluations += 1;
        let y = f(x);
        if !y.is_finite() {
            bad_point.get_or_insert(x);
            return 0.0;
        }
        y
    };
    let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let target = tol.absolute.max(tol.relative * whole.abs());

    struct Frame {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        target: f64,
        depth: usize,
    }
    let mut stack = vec![Frame { a, b, fa, fm, fb, whole, target, depth: 0 }];
    let mut value = 0.0;
    let mut error = 0.0;
    while let Some(fr) = stack.pop() {
        let m = 0.5 * (fr.a + fr.b);
        let (lm, rm) = (0.5 * (fr.a + m), 0.5 * (m + fr.b));
        let (flm, frm) = (g(lm), g(rm));
        let left = (m - fr.a) / 6.0 * (fr.fa + 4.0 * flm + fr.fm);
        let right = (fr.b - m) / 6.0 * (fr.fm + 4.0 * frm + fr.fb);
        let estimate = (left + right - fr.whole).abs() / 15.0;
        if estimate <= fr.target {
            value += left + right;
            error += estimate;
        } else if fr.depth >= SIMPSON_DEPTH_LIMIT {
            break;
        } else {
            let half = 0.5 * fr.target;
            let depth = fr.depth + 1;
            stack.push(Frame { a: m, b: fr.b, fa: fr.fm, fm: frm, fb: fr.fb, whole: right, target: half, depth });
            stack.push(Frame { a: fr.a, b: m, fa: fr.fa, fm: flm, fb: fr.fm, whole: left, target: half, depth });
        }
    }
    if let Some(x) = bad_point {
        return Err(Error::domain(x, "integrand is not finite"));
    }
    if !stack.is_empty() {
        return Err(Error::QuadratureFailure { a, b, error });
    }
    Ok(Integral { value, error, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    GaussKronrod,
    Simpson,
}

pub fn integrate_with<F>(rule: QuadratureRule, f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    match rule {
        QuadratureRule::GaussKronrod => integrate(f, a, b, tol),
        QuadratureRule::Simpson => integrate_simpson(f, a, b, tol),
    }
}

/// Running integral `∫_0^t f` with cached checkpoints.
///
/// Each query integrates only from the nearest checkpoint at or below `t`
/// and stores `t` as a new checkpoint, so sweeping increasing `t` costs
/// `O(Δt)` per call. The cache is guarded by a lock and can be shared
/// between threads.
#[derive(Debug)]
pub struct CumulativeIntegral {
    per_unit_tolerance: f64,
    checkpoints: RwLock<Vec<(f64, f64)>>,
}

/// Upper bound on stored checkpoints; beyond it new queries are answered
/// without being cached.
const CHECKPOINT_LIMIT: usize = 1 << 16;

impl CumulativeIntegral {
    pub fn new(per_unit_tolerance: f64) -> Self {
        CumulativeIntegral {
            per_unit_tolerance,
            checkpoints: RwLock::new(vec![(0.0, 0.0)]),
        }
    }

    pub fn per_unit_tolerance(&self) -> f64 {
        self.per_unit_tolerance
    }

    pub fn checkpoint_count(&self) -> usize {
        self.checkpoints.read().map(|c| c.len()).unwrap_or(0)
    }

    pub fn evaluate<F>(&self, f: F, t: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        if t == 0.0 {
            return Ok(0.0);
        }
        let (start, base) = {
            let cache = self.checkpoints.read().expect("checkpoint lock poisoned");
            let idx = cache.partition_point(|&(x, _)| x <= t);
            cache[idx.saturating_sub(1)]
        };
        if start == t {
            return Ok(base);
        }
        let piece = integrate(
            f,
            start,
            t,
            Tolerance::per_unit_length(self.per_unit_tolerance, t - start),
        )?;
        let value = base + piece.value;
        let mut cache = self.checkpoints.write().expect("checkpoint lock poisoned");
        if cache.len() < CHECKPOINT_LIMIT {
            let idx = cache.partition_point(|&(x, _)| x < t);
            if idx >= cache.len() || cache[idx].0 != t {
                cache.insert(idx, (t, value));
            }
        }
        Ok(value)
    }
}

impl Clone for CumulativeIntegral {
    fn clone(&self) -> Self {
        let cache = self.checkpoints.read().expect("checkpoint lock poisoned").clone();
        CumulativeIntegral {
            per_unit_tolerance: self.per_unit_tolerance,
            checkpoints: RwLock::new(cache),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_meets_tolerance_and_tracks_it() {
        let exact = 1f64.exp() - 1.0;
        let mut errors = Vec::new();
        for k in 3..9 {
            let tol = Tolerance::new(10f64.powi(-k), 0.0);
            let r = integrate_simpson(f64::exp, 0.0, 1.0, tol).unwrap();
            let err = (r.value - exact).abs();
            assert!(err <= tol.absolute, "{k}: {err}");
            errors.push(err);
        }
        assert!(errors[5] < 1e-3 * errors[0]);
        assert!(matches!(
            integrate_simpson(|x| 1.0 / x, 0.0, 1.0, Tolerance::new(1e-8, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    fn tight() -> Tolerance {
        Tolerance::new(1e-12, 1e-13)
    }

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, tight()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(f64::exp, 0.0, 1.0, tight()).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, tight()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand_adapts() {
        // ∫_0^1 1/(1e-4 + (x-0.3)^2) dx
        let eps = 1e-4f64;
        let exact = ((0.7 / eps.sqrt()).atan() + (0.3 / eps.sqrt()).atan()) / eps.sqrt();
        let r = integrate(|x| 1.0 / (eps + (x - 0.3).powi(2)), 0.0, 1.0, tight()).unwrap();
        assert!((r.value - exact).abs() < 1e-10 * exact);
        assert!(r.evaluations > 15);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x| x, 1.0, 0.0, tight()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_integrand_is_a_domain_error() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, tight());
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn singular_integrand_fails_cleanly() {
        let r = integrate(|x| 1.0 / x.abs().powf(1.2), -1.0, 1.0, tight());
        assert!(r.is_err());
    }

    #[test]
    fn cumulative_cache_grows_and_agrees() {
        let cache = CumulativeIntegral::new(1e-10);
        let mut last = 0.0;
        for k in 1..=50 {
            let t = 0.2 * k as f64;
            let v = cache.evaluate(f64::cos, t).unwrap();
            assert!((v - t.sin()).abs() < 1e-12);
            last = v;
        }
        assert_eq!(cache.checkpoint_count(), 51);
        // Query below the frontier uses an interior checkpoint.
        let v = cache.evaluate(f64::cos, 3.3).unwrap();
        assert!((v - 3.3f64.sin()).abs() < 1e-12);
        assert!(last.is_finite());
    }
}
