use num_complex::Complex64;
use serde::Serialize;

use super::ExpSumError;

/// Values of a complex function on the uniform grid `t0 + i·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub t0: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    /// Samples `f` at `samples` equally spaced points covering `[t0, t0 + len]`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(t0: f64, len: f64, samples: usize, f: F) -> Self {
        let samples = samples.max(2);
        let step = len / (samples - 1) as f64;
        let values = (0..samples).map(|i| f(t0 + i as f64 * step)).collect();
        Self { t0, step, values }
    }

    pub fn len(&self) -> f64 {
        self.step * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear interpolation between neighbouring samples.
    pub fn at(&self, t: f64) -> Complex64 {
        let last = self.values.len() - 1;
        let u = ((t - self.t0) / self.step).clamp(0.0, last as f64);
        let i = (u.floor() as usize).min(last.saturating_sub(1));
        let frac = u - i as f64;
        if last == 0 {
            return self.values[0];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Trapezoid rule for `∫ |f|`.
    pub fn abs_integral(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let inner: f64 = self.values[1..n - 1].iter().map(|v| v.norm()).sum();
        self.step * (inner + 0.5 * (self.values[0].norm() + self.values[n - 1].norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GallagherOutcome {
    /// `Σ_{t∈F} |f(t)|`.
    pub lhs: f64,
    /// `(1/δ) ∫|f| + ∫|f'|`.
    pub rhs: f64,
    pub slack: f64,
}

/// Both sides of the large-sieve inequality
/// `Σ_{t∈F} |f(t)| ≤ (1/δ)∫|f| + ∫|f'|` for a `δ`-separated set `F` inside
/// `[T0 + δ/2, T0 + T − δ/2]`.
pub fn gallagher_check(
    f: &SampledFunction,
    df: &SampledFunction,
    delta: f64,
    points: &[f64],
) -> Result<GallagherOutcome, ExpSumError> {
    let bad = |msg: &str| Err(ExpSumError::InvalidArgument(msg.to_string()));
    if f.values.len() < 2 || f.values.len() != df.values.len() || f.t0 != df.t0 || f.step != df.step
    {
        return bad("f and f' must be sampled on the same grid of at least two points");
    }
    let total = f.len();
    if delta.is_nan() || delta <= 0.0 || total < delta {
        return bad("need T >= delta > 0");
    }
    let slop = 1e-12 * total.max(1.0);
    let (lo, hi) = (f.t0 + delta / 2.0, f.t0 + total - delta / 2.0);
    if points.iter().any(|&t| !(t >= lo - slop && t <= hi + slop)) {
        return bad("points must lie in [T0 + delta/2, T0 + T - delta/2]");
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= delta) {
        return bad("points must be pairwise more than delta apart");
    }
    let lhs: f64 = points.iter().map(|&t| f.at(t).norm()).sum();
    let rhs = f.abs_integral() / delta + df.abs_integral();
    Ok(GallagherOutcome {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}
