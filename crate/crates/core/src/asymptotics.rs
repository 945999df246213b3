//! Digit-restricted sums of `τ_k`, their main term and error terms, fitted
//! error exponents and the counting-function error study.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digits::{DigitClassCounter, DigitError, DigitSumStream, ResidueSpec, MAX_LIMIT};
use crate::divisor::{divisor_summatory, DivisorError, SegmentedTau, DEFAULT_SEGMENT};
use crate::expsum::{theta, ExpSumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    ExpSum(#[from] ExpSumError),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("cannot fit exponent: {0}")]
    DegenerateFit(String),
    #[error("Gelfond condition gcd(p, q-1) = 1 fails for p = {p}, q = {q}")]
    GelfondCondition { p: u64, q: u64 },
}

/// `ln 3 / (2 ln 2)`, the sup exponent for `p = q = 2`.
pub fn binary_lambda() -> f64 {
    3f64.ln() / (2.0 * 2f64.ln())
}

/// The known sup exponent `λ(p, q)`, available only for `p = q = 2`.
pub fn reference_lambda(q: u64, p: u64) -> Option<f64> {
    (q == 2 && p == 2).then(binary_lambda)
}

/// Exact rational `num / den`, kept unreduced so a family of values shares
/// one denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: i128,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: i128, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Self { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn abs(self) -> Self {
        Self {
            num: self.num.abs(),
            den: self.den,
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

// ---------------------------------------------------------------------------
// restricted sums

fn residue_table(xmax: u64, q: u64, p: u64) -> Option<Vec<u8>> {
    // largest digit sum below xmax: (#digits) * (q - 1)
    let mut ndig = 0u64;
    let mut v = xmax;
    while v > 0 {
        v /= q;
        ndig += 1;
    }
    let max_sum = ndig.checked_mul(q - 1)?;
    if max_sum > 1 << 22 || p > 255 {
        return None;
    }
    Some((0..=max_sum).map(|s| (s % p) as u8).collect())
}

/// Exact `Σ_{n ≤ g, S(n) ≡ a (mod p)} τ_k(n)` for every `g` in the ascending
/// `grid` and every residue `a`, from a single segmented pass up to the last
/// grid point. Entry `[i][a]` belongs to `grid[i]`.
///
/// Segments are independent and their integer partial sums are combined in
/// segment order, so the result does not depend on the thread count.
pub fn restricted_sums_on_grid(
    grid: &[u64],
    k: u32,
    q: u64,
    p: u64,
    segment: u64,
) -> Result<Vec<Vec<u64>>, AsymptoticsError> {
    validate_grid(grid)?;
    if p < 2 {
        return Err(DigitError::InvalidModulus(p).into());
    }
    if q < 2 {
        return Err(DigitError::InvalidBase(q).into());
    }
    let segment = segment.max(1);
    let xmax = *grid.last().expect("non-empty grid");
    let sieve = SegmentedTau::new(xmax, k)?;
    let table = residue_table(xmax, q, p);
    let p_us = p as usize;
    let nseg = xmax.div_ceil(segment);

    let partials: Vec<Vec<(usize, Vec<u64>)>> = (0..nseg)
        .into_par_iter()
        .map(|si| -> Result<Vec<(usize, Vec<u64>)>, AsymptoticsError> {
            let lo = 1 + si * segment;
            let hi = (lo + segment).min(xmax + 1);
            let mut tau = Vec::new();
            sieve.fill(lo, hi, &mut tau)?;
            let mut stream = DigitSumStream::range(lo, hi, q)?;
            let mut out = Vec::new();
            let mut idx = grid.partition_point(|&g| g < lo);
            let mut n = lo;
            while n < hi {
                let stop = grid[idx].min(hi - 1); // inclusive
                let mut sums = vec![0u64; p_us];
                for _ in n..=stop {
                    let (m, s) = stream.next().expect("stream covers segment");
                    let r = match &table {
                        Some(t) => t[s as usize] as usize,
                        None => (s % p) as usize,
                    };
                    let v = tau[(m - lo) as usize];
                    sums[r] = sums[r]
                        .checked_add(v)
                        .ok_or(DivisorError::Overflow("restricted sum"))?;
                }
                out.push((idx, sums));
                n = stop + 1;
                if n > grid[idx] {
                    idx += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    let mut per_interval = vec![vec![0u64; p_us]; grid.len()];
    for seg in partials {
        for (idx, sums) in seg {
            for (acc, v) in per_interval[idx].iter_mut().zip(sums) {
                *acc = acc
                    .checked_add(v)
                    .ok_or(DivisorError::Overflow("restricted sum"))?;
            }
        }
    }
    let mut running = vec![0u64; p_us];
    let mut out = Vec::with_capacity(grid.len());
    for interval in per_interval {
        for (acc, v) in running.iter_mut().zip(interval) {
            *acc = acc
                .checked_add(v)
                .ok_or(DivisorError::Overflow("restricted sum"))?;
        }
        out.push(running.clone());
    }
    Ok(out)
}

/// `Σ_{n ≤ x, S(n) ≡ a (mod p)} τ_k(n)` for every `a = 0..p`.
pub fn restricted_tau_sums(x: u64, k: u32, q: u64, p: u64) -> Result<Vec<u64>, AsymptoticsError> {
    Ok(restricted_sums_on_grid(&[x], k, q, p, DEFAULT_SEGMENT)?
        .pop()
        .expect("one grid point"))
}

/// `Σ_{n ≤ x, S(n) ≡ a (mod p)} τ_k(n)`.
pub fn restricted_tau_sum(x: u64, k: u32, q: u64, p: u64, a: i64) -> Result<u64, AsymptoticsError> {
    let sums = restricted_tau_sums(x, k, q, p)?;
    Ok(sums[crate::digits::reduce(a, p) as usize])
}

/// `(1/p) Σ_{n ≤ x} τ_k(n)`, exactly.
pub fn main_term(x: u64, k: u32, p: u64) -> Result<Fraction, AsymptoticsError> {
    if p < 2 {
        return Err(DigitError::InvalidModulus(p).into());
    }
    Ok(Fraction::new(divisor_summatory(x, k)? as i128, p))
}

/// `θ(q) < 1/k`.
pub fn theorem_gate(q: u64, k: u32) -> Result<bool, AsymptoticsError> {
    if k < 2 {
        return Err(AsymptoticsError::InvalidSpec(
            "theorem gate needs k >= 2".into(),
        ));
    }
    Ok(theta(q)? < 1.0 / k as f64)
}

fn validate_grid(grid: &[u64]) -> Result<(), AsymptoticsError> {
    if grid.is_empty() {
        return Err(AsymptoticsError::InvalidSpec("empty x grid".into()));
    }
    if grid[0] == 0 {
        return Err(AsymptoticsError::InvalidSpec(
            "grid points must be >= 1".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AsymptoticsError::InvalidSpec(
            "grid must be strictly increasing".into(),
        ));
    }
    if let Some(&x) = grid.iter().find(|&&x| x > MAX_LIMIT) {
        return Err(DigitError::LimitTooLarge(x).into());
    }
    Ok(())
}

/// `round(10^{3 + j/2})` for `j = 0, 1, ...` up to `xmax`.
pub fn default_grid(xmax: u64) -> Vec<u64> {
    (0..)
        .map(|j| 10f64.powf(3.0 + j as f64 / 2.0).round() as u64)
        .take_while(|&x| x <= xmax)
        .collect()
}

// ---------------------------------------------------------------------------
// experiments

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    k: u32,
    q: u64,
    p: u64,
    x_grid: Vec<u64>,
    a_values: Vec<u64>,
    gate: bool,
    gelfond_condition: bool,
}

impl ExperimentSpec {
    /// `a_values = None` selects every residue `0..p`.
    pub fn new(
        k: u32,
        q: u64,
        p: u64,
        x_grid: Vec<u64>,
        a_values: Option<Vec<u64>>,
    ) -> Result<Self, AsymptoticsError> {
        if k < 2 {
            return Err(AsymptoticsError::InvalidSpec("k must be at least 2".into()));
        }
        if q < 2 {
            return Err(DigitError::InvalidBase(q).into());
        }
        if p < 2 {
            return Err(DigitError::InvalidModulus(p).into());
        }
        validate_grid(&x_grid)?;
        let a_values = a_values.unwrap_or_else(|| (0..p).collect());
        if a_values.iter().any(|&a| a >= p) {
            return Err(AsymptoticsError::InvalidSpec(
                "residues must lie in 0..p".into(),
            ));
        }
        let gate = theorem_gate(q, k)?;
        Ok(Self {
            k,
            q,
            p,
            x_grid,
            a_values,
            gate,
            gelfond_condition: crate::digits::gcd(p, q - 1) == 1,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn x_grid(&self) -> &[u64] {
        &self.x_grid
    }

    pub fn a_values(&self) -> &[u64] {
        &self.a_values
    }

    /// Whether `θ(q) < 1/k`; experiments outside the hypothesis still run.
    pub fn gate(&self) -> bool {
        self.gate
    }

    /// Whether `gcd(p, q − 1) = 1`. Otherwise `S(n) ≡ n (mod gcd(p, q − 1))`
    /// and the restricted sums are tied to arithmetic progressions in `n`.
    pub fn gelfond_condition(&self) -> bool {
        self.gelfond_condition
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub x: u64,
    pub a: u64,
    pub restricted_sum: u64,
    pub main_term: Fraction,
    /// `E_a(x) = restricted_sum − main_term`.
    pub error: Fraction,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points_used: usize,
    pub points_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub k: u32,
    pub q: u64,
    pub p: u64,
    pub theta: f64,
    pub gate: bool,
    pub gelfond_condition: bool,
    pub rows: Vec<ErrorRow>,
    /// Full partition total `Σ_{n ≤ x} τ_k(n)` per grid point.
    pub totals: Vec<(u64, u64)>,
    /// `max_a |E_a(x)|` per grid point, over the selected residues.
    pub max_abs_error: Vec<(u64, Fraction)>,
    pub lambda_hat: Option<f64>,
    pub fit_r2: Option<f64>,
    pub fit_note: Option<String>,
    pub lambda_ref: Option<f64>,
    pub predicted_exponent: f64,
}

impl ErrorReport {
    /// `max_a |E_a(x)| / main_term(x)` per grid point.
    pub fn max_relative_error(&self) -> Vec<(u64, f64)> {
        self.max_abs_error
            .iter()
            .map(|&(x, e)| {
                let total = self
                    .totals
                    .iter()
                    .find(|t| t.0 == x)
                    .expect("total per x")
                    .1;
                (x, e.num as f64 / total as f64)
            })
            .collect()
    }

    /// The fitted exponent is within `slack` of the predicted one.
    pub fn within_prediction(&self, slack: f64) -> Option<bool> {
        self.lambda_hat
            .map(|l| l <= self.predicted_exponent + slack)
    }
}

/// Exact `E_a(x)` for every grid point and residue, plus the exponent fit of
/// `max_a |E_a(x)|` against `x`.
pub fn error_table(spec: &ExperimentSpec) -> Result<ErrorReport, AsymptoticsError> {
    error_table_with_segment(spec, DEFAULT_SEGMENT)
}

pub fn error_table_with_segment(
    spec: &ExperimentSpec,
    segment: u64,
) -> Result<ErrorReport, AsymptoticsError> {
    let sums = restricted_sums_on_grid(&spec.x_grid, spec.k, spec.q, spec.p, segment)?;
    let p = spec.p;
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut max_abs = Vec::new();
    for (&x, per_a) in spec.x_grid.iter().zip(&sums) {
        let total: u64 = per_a
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or(DivisorError::Overflow("partition total"))?;
        let main = Fraction::new(total as i128, p);
        let mut worst = Fraction::new(0, p);
        for &a in &spec.a_values {
            let s = per_a[a as usize];
            let error = Fraction::new(s as i128 * p as i128 - total as i128, p);
            if error.num.abs() > worst.num {
                worst = error.abs();
            }
            rows.push(ErrorRow {
                x,
                a,
                restricted_sum: s,
                main_term: main,
                error,
                relative_error: error.num as f64 / total as f64,
            });
        }
        totals.push((x, total));
        max_abs.push((x, worst));
    }

    let points: Vec<(f64, f64)> = max_abs
        .iter()
        .map(|&(x, e)| (x as f64, e.to_f64()))
        .collect();
    let (lambda_hat, fit_r2, fit_note) = match fit_exponent(&points) {
        Ok(fit) => {
            let note = (fit.points_dropped > 0)
                .then(|| format!("{} zero-error points dropped", fit.points_dropped));
            (Some(fit.slope), Some(fit.r2), note)
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    let th = theta(spec.q)?;
    let lambda_ref = reference_lambda(spec.q, spec.p);
    let base = 1.0 - 1.0 / spec.k as f64 + th;
    let predicted_exponent = lambda_ref.map_or(base, |l| base.max(l));
    Ok(ErrorReport {
        k: spec.k,
        q: spec.q,
        p: spec.p,
        theta: th,
        gate: spec.gate,
        gelfond_condition: spec.gelfond_condition,
        rows,
        totals,
        max_abs_error: max_abs,
        lambda_hat,
        fit_r2,
        fit_note,
        lambda_ref,
        predicted_exponent,
    })
}

/// Least-squares slope of `ln |E|` against `ln x`, with `r²`.
/// Points with `|E| = 0` are dropped; at least three must remain.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit, AsymptoticsError> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, e)| *x > 0.0 && e.abs() > 0.0)
        .map(|&(x, e)| (x.ln(), e.abs().ln()))
        .collect();
    let dropped = points.len() - used.len();
    if used.len() < 3 {
        return Err(AsymptoticsError::DegenerateFit(format!(
            "{} usable points (need 3), {} with zero error",
            used.len(),
            dropped
        )));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AsymptoticsError::DegenerateFit(
            "all x values coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r2,
        points_used: used.len(),
        points_dropped: dropped,
    })
}

/// Counts decay check: the ratio sequence may go up at most `allowed` times.
pub fn mostly_decreasing(values: &[f64], allowed: usize) -> bool {
    values.windows(2).filter(|w| w[1] >= w[0]).count() <= allowed
}

// ---------------------------------------------------------------------------
// counting-function errors

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Requires `gcd(p, q − 1) = 1` and applies the power-law bound where `λ` is known.
    Assert,
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GelfondRow {
    pub x: u64,
    pub count: u64,
    /// `x / (m p)`.
    pub main_term: Fraction,
    pub error: Fraction,
    /// `C x^λ` when a bound is applied.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GelfondReport {
    pub spec: ResidueSpec,
    pub rows: Vec<GelfondRow>,
    pub lambda_ref: Option<f64>,
    /// `C = max(|E(x₀)|, 1) / x₀^λ` at the first grid point.
    pub calibration: Option<f64>,
    /// Grid points where `|E(x)| > C x^λ`.
    pub violations: Vec<u64>,
}

impl GelfondReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `T₀(x)` against `x / (mp)` on a grid. For `p = q = 2` in assert mode the
/// errors beyond the first grid point are checked against `C x^λ` with
/// `λ = ln 3 / (2 ln 2)` and `C` calibrated at the first point.
pub fn gelfond_error_check(
    x_grid: &[u64],
    spec: &ResidueSpec,
    mode: CheckMode,
) -> Result<GelfondReport, AsymptoticsError> {
    validate_grid(x_grid)?;
    if mode == CheckMode::Assert && !spec.gelfond_condition() {
        return Err(AsymptoticsError::GelfondCondition {
            p: spec.modulus(),
            q: spec.base(),
        });
    }
    let den = spec.modulus() * spec.n_modulus();
    let lambda_ref = match mode {
        CheckMode::Assert => reference_lambda(spec.base(), spec.modulus()),
        CheckMode::ReportOnly => None,
    };
    let counter = DigitClassCounter::new(spec);
    let mut rows = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let count = counter.count(x)?;
        let error = Fraction::new(count as i128 * den as i128 - x as i128, den);
        rows.push(GelfondRow {
            x,
            count,
            main_term: Fraction::new(x as i128, den),
            error,
            bound: None,
        });
    }
    let mut calibration = None;
    let mut violations = Vec::new();
    if let Some(lambda) = lambda_ref {
        let first = &rows[0];
        let c = first.error.to_f64().abs().max(1.0) / (first.x as f64).powf(lambda);
        calibration = Some(c);
        for row in rows.iter_mut().skip(1) {
            let b = c * (row.x as f64).powf(lambda);
            row.bound = Some(b);
            if row.error.to_f64().abs() > b {
                violations.push(row.x);
            }
        }
    }
    Ok(GelfondReport {
        spec: *spec,
        rows,
        lambda_ref,
        calibration,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restricted_examples() {
        assert_eq!(restricted_tau_sum(10, 2, 2, 2, 0).unwrap(), 15);
        assert_eq!(restricted_tau_sum(10, 2, 2, 2, 1).unwrap(), 12);
        for (k, q, p) in [(2, 2, 2), (3, 10, 3), (5, 7, 4)] {
            let sums = restricted_tau_sums(1, k, q, p).unwrap();
            for (a, s) in sums.iter().enumerate() {
                assert_eq!(*s, u64::from(a as u64 == 1 % p));
            }
        }
    }

    #[test]
    fn main_term_examples() {
        assert_eq!(main_term(10, 2, 2).unwrap(), Fraction::new(27, 2));
        assert_eq!(main_term(1, 4, 5).unwrap(), Fraction::new(1, 5));
        assert_eq!(main_term(5, 3, 3).unwrap(), Fraction::new(16, 3));
    }

    #[test]
    fn error_table_small() {
        let spec = ExperimentSpec::new(2, 2, 2, vec![10], None).unwrap();
        let r = error_table(&spec).unwrap();
        assert_eq!(r.rows[0].error, Fraction::new(3, 2));
        assert_eq!(r.rows[1].error, Fraction::new(-3, 2));
        assert!(r.lambda_hat.is_none());
        assert!(r.fit_note.is_some());
        assert!(!r.gate);
    }

    #[test]
    fn grid_segments_agree() {
        let grid = vec![7, 100, 1000, 4096, 5000];
        let a = restricted_sums_on_grid(&grid, 3, 3, 5, 1 << 20).unwrap();
        let b = restricted_sums_on_grid(&grid, 3, 3, 5, 97).unwrap();
        assert_eq!(a, b);
        for (i, &x) in grid.iter().enumerate() {
            assert_eq!(a[i], restricted_tau_sums(x, 3, 3, 5).unwrap());
        }
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [1e3f64, 1e4, 1e5, 1e6]
            .iter()
            .map(|&x| (x, x.powf(0.6)))
            .collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 0.6).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [1e3f64, 1e4, 1e5]
            .iter()
            .map(|&x| (x, 3.0 * x.sqrt()))
            .collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_exponent(&[(10.0, 0.0), (100.0, 0.0), (1000.0, 0.0)]).is_err());
        let f = fit_exponent(&[(10.0, 0.0), (100.0, 1.0), (1e3, 2.0), (1e4, 4.0)]).unwrap();
        assert_eq!(f.points_dropped, 1);
    }

    #[test]
    fn gate_examples() {
        assert!(!theorem_gate(2, 2).unwrap());
        assert!(theorem_gate(4096, 2).unwrap());
        assert!(theorem_gate(1_000_000, 3).unwrap());
        assert!(!theorem_gate(4096, 3).unwrap());
        assert!(theorem_gate(2, 1).is_err());
    }

    #[test]
    fn default_grid_values() {
        assert_eq!(
            default_grid(10_000_000),
            vec![1000, 3162, 10000, 31623, 100000, 316228, 1000000, 3162278, 10000000]
        );
        assert!(default_grid(999).is_empty());
    }

    #[test]
    fn gelfond_rejects_bad_condition() {
        let spec = ResidueSpec::digit_class(10, 3, 0).unwrap();
        assert!(matches!(
            gelfond_error_check(&[100], &spec, CheckMode::Assert),
            Err(AsymptoticsError::GelfondCondition { .. })
        ));
        assert!(gelfond_error_check(&[100], &spec, CheckMode::ReportOnly).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(ExperimentSpec::new(2, 2, 2, vec![], None).is_err());
        assert!(ExperimentSpec::new(2, 2, 2, vec![10, 10], None).is_err());
        assert!(ExperimentSpec::new(1, 2, 2, vec![10], None).is_err());
        assert!(ExperimentSpec::new(2, 2, 2, vec![10], Some(vec![2])).is_err());
    }
}
