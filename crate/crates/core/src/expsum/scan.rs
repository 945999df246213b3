use rayon::prelude::*;
use serde::Serialize;

use super::{expsum_abs, gelfond_regime, Alpha, ExpSumError, ExpSumParams};

/// Grid sup of `|S_Q(α, z)|` over `α ∈ [0, 1)`.
///
/// `sup_abs` is attained at `argmax_alpha`, so it is a lower bound for the
/// true supremum and `lambda_hat` is a lower estimate of the sup exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormScanResult {
    pub sup_abs: f64,
    pub argmax_alpha: f64,
    pub lambda_hat: f64,
    pub grid_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Requires the Gelfond regime, as the bound checks do.
    Assert,
    ScanOnly,
}

const CHUNK: u64 = 1 << 12;
const LOCAL_POINTS_MAX: u64 = 1 << 16;
const GOLDEN_ITERS: usize = 120;

fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    // larger value wins, ties go to the smaller index
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Scans `α = i / grid_size`, then refines around the best grid point with a
/// local grid fine enough to resolve `q^Q` oscillations and a golden-section
/// search.
pub fn sup_norm_scan(
    digits: u32,
    q: u64,
    p: u64,
    z: i64,
    grid_size: u64,
    mode: ScanMode,
) -> Result<NormScanResult, ExpSumError> {
    if grid_size == 0 {
        return Err(ExpSumError::InvalidArgument(
            "grid_size must be positive".into(),
        ));
    }
    let base = ExpSumParams::new(digits, q, p, z, Alpha::zero())?;
    if mode == ScanMode::Assert && !gelfond_regime(q, p, z) {
        return Err(ExpSumError::NotGelfondRegime);
    }
    let eval = |alpha: Alpha| expsum_abs(&base.with_alpha(alpha));

    let chunks = grid_size.div_ceil(CHUNK);
    let per_chunk: Vec<(f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(grid_size);
            (lo..hi)
                .map(|i| {
                    let alpha = Alpha::Rational {
                        num: i,
                        den: grid_size,
                    };
                    (eval(alpha), i)
                })
                .fold((f64::NEG_INFINITY, u64::MAX), better)
        })
        .collect();
    let (grid_best, best_i) = per_chunk
        .into_iter()
        .fold((f64::NEG_INFINITY, u64::MAX), better);

    let mut best_val = grid_best;
    let mut best_alpha = best_i as f64 / grid_size as f64;

    // local grid over [α* − h, α* + h], h = 1/grid_size
    let h = 1.0 / grid_size as f64;
    let span = base.block_len().unwrap_or(u128::MAX);
    let needed = (span / grid_size as u128)
        .saturating_mul(16)
        .saturating_add(64);
    let local_n = needed.min(LOCAL_POINTS_MAX as u128) as u64;
    let step = 2.0 * h / local_n as f64;
    let center = best_alpha;
    let mut local_best = (best_val, center);
    for i in 0..=local_n {
        let a = center - h + i as f64 * step;
        let v = eval(Alpha::real(a));
        if v > local_best.0 {
            local_best = (v, a);
        }
    }

    // golden section on [a* − step, a* + step]
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (local_best.1 - step, local_best.1 + step);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let mut f1 = eval(Alpha::real(x1));
    let mut f2 = eval(Alpha::real(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = eval(Alpha::real(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = eval(Alpha::real(x2));
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    // refinements must beat the exact grid value by more than rounding noise
    let floor = grid_best * (1.0 + 1e-13);
    for (v, a) in [local_best, (f1, x1), (f2, x2)] {
        if v > best_val.max(floor) {
            best_val = v;
            best_alpha = a;
        }
    }

    let best_alpha = Alpha::real(best_alpha).to_f64();
    let lambda_hat = best_val.ln() / (digits as f64 * (q as f64).ln());
    Ok(NormScanResult {
        sup_abs: best_val,
        argmax_alpha: best_alpha,
        lambda_hat,
        grid_size,
    })
}

/// `q^{λQ}` for the one case where the exponent is known in closed form:
/// `p = q = 2`, where `λ = ln 3 / (2 ln 2)` and the bound is `3^{Q/2}`.
pub fn lemma1_bound(digits: u32, q: u64, p: u64) -> Option<f64> {
    (q == 2 && p == 2).then(|| 3f64.powf(digits as f64 / 2.0))
}
