//! The trigonometric sum
//!
//! ```text
//! S_Q(α, z) = Σ_{n < q^Q} e^{2πi(αn + (z/p) S(n))}
//! ```
//!
//! evaluated directly and through its factorization over digit positions,
//! together with numerical checks of its sup-norm and L¹-norm bounds.
//!
//! Phases are carried exactly wherever possible: a real `α` is stored as a
//! 64-bit fixed-point fraction of a turn, so `α·m mod 1` is a wrapping
//! multiplication, and a rational `α = b/d` is reduced with integer
//! arithmetic. Only the final `cis` evaluation rounds.

mod gallagher;
mod l1;
mod scan;

pub use gallagher::{gallagher_check, GallagherOutcome, SampledFunction};
pub use l1::{l1_norm, l1_norm_levels, l1_norm_with, L1Method, L1Options, L1Result};
pub use scan::{lemma1_bound, sup_norm_scan, NormScanResult, ScanMode};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::digits::{gcd, reduce};

/// Largest `q^Q` accepted by [`expsum_direct`].
pub const DIRECT_CAP: u64 = 10_000_000;

/// Threshold below which a float phase is treated as an integer.
pub const SINGULAR_EPS: f64 = 1e-12;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpSumError {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("modulus must be greater than 1, got {0}")]
    InvalidModulus(u64),
    #[error("digit length must be at least 1")]
    InvalidLength,
    #[error("rational alpha needs a positive denominator")]
    InvalidAlpha,
    #[error("q^Q = {0} exceeds the direct-summation cap {DIRECT_CAP}")]
    OracleCap(u128),
    #[error("parameters are outside the Gelfond regime (need gcd(z,p)=1, gcd(p,q-1)=1)")]
    NotGelfondRegime,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not reach tolerance {tol:e} within {panels} panels (error estimate {estimate:e})")]
    NonConvergence {
        tol: f64,
        panels: usize,
        estimate: f64,
    },
}

/// A point on the circle `ℝ/ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alpha {
    /// `turns / 2^64`.
    Fixed(u64),
    /// `num / den` with `0 ≤ num < den`.
    Rational { num: u64, den: u64 },
}

impl Alpha {
    /// Rounds a real number to the nearest multiple of `2^-64`, modulo 1.
    pub fn real(alpha: f64) -> Self {
        let frac = alpha.rem_euclid(1.0);
        let scaled = (frac * TWO_POW_64).round();
        // frac just below 1 can round up to 2^64, which is 0 on the circle
        let turns = if scaled >= TWO_POW_64 {
            0
        } else {
            scaled as u64
        };
        Alpha::Fixed(turns)
    }

    pub fn rational(num: i64, den: u64) -> Result<Self, ExpSumError> {
        if den == 0 {
            return Err(ExpSumError::InvalidAlpha);
        }
        Ok(Alpha::Rational {
            num: reduce(num, den),
            den,
        })
    }

    pub fn zero() -> Self {
        Alpha::Fixed(0)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Alpha::Fixed(t) => t as f64 / TWO_POW_64,
            Alpha::Rational { num, den } => num as f64 / den as f64,
        }
    }

    /// `α · m mod 1`, exactly.
    pub fn scale(self, m: u64) -> Self {
        match self {
            Alpha::Fixed(t) => Alpha::Fixed(t.wrapping_mul(m)),
            Alpha::Rational { num, den } => Alpha::Rational {
                num: ((num as u128 * (m % den) as u128) % den as u128) as u64,
                den,
            },
        }
    }

    /// `α · q^e mod 1`, exactly.
    pub fn scale_pow(self, q: u64, e: u32) -> Self {
        match self {
            Alpha::Fixed(t) => Alpha::Fixed(t.wrapping_mul(q.wrapping_pow(e))),
            Alpha::Rational { num, den } => {
                let m = den as u128;
                let mut r = num as u128;
                let b = (q as u128) % m;
                for _ in 0..e {
                    r = r * b % m;
                }
                Alpha::Rational { num: r as u64, den }
            }
        }
    }
}

/// Phase `t = β + z/p` reduced to `(−1/2, 1/2]`, plus whether it is an
/// integer (exactly for rational `β`, to within [`SINGULAR_EPS`] otherwise).
fn centered_phase(beta: Alpha, z_mod_p: u64, p: u64) -> (f64, bool) {
    match beta {
        Alpha::Rational { num, den } => {
            let d = den as u128 * p as u128;
            let nmr = (num as u128 * p as u128 + z_mod_p as u128 * den as u128) % d;
            if nmr == 0 {
                return (0.0, true);
            }
            let t = if 2 * nmr > d {
                -((d - nmr) as f64 / d as f64)
            } else {
                nmr as f64 / d as f64
            };
            (t, false)
        }
        Alpha::Fixed(turns) => {
            let mut t = turns as f64 / TWO_POW_64 + z_mod_p as f64 / p as f64;
            t -= t.round();
            (t, t.abs() < SINGULAR_EPS)
        }
    }
}

/// `Σ_{u<q} e^{2πiut} = e^{πi(q−1)t} · sin(πqt)/sin(πt)`, with the removable
/// singularity at integer `t` giving `q`.
fn geometric_factor(t: f64, singular: bool, q: u64) -> Complex64 {
    let qf = q as f64;
    let rot = Complex64::from_polar(1.0, PI * (qf - 1.0) * t);
    if singular {
        return rot * qf;
    }
    rot * ((PI * qf * t).sin() / (PI * t).sin())
}

/// Parameters `(Q, q, p, z, α)` of `S_Q(α, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSumParams {
    digits: u32,
    q: u64,
    p: u64,
    z: i64,
    alpha: Alpha,
}

impl ExpSumParams {
    pub fn new(digits: u32, q: u64, p: u64, z: i64, alpha: Alpha) -> Result<Self, ExpSumError> {
        if digits == 0 {
            return Err(ExpSumError::InvalidLength);
        }
        if q < 2 {
            return Err(ExpSumError::InvalidBase(q));
        }
        if p < 2 {
            return Err(ExpSumError::InvalidModulus(p));
        }
        if let Alpha::Rational { den: 0, .. } = alpha {
            return Err(ExpSumError::InvalidAlpha);
        }
        Ok(Self {
            digits,
            q,
            p,
            z,
            alpha,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn base(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn z(&self) -> i64 {
        self.z
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn with_alpha(self, alpha: Alpha) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_digits(self, digits: u32) -> Result<Self, ExpSumError> {
        Self::new(digits, self.q, self.p, self.z, self.alpha)
    }

    pub fn z_mod_p(&self) -> u64 {
        reduce(self.z, self.p)
    }

    /// `z ≢ 0`, `gcd(z, p) = 1` and `gcd(p, q − 1) = 1`.
    pub fn gelfond_regime(&self) -> bool {
        gelfond_regime(self.q, self.p, self.z)
    }

    /// `q^Q` if it fits in 128 bits.
    pub fn block_len(&self) -> Option<u128> {
        (self.q as u128).checked_pow(self.digits)
    }
}

pub fn gelfond_regime(q: u64, p: u64, z: i64) -> bool {
    let zr = reduce(z, p);
    zr != 0 && gcd(zr, p) == 1 && gcd(p, q - 1) == 1
}

/// `|S_Q| ≤ q^Q`.
pub fn trivial_bound(digits: u32, q: u64) -> f64 {
    (q as f64).powi(digits as i32)
}

/// Sums of `e^{2πiαn}` over `n < q^Q`, grouped by the digit sum `S(n)`.
///
/// Contracting with the character `s ↦ e^{2πizs/p}` gives `S_Q(α, z)` for any
/// `(p, z)` without another pass over `n`.
#[derive(Debug, Clone)]
pub struct DigitSumProfile {
    digits: u32,
    q: u64,
    by_digit_sum: Vec<Complex64>,
}

impl DigitSumProfile {
    pub fn character_sum(&self, p: u64, z: i64) -> Complex64 {
        let zr = reduce(z, p);
        self.by_digit_sum
            .iter()
            .enumerate()
            .map(|(s, w)| {
                let k = (zr as u128 * s as u128 % p as u128) as f64;
                w * Complex64::from_polar(1.0, 2.0 * PI * k / p as f64)
            })
            .sum()
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn base(&self) -> u64 {
        self.q
    }
}

const LOW_BITS: u32 = 10;

/// Direct summation over `n < q^Q` of `e^{2πiαn}`, bucketed by `S(n)`.
pub fn digit_sum_profile(
    digits: u32,
    q: u64,
    alpha: Alpha,
) -> Result<DigitSumProfile, ExpSumError> {
    if digits == 0 {
        return Err(ExpSumError::InvalidLength);
    }
    if q < 2 {
        return Err(ExpSumError::InvalidBase(q));
    }
    let total = (q as u128).pow(digits);
    if total > DIRECT_CAP as u128 {
        return Err(ExpSumError::OracleCap(total));
    }
    let total = total as u64;
    let turns = match alpha {
        Alpha::Fixed(t) => t,
        Alpha::Rational { .. } => match Alpha::real(alpha.to_f64()) {
            Alpha::Fixed(t) => t,
            Alpha::Rational { .. } => unreachable!(),
        },
    };
    let cis = |t: u64| Complex64::from_polar(1.0, 2.0 * PI * (t as f64 / TWO_POW_64));
    // e^{2πiαn} = hi[n >> LOW_BITS] · lo[n & mask], each entry from an exact phase
    let block = 1u64 << LOW_BITS;
    let lo: Vec<Complex64> = (0..block).map(|j| cis(turns.wrapping_mul(j))).collect();
    let max_sum = digits as usize * (q as usize - 1);
    let mut acc = vec![Complex64::new(0.0, 0.0); max_sum + 1];
    let mut part = vec![Complex64::new(0.0, 0.0); max_sum + 1];
    let mut stream = crate::digits::DigitSumStream::range(0, total, q)
        .map_err(|_| ExpSumError::InvalidBase(q))?;
    let mut start = 0u64;
    while start < total {
        let end = (start + block).min(total);
        part.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for w in &lo[..(end - start) as usize] {
            let (_, s) = stream.next().expect("stream covers range");
            part[s as usize] += w;
        }
        let hi = cis(turns.wrapping_mul(start));
        for (a, w) in acc.iter_mut().zip(&part) {
            *a += hi * w;
        }
        start = end;
    }
    Ok(DigitSumProfile {
        digits,
        q,
        by_digit_sum: acc,
    })
}

/// `S_Q(α, z)` by summing all `q^Q` terms. Oracle-scale only.
pub fn expsum_direct(params: &ExpSumParams) -> Result<Complex64, ExpSumError> {
    let profile = digit_sum_profile(params.digits, params.q, params.alpha)?;
    Ok(profile.character_sum(params.p, params.z))
}

/// The factor `Σ_{u<q} e^{2πiu(αq^l + z/p)}` for digit position `l`.
pub fn digit_factor(params: &ExpSumParams, position: u32) -> Complex64 {
    let beta = params.alpha.scale_pow(params.q, position);
    let (t, singular) = centered_phase(beta, params.z_mod_p(), params.p);
    geometric_factor(t, singular, params.q)
}

/// `S_Q(α, z)` as the product of its `Q` digit-position factors.
pub fn expsum_product(params: &ExpSumParams) -> Complex64 {
    let zr = params.z_mod_p();
    let mut beta = params.alpha;
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..params.digits {
        let (t, singular) = centered_phase(beta, zr, params.p);
        acc *= geometric_factor(t, singular, params.q);
        beta = beta.scale(params.q);
    }
    acc
}

/// `|S_Q(α, z)|` from the product of factor moduli.
pub fn expsum_abs(params: &ExpSumParams) -> f64 {
    let zr = params.z_mod_p();
    let qf = params.q as f64;
    let mut beta = params.alpha;
    let mut acc = 1.0;
    for _ in 0..params.digits {
        let (t, singular) = centered_phase(beta, zr, params.p);
        acc *= if singular {
            qf
        } else {
            ((PI * qf * t).sin() / (PI * t).sin()).abs()
        };
        beta = beta.scale(params.q);
    }
    acc
}

/// `θ(q) = ln(6(1 + ln q)) / ln q`.
pub fn theta(q: u64) -> Result<f64, ExpSumError> {
    if q < 2 {
        return Err(ExpSumError::InvalidBase(q));
    }
    let lq = (q as f64).ln();
    Ok((6.0 * (1.0 + lq)).ln() / lq)
}

/// `q^{Qθ(q)} = (6(1 + ln q))^Q`.
pub fn theta_bound(digits: u32, q: u64) -> Result<f64, ExpSumError> {
    let lq = (q as f64).ln();
    Ok((digits as f64 * theta(q)? * lq).exp())
}

/// Distance to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Both sides of `(1/q) Σ_{j<q} min(q, 1/(2‖(x+j)/q + z/p‖)) ≤ 6(1 + ln q)`.
///
/// A zero distance selects `q`.
pub fn kernel_sum_bound_check(x: f64, q: u64, p: u64, z: i64) -> Result<(f64, f64), ExpSumError> {
    if q < 2 {
        return Err(ExpSumError::InvalidBase(q));
    }
    if p < 2 {
        return Err(ExpSumError::InvalidModulus(p));
    }
    let qf = q as f64;
    let zr = reduce(z, p) as f64 / p as f64;
    let lhs = (0..q)
        .map(|j| {
            let d = dist_to_int((x + j as f64) / qf + zr);
            if d == 0.0 {
                qf
            } else {
                qf.min(1.0 / (2.0 * d))
            }
        })
        .sum::<f64>()
        / qf;
    Ok((lhs, 6.0 * (1.0 + qf.ln())))
}
