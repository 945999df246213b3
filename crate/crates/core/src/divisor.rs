//! The k-fold divisor function `τ_k(n)`: pointwise by factorization, as a full
//! table by repeated Dirichlet convolution with `1`, segment by segment for
//! streaming sums, and through its summatory function.

use thiserror::Error;

use crate::digits::MAX_LIMIT;

/// Default segment length for streaming sieves.
pub const DEFAULT_SEGMENT: u64 = 1 << 22;

/// Default memory budget for a full [`TauTable`] build.
pub const DEFAULT_TABLE_BUDGET_BYTES: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DivisorError {
    #[error("argument must be positive")]
    ZeroArgument,
    #[error("order k must be at least 1")]
    InvalidOrder,
    #[error("limit must be at least 1")]
    EmptyLimit,
    #[error("limit {0} exceeds 2^63 - 1")]
    LimitTooLarge(u64),
    #[error("sieve needs {needed} bytes, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

// ---------------------------------------------------------------------------
// factorization

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho. `n` must be odd, composite and not a
/// perfect power of a small prime.
fn rho_split(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut r, mut q) = (2u64, 2u64, 1u64, 1u64, 1u64);
        let mut ys = 2u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = crate::digits::gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = crate::digits::gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn collect_factors(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = rho_split(n);
    collect_factors(d, out);
    collect_factors(n / d, out);
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>, DivisorError> {
    if n == 0 {
        return Err(DivisorError::ZeroArgument);
    }
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    let mut p = 3;
    while p <= TRIAL_LIMIT && p * p <= n {
        push(p, &mut n);
        p += 2;
    }
    if n > 1 {
        if p * p > n {
            out.push((n, 1));
        } else {
            let mut big = Vec::new();
            collect_factors(n, &mut big);
            big.sort_unstable();
            for f in big {
                match out.last_mut() {
                    Some((last, e)) if *last == f => *e += 1,
                    _ => out.push((f, 1)),
                }
            }
        }
    }
    Ok(out)
}

/// `C(e + k − 1, k − 1)`: the number of ways to split `p^e` among `k` ordered factors.
pub fn prime_power_weight(e: u32, k: u32) -> Result<u64, DivisorError> {
    if k == 0 {
        return Err(DivisorError::InvalidOrder);
    }
    // C(e + k - 1, e), built incrementally so every step is an exact integer.
    let mut c: u128 = 1;
    for i in 1..=e as u128 {
        c = c * (k as u128 - 1 + i) / i;
        if c > u64::MAX as u128 {
            return Err(DivisorError::Overflow("binomial weight"));
        }
    }
    Ok(c as u64)
}

/// `τ_k(n)`, the number of ordered `k`-tuples of positive integers with product `n`.
pub fn tau_k_of(n: u64, k: u32) -> Result<u64, DivisorError> {
    if k == 0 {
        return Err(DivisorError::InvalidOrder);
    }
    if n == 0 {
        return Err(DivisorError::ZeroArgument);
    }
    if k == 1 {
        return Ok(1);
    }
    factorize(n)?.into_iter().try_fold(1u64, |acc, (_, e)| {
        acc.checked_mul(prime_power_weight(e, k)?)
            .ok_or(DivisorError::Overflow("tau_k product"))
    })
}

// ---------------------------------------------------------------------------
// full table

/// `τ_k(n)` for `1 ≤ n ≤ x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauTable {
    x: u64,
    k: u32,
    values: Vec<u64>,
}

impl TauTable {
    pub fn limit(&self) -> u64 {
        self.x
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// `τ_k(n)`; panics for `n = 0` or `n > x`.
    pub fn get(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.x, "n = {n} outside 1..={}", self.x);
        self.values[n as usize]
    }

    /// Values for `n = 1..=x`.
    pub fn values(&self) -> &[u64] {
        &self.values[1..]
    }

    pub fn sum(&self) -> Result<u64, DivisorError> {
        self.values()
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or(DivisorError::Overflow("table sum"))
    }
}

pub fn table_bytes(x: u64) -> u64 {
    2 * 8 * (x + 1)
}

/// Builds the table with `k − 1` harmonic passes `τ_j = 1 ∗ τ_{j−1}`.
pub fn sieve_tau_k(x: u64, k: u32) -> Result<TauTable, DivisorError> {
    sieve_tau_k_with_budget(x, k, DEFAULT_TABLE_BUDGET_BYTES)
}

pub fn sieve_tau_k_with_budget(x: u64, k: u32, budget: u64) -> Result<TauTable, DivisorError> {
    if k == 0 {
        return Err(DivisorError::InvalidOrder);
    }
    if x == 0 {
        return Err(DivisorError::EmptyLimit);
    }
    let needed = table_bytes(x);
    if needed > budget {
        return Err(DivisorError::BudgetExceeded { needed, budget });
    }
    let len = x as usize + 1;
    let mut values = vec![1u64; len];
    values[0] = 0;
    let mut next = vec![0u64; len];
    for _ in 1..k {
        next.iter_mut().for_each(|v| *v = 0);
        for (d, &v) in values.iter().enumerate().skip(1) {
            for m in (d..len).step_by(d) {
                next[m] = next[m]
                    .checked_add(v)
                    .ok_or(DivisorError::Overflow("harmonic pass"))?;
            }
        }
        std::mem::swap(&mut values, &mut next);
    }
    Ok(TauTable { x, k, values })
}

// ---------------------------------------------------------------------------
// segmented sieve

/// Primes up to `limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub(crate) fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Computes `τ_k` on arbitrary windows `[lo, hi)` below a fixed limit by
/// dividing out every prime up to the square root of the limit.
#[derive(Debug, Clone)]
pub struct SegmentedTau {
    k: u32,
    limit: u64,
    primes: Vec<u64>,
    weights: Vec<u64>,
}

impl SegmentedTau {
    pub fn new(limit: u64, k: u32) -> Result<Self, DivisorError> {
        if k == 0 {
            return Err(DivisorError::InvalidOrder);
        }
        if limit == 0 {
            return Err(DivisorError::EmptyLimit);
        }
        if limit > MAX_LIMIT {
            return Err(DivisorError::LimitTooLarge(limit));
        }
        let weights = (0..64)
            .map(|e| prime_power_weight(e, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            k,
            limit,
            primes: primes_up_to(isqrt(limit)),
            weights,
        })
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Fills `out` with `τ_k(n)` for `n` in `lo..hi`, where `1 ≤ lo` and `hi ≤ limit + 1`.
    pub fn fill(&self, lo: u64, hi: u64, out: &mut Vec<u64>) -> Result<(), DivisorError> {
        assert!(lo >= 1 && hi <= self.limit + 1 && lo <= hi);
        let len = (hi - lo) as usize;
        out.clear();
        out.resize(len, 1);
        if self.k == 1 {
            return Ok(());
        }
        let mut rest: Vec<u64> = (lo..hi).collect();
        for &p in &self.primes {
            if p * p >= hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut n = first;
            while n < hi {
                let i = (n - lo) as usize;
                let mut r = rest[i] / p;
                let mut e = 1;
                while r.is_multiple_of(p) {
                    r /= p;
                    e += 1;
                }
                rest[i] = r;
                out[i] = out[i]
                    .checked_mul(self.weights[e])
                    .ok_or(DivisorError::Overflow("segmented tau"))?;
                n += p;
            }
        }
        let k = self.k as u64;
        for (v, &r) in out.iter_mut().zip(&rest) {
            if r > 1 {
                *v = v
                    .checked_mul(k)
                    .ok_or(DivisorError::Overflow("segmented tau"))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// summatory function

/// Index for the set `{⌊x/d⌋ : 1 ≤ d ≤ x}`.
struct QuotientSet {
    x: u64,
    root: u64,
    values: Vec<u64>,
}

impl QuotientSet {
    fn new(x: u64) -> Self {
        let root = isqrt(x);
        let mut values = Vec::new();
        let mut d = 1;
        while d <= x {
            let v = x / d;
            values.push(v);
            d = x / v + 1;
        }
        values.reverse(); // ascending
        Self { x, root, values }
    }

    fn index(&self, v: u64) -> usize {
        if v <= self.root {
            // values 1..=root are all present and occupy the first slots,
            // except that root may coincide with x / root.
            (v - 1) as usize
        } else {
            self.values.len() - (self.x / v) as usize
        }
    }
}

/// `Σ_{n ≤ x} τ_k(n)`.
///
/// Uses `D_k(v) = Σ_{d ≤ v} D_{k−1}(⌊v/d⌋)` with `D_1(v) = v`, grouping the
/// terms with equal quotient. All arguments that occur are of the form
/// `⌊x/d⌋`, so each level is tabulated once over that set.
pub fn divisor_summatory(x: u64, k: u32) -> Result<u64, DivisorError> {
    if k == 0 {
        return Err(DivisorError::InvalidOrder);
    }
    if x == 0 {
        return Err(DivisorError::EmptyLimit);
    }
    if x > MAX_LIMIT {
        return Err(DivisorError::LimitTooLarge(x));
    }
    if k == 1 {
        return Ok(x);
    }
    let qs = QuotientSet::new(x);
    let mut level: Vec<u64> = qs.values.clone();
    // intermediate levels over the whole quotient set, the last one at x only
    for _ in 2..k {
        level = qs
            .values
            .iter()
            .map(|&v| convolve_with_ones(v, &level, &qs))
            .collect::<Result<_, _>>()?;
    }
    convolve_with_ones(x, &level, &qs)
}

/// `Σ_{d ≤ v} D(⌊v/d⌋)` for `D` tabulated over the quotient set, grouping equal quotients.
fn convolve_with_ones(v: u64, level: &[u64], qs: &QuotientSet) -> Result<u64, DivisorError> {
    let mut acc: u64 = 0;
    let mut d = 1;
    while d <= v {
        let t = v / d;
        let d_end = v / t;
        let term = (d_end - d + 1)
            .checked_mul(level[qs.index(t)])
            .ok_or(DivisorError::Overflow("divisor summatory"))?;
        acc = acc
            .checked_add(term)
            .ok_or(DivisorError::Overflow("divisor summatory"))?;
        d = d_end + 1;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Vinogradov's divisor formula

/// `Σ_{y=0}^{l−1} e^{2πi n y / l}` evaluated exactly: the `l`-th roots of unity
/// raised to the power `n` sum to `l` when `l | n` and cancel otherwise.
pub fn root_of_unity_sum(n: u64, l: u64) -> u64 {
    if n.is_multiple_of(l) {
        l
    } else {
        0
    }
}

/// `τ(n) = 2 Σ_{0<l<√n} (1/l) Σ_{y<l} e^{2πi ny/l} + δ`, with `δ = 1` exactly
/// when `n` is a perfect square.
pub fn tau_via_vinogradov(n: u64) -> Result<u64, DivisorError> {
    if n == 0 {
        return Err(DivisorError::ZeroArgument);
    }
    let mut inner = 0u64;
    let mut l = 1u64;
    while (l as u128) * (l as u128) < n as u128 {
        inner += root_of_unity_sum(n, l) / l;
        l += 1;
    }
    let r = isqrt(n);
    let delta = u64::from(r * r == n);
    Ok(2 * inner + delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_examples() {
        assert_eq!(tau_k_of(1, 3).unwrap(), 1);
        assert_eq!(tau_k_of(12, 2).unwrap(), 6);
        assert_eq!(tau_k_of(4, 3).unwrap(), 6);
        assert_eq!(tau_k_of(97, 1).unwrap(), 1);
        assert_eq!(tau_k_of(0, 2), Err(DivisorError::ZeroArgument));
        assert_eq!(tau_k_of(5, 0), Err(DivisorError::InvalidOrder));
    }

    #[test]
    fn factorize_large() {
        // 1000003 * 1000033 * 1000037 needs rho past the trial-division range
        let n = 1_000_003u64 * 1_000_033 * 1_000_037;
        assert_eq!(
            factorize(n).unwrap(),
            vec![(1_000_003, 1), (1_000_033, 1), (1_000_037, 1)]
        );
        let n = 4_294_967_291u64 * 4_294_967_291; // (2^32 - 5)^2
        assert_eq!(factorize(n).unwrap(), vec![(4_294_967_291, 2)]);
        assert_eq!(factorize(u64::MAX).unwrap().len(), 7);
        assert_eq!(tau_k_of(1 << 40, 2).unwrap(), 41);
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn sieve_examples() {
        let t = sieve_tau_k(10, 2).unwrap();
        assert_eq!(t.values(), &[1, 2, 2, 3, 2, 4, 2, 4, 3, 4]);
        let t = sieve_tau_k(5, 3).unwrap();
        assert_eq!(t.values(), &[1, 3, 3, 6, 3]);
        for k in 1..5 {
            assert_eq!(sieve_tau_k(1, k).unwrap().values(), &[1]);
        }
        assert_eq!(
            sieve_tau_k_with_budget(1000, 2, 100),
            Err(DivisorError::BudgetExceeded {
                needed: table_bytes(1000),
                budget: 100
            })
        );
    }

    #[test]
    fn segmented_matches_table() {
        for k in 1..=5 {
            let table = sieve_tau_k(5000, k).unwrap();
            let seg = SegmentedTau::new(5000, k).unwrap();
            let mut buf = Vec::new();
            for (lo, hi) in [(1, 5001), (1, 2), (17, 400), (2500, 5001)] {
                seg.fill(lo, hi, &mut buf).unwrap();
                assert_eq!(
                    &buf[..],
                    &table.values()[(lo - 1) as usize..(hi - 1) as usize]
                );
            }
        }
    }

    #[test]
    fn summatory_examples() {
        assert_eq!(divisor_summatory(10, 2).unwrap(), 27);
        assert_eq!(divisor_summatory(5, 3).unwrap(), 16);
        for k in 1..6 {
            assert_eq!(divisor_summatory(1, k).unwrap(), 1);
        }
        assert_eq!(divisor_summatory(0, 2), Err(DivisorError::EmptyLimit));
    }

    #[test]
    fn summatory_matches_table_sums() {
        for k in 1..=5 {
            let table = sieve_tau_k(3000, k).unwrap();
            let mut acc = 0;
            for n in 1..=3000u64 {
                acc += table.get(n);
                assert_eq!(divisor_summatory(n, k).unwrap(), acc, "x={n} k={k}");
            }
        }
    }

    #[test]
    fn vinogradov_examples() {
        assert_eq!(tau_via_vinogradov(1).unwrap(), 1);
        assert_eq!(tau_via_vinogradov(12).unwrap(), 6);
        assert_eq!(tau_via_vinogradov(16).unwrap(), 5);
        assert!(tau_via_vinogradov(0).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(prime_power_weight(0, 4).unwrap(), 1);
        assert_eq!(prime_power_weight(2, 3).unwrap(), 6);
        assert_eq!(prime_power_weight(3, 2).unwrap(), 4);
    }
}
