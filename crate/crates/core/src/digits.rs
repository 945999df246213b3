//! Base-`q` digit arithmetic and exact counting of digit-sum residue classes.
//!
//! The counting routine handles the joint congruence
//! `n ≡ l (mod m)`, `S(n) ≡ a (mod p)` over `1 ≤ n ≤ x` with a digit DP whose
//! per-position cost does not depend on the size of the base.

use serde::Serialize;
use thiserror::Error;

/// Largest admissible limit for counts and sums.
pub const MAX_LIMIT: u64 = (1 << 63) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigitError {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("digit-sum modulus must be greater than 1, got {0}")]
    InvalidModulus(u64),
    #[error("residue modulus for n must be at least 1, got {0}")]
    InvalidResidueModulus(u64),
    #[error("limit {0} exceeds 2^63 - 1")]
    LimitTooLarge(u64),
    #[error("empty range: {0}")]
    EmptyRange(String),
}

fn check_base(q: u64) -> Result<(), DigitError> {
    if q < 2 {
        Err(DigitError::InvalidBase(q))
    } else {
        Ok(())
    }
}

/// Little-endian base-`q` expansion of `n` together with its digit sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitExpansion {
    n: u64,
    q: u64,
    digits: Vec<u64>,
    digit_sum: u64,
}

impl DigitExpansion {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.q
    }

    /// Digits `c_0, c_1, ..., c_ν`, least significant first.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn digit_sum(&self) -> u64 {
        self.digit_sum
    }

    /// Index of the leading digit.
    pub fn top_index(&self) -> usize {
        self.digits.len() - 1
    }

    /// Rebuilds `Σ c_b q^b`. Returns `None` on overflow.
    pub fn reconstruct(&self) -> Option<u64> {
        self.digits
            .iter()
            .rev()
            .try_fold(0u64, |acc, &c| acc.checked_mul(self.q)?.checked_add(c))
    }
}

/// Expands `n` in base `q`. Zero expands to the single digit `0`.
pub fn digit_expand(n: u64, q: u64) -> Result<DigitExpansion, DigitError> {
    check_base(q)?;
    let mut digits = Vec::new();
    let mut rest = n;
    loop {
        digits.push(rest % q);
        rest /= q;
        if rest == 0 {
            break;
        }
    }
    let digit_sum = digits.iter().sum();
    Ok(DigitExpansion {
        n,
        q,
        digits,
        digit_sum,
    })
}

/// Sum of the base-`q` digits of `n`.
pub fn digit_sum(n: u64, q: u64) -> Result<u64, DigitError> {
    check_base(q)?;
    Ok(digit_sum_unchecked(n, q))
}

#[inline]
pub(crate) fn digit_sum_unchecked(mut n: u64, q: u64) -> u64 {
    if q.is_power_of_two() {
        let shift = q.trailing_zeros();
        let mask = q - 1;
        let mut s = 0;
        while n != 0 {
            s += n & mask;
            n >>= shift;
        }
        return s;
    }
    let mut s = 0;
    while n != 0 {
        s += n % q;
        n /= q;
    }
    s
}

/// Iterator over `(n, S(n))` for consecutive `n`, updating the digit vector
/// in place so that each step costs amortized `O(1)`.
#[derive(Debug, Clone)]
pub struct DigitSumStream {
    q: u64,
    digits: Vec<u64>,
    next: u64,
    end: u64,
    sum: u64,
}

impl DigitSumStream {
    /// Stream for `n = 1..=x`.
    pub fn new(x: u64, q: u64) -> Result<Self, DigitError> {
        if x < 1 {
            return Err(DigitError::EmptyRange(
                "digit-sum stream needs x >= 1".into(),
            ));
        }
        Self::range(1, x.checked_add(1).ok_or(DigitError::LimitTooLarge(x))?, q)
    }

    /// Stream for `n` in the half-open range `start..end`.
    pub fn range(start: u64, end: u64, q: u64) -> Result<Self, DigitError> {
        check_base(q)?;
        let exp = digit_expand(start, q)?;
        Ok(Self {
            q,
            sum: exp.digit_sum,
            digits: exp.digits,
            next: start,
            end,
        })
    }

    #[inline]
    fn advance(&mut self) {
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.digits.push(1);
                self.sum += 1;
                return;
            }
            let c = self.digits[i] + 1;
            if c < self.q {
                self.digits[i] = c;
                self.sum += 1;
                return;
            }
            self.sum -= self.digits[i];
            self.digits[i] = 0;
            i += 1;
        }
    }
}

impl Iterator for DigitSumStream {
    type Item = (u64, u64);

    #[inline]
    fn next(&mut self) -> Option<(u64, u64)> {
        if self.next >= self.end {
            return None;
        }
        let item = (self.next, self.sum);
        self.next += 1;
        if self.next < self.end {
            self.advance();
        }
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end.saturating_sub(self.next) as usize;
        (left, Some(left))
    }
}

/// Convenience wrapper producing `(n, S(n))` for `n = 1..=x`.
pub fn digit_sum_stream(x: u64, q: u64) -> Result<DigitSumStream, DigitError> {
    DigitSumStream::new(x, q)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Congruence data for a digit-restricted class:
/// `S(n) ≡ a (mod p)` in base `q`, optionally with `n ≡ l (mod m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResidueSpec {
    q: u64,
    p: u64,
    a: u64,
    m: u64,
    l: u64,
    gelfond_condition: bool,
}

impl ResidueSpec {
    /// Residues may be given as any integers; they are stored reduced.
    pub fn new(q: u64, p: u64, a: i64, m: u64, l: i64) -> Result<Self, DigitError> {
        check_base(q)?;
        if p <= 1 {
            return Err(DigitError::InvalidModulus(p));
        }
        if m == 0 {
            return Err(DigitError::InvalidResidueModulus(m));
        }
        Ok(Self {
            q,
            p,
            a: reduce(a, p),
            m,
            l: reduce(l, m),
            gelfond_condition: gcd(p, q - 1) == 1,
        })
    }

    /// Digit-sum condition only (`m = 1`).
    pub fn digit_class(q: u64, p: u64, a: i64) -> Result<Self, DigitError> {
        Self::new(q, p, a, 1, 0)
    }

    pub fn base(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn residue(&self) -> u64 {
        self.a
    }

    pub fn n_modulus(&self) -> u64 {
        self.m
    }

    pub fn n_residue(&self) -> u64 {
        self.l
    }

    /// `gcd(p, q − 1) = 1`.
    pub fn gelfond_condition(&self) -> bool {
        self.gelfond_condition
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.m == self.l && digit_sum_unchecked(n, self.q) % self.p == self.a
    }
}

pub(crate) fn reduce(v: i64, m: u64) -> u64 {
    (v as i128).rem_euclid(m as i128) as u64
}

/// Number of `d` in `0..bound` with `d ≡ c (mod period)`.
#[inline]
fn count_in_class(bound: u64, c: u64, period: u64) -> u64 {
    if c >= bound {
        0
    } else {
        (bound - 1 - c) / period + 1
    }
}

/// Exact count of `1 ≤ n ≤ x` with `n ≡ l (mod m)` and `S(n) ≡ a (mod p)`.
///
/// Builds a [`DigitClassCounter`] for a single query; reuse one when counting
/// many limits for the same class.
pub fn count_digit_class(x: u64, spec: &ResidueSpec) -> Result<u64, DigitError> {
    DigitClassCounter::new(spec).count(x)
}

/// Digit DP for a fixed class, with the free-suffix tables precomputed.
///
/// Digits of `x` are walked from the most significant end. At each position
/// the digits below the corresponding digit of `x` are grouped by their class
/// modulo `lcm(p, m)`, and the free suffix is looked up in a table of
/// residue distributions for `j`-digit blocks. The table for `j + 1` digits is
/// built from the one for `j` digits the same way, so the work per position is
/// `O(p · m · lcm(p, m))` independently of `q`.
#[derive(Debug, Clone)]
pub struct DigitClassCounter {
    spec: ResidueSpec,
    period: u64,
    /// `free[j][s * m + r]`: count of `v` in `[0, q^j)` with `S(v) ≡ s (mod p)`, `v ≡ r (mod m)`.
    free: Vec<Vec<u64>>,
    /// `q^j mod m`.
    pow_mod: Vec<u64>,
}

impl DigitClassCounter {
    pub fn new(spec: &ResidueSpec) -> Self {
        let ResidueSpec { q, p, m, .. } = *spec;
        let (p_us, m_us) = (p as usize, m as usize);
        let period = p / gcd(p, m) * m;
        // digits of MAX_LIMIT; at most len - 1 of them are ever free
        let mut len = 1;
        let mut v = MAX_LIMIT / q;
        while v > 0 {
            v /= q;
            len += 1;
        }

        let classes = period.min(q);
        let class_counts: Vec<u64> = (0..classes).map(|c| count_in_class(q, c, period)).collect();
        let mut free: Vec<Vec<u64>> = Vec::with_capacity(len);
        let mut base = vec![0u64; p_us * m_us];
        base[0] = 1;
        free.push(base);
        let mut pow_mod = vec![1 % m; len];
        for j in 1..len {
            pow_mod[j] = pow_mod[j - 1] * (q % m) % m;
        }
        for j in 1..len {
            let prev = free.last().expect("seeded");
            let mut next = vec![0u64; p_us * m_us];
            for (c, &cnt) in class_counts.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let c = c as u64;
                let ds = (c % p) as usize;
                let dr = ((c % m) * pow_mod[j - 1] % m) as usize;
                for s in 0..p_us {
                    let s2 = (s + ds) % p_us;
                    for r in 0..m_us {
                        let v = prev[s * m_us + r];
                        if v != 0 {
                            let r2 = (r + dr) % m_us;
                            next[s2 * m_us + r2] += cnt * v;
                        }
                    }
                }
            }
            free.push(next);
        }
        Self {
            spec: *spec,
            period,
            free,
            pow_mod,
        }
    }

    pub fn spec(&self) -> &ResidueSpec {
        &self.spec
    }

    /// Exact count of `1 ≤ n ≤ x` in the class.
    pub fn count(&self, x: u64) -> Result<u64, DigitError> {
        if x > MAX_LIMIT {
            return Err(DigitError::LimitTooLarge(x));
        }
        if x == 0 {
            return Ok(0);
        }
        let ResidueSpec { q, p, a, m, l, .. } = self.spec;
        let m_us = m as usize;
        let mut digits = [0u64; 64];
        let mut len = 0;
        let mut v = x;
        while v > 0 {
            digits[len] = v % q;
            v /= q;
            len += 1;
        }

        let mut total: u64 = 0;
        let mut prefix_sum = 0u64; // S of the tight prefix, mod p
        let mut prefix_rem = 0u64; // tight prefix value mod m
        for pos in (0..len).rev() {
            let bound = digits[pos];
            let table = &self.free[pos];
            let shift = self.pow_mod[pos];
            for c in 0..self.period.min(bound) {
                let cnt = count_in_class(bound, c, self.period);
                let s_hi = (prefix_sum + c) % p;
                let r_hi = ((prefix_rem * (q % m) + c % m) % m) * shift % m;
                let s_need = ((a + p - s_hi) % p) as usize;
                let r_need = ((l + m - r_hi) % m) as usize;
                let ways = table[s_need * m_us + r_need];
                total = total
                    .checked_add(cnt.checked_mul(ways).expect("count fits in u64"))
                    .expect("count fits in u64");
            }
            prefix_sum = (prefix_sum + bound) % p;
            prefix_rem = (prefix_rem * (q % m) + bound % m) % m;
        }
        // x itself
        if prefix_sum == a && prefix_rem == l {
            total += 1;
        }
        // n = 0 was counted among the free assignments
        if a == 0 && l == 0 {
            total -= 1;
        }
        Ok(total)
    }
}
