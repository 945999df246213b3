//! Verification checks behind `verify`. Each check compares the library
//! against an independent oracle or a stated bound and reports the smallest
//! margin it saw.

use std::f64::consts::PI;

use gelfond_tau::asymptotics::{gelfond_error_check, CheckMode};
use gelfond_tau::digits::{
    digit_expand, digit_sum, digit_sum_stream, DigitClassCounter, ResidueSpec,
};
use gelfond_tau::divisor::{divisor_summatory, sieve_tau_k, tau_k_of, tau_via_vinogradov};
use gelfond_tau::expsum::{
    digit_factor, digit_sum_profile, dist_to_int, expsum_abs, expsum_product, gallagher_check,
    kernel_sum_bound_check, l1_norm, l1_norm_levels, lemma1_bound, sup_norm_scan, Alpha,
    ExpSumParams, L1Method, L1Options, SampledFunction, ScanMode, DIRECT_CAP,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    /// Smallest margin to the asserted bound; negative when a case failed.
    pub min_slack: f64,
    pub details: Value,
    /// First failing case, with enough parameters to replay it.
    pub failure: Option<Value>,
}

#[derive(Debug)]
struct Tracker {
    cases: u64,
    min_slack: f64,
    failure: Option<Value>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            cases: 0,
            min_slack: f64::INFINITY,
            failure: None,
        }
    }

    fn record(&mut self, slack: f64, case: impl FnOnce() -> Value) {
        self.cases += 1;
        if slack < self.min_slack || slack.is_nan() {
            self.min_slack = slack;
        }
        if (slack.is_nan() || slack < 0.0) && self.failure.is_none() {
            let mut c = case();
            if let Value::Object(m) = &mut c {
                m.insert("slack".into(), json!(slack));
            }
            self.failure = Some(c);
        }
    }

    /// Exact comparisons: slack 0 on equality, minus the gap otherwise.
    fn equal(&mut self, got: u64, want: u64, case: impl FnOnce() -> Value) {
        let gap = got.abs_diff(want) as f64;
        self.record(-gap, || {
            let mut c = case();
            if let Value::Object(m) = &mut c {
                m.insert("got".into(), json!(got));
                m.insert("expected".into(), json!(want));
            }
            c
        });
    }

    fn finish(self, name: &str, details: Value) -> Check {
        Check {
            name: name.to_string(),
            passed: self.failure.is_none(),
            cases: self.cases,
            min_slack: if self.cases == 0 {
                0.0
            } else {
                self.min_slack + 0.0
            },
            details,
            failure: self.failure,
        }
    }
}

/// Independent random stream per check, derived from the run seed.
pub fn rng_for(seed: u64, stream: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// `2 Σ_{d ≤ √x} ⌊x/d⌋ − ⌊√x⌋²`.
pub fn hyperbola(x: u64) -> u64 {
    let r = isqrt(x);
    2 * (1..=r).map(|d| x / d).sum::<u64>() - r * r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// divisor

pub fn sieve_vs_pointwise(nmax: u64, kmax: u32) -> Check {
    let mut t = Tracker::new();
    for k in 2..=kmax {
        match sieve_tau_k(nmax, k) {
            Ok(table) => {
                for n in 1..=nmax {
                    let want = tau_k_of(n, k).unwrap_or(u64::MAX);
                    t.equal(table.get(n), want, || json!({"n": n, "k": k}));
                }
            }
            Err(e) => t.record(f64::NAN, || json!({"k": k, "error": e.to_string()})),
        }
    }
    t.finish("sieve_vs_pointwise", json!({"nmax": nmax, "kmax": kmax}))
}

pub fn summatory_vs_hyperbola(samples: usize, xmax: u64, seed: u64) -> Check {
    let mut rng = rng_for(seed, "summatory_vs_hyperbola");
    let mut t = Tracker::new();
    for _ in 0..samples {
        let x = rng.gen_range(1..=xmax);
        let got = divisor_summatory(x, 2).unwrap_or(u64::MAX);
        t.equal(got, hyperbola(x), || json!({"x": x, "k": 2}));
    }
    t.finish(
        "summatory_vs_hyperbola",
        json!({"samples": samples, "xmax": xmax}),
    )
}

/// `D_k(x)` against `Σ_{d ≤ x} D_{k−1}(⌊x/d⌋)`, with `D_{k−1}` from prefix
/// sums of a sieved table.
pub fn summatory_vs_recursion(xmax: u64, kmax: u32, samples: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, "summatory_vs_recursion");
    let mut t = Tracker::new();
    for k in 2..=kmax {
        let prefix: Vec<u64> = if k == 2 {
            (0..=xmax).collect()
        } else {
            let table = sieve_tau_k(xmax, k - 1).expect("table within budget");
            std::iter::once(0)
                .chain(table.values().iter().scan(0u64, |s, &v| {
                    *s += v;
                    Some(*s)
                }))
                .collect()
        };
        let mut xs: Vec<u64> = (1..=200.min(xmax)).collect();
        xs.extend((0..samples).map(|_| rng.gen_range(1..=xmax)));
        xs.push(xmax);
        for x in xs {
            let want: u64 = (1..=x).map(|d| prefix[(x / d) as usize]).sum();
            let got = divisor_summatory(x, k).unwrap_or(u64::MAX);
            t.equal(got, want, || json!({"x": x, "k": k}));
        }
    }
    t.finish(
        "summatory_vs_recursion",
        json!({"xmax": xmax, "kmax": kmax, "samples_per_k": samples}),
    )
}

pub fn vinogradov_identity(nmax: u64) -> Check {
    let mut t = Tracker::new();
    for n in 1..=nmax {
        let divisors = (1..=n).filter(|d| n % d == 0).count() as u64;
        let got = tau_via_vinogradov(n).unwrap_or(u64::MAX);
        t.equal(got, divisors, || json!({"n": n}));
    }
    t.finish("vinogradov_identity", json!({"nmax": nmax}))
}

pub fn multiplicativity(samples: usize, xmax: u64, seed: u64) -> Check {
    let mut rng = rng_for(seed, "multiplicativity");
    let mut t = Tracker::new();
    let tables: Vec<_> = (2..=5)
        .map(|k| sieve_tau_k(xmax, k).expect("table within budget"))
        .collect();
    while (t.cases as usize) < samples {
        let a = rng.gen_range(1..=isqrt(xmax).max(1));
        let b = rng.gen_range(1..=xmax / a);
        if gcd(a, b) != 1 {
            continue;
        }
        for (i, tab) in tables.iter().enumerate() {
            t.equal(
                tab.get(a * b),
                tab.get(a) * tab.get(b),
                || json!({"a": a, "b": b, "k": i + 2}),
            );
        }
    }
    t.finish("multiplicativity", json!({"pairs": samples, "xmax": xmax}))
}

// ---------------------------------------------------------------------------
// exponential sums

/// `|S_product − S_direct| ≤ rel_tol · q^Q`. One digit-sum profile per
/// `(Q, q, α)` serves every `(p, z)`.
pub fn product_vs_direct(
    max_digits: u32,
    qmax: u64,
    pmax: u64,
    samples: usize,
    rel_tol: f64,
    seed: u64,
) -> Check {
    let mut rng = rng_for(seed, "product_vs_direct");
    let mut t = Tracker::new();
    let mut worst_rel = 0f64;
    for digits in 1..=max_digits {
        for q in 2..=qmax {
            let n = (q as u128).pow(digits);
            if n > DIRECT_CAP as u128 {
                continue;
            }
            let scale = n as f64;
            for _ in 0..samples {
                let turns: u64 = rng.gen();
                let alpha = Alpha::Fixed(turns);
                let profile = digit_sum_profile(digits, q, alpha).expect("within cap");
                for p in 2..=pmax {
                    for z in 0..p as i64 {
                        let params = ExpSumParams::new(digits, q, p, z, alpha).expect("valid");
                        let diff = (profile.character_sum(p, z) - expsum_product(&params)).norm();
                        worst_rel = worst_rel.max(diff / scale);
                        t.record(rel_tol * scale - diff, || {
                            json!({"Q": digits, "q": q, "p": p, "z": z, "alpha_turns": turns, "diff": diff})
                        });
                    }
                }
            }
        }
    }
    t.finish(
        "product_vs_direct",
        json!({"Qmax": max_digits, "qmax": qmax, "pmax": pmax, "alphas_per_set": samples,
               "rel_tol": rel_tol, "worst_relative_diff": worst_rel}),
    )
}

pub fn periodicity(samples: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, "periodicity");
    let mut t = Tracker::new();
    for _ in 0..samples {
        let digits = rng.gen_range(1..=16u32);
        let q = rng.gen_range(2..=20u64);
        let p = rng.gen_range(2..=13u64);
        let z = rng.gen_range(-50..50i64);
        let den = rng.gen_range(1..=10_000u64);
        let num = rng.gen_range(-(den as i64)..den as i64);
        let shift = rng.gen_range(-3..=3i64);
        let a = ExpSumParams::new(digits, q, p, z, Alpha::rational(num, den).unwrap()).unwrap();
        let b = ExpSumParams::new(
            digits,
            q,
            p,
            z,
            Alpha::rational(num + shift * den as i64, den).unwrap(),
        )
        .unwrap();
        let gap = (expsum_product(&a) - expsum_product(&b)).norm();
        t.record(
            -gap,
            || json!({"Q": digits, "q": q, "p": p, "z": z, "num": num, "den": den, "shift": shift}),
        );
    }
    t.finish("periodicity", json!({"samples": samples}))
}

/// `|S_H(α)| = |S_{2r}(α)| · |S_{H−2r}(α q^{2r})|`.
pub fn splitting_identity(samples: usize, rel_tol: f64, seed: u64) -> Check {
    let mut rng = rng_for(seed, "splitting_identity");
    let mut t = Tracker::new();
    for _ in 0..samples {
        let h = rng.gen_range(2..=24u32);
        let r = rng.gen_range(1..=h / 2);
        let q = rng.gen_range(2..=8u64);
        let p = rng.gen_range(2..=13u64);
        let z = rng.gen_range(-30..30i64);
        let turns: u64 = rng.gen();
        let alpha = Alpha::Fixed(turns);
        let abs = |d: u32, a: Alpha| expsum_abs(&ExpSumParams::new(d, q, p, z, a).unwrap());
        let whole = abs(h, alpha);
        let head = abs(2 * r, alpha);
        let tail = if h == 2 * r {
            1.0
        } else {
            abs(h - 2 * r, alpha.scale_pow(q, 2 * r))
        };
        let scale = (q as f64).powi(h as i32);
        t.record(
            rel_tol * scale - (whole - head * tail).abs(),
            || json!({"H": h, "r": r, "q": q, "p": p, "z": z, "alpha_turns": turns}),
        );
    }
    t.finish(
        "splitting_identity",
        json!({"samples": samples, "rel_tol": rel_tol}),
    )
}

/// Every digit-position factor is at most `min(q, 1/(2‖αq^l + z/p‖))`.
pub fn factor_bound(samples: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, "factor_bound");
    let mut t = Tracker::new();
    for _ in 0..samples {
        let q = rng.gen_range(2..=200u64);
        let p = rng.gen_range(2..=13u64);
        let z = rng.gen_range(-30..30i64);
        let pos = rng.gen_range(0..20u32);
        let turns: u64 = rng.gen();
        let params = ExpSumParams::new(pos + 1, q, p, z, Alpha::Fixed(turns)).unwrap();
        let h = digit_factor(&params, pos).norm();
        let beta = Alpha::Fixed(turns).scale_pow(q, pos).to_f64();
        let d = dist_to_int(beta + z.rem_euclid(p as i64) as f64 / p as f64);
        let cap = if d == 0.0 {
            q as f64
        } else {
            (q as f64).min(1.0 / (2.0 * d))
        };
        // float slop on the distance near the singular point
        t.record(
            cap * (1.0 + 1e-9) + 1e-9 - h,
            || json!({"q": q, "p": p, "z": z, "position": pos, "alpha_turns": turns}),
        );
    }
    t.finish("factor_bound", json!({"samples": samples}))
}

/// `sup_α |S_Q(α, 1)| ≤ 3^{Q/2} (1 + rel_tol)` at `p = q = 2`.
pub fn lemma1_binary(max_digits: u32, grid: u64, rel_tol: f64) -> Check {
    let mut t = Tracker::new();
    let mut rows = Vec::new();
    for digits in 1..=max_digits {
        let bound = lemma1_bound(digits, 2, 2).expect("binary case");
        match sup_norm_scan(digits, 2, 2, 1, grid, ScanMode::Assert) {
            Ok(scan) => {
                rows.push(json!({"Q": digits, "sup_abs": scan.sup_abs, "bound": bound,
                    "ratio": scan.sup_abs / bound, "argmax_alpha": scan.argmax_alpha,
                    "lambda_hat": scan.lambda_hat}));
                t.record(bound * (1.0 + rel_tol) - scan.sup_abs, || {
                    json!({"Q": digits, "q": 2, "p": 2, "z": 1, "grid": grid,
                           "sup_abs": scan.sup_abs, "argmax_alpha": scan.argmax_alpha, "bound": bound})
                });
            }
            Err(e) => t.record(f64::NAN, || json!({"Q": digits, "error": e.to_string()})),
        }
    }
    t.finish(
        "lemma1_binary",
        json!({"grid": grid, "rel_tol": rel_tol, "levels": rows}),
    )
}

/// Sup-norm scan where no bound is known: records `λ̂` per `Q`, asserts only the trivial bound.
pub fn lambda_scan(q: u64, p: u64, z: i64, max_digits: u32, grid: u64) -> Check {
    let mut t = Tracker::new();
    let mut rows = Vec::new();
    for digits in 1..=max_digits {
        if (digits as f64) * (q as f64).log2() > 60.0 {
            break;
        }
        match sup_norm_scan(digits, q, p, z, grid, ScanMode::Assert) {
            Ok(scan) => {
                let trivial = (q as f64).powi(digits as i32);
                rows.push(
                    json!({"Q": digits, "sup_abs": scan.sup_abs, "lambda_hat": scan.lambda_hat,
                    "argmax_alpha": scan.argmax_alpha}),
                );
                t.record(
                    trivial * (1.0 + 1e-12) - scan.sup_abs,
                    || json!({"Q": digits, "q": q, "p": p, "z": z, "grid": grid}),
                );
            }
            Err(e) => t.record(
                f64::NAN,
                || json!({"Q": digits, "q": q, "p": p, "z": z, "error": e.to_string()}),
            ),
        }
    }
    t.finish(
        "lambda_scan",
        json!({"q": q, "p": p, "z": z, "grid": grid, "levels": rows}),
    )
}

// ---------------------------------------------------------------------------
// large sieve

fn trig_poly(coeffs: &[(f64, Complex64)], t: f64) -> (Complex64, Complex64) {
    coeffs.iter().fold(
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        |(f, df), &(n, c)| {
            let e = c * Complex64::from_polar(1.0, 2.0 * PI * n * t);
            (f + e, df + e * Complex64::new(0.0, 2.0 * PI * n))
        },
    )
}

/// Large-sieve inequality on random trigonometric polynomials and random
/// `δ`-separated point sets, some packed as tightly as the spacing allows.
pub fn gallagher_sweep(samples: usize, slack_tol: f64, seed: u64) -> Check {
    let mut rng = rng_for(seed, "gallagher_sweep");
    let mut t = Tracker::new();
    let grid_points = 8001;
    for _ in 0..samples {
        let terms = rng.gen_range(1..=6);
        let coeffs: Vec<(f64, Complex64)> = (0..terms)
            .map(|_| {
                (
                    rng.gen_range(-20..=20) as f64,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let t0 = rng.gen_range(-2.0..2.0);
        let len = rng.gen_range(0.25..2.0);
        let values: Vec<(Complex64, Complex64)> = (0..grid_points)
            .map(|i| trig_poly(&coeffs, t0 + len * i as f64 / (grid_points - 1) as f64))
            .collect();
        let step = len / (grid_points - 1) as f64;
        let f = SampledFunction {
            t0,
            step,
            values: values.iter().map(|v| v.0).collect(),
        };
        let df = SampledFunction {
            t0,
            step,
            values: values.iter().map(|v| v.1).collect(),
        };
        let delta = rng.gen_range(0.005..0.25f64).min(len);
        let packed = rng.gen_bool(0.5);
        let mut pts = Vec::new();
        let mut x = t0
            + delta / 2.0
            + if packed {
                0.0
            } else {
                rng.gen_range(0.0..delta)
            };
        while x <= t0 + len - delta / 2.0 {
            pts.push(x);
            x += if packed {
                delta * (1.0 + 1e-6)
            } else {
                delta * rng.gen_range(1.0001..3.0)
            };
        }
        match gallagher_check(&f, &df, delta, &pts) {
            Ok(out) => t.record(out.slack + slack_tol, || {
                json!({"coefficients": coeffs.iter().map(|(n, c)| json!([n, c.re, c.im])).collect::<Vec<_>>(),
                       "t0": t0, "T": len, "delta": delta, "points": pts, "lhs": out.lhs, "rhs": out.rhs})
            }),
            Err(e) => t.record(f64::NAN, || json!({"t0": t0, "T": len, "delta": delta, "error": e.to_string()})),
        }
    }
    t.finish(
        "gallagher_sweep",
        json!({"instances": samples, "slack_tol": slack_tol, "grid_points": grid_points}),
    )
}

// ---------------------------------------------------------------------------
// L¹ norms

/// `∫₀¹ |S_Q(α, z)| dα + error ≤ q^{Qθ(q)}` for every `Q ≤ max_digits`.
/// `zs = None` sweeps every `z` in `0..p`.
pub fn l1_bound(qs: &[u64], ps: &[u64], zs: Option<&[i64]>, max_digits: u32, tol: f64) -> Check {
    let mut t = Tracker::new();
    let mut rows = Vec::new();
    let auto = L1Options::default();
    let transfer = L1Options {
        method: L1Method::Transfer,
        ..auto
    };
    for &q in qs {
        for &p in ps {
            let all: Vec<i64> = (0..p as i64).collect();
            for &z in zs.unwrap_or(&all) {
                let mut levels = None;
                for digits in 1..=max_digits {
                    let cells = (q as f64).powi(digits as i32) * p as f64;
                    let res = if cells <= auto.auto_panel_cells as f64 {
                        l1_norm(digits, q, p, z, tol)
                    } else {
                        if levels.is_none() {
                            levels = Some(l1_norm_levels(max_digits, q, p, z, tol, &transfer));
                        }
                        match levels.as_ref().expect("computed") {
                            Ok(v) => Ok(v[digits as usize - 1]),
                            Err(e) => Err(e.clone()),
                        }
                    };
                    match res {
                        Ok(r) => {
                            rows.push(
                                json!({"q": q, "p": p, "z": z, "Q": digits, "integral": r.integral,
                                "error_bound": r.error_bound, "theta_bound": r.theta_bound,
                                "slack": r.slack(), "method": r.method}),
                            );
                            t.record(r.slack(), || {
                                json!({"q": q, "p": p, "z": z, "Q": digits, "tol": tol,
                                       "integral": r.integral, "error_bound": r.error_bound})
                            });
                        }
                        Err(e) => t.record(
                            f64::NAN,
                            || json!({"q": q, "p": p, "z": z, "Q": digits, "error": e.to_string()}),
                        ),
                    }
                }
            }
        }
    }
    t.finish("l1_bound", json!({"tol": tol, "results": rows}))
}

/// `Q = 1, q = p = 2, z = 1`: the integral of `|2 cos π(α + 1/2)|` is `4/π`.
pub fn l1_closed_form(tol: f64, abs_tol: f64) -> Check {
    let mut t = Tracker::new();
    let want = 4.0 / PI;
    let mut got = f64::NAN;
    match l1_norm(1, 2, 2, 1, tol) {
        Ok(r) => {
            got = r.integral;
            t.record(
                abs_tol - (r.integral - want).abs(),
                || json!({"integral": r.integral}),
            );
        }
        Err(e) => t.record(f64::NAN, || json!({"error": e.to_string()})),
    }
    t.finish(
        "l1_closed_form",
        json!({"integral": got, "expected": want, "abs_tol": abs_tol}),
    )
}

pub fn kernel_sweep(samples: usize, qmax: u64, pmax: u64, seed: u64) -> Check {
    let mut rng = rng_for(seed, "kernel_sweep");
    let mut t = Tracker::new();
    let mut worst_ratio = 0f64;
    for _ in 0..samples {
        let x: f64 = rng.gen();
        let q = rng.gen_range(2..=qmax);
        let p = rng.gen_range(2..=pmax);
        let z = rng.gen_range(-(p as i64) * 4..(p as i64) * 4);
        match kernel_sum_bound_check(x, q, p, z) {
            Ok((lhs, rhs)) => {
                worst_ratio = worst_ratio.max(lhs / rhs);
                t.record(
                    rhs - lhs,
                    || json!({"x": x, "q": q, "p": p, "z": z, "lhs": lhs, "rhs": rhs}),
                );
            }
            Err(e) => t.record(
                f64::NAN,
                || json!({"x": x, "q": q, "p": p, "z": z, "error": e.to_string()}),
            ),
        }
    }
    t.finish(
        "kernel_sweep",
        json!({"samples": samples, "qmax": qmax, "pmax": pmax, "worst_lhs_over_rhs": worst_ratio}),
    )
}

// ---------------------------------------------------------------------------
// digits

pub fn digit_round_trip(samples: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, "digit_round_trip");
    let mut t = Tracker::new();
    for _ in 0..samples {
        let n = rng.gen_range(0..1u64 << 63);
        let q = rng.gen_range(2..=1_000_000u64);
        let e = digit_expand(n, q).expect("valid base");
        let ok = e.reconstruct() == Some(n)
            && e.digits().iter().all(|&c| c < q)
            && e.digit_sum() % (q - 1) == n % (q - 1);
        t.record(if ok { 0.0 } else { -1.0 }, || json!({"n": n, "q": q}));
    }
    t.finish("digit_round_trip", json!({"samples": samples}))
}

pub fn stream_consistency(xmax: u64, samples: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, "stream_consistency");
    let mut t = Tracker::new();
    for q in [2u64, 3, 10, 4096, 1_000_000] {
        let sums: Vec<u64> = digit_sum_stream(xmax, q)
            .expect("valid")
            .map(|(_, s)| s)
            .collect();
        for _ in 0..samples {
            let n = rng.gen_range(1..=xmax);
            let mut v = n;
            let mut s = 0;
            while v > 0 {
                s += v % q;
                v /= q;
            }
            t.equal(sums[(n - 1) as usize], s, || json!({"n": n, "q": q}));
        }
    }
    t.finish(
        "stream_consistency",
        json!({"xmax": xmax, "samples_per_base": samples}),
    )
}

/// Digit DP against a running brute-force count at every `x ≤ xmax`, over
/// all classes of the grid.
pub fn digit_dp_vs_brute(xmax: u64, qs: &[u64], ps: &[u64], ms: &[u64]) -> Check {
    let mut t = Tracker::new();
    let mut specs = 0u64;
    for &q in qs {
        let sums: Vec<u64> = std::iter::once(0)
            .chain((1..=xmax).map(|n| digit_sum(n, q).expect("valid")))
            .collect();
        for &p in ps {
            for &m in ms {
                for a in 0..p {
                    for l in 0..m {
                        let spec = ResidueSpec::new(q, p, a as i64, m, l as i64).expect("valid");
                        let counter = DigitClassCounter::new(&spec);
                        specs += 1;
                        let mut brute = 0u64;
                        let mut bad = None;
                        for x in 1..=xmax {
                            if sums[x as usize] % p == a && x % m == l {
                                brute += 1;
                            }
                            let got = counter.count(x).unwrap_or(u64::MAX);
                            if got != brute {
                                bad = Some((x, got, brute));
                                break;
                            }
                        }
                        match bad {
                            None => t.record(0.0, || Value::Null),
                            Some((x, got, want)) => t.equal(
                                got,
                                want,
                                || json!({"x": x, "q": q, "p": p, "a": a, "m": m, "l": l}),
                            ),
                        }
                    }
                }
            }
        }
    }
    t.finish(
        "digit_dp_vs_brute",
        json!({"xmax": xmax, "q": qs, "p": ps, "m": ms, "classes": specs}),
    )
}

/// `|T₀(2^j) − 2^j/2| ≤ C (2^j)^{ln 3/ln 4}` for the evil numbers, with `C`
/// calibrated at the first grid point.
pub fn gelfond_binary(jmin: u32, jmax: u32) -> Check {
    let mut t = Tracker::new();
    let spec = ResidueSpec::digit_class(2, 2, 0).expect("valid");
    let grid: Vec<u64> = (jmin..=jmax).map(|j| 1u64 << j).collect();
    let details = match gelfond_error_check(&grid, &spec, CheckMode::Assert) {
        Ok(report) => {
            for row in report.rows.iter().skip(1) {
                let bound = row.bound.unwrap_or(f64::NAN);
                let err = row.error.to_f64().abs();
                t.record(
                    bound - err,
                    || json!({"x": row.x, "error": err, "bound": bound}),
                );
            }
            json!({"calibration": report.calibration, "lambda": report.lambda_ref,
                   "rows": report.rows.iter().map(|r| json!({"x": r.x, "count": r.count,
                       "error_num": r.error.num, "error_den": r.error.den, "bound": r.bound})).collect::<Vec<_>>()})
        }
        Err(e) => {
            t.record(f64::NAN, || json!({"error": e.to_string()}));
            Value::Null
        }
    };
    t.finish("gelfond_binary", details)
}
