use std::f64::consts::PI;

use gelfond_tau::expsum::{
    digit_factor, dist_to_int, expsum_abs, expsum_direct, expsum_product, gallagher_check,
    kernel_sum_bound_check, l1_norm, l1_norm_with, theta, theta_bound, trivial_bound, Alpha,
    ExpSumError, ExpSumParams, L1Method, L1Options, SampledFunction,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

fn params(digits: u32, q: u64, p: u64, z: i64, alpha: Alpha) -> ExpSumParams {
    ExpSumParams::new(digits, q, p, z, alpha).unwrap()
}

/// Term-by-term sum with the phase of `α n` taken exactly on the 2^-64 circle.
fn naive_sum(digits: u32, q: u64, p: u64, z: i64, turns: u64) -> Complex64 {
    let zp = z.rem_euclid(p as i64) as f64 / p as f64;
    (0..q.pow(digits))
        .map(|n| {
            let mut s = 0u64;
            let mut v = n;
            while v > 0 {
                s += v % q;
                v /= q;
            }
            let a = turns.wrapping_mul(n) as f64 / TWO_POW_64;
            let ph = a + zp * s as f64;
            Complex64::from_polar(1.0, 2.0 * PI * ph.fract())
        })
        .sum()
}

#[test]
fn direct_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let q = rng.gen_range(2..=10u64);
        let digits = rng.gen_range(1..=4u32);
        let p = rng.gen_range(2..=7u64);
        let z = rng.gen_range(-20..20i64);
        let turns: u64 = rng.gen();
        let s = expsum_direct(&params(digits, q, p, z, Alpha::Fixed(turns))).unwrap();
        let o = naive_sum(digits, q, p, z, turns);
        assert!((s - o).norm() <= 1e-9 * q.pow(digits) as f64, "{s} vs {o}");
    }
}

#[test]
fn direct_examples() {
    let s = expsum_direct(&params(1, 2, 2, 1, Alpha::zero())).unwrap();
    assert!(s.norm() < 1e-15);
    let s = expsum_direct(&params(2, 2, 2, 1, Alpha::rational(1, 4).unwrap())).unwrap();
    assert!((s - Complex64::new(2.0, -2.0)).norm() < 1e-12);
    let s = expsum_product(&params(2, 2, 2, 1, Alpha::rational(1, 4).unwrap()));
    assert!((s - Complex64::new(2.0, -2.0)).norm() < 1e-12);
    let f0 = digit_factor(&params(2, 2, 2, 1, Alpha::rational(1, 4).unwrap()), 0);
    let f1 = digit_factor(&params(2, 2, 2, 1, Alpha::rational(1, 4).unwrap()), 1);
    assert!((f0 - Complex64::new(1.0, -1.0)).norm() < 1e-12);
    assert!((f1 - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    for (digits, q, p) in [(3u32, 5u64, 3u64), (6, 2, 7), (2, 10, 5)] {
        let n = q.pow(digits) as f64;
        let s = expsum_direct(&params(digits, q, p, p as i64, Alpha::zero())).unwrap();
        assert!((s - n).norm() < 1e-9 * n);
        let s = expsum_product(&params(digits, q, p, 0, Alpha::zero()));
        assert_eq!(s, Complex64::new(n, 0.0));
    }
    assert!(matches!(
        expsum_direct(&params(8, 10, 3, 1, Alpha::zero())),
        Err(ExpSumError::OracleCap(_))
    ));
}

#[test]
fn product_matches_direct_rational() {
    for q in 2..=6u64 {
        for den in [1u64, 2, 3, 5, 12, 35, 64] {
            for num in 0..den {
                let a = Alpha::rational(num as i64, den).unwrap();
                for p in [2u64, 3, 7] {
                    for z in 0..p as i64 {
                        let pr = params(4, q, p, z, a);
                        let d = expsum_direct(&pr).unwrap();
                        let s = expsum_product(&pr);
                        assert!((d - s).norm() <= 1e-9 * q.pow(4) as f64);
                    }
                }
            }
        }
    }
}

#[test]
fn singular_factors_equal_q() {
    // α + z/p = 2/3 + 1/3 and 1/2 + 1/2
    let pr = params(1, 5, 3, 1, Alpha::rational(2, 3).unwrap());
    assert_eq!(digit_factor(&pr, 0).norm(), 5.0);
    let pr = params(3, 7, 2, 1, Alpha::rational(1, 2).unwrap());
    assert!((digit_factor(&pr, 0).norm() - 7.0).abs() < 1e-15);
}

#[test]
fn theta_values() {
    assert!((theta(2).unwrap() - 3.345).abs() < 1e-3);
    assert!((theta(1_000_000).unwrap() - 0.3248).abs() < 1e-4);
    let mut prev = f64::INFINITY;
    for i in 0..=60 {
        let q = 10f64.powf(6.0 * i as f64 / 60.0).round().max(2.0) as u64;
        let t = theta(q).unwrap();
        assert!(t <= prev);
        prev = t;
    }
    assert!(theta(1).is_err());
    for (digits, q) in [(3u32, 10u64), (8, 50)] {
        let b = theta_bound(digits, q).unwrap();
        let want = (6.0 * (1.0 + (q as f64).ln())).powi(digits as i32);
        assert!((b / want - 1.0).abs() < 1e-12);
    }
}

#[test]
fn kernel_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let x: f64 = rng.gen();
        let q = rng.gen_range(2..=100u64);
        let p = rng.gen_range(2..=13u64);
        let z = rng.gen_range(-50..50i64);
        let (lhs, rhs) = kernel_sum_bound_check(x, q, p, z).unwrap();
        assert!(lhs <= rhs, "x={x} q={q} p={p} z={z}");
    }
    let (lhs, rhs) = kernel_sum_bound_check(0.0, 2, 2, 1).unwrap();
    assert_eq!(lhs, 1.5);
    assert!((rhs - 10.158883).abs() < 1e-6);
}

#[test]
fn l1_closed_form() {
    let r = l1_norm(1, 2, 2, 1, 1e-10).unwrap();
    assert!((r.integral - 4.0 / PI).abs() < 1e-6);
    assert!(r.error_bound <= 1e-10);
    let opts = L1Options {
        method: L1Method::Transfer,
        ..L1Options::default()
    };
    let r = l1_norm_with(1, 2, 2, 1, 1e-10, &opts).unwrap();
    assert!((r.integral - 4.0 / PI).abs() < 1e-6);
}

/// `∫₀¹ |sin(πqα)/sin(πα)| dα` by a fine midpoint rule on each of the `q` lobes.
fn fejer_type(q: u64) -> f64 {
    let n = 200_000;
    let mut acc = 0.0;
    for lobe in 0..q {
        let (a, b) = (lobe as f64 / q as f64, (lobe + 1) as f64 / q as f64);
        let h = (b - a) / n as f64;
        for i in 0..n {
            let t = a + (i as f64 + 0.5) * h;
            acc += ((PI * q as f64 * t).sin() / (PI * t).sin()).abs() * h;
        }
    }
    acc
}

#[test]
fn l1_degenerate_character() {
    for q in [2u64, 3, 7, 10] {
        let r = l1_norm(1, q, 3, 0, 1e-9).unwrap();
        assert!((r.integral - fejer_type(q)).abs() < 1e-6, "q={q}");
    }
}

#[test]
fn l1_routes_agree() {
    let transfer = L1Options {
        method: L1Method::Transfer,
        ..L1Options::default()
    };
    let panels = L1Options {
        method: L1Method::Panels,
        ..L1Options::default()
    };
    for (digits, q, p, z) in [
        (3u32, 3u64, 2u64, 1i64),
        (4, 2, 3, 1),
        (2, 10, 13, 5),
        (3, 5, 3, 2),
    ] {
        let a = l1_norm_with(digits, q, p, z, 1e-8, &panels).unwrap();
        let b = l1_norm_with(digits, q, p, z, 1e-8, &transfer).unwrap();
        assert!(
            (a.integral - b.integral).abs() <= a.error_bound + b.error_bound + 1e-9,
            "{a:?} {b:?}"
        );
    }
}

#[test]
fn l1_below_theta_bound() {
    for q in [2u64, 3, 5, 10] {
        for p in [2u64, 3, 13] {
            for digits in 1..=4 {
                let r = l1_norm(digits, q, p, 1, 1e-8).unwrap();
                assert!(r.integral >= 0.0);
                assert!(r.certifies_bound(), "{r:?}");
                assert!(r.integral <= trivial_bound(digits, q) + r.error_bound);
            }
        }
    }
}

#[test]
fn gallagher_trig_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let terms = rng.gen_range(1..=5);
        let coeffs: Vec<(f64, Complex64)> = (0..terms)
            .map(|_| {
                (
                    rng.gen_range(-20..=20) as f64,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let f = |t: f64| -> Complex64 {
            coeffs
                .iter()
                .map(|&(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n * t))
                .sum()
        };
        let df = |t: f64| -> Complex64 {
            coeffs
                .iter()
                .map(|&(n, c)| {
                    c * Complex64::new(0.0, 2.0 * PI * n)
                        * Complex64::from_polar(1.0, 2.0 * PI * n * t)
                })
                .sum()
        };
        let t0 = rng.gen_range(-1.0..1.0);
        let len = rng.gen_range(0.5..2.0);
        let fs = SampledFunction::from_fn(t0, len, 20_001, f);
        let dfs = SampledFunction::from_fn(t0, len, 20_001, df);
        let delta = rng.gen_range(0.01..0.3);
        let mut pts = Vec::new();
        let mut t = t0 + delta / 2.0 + rng.gen_range(0.0..delta);
        while t <= t0 + len - delta / 2.0 {
            pts.push(t);
            t += delta * rng.gen_range(1.001..2.0);
        }
        let out = gallagher_check(&fs, &dfs, delta, &pts).unwrap();
        assert!(out.slack >= -1e-6, "{out:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_matches_direct(turns in any::<u64>(), digits in 1u32..=6, q in 2u64..=10, p in 2u64..=7, z in 0i64..7) {
        prop_assume!(q.pow(digits) <= 1_000_000);
        let pr = params(digits, q, p, z, Alpha::Fixed(turns));
        let d = expsum_direct(&pr).unwrap();
        let s = expsum_product(&pr);
        prop_assert!((d - s).norm() <= 1e-9 * q.pow(digits) as f64);
    }

    #[test]
    fn periodicity(num in -1000i64..1000, den in 1u64..500, digits in 1u32..12, q in 2u64..20, p in 2u64..14, z in -30i64..30) {
        let a = params(digits, q, p, z, Alpha::rational(num, den).unwrap());
        let b = params(digits, q, p, z, Alpha::rational(num + den as i64, den).unwrap());
        prop_assert_eq!(expsum_product(&a), expsum_product(&b));
        let c = params(digits, q, p, z, Alpha::real(num as f64 / 1024.0));
        let d = params(digits, q, p, z, Alpha::real(num as f64 / 1024.0 + 1.0));
        prop_assert_eq!(expsum_product(&c), expsum_product(&d));
    }

    #[test]
    fn trivial_bound_holds(turns in any::<u64>(), digits in 1u32..30, q in 2u64..100, p in 2u64..14, z in -30i64..30) {
        prop_assume!((digits as f64) * (q as f64).log2() < 900.0);
        let pr = params(digits, q, p, z, Alpha::Fixed(turns));
        prop_assert!(expsum_abs(&pr) <= trivial_bound(digits, q) * (1.0 + 1e-12));
    }

    #[test]
    fn splitting_identity(turns in any::<u64>(), h in 2u32..24, r_frac in 0.0f64..1.0, q in 2u64..8, p in 2u64..14, z in -30i64..30) {
        let r = ((h / 2) as f64 * r_frac).floor() as u32;
        let alpha = Alpha::Fixed(turns);
        let whole = expsum_abs(&params(h, q, p, z, alpha));
        let head = if r == 0 { 1.0 } else { expsum_abs(&params(2 * r, q, p, z, alpha)) };
        let tail = if h == 2 * r {
            1.0
        } else {
            expsum_abs(&params(h - 2 * r, q, p, z, alpha.scale_pow(q, 2 * r)))
        };
        let scale = (q as f64).powi(h as i32);
        prop_assert!((whole - head * tail).abs() <= 1e-9 * scale);
    }

    #[test]
    fn factor_bound(turns in any::<u64>(), pos in 0u32..20, q in 2u64..200, p in 2u64..14, z in -30i64..30) {
        let pr = params(pos + 1, q, p, z, Alpha::Fixed(turns));
        let h = digit_factor(&pr, pos).norm();
        let beta = Alpha::Fixed(turns).scale_pow(q, pos).to_f64();
        let d = dist_to_int(beta + z.rem_euclid(p as i64) as f64 / p as f64);
        let cap = if d == 0.0 { q as f64 } else { (q as f64).min(1.0 / (2.0 * d)) };
        prop_assert!(h <= cap * (1.0 + 1e-9) + 1e-9, "h={} cap={}", h, cap);
    }

    #[test]
    fn kernel_bound(x in 0.0f64..1.0, q in 2u64..=100, p in 2u64..=13, z in -100i64..100) {
        let (lhs, rhs) = kernel_sum_bound_check(x, q, p, z).unwrap();
        prop_assert!(lhs <= rhs);
    }
}
