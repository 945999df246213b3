use gelfond_tau::asymptotics::{
    default_grid, error_table, error_table_with_segment, fit_exponent, gelfond_error_check,
    main_term, mostly_decreasing, restricted_sums_on_grid, restricted_tau_sum, theorem_gate,
    CheckMode, ExperimentSpec, Fraction,
};
use gelfond_tau::digits::{count_digit_class, digit_sum, ResidueSpec};
use gelfond_tau::divisor::{divisor_summatory, sieve_tau_k};
use gelfond_tau::expsum::theta;
use proptest::prelude::*;

/// Restricted sums straight from a full table and pointwise digit sums.
fn brute_restricted(x: u64, k: u32, q: u64, p: u64) -> Vec<u64> {
    let t = sieve_tau_k(x, k).unwrap();
    let mut out = vec![0u64; p as usize];
    for n in 1..=x {
        out[(digit_sum(n, q).unwrap() % p) as usize] += t.get(n);
    }
    out
}

#[test]
fn restricted_examples() {
    assert_eq!(restricted_tau_sum(10, 2, 2, 2, 0).unwrap(), 15);
    assert_eq!(restricted_tau_sum(10, 2, 2, 2, 1).unwrap(), 12);
    assert_eq!(restricted_tau_sum(10, 2, 2, 2, -1).unwrap(), 12);
    assert_eq!(main_term(10, 2, 2).unwrap(), Fraction::new(27, 2));
}

#[test]
fn restricted_matches_brute() {
    for (k, q, p) in [
        (2u32, 2u64, 2u64),
        (2, 10, 3),
        (3, 3, 5),
        (4, 16, 7),
        (2, 4096, 3),
        (5, 7, 2),
    ] {
        let grid = vec![1, 2, 99, 1000, 54_321, 200_000];
        let sums = restricted_sums_on_grid(&grid, k, q, p, 1 << 14).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            assert_eq!(
                sums[i],
                brute_restricted(x, k, q, p),
                "x={x} k={k} q={q} p={p}"
            );
        }
    }
}

#[test]
fn partition_and_cancellation() {
    let spec = ExperimentSpec::new(3, 5, 4, vec![10, 1000, 31_623, 500_000], None).unwrap();
    let r = error_table(&spec).unwrap();
    for &x in spec.x_grid() {
        let rows: Vec<_> = r.rows.iter().filter(|row| row.x == x).collect();
        assert_eq!(rows.len(), 4);
        let total: u64 = rows.iter().map(|row| row.restricted_sum).sum();
        assert_eq!(total, divisor_summatory(x, 3).unwrap());
        assert_eq!(rows.iter().map(|row| row.error.num).sum::<i128>(), 0);
        for row in rows {
            assert_eq!(row.main_term, main_term(x, 3, 4).unwrap());
            assert_eq!(row.error.den, 4);
        }
    }
}

#[test]
fn segment_size_does_not_change_report() {
    let spec = ExperimentSpec::new(2, 3, 2, default_grid(400_000), None).unwrap();
    let a = error_table_with_segment(&spec, 1 << 22).unwrap();
    let b = error_table_with_segment(&spec, 4099).unwrap();
    assert_eq!(a, b);
}

#[test]
fn report_metadata() {
    let spec = ExperimentSpec::new(2, 2, 2, default_grid(1_000_000), Some(vec![1])).unwrap();
    let r = error_table(&spec).unwrap();
    assert!(!r.gate && r.gelfond_condition);
    assert_eq!(r.rows.len(), spec.x_grid().len());
    let lambda = 3f64.ln() / 4f64.ln();
    assert_eq!(r.lambda_ref, Some(lambda));
    assert_eq!(r.predicted_exponent, (0.5 + theta(2).unwrap()).max(lambda));
    assert!(r.lambda_hat.is_some() && r.fit_r2.is_some());

    let spec = ExperimentSpec::new(2, 4096, 3, vec![1000, 2000], None).unwrap();
    assert!(spec.gate() && !spec.gelfond_condition());
    let r = error_table(&spec).unwrap();
    assert!(r.lambda_hat.is_none() && r.fit_note.is_some());
    assert_eq!(r.predicted_exponent, 0.5 + theta(4096).unwrap());
}

#[test]
fn gate_cases() {
    assert!(!theorem_gate(2, 2).unwrap());
    assert!(theorem_gate(4096, 2).unwrap());
    assert!(theorem_gate(1_000_000, 3).unwrap());
    // smallest base passing the gate for each k
    let first = |k: u32| (2u64..).find(|&q| theorem_gate(q, k).unwrap()).unwrap();
    let (q2, q3) = (first(2), first(3));
    assert!(q2 < q3);
    assert!(!theorem_gate(q2 - 1, 2).unwrap());
}

#[test]
fn fit_recovers_power_laws() {
    let pts: Vec<(f64, f64)> = (0..9)
        .map(|j| 10f64.powf(3.0 + j as f64 / 2.0))
        .map(|x| (x, x.powf(0.6)))
        .collect();
    let f = fit_exponent(&pts).unwrap();
    assert!((f.slope - 0.6).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    assert!(fit_exponent(&pts[..2]).is_err());
}

#[test]
fn decreasing_trend_allows_one_step_up() {
    assert!(mostly_decreasing(&[5.0, 4.0, 4.5, 3.0], 1));
    assert!(!mostly_decreasing(&[5.0, 6.0, 4.0, 4.5], 1));
    assert!(mostly_decreasing(&[], 0));
}

#[test]
fn gelfond_binary_errors() {
    let spec = ResidueSpec::digit_class(2, 2, 0).unwrap();
    let grid: Vec<u64> = (10..=24).map(|j| 1u64 << j).collect();
    let r = gelfond_error_check(&grid, &spec, CheckMode::Assert).unwrap();
    // T₀(2^j) = 2^{j−1} − 1, so every error is exactly −1
    for row in &r.rows {
        assert_eq!(row.count, row.x / 2 - 1);
        assert_eq!(row.error, Fraction::new(-2, 2));
    }
    assert!(r.passed());
    assert_eq!(
        r.calibration,
        Some(1.0 / 1024f64.powf(3f64.ln() / 4f64.ln()))
    );
}

#[test]
fn gelfond_report_only_mode() {
    let spec = ResidueSpec::new(10, 3, 1, 2, 1).unwrap();
    let r = gelfond_error_check(&[10, 1000, 123_456], &spec, CheckMode::ReportOnly).unwrap();
    assert!(r.calibration.is_none() && r.passed());
    for row in &r.rows {
        assert_eq!(row.count, count_digit_class(row.x, &spec).unwrap());
        assert_eq!(row.main_term, Fraction::new(row.x as i128, 6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_identity(x in 1u64..50_000, k in 2u32..6, q in 2u64..50, p in 2u64..9) {
        let sums = restricted_sums_on_grid(&[x], k, q, p, 4096).unwrap();
        prop_assert_eq!(sums[0].iter().sum::<u64>(), divisor_summatory(x, k).unwrap());
    }

    #[test]
    fn unit_steps_in_count(x in 0u64..1 << 50, q in 2u64..100, p in 2u64..8) {
        let spec = ResidueSpec::digit_class(q, p, 0).unwrap();
        let c0 = count_digit_class(x, &spec).unwrap();
        let c1 = count_digit_class(x + 1, &spec).unwrap();
        prop_assert!(c1 == c0 || c1 == c0 + 1);
    }
}
