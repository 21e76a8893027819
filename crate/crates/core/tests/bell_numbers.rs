use bellgarch::bell::{bell_triangle, log_bell_dobinski, log_bell_number, BellNumberTable};
use proptest::prelude::*;

/// B_{n+1} = sum_k C(n, k) B_k in u128.
fn binomial_oracle(max: usize) -> Vec<u128> {
    let mut bell = vec![1u128];
    for n in 0..max {
        let mut c = 1u128;
        let mut next = 0u128;
        for k in 0..=n {
            next += c * bell[k];
            c = c * (n - k) as u128 / (k + 1) as u128;
        }
        bell.push(next);
    }
    bell
}

#[test]
fn triangle_matches_binomial_recurrence() {
    let oracle = binomial_oracle(25);
    let tri = bell_triangle(25);
    for (n, (a, b)) in tri.iter().zip(&oracle).enumerate() {
        assert_eq!(a.to_string(), b.to_string(), "B_{n}");
    }
    assert_eq!(oracle[5], 52);
    assert_eq!(oracle[10], 115_975);
}

#[test]
fn log_values_match_oracle() {
    for (n, b) in binomial_oracle(25).into_iter().enumerate() {
        let exact = (b as f64).ln();
        assert!(
            (log_bell_number(n) - exact).abs() <= 1e-14 * exact.abs().max(1.0),
            "n={n}"
        );
    }
}

#[test]
fn dobinski_agrees_with_exact() {
    for n in 20..=64 {
        let exact = log_bell_number(n);
        let dob = log_bell_dobinski(n);
        assert!(
            ((dob - exact) / exact).abs() < 1e-10,
            "n={n}: {dob} vs {exact}"
        );
    }
}

#[test]
fn table_extends_past_exact_range() {
    let table = BellNumberTable::with_max_index(300);
    assert!(table.max_index() >= 300);
    let v = table.log_values();
    assert!(v.windows(2).all(|w| w[1] > w[0] || w[0] == 0.0));
    assert!(v.iter().all(|x| x.is_finite()));
}

proptest! {
    #[test]
    fn log_bell_strictly_increasing(n in 1usize..400) {
        prop_assert!(log_bell_number(n + 1) > log_bell_number(n));
    }

    #[test]
    fn log_convexity(n in 1usize..300) {
        // B_{n-1} B_{n+1} >= B_n^2
        let lhs = log_bell_number(n - 1) + log_bell_number(n + 1);
        prop_assert!(lhs >= 2.0 * log_bell_number(n) - 1e-9);
    }
}
