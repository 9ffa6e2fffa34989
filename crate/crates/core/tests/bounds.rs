use num_rational::Ratio;
use proptest::prelude::*;

use bia_core::combinatorics::binomial;
use bia_core::dof_bounds::{
    asymptotic_gap, block_length, curve_point, optimal_r, outer_bound_curve, sum_dof_formula,
};

/// First r at which the formula stops increasing, found by scanning.
fn scanned_peak(k: usize) -> usize {
    (1..k)
        .find(|&r| sum_dof_formula(k, r + 1).unwrap() <= sum_dof_formula(k, r).unwrap())
        .unwrap_or(k)
}

proptest! {
    #[test]
    fn formula_is_unimodal_with_peak_at_optimal_r(k in 1usize..=200) {
        let r_star = optimal_r(k);
        prop_assert_eq!(scanned_peak(k), r_star);
        let values: Vec<_> = (1..=k).map(|r| sum_dof_formula(k, r).unwrap()).collect();
        for w in values[..r_star].windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for w in values[r_star - 1..].windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn formula_equals_symbol_count_over_block_length(k in 1usize..=60, r_frac in 0.0f64..1.0) {
        let r = 1 + ((k - 1) as f64 * r_frac) as usize;
        let n = block_length(k, r).unwrap() as u128;
        let symbols = k as u128 * binomial(k - 1, r - 1);
        prop_assert_eq!(Ratio::new(symbols, n), sum_dof_formula(k, r).unwrap());
    }

    #[test]
    fn optimal_r_is_smallest_with_r_times_r_plus_one_at_least_k(k in 1usize..=1_000_000) {
        let r = optimal_r(k);
        prop_assert!(r * (r + 1) >= k);
        prop_assert!(r == 1 || (r - 1) * r < k);
    }

    #[test]
    fn curve_points_are_consistent(k in 1usize..=500) {
        let p = curve_point(k);
        prop_assert_eq!(p.dof, sum_dof_formula(k, p.r_star).unwrap());
        prop_assert!(p.dof >= Ratio::from_integer(1));
        if k >= 3 {
            prop_assert!(p.dof >= Ratio::new(6, 5));
        }
        let asymptote: f64 = p.asymptote.parse().unwrap();
        prop_assert!((asymptote / ((k as f64).sqrt() / 2.0) - 1.0).abs() < 1e-5);
    }
}

#[test]
fn named_points() {
    assert_eq!(curve_point(5).dof, Ratio::new(10, 7));
    assert_eq!(
        (curve_point(2).r_star, curve_point(2).dof),
        (1, Ratio::from_integer(1))
    );
    assert_eq!(
        (curve_point(42).r_star, curve_point(42).dof),
        (6, Ratio::new(7, 2))
    );
    assert_eq!(curve_point(10_000).r_star, 100);
    assert!((asymptotic_gap(1) - 1.0).abs() < 1e-12);
    assert!((asymptotic_gap(100) - 0.0526).abs() < 1e-3);
}

#[test]
fn gap_shrinks_along_decades() {
    let gaps: Vec<f64> = [100, 1_000, 10_000]
        .iter()
        .map(|&k| asymptotic_gap(k))
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    assert!(gaps[2] < 0.01);
}

#[test]
fn curve_rejects_bad_range() {
    assert!(outer_bound_curve(0, 3).is_err());
    assert!(outer_bound_curve(5, 4).is_err());
    assert_eq!(outer_bound_curve(2, 50).unwrap().len(), 49);
}
