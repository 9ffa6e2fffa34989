use proptest::prelude::*;

use bia_core::combinatorics::{binomial_usize, coalitions, coalitions_containing};
use bia_core::dof_bounds::optimal_r;
use bia_core::scheme::{coalition_shared_vector, SchemeParams};
use bia_core::{BiaError, BiaScheme};

/// Independent reference for the basis matrix: `(r-1)` copies of `1 - I`
/// followed by `b` rows, each with exactly `K-r` ones.
fn check_basis_shape(s: &BiaScheme) -> Result<(), TestCaseError> {
    let (k, r, n) = (s.k(), s.params.r(), s.n());
    let rows = s.f.to_rows();
    prop_assert_eq!(rows.len(), n);
    for block in 0..r - 1 {
        for (i, row) in rows[block * k..(block + 1) * k].iter().enumerate() {
            for (j, &bit) in row.iter().enumerate() {
                prop_assert_eq!(bit, u8::from(i != j));
            }
        }
    }
    for row in &rows[(r - 1) * k..] {
        prop_assert_eq!(row.iter().filter(|&&b| b == 1).count(), k - r);
    }
    Ok(())
}

/// Element-wise product of the `F` columns outside `q`.
fn hadamard_outside(s: &BiaScheme, members: &[usize]) -> Vec<u8> {
    (0..s.n())
        .map(|row| {
            (0..s.k())
                .filter(|c| !members.contains(c))
                .map(|c| s.f.get(row, c))
                .product()
        })
        .collect()
}

fn feasible() -> impl Strategy<Value = (usize, usize, bool)> {
    (2usize..=9)
        .prop_flat_map(|k| (Just(k), 1..=k, any::<bool>()))
        .prop_filter_map("construction must be feasible", |(k, r, pad)| {
            BiaScheme::build(k, Some(r), pad).ok().map(|_| (k, r, pad))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_and_switching_follow_the_block_layout((k, r, pad) in feasible()) {
        let s = BiaScheme::build(k, Some(r), pad).unwrap();
        check_basis_shape(&s)?;
        for slot in 0..s.n() {
            for p in 0..k {
                let block = slot / k;
                let on_diag = slot < (r - 1) * k && slot % k == p;
                let expect = if on_diag && block >= 1 {
                    block as u32 + 1
                } else {
                    u32::from(s.f.get(slot, p))
                };
                prop_assert_eq!(s.s.mode(slot, p) as u32, expect);
                prop_assert!(s.s.mode(slot, p) < s.params.modes());
            }
        }
    }

    #[test]
    fn precoders_are_hadamard_products((k, r, pad) in feasible()) {
        let s = BiaScheme::build(k, Some(r), pad).unwrap();
        prop_assert_eq!(s.precoders.len(), k);
        for (owner, set) in s.precoders.iter().enumerate() {
            prop_assert_eq!(set.len(), binomial_usize(k - 1, r - 1));
            prop_assert_eq!(&set.labels, &coalitions_containing(k, r, owner));
            for (label, v) in set.labels.iter().zip(&set.vectors) {
                prop_assert_eq!(v, &hadamard_outside(&s, label.members()));
            }
        }
        for q in coalitions(k, r) {
            let shared = coalition_shared_vector(&s.f, &q, r).unwrap();
            for &holder in q.members() {
                prop_assert_eq!(s.precoders[holder].vector_for(&q), Some(shared.as_slice()));
            }
        }
    }

    #[test]
    fn block_length_matches_formula((k, r, pad) in feasible()) {
        let s = BiaScheme::build(k, Some(r), pad).unwrap();
        let expect = if pad {
            (r - 1) * k + binomial_usize(k, r)
        } else {
            binomial_usize(k - 1, r) + r * binomial_usize(k - 1, r - 1)
        };
        prop_assert_eq!(s.n(), expect);
        prop_assert_eq!(s.params.modes(), r.max(2));
    }

    #[test]
    fn json_round_trip_is_lossless((k, r, pad) in feasible()) {
        let s = BiaScheme::build(k, Some(r), pad).unwrap();
        let back = BiaScheme::from_json(&s.to_json(None).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn unpadded_b_rows_are_distinct_until_exhausted() {
    for k in 2..=12 {
        let s = BiaScheme::build(k, None, false).unwrap();
        let r = s.params.r();
        let b: Vec<Vec<u8>> = s.f.to_rows()[(r - 1) * k..].to_vec();
        let distinct = binomial_usize(k, r);
        let head = &b[..b.len().min(distinct)];
        let mut sorted = head.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), head.len(), "K={k}");
        for (i, row) in b.iter().enumerate().skip(distinct) {
            assert_eq!(
                row,
                &b[i - distinct],
                "K={k} row {i} should repeat the cycle"
            );
        }
    }
}

#[test]
fn optimal_r_is_the_default() {
    for k in 1..=20 {
        let s = BiaScheme::build(k, None, false).unwrap();
        assert_eq!(s.params.r(), optimal_r(k));
        assert_eq!(s.params, SchemeParams::optimal(k).unwrap());
    }
}

#[test]
fn too_few_b_rows_is_infeasible() {
    // K=4, r=3: n - (r-1)K = 2 rows but 3 precoders per user
    assert!(matches!(
        BiaScheme::build(4, Some(3), false),
        Err(BiaError::Infeasible { k: 4, r: 3, .. })
    ));
    assert!(BiaScheme::build(4, Some(3), true).is_ok());
    assert!(matches!(
        BiaScheme::build(0, None, false),
        Err(BiaError::Parameter(_))
    ));
    assert!(matches!(
        BiaScheme::build(3, Some(4), false),
        Err(BiaError::Parameter(_))
    ));
}
