//! Closed-form sum-DoF bound `Kr/(r^2-r+K)`, its maximizing `r`, and the
//! DoF-versus-K curve.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::combinatorics::binomial;
use crate::error::{BiaError, Result};

/// Exact degrees-of-freedom value.
pub type Dof = Ratio<u128>;

fn check_range(k: usize, r: usize) -> Result<()> {
    if k == 0 {
        return Err(BiaError::Parameter("K must be at least 1".into()));
    }
    if r == 0 || r > k {
        return Err(BiaError::Parameter(format!(
            "r must satisfy 1 <= r <= K (got K={k}, r={r})"
        )));
    }
    Ok(())
}

/// Smallest `r` with `r(r+1) >= K`, i.e. `ceil((sqrt(1+4K)-1)/2)`.
pub fn optimal_r(k: usize) -> usize {
    assert!(k >= 1, "K must be at least 1");
    let k = k as u128;
    // isqrt start, then fix up with exact integer comparisons
    let mut r = ((k as f64).sqrt() as u128).max(1);
    while r > 1 && (r - 1) * r >= k {
        r -= 1;
    }
    while r * (r + 1) < k {
        r += 1;
    }
    r as usize
}

/// `Kr / (r^2 - r + K)` as an exact rational.
pub fn sum_dof_formula(k: usize, r: usize) -> Result<Dof> {
    check_range(k, r)?;
    let (k, r) = (k as u128, r as u128);
    Ok(Ratio::new(k * r, r * r - r + k))
}

/// Supersymbol length `C(K-1, r) + r C(K-1, r-1)`.
pub fn block_length(k: usize, r: usize) -> Result<usize> {
    check_range(k, r)?;
    let n = binomial(k - 1, r) + r as u128 * binomial(k - 1, r - 1);
    usize::try_from(n).map_err(|_| BiaError::Parameter(format!("n overflows for K={k}, r={r}")))
}

/// Exhaustive check that [`optimal_r`] attains the maximum of
/// [`sum_dof_formula`] over `r in 1..=K`, ties going to the smallest `r`.
pub fn verify_r_optimality(k: usize) -> bool {
    let best = (1..=k)
        .map(|r| (r, sum_dof_formula(k, r).expect("r in range")))
        .fold(None::<(usize, Dof)>, |acc, (r, d)| match acc {
            Some((_, bd)) if bd >= d => acc,
            _ => Some((r, d)),
        });
    best.map(|(r, _)| r) == Some(optimal_r(k))
}

/// One row of the DoF-versus-K curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofCurvePoint {
    #[serde(rename = "K")]
    pub k: usize,
    pub r_star: usize,
    #[serde(with = "crate::rational")]
    pub dof: Dof,
    pub dof_decimal: String,
    /// `sqrt(K)/2`, rendered.
    pub asymptote: String,
}

pub fn curve_point(k: usize) -> DofCurvePoint {
    let r_star = optimal_r(k);
    let dof = sum_dof_formula(k, r_star).expect("optimal r is in range");
    DofCurvePoint {
        k,
        r_star,
        dof,
        dof_decimal: format_significant(ratio_to_f64(&dof), 6),
        asymptote: format_significant((k as f64).sqrt() / 2.0, 6),
    }
}

pub fn outer_bound_curve(k_min: usize, k_max: usize) -> Result<Vec<DofCurvePoint>> {
    if k_min == 0 || k_min > k_max {
        return Err(BiaError::Parameter(format!(
            "need 1 <= K_min <= K_max (got {k_min}, {k_max})"
        )));
    }
    Ok((k_min..=k_max).map(curve_point).collect())
}

/// Relative distance of the optimal sum DoF from `sqrt(K)/2`.
pub fn asymptotic_gap(k: usize) -> f64 {
    let dof = sum_dof_formula(k, optimal_r(k)).expect("optimal r is in range");
    let asym = (k as f64).sqrt() / 2.0;
    (ratio_to_f64(&dof) - asym).abs() / asym
}

/// Writes the curve as CSV with columns
/// `K,r_star,dof_num,dof_den,dof_decimal,sqrtK_over_2`.
pub fn write_curve_csv<W: Write>(points: &[DofCurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "K",
        "r_star",
        "dof_num",
        "dof_den",
        "dof_decimal",
        "sqrtK_over_2",
    ])?;
    for p in points {
        w.write_record([
            p.k.to_string(),
            p.r_star.to_string(),
            p.dof.numer().to_string(),
            p.dof.denom().to_string(),
            p.dof_decimal.clone(),
            p.asymptote.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn ratio_to_f64(x: &Dof) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Renders `x` with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_argmax(k: usize) -> usize {
        // cross-multiplied comparison, independent of Ratio
        let mut best = 1u128;
        for r in 2..=k as u128 {
            let kk = k as u128;
            let lhs = kk * r * (best * best - best + kk);
            let rhs = kk * best * (r * r - r + kk);
            if lhs > rhs {
                best = r;
            }
        }
        best as usize
    }

    #[test]
    fn optimal_r_examples() {
        assert_eq!(optimal_r(5), 2);
        assert_eq!(optimal_r(1), 1);
        assert_eq!(optimal_r(3), 2);
        assert_eq!(optimal_r(2), 1);
        assert_eq!(optimal_r(42), 6);
        assert_eq!(optimal_r(10_000), 100);
    }

    #[test]
    fn optimal_r_matches_brute_force() {
        for k in 1..=300 {
            assert_eq!(optimal_r(k), brute_force_argmax(k), "K={k}");
        }
    }

    #[test]
    fn sum_dof_examples() {
        assert_eq!(sum_dof_formula(5, 2).unwrap(), Ratio::new(10, 7));
        assert_eq!(sum_dof_formula(3, 2).unwrap(), Ratio::new(6, 5));
        assert_eq!(sum_dof_formula(4, 1).unwrap(), Ratio::from_integer(1));
        assert!(sum_dof_formula(3, 0).is_err());
        assert!(sum_dof_formula(3, 4).is_err());
    }

    #[test]
    fn block_length_examples() {
        assert_eq!(block_length(5, 2).unwrap(), 14);
        assert_eq!(block_length(3, 2).unwrap(), 5);
        assert_eq!(block_length(2, 1).unwrap(), 2);
        assert!(block_length(2, 3).is_err());
    }

    #[test]
    fn curve_examples() {
        let c = outer_bound_curve(2, 42).unwrap();
        assert_eq!((c[0].r_star, c[0].dof), (1, Ratio::from_integer(1)));
        assert_eq!((c[3].k, c[3].r_star, c[3].dof), (5, 2, Ratio::new(10, 7)));
        let last = c.last().unwrap();
        assert_eq!((last.k, last.r_star, last.dof), (42, 6, Ratio::new(7, 2)));
        assert_eq!(c[3].dof_decimal, "1.42857");
        assert!(outer_bound_curve(0, 3).is_err());
        assert!(outer_bound_curve(5, 3).is_err());
    }

    #[test]
    fn asymptotic_gap_examples() {
        assert!((asymptotic_gap(1) - 1.0).abs() < 1e-12);
        // 10^6 / 19900 vs 50
        let expected = (1e6 / 19900.0 - 50.0) / 50.0;
        assert!((asymptotic_gap(10_000) - expected).abs() < 1e-12);
        assert!((asymptotic_gap(100) - (1000.0 / 190.0 - 5.0) / 5.0).abs() < 1e-12);
        assert!(asymptotic_gap(100) > asymptotic_gap(1000));
        assert!(asymptotic_gap(1000) > asymptotic_gap(10_000));
    }

    #[test]
    fn unimodal_in_r() {
        for k in 1..=200 {
            let rs = optimal_r(k);
            let d: Vec<Dof> = (1..=k).map(|r| sum_dof_formula(k, r).unwrap()).collect();
            for r in 1..rs {
                assert!(d[r - 1] <= d[r], "K={k} increasing part r={r}");
            }
            for r in rs..k {
                assert!(d[r - 1] >= d[r], "K={k} decreasing part r={r}");
            }
        }
    }

    #[test]
    fn never_worse_than_baselines() {
        for k in 1..=500 {
            let d = sum_dof_formula(k, optimal_r(k)).unwrap();
            assert!(d >= Ratio::from_integer(1));
            if k >= 3 {
                assert!(d >= Ratio::new(6, 5));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_curve_csv(&outer_bound_curve(5, 5).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "K,r_star,dof_num,dof_den,dof_decimal,sqrtK_over_2\n5,2,10,7,1.42857,1.11803\n"
        );
    }
}
