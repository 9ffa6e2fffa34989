//! Rank of integer matrices over the rationals (fraction-free Bareiss
//! elimination on big integers).

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Rank over Q of the matrix whose columns are `cols`.
pub fn rational_rank(cols: &[Vec<u8>]) -> usize {
    let Some(first) = cols.first() else {
        return 0;
    };
    let rows = first.len();
    // work on the transpose: each column becomes a row
    let mut m: Vec<Vec<BigInt>> = cols
        .iter()
        .map(|c| c.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let height = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..rows {
        if rank == height {
            break;
        }
        let Some(p) = (rank..height).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..height {
            for j in col + 1..rows {
                let v = (&m[rank][col] * &m[i][j] - &m[i][col] * &m[rank][j]) / &prev;
                m[i][j] = v;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}
