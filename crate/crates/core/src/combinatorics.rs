//! Binomial coefficients and lexicographic subset enumeration.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{BiaError, Result};

/// `C(n, k)` in `u128`. Panics on overflow, which does not happen for
/// `n <= 128`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        let num = (n - i) as u128;
        let g = num_integer::gcd(acc, (i + 1) as u128);
        let den = (i + 1) as u128 / g;
        acc = (acc / g).checked_mul(num / den).expect("binomial overflow");
    }
    acc
}

/// `C(n, k)` as `usize`, for sizes that index into memory.
pub fn binomial_usize(n: usize, k: usize) -> usize {
    usize::try_from(binomial(n, k)).expect("binomial does not fit usize")
}

/// A set of `r` distinct transmitters, stored 0-based and sorted ascending.
///
/// Serialized 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    /// Builds a coalition from 0-based member indices.
    pub fn new(mut members: Vec<usize>, k: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(BiaError::Parameter(format!(
                "coalition has repeated members: {members:?}"
            )));
        }
        if let Some(&m) = members.iter().find(|&&m| m >= k) {
            return Err(BiaError::Parameter(format!(
                "coalition member {} outside 1..={k}",
                m + 1
            )));
        }
        Ok(Self(members))
    }

    pub fn from_one_based(members: &[usize], k: usize) -> Result<Self> {
        if members.contains(&0) {
            return Err(BiaError::Parameter(
                "coalition members are 1-based".to_string(),
            ));
        }
        Self::new(members.iter().map(|m| m - 1).collect(), k)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, member: usize) -> bool {
        self.0.binary_search(&member).is_ok()
    }

    /// Members of `{0, .., k-1}` not in the coalition, ascending.
    pub fn complement(&self, k: usize) -> Vec<usize> {
        (0..k).filter(|i| !self.contains(*i)).collect()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|m| m + 1).collect()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Coalition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coalition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("coalition members are 1-based"));
        }
        let mut members: Vec<usize> = raw.iter().map(|m| m - 1).collect();
        members.sort_unstable();
        members.dedup();
        if members.len() != raw.len() {
            return Err(serde::de::Error::custom("coalition has repeated members"));
        }
        Ok(Coalition(members))
    }
}

/// Iterator over the `r`-subsets of `{0, .., k-1}` in lexicographic order.
pub struct Subsets {
    k: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let r = out.len();
        let mut next = out.clone();
        // rightmost position that can still advance
        let pos = (0..r).rev().find(|&i| next[i] < self.k - r + i);
        self.current = pos.map(|i| {
            next[i] += 1;
            for j in i + 1..r {
                next[j] = next[j - 1] + 1;
            }
            next
        });
        Some(out)
    }
}

pub fn subsets(k: usize, r: usize) -> Subsets {
    Subsets {
        k,
        current: (r <= k).then(|| (0..r).collect()),
    }
}

/// All `r`-coalitions of `k` transmitters in lexicographic order.
pub fn coalitions(k: usize, r: usize) -> Vec<Coalition> {
    subsets(k, r).map(Coalition).collect()
}

/// The `r`-coalitions containing `owner`, in lexicographic order.
pub fn coalitions_containing(k: usize, r: usize, owner: usize) -> Vec<Coalition> {
    subsets(k, r)
        .filter(|s| s.contains(&owner))
        .map(Coalition)
        .collect()
}
