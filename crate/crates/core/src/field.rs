//! Arithmetic in the prime field of order `2^61 - 1` and rank computation
//! by Gaussian elimination.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const MODULUS: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp(u64);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    pub fn new(x: u64) -> Self {
        Fp(reduce64(x))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        (!self.is_zero()).then(|| self.pow(MODULUS - 2))
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn reduce64(x: u64) -> u64 {
    let y = (x & MODULUS) + (x >> 61);
    if y >= MODULUS {
        y - MODULUS
    } else {
        y
    }
}

impl From<u8> for Fp {
    fn from(x: u8) -> Self {
        Fp(x as u64)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let s = self.0 + rhs.0;
        Fp(if s >= MODULUS { s - MODULUS } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        self + (-rhs)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(MODULUS - self.0)
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let p = self.0 as u128 * rhs.0 as u128;
        let lo = (p as u64) & MODULUS;
        let hi = (p >> 61) as u64;
        Fp(reduce64(lo + hi))
    }
}

/// Incrementally maintained echelon basis of a subspace of `Fp^len`.
///
/// Each stored vector has a pivot coordinate where every other stored
/// vector is zero.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, Vec<Fp>)>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` to the span; returns `true` when the rank grew.
    pub fn insert(&mut self, mut v: Vec<Fp>) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        for (pivot, row) in &self.rows {
            let c = v[*pivot];
            if !c.is_zero() {
                for (x, y) in v.iter_mut().zip(row) {
                    *x = *x - c * *y;
                }
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pivot].inv().expect("nonzero pivot");
        for x in v.iter_mut() {
            *x = *x * inv;
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[pivot];
            if !c.is_zero() {
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = *x - c * *y;
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }
}

/// Rank of the matrix whose columns are `cols` (all of one length).
pub fn rank_of_columns(cols: &[Vec<Fp>]) -> usize {
    let Some(first) = cols.first() else {
        return 0;
    };
    let mut basis = EchelonBasis::new(first.len());
    for c in cols {
        basis.insert(c.clone());
        if basis.rank() == first.len() {
            break;
        }
    }
    basis.rank()
}
