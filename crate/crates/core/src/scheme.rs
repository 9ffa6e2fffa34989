//! Construction of the basis matrix `F`, the switching matrix `S` and the
//! per-transmitter binary precoders from `(K, r)`.
//!
//! Layout of `F` (rows are time slots, columns are users): `r-1` stacked
//! copies of `A = 1 - I`, followed by a block `B` whose rows each have
//! exactly `r` zeros. `S` has the same layout, with the diagonal of the
//! `j`-th A-block (`j >= 2`) set to mode `j`.
//!
//! A precoder vector for coalition `Q` is the entrywise product of the
//! columns of `F` outside `Q`; it is shared by every member of `Q`.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_usize, coalitions, coalitions_containing, Coalition};
use crate::dof_bounds::{block_length, optimal_r, sum_dof_formula, Dof};
use crate::error::{BiaError, Result};

/// `(K, r, n, M)` plus the padding flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    #[serde(rename = "K")]
    k: usize,
    r: usize,
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    pad_b: bool,
}

impl SchemeParams {
    /// Validates `1 <= r <= K` and fills in `n` and `M = max(r, 2)`.
    ///
    /// With `pad_b` the B block holds every weight-`(K-r)` row once and
    /// `n = (r-1)K + C(K, r)`; otherwise `n = C(K-1, r) + r C(K-1, r-1)`.
    /// Feasibility of the B block is checked by [`build_basis_matrix`].
    pub fn new(k: usize, r: usize, pad_b: bool) -> Result<Self> {
        let formula_n = block_length(k, r)?;
        let n = if pad_b {
            (r - 1) * k + binomial_usize(k, r)
        } else {
            formula_n
        };
        Ok(Self {
            k,
            r,
            n,
            m: r.max(2),
            pad_b,
        })
    }

    /// Parameters at `r = optimal_r(K)`.
    pub fn optimal(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(BiaError::Parameter("K must be at least 1".into()));
        }
        Self::new(k, optimal_r(k), false)
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn modes(&self) -> usize {
        self.m
    }
    pub fn pad_b(&self) -> bool {
        self.pad_b
    }

    /// Rows of the B block, `n - (r-1)K`.
    pub fn b_rows(&self) -> usize {
        self.n - (self.r - 1) * self.k
    }

    /// Symbols per user, `C(K-1, r-1)`.
    pub fn symbols_per_user(&self) -> usize {
        binomial_usize(self.k - 1, self.r - 1)
    }

    /// Sum DoF this block length delivers if every check passes:
    /// `K C(K-1, r-1) / n`.
    pub fn nominal_sum_dof(&self) -> Dof {
        Dof::new((self.k * self.symbols_per_user()) as u128, self.n as u128)
    }

    /// `Kr/(r^2-r+K)`; equals [`Self::nominal_sum_dof`] when unpadded.
    pub fn formula_sum_dof(&self) -> Dof {
        sum_dof_formula(self.k, self.r).expect("validated params")
    }

    fn check_consistent(&self) -> Result<()> {
        let expect = Self::new(self.k, self.r, self.pad_b)
            .map_err(|e| BiaError::Schema(format!("params: {e}")))?;
        if expect != *self {
            return Err(BiaError::Schema(format!(
                "params inconsistent: got n={}, M={}, expected n={}, M={}",
                self.n, self.m, expect.n, expect.m
            )));
        }
        Ok(())
    }
}

/// Dense row-major `n x K` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(BiaError::Schema(format!(
                "row {} has {} entries, expected {cols}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    fn set(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.cols + col] = v;
    }

    fn column(&self, col: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    fn to_rows(&self) -> Vec<Vec<T>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[T]>::to_vec)
            .collect()
    }
}

/// The binary basis matrix `F` (`n x K`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix(Grid<u8>);

impl BinaryMatrix {
    pub fn rows(&self) -> usize {
        self.0.rows
    }
    pub fn cols(&self) -> usize {
        self.0.cols
    }
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0.get(row, col)
    }
    /// Column `F_j` (0-based `j`).
    pub fn column(&self, col: usize) -> Vec<u8> {
        self.0.column(col)
    }
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.0.to_rows()
    }
    pub fn from_rows(rows: Vec<Vec<u8>>, cols: usize) -> Result<Self> {
        if rows.iter().flatten().any(|&b| b > 1) {
            return Err(BiaError::Schema("F entries must be 0 or 1".into()));
        }
        Grid::from_rows(rows, cols).map(Self)
    }
}

/// The switching matrix `S` (`n x K`); column `p` is receiver `p`'s
/// per-slot antenna mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchMatrix(Grid<u32>);

impl SwitchMatrix {
    pub fn rows(&self) -> usize {
        self.0.rows
    }
    pub fn cols(&self) -> usize {
        self.0.cols
    }
    /// Mode used by receiver `receiver` in slot `slot`.
    pub fn mode(&self, slot: usize, receiver: usize) -> usize {
        self.0.get(slot, receiver) as usize
    }
    /// Switching pattern `S_p` (0-based `p`).
    pub fn pattern(&self, receiver: usize) -> Vec<u32> {
        self.0.column(receiver)
    }
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.0.to_rows()
    }
    pub fn from_rows(rows: Vec<Vec<u32>>, cols: usize, modes: usize) -> Result<Self> {
        if let Some(&m) = rows.iter().flatten().find(|&&m| m as usize >= modes) {
            return Err(BiaError::Schema(format!(
                "switching mode {m} out of range (M={modes})"
            )));
        }
        Grid::from_rows(rows, cols).map(Self)
    }
}

/// Binary precoder columns of one transmitter, each labelled with the
/// coalition that shares it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecoderSet {
    pub owner: usize,
    pub vectors: Vec<Vec<u8>>,
    pub labels: Vec<Coalition>,
}

impl PrecoderSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vector stored under `label`, if any.
    pub fn vector_for(&self, label: &Coalition) -> Option<&[u8]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.vectors[i].as_slice())
    }
}

/// A complete scheme: parameters, `F`, `S` and one precoder set per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiaScheme {
    pub params: SchemeParams,
    pub f: BinaryMatrix,
    pub s: SwitchMatrix,
    pub precoders: Vec<PrecoderSet>,
}

/// Builds the scheme for `params`.
pub fn construct(params: SchemeParams) -> Result<BiaScheme> {
    let f = build_basis_matrix(&params)?;
    let s = build_switch_matrix(&params, &f)?;
    let precoders = build_precoders(&params, &f)?;
    Ok(BiaScheme {
        params,
        f,
        s,
        precoders,
    })
}

/// Complement-indicator row of coalition `q`: zeros on `q`, ones elsewhere.
fn complement_indicator(q: &Coalition, k: usize) -> Vec<u8> {
    (0..k).map(|j| u8::from(!q.contains(j))).collect()
}

/// Rows of the B block.
///
/// Unpadded: complement indicators of the `r`-subsets in lexicographic
/// order, cycling when more rows are needed than distinct rows exist.
/// Padded: every distinct row once, ordered lexicographically by the
/// positions of their ones.
fn b_block(params: &SchemeParams) -> Vec<Vec<u8>> {
    let (k, r) = (params.k, params.r);
    let mut pool: Vec<Vec<u8>> = coalitions(k, r)
        .iter()
        .map(|q| complement_indicator(q, k))
        .collect();
    if params.pad_b {
        pool.reverse();
    }
    pool.iter().cycle().take(params.b_rows()).cloned().collect()
}

pub fn build_basis_matrix(params: &SchemeParams) -> Result<BinaryMatrix> {
    let (k, r, n) = (params.k, params.r, params.n);
    let a_rows = (r - 1) * k;
    let min_b = binomial_usize(k - 1, r - 1);
    let b = n as i64 - a_rows as i64;
    if b < min_b as i64 {
        return Err(BiaError::Infeasible {
            k,
            r,
            bound: format!(
                "B block needs at least C(K-1, r-1) = {min_b} rows but n - (r-1)K = {b}; \
                 use pad_b to extend B"
            ),
        });
    }
    let mut rows = Vec::with_capacity(n);
    for _ in 0..r - 1 {
        for i in 0..k {
            rows.push((0..k).map(|j| u8::from(i != j)).collect());
        }
    }
    rows.extend(b_block(params));
    debug_assert_eq!(rows.len(), n);
    BinaryMatrix::from_rows(rows, k)
}

pub fn build_switch_matrix(params: &SchemeParams, f: &BinaryMatrix) -> Result<SwitchMatrix> {
    let (k, r, n) = (params.k, params.r, params.n);
    if f.rows() != n || f.cols() != k {
        return Err(BiaError::Consistency(format!(
            "F is {}x{}, params expect {n}x{k}",
            f.rows(),
            f.cols()
        )));
    }
    let mut grid = Grid {
        rows: n,
        cols: k,
        data: f.0.data.iter().map(|&b| u32::from(b)).collect(),
    };
    // A-blocks 2..r-1 (1-based) get mode j on their diagonal
    for block in 1..r - 1 {
        for i in 0..k {
            grid.set(block * k + i, i, (block + 1) as u32);
        }
    }
    Ok(SwitchMatrix(grid))
}

/// Entrywise product of the columns of `F` outside `q`; the all-ones
/// vector when `q` covers every user.
pub fn coalition_shared_vector(f: &BinaryMatrix, q: &Coalition, r: usize) -> Result<Vec<u8>> {
    if q.len() != r {
        return Err(BiaError::Parameter(format!(
            "coalition {q} has {} members, expected r={r}",
            q.len()
        )));
    }
    let outside = q.complement(f.cols());
    Ok((0..f.rows())
        .map(|row| outside.iter().map(|&c| f.get(row, c)).product())
        .collect())
}

pub fn build_precoders(params: &SchemeParams, f: &BinaryMatrix) -> Result<Vec<PrecoderSet>> {
    let (k, r) = (params.k, params.r);
    (0..k)
        .map(|owner| {
            let labels = coalitions_containing(k, r, owner);
            let vectors = labels
                .iter()
                .map(|q| coalition_shared_vector(f, q, r))
                .collect::<Result<_>>()?;
            Ok(PrecoderSet {
                owner,
                vectors,
                labels,
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct PrecoderEntry {
    coalition: Coalition,
    vector: Vec<u8>,
}

/// On-disk form of a scheme.
#[derive(Serialize, Deserialize)]
pub struct SchemeDocument {
    params: SchemeParams,
    #[serde(rename = "F")]
    f: Vec<Vec<u8>>,
    #[serde(rename = "S")]
    s: Vec<Vec<u32>>,
    precoders: Vec<Vec<PrecoderEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl BiaScheme {
    /// Constructs the scheme for `K` at `r` (optimal when `None`).
    pub fn build(k: usize, r: Option<usize>, pad_b: bool) -> Result<Self> {
        if k == 0 {
            return Err(BiaError::Parameter("K must be at least 1".into()));
        }
        construct(SchemeParams::new(
            k,
            r.unwrap_or_else(|| optimal_r(k)),
            pad_b,
        )?)
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Every coalition label occurring in any precoder set, sorted.
    pub fn coalition_labels(&self) -> Vec<Coalition> {
        let mut all: Vec<Coalition> = self
            .precoders
            .iter()
            .flat_map(|p| p.labels.iter().cloned())
            .collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn to_document(&self, meta: Option<serde_json::Value>) -> SchemeDocument {
        SchemeDocument {
            params: self.params,
            f: self.f.to_rows(),
            s: self.s.to_rows(),
            precoders: self
                .precoders
                .iter()
                .map(|set| {
                    set.labels
                        .iter()
                        .zip(&set.vectors)
                        .map(|(c, v)| PrecoderEntry {
                            coalition: c.clone(),
                            vector: v.clone(),
                        })
                        .collect()
                })
                .collect(),
            meta,
        }
    }

    /// Validates shapes and ranges of a loaded document. The contents of
    /// `F`, `S` and the precoders are not required to follow the
    /// construction.
    pub fn from_document(doc: SchemeDocument) -> Result<Self> {
        let params = doc.params;
        params.check_consistent()?;
        let (k, n, r) = (params.k, params.n, params.r);
        if doc.f.len() != n || doc.s.len() != n {
            return Err(BiaError::Schema(format!(
                "F has {} rows and S has {} rows, expected n={n}",
                doc.f.len(),
                doc.s.len()
            )));
        }
        let f = BinaryMatrix::from_rows(doc.f, k)?;
        let s = SwitchMatrix::from_rows(doc.s, k, params.m)?;
        if doc.precoders.len() != k {
            return Err(BiaError::Schema(format!(
                "{} precoder sets, expected K={k}",
                doc.precoders.len()
            )));
        }
        let precoders = doc
            .precoders
            .into_iter()
            .enumerate()
            .map(|(owner, entries)| {
                let mut labels = Vec::with_capacity(entries.len());
                let mut vectors = Vec::with_capacity(entries.len());
                for e in entries {
                    let c = e.coalition;
                    if c.len() != r || c.members().iter().any(|&m| m >= k) || !c.contains(owner) {
                        return Err(BiaError::Schema(format!(
                            "transmitter {}: label {c} must be an r-subset of 1..={k} containing it",
                            owner + 1
                        )));
                    }
                    if labels.contains(&c) {
                        return Err(BiaError::Schema(format!(
                            "transmitter {}: label {c} repeated",
                            owner + 1
                        )));
                    }
                    if e.vector.len() != n || e.vector.iter().any(|&b| b > 1) {
                        return Err(BiaError::Schema(format!(
                            "transmitter {}: vector for {c} must be {n} bits",
                            owner + 1
                        )));
                    }
                    labels.push(c);
                    vectors.push(e.vector);
                }
                Ok(PrecoderSet {
                    owner,
                    vectors,
                    labels,
                })
            })
            .collect::<Result<_>>()?;
        Ok(BiaScheme {
            params,
            f,
            s,
            precoders,
        })
    }

    pub fn to_json(&self, meta: Option<serde_json::Value>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document(meta))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SchemeDocument =
            serde_json::from_str(text).map_err(|e| BiaError::Schema(e.to_string()))?;
        Self::from_document(doc)
    }
}
