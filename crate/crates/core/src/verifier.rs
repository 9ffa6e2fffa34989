//! Rank-based verification of a scheme: independence of each user's
//! precoders, alignment of shared vectors at outside receivers,
//! separability inside coalitions, decodability at every receiver, and the
//! dimension-counting inequality.
//!
//! Channel-dependent ranks are evaluated with mode gains drawn uniformly
//! from the nonzero elements of `GF(2^61 - 1)`. A rank that is full for a
//! random evaluation is full for generic channels; the converse fails with
//! probability at most `n / 2^61` per trial, so every conclusion is repeated
//! over several seeds and any disagreement is a hard failure.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::combinatorics::{subsets, Coalition};
use crate::dof_bounds::Dof;
use crate::error::{BiaError, Result};
use crate::exact_rank::rational_rank;
use crate::exec::{map_indexed, Execution};
use crate::field::{rank_of_columns, EchelonBasis, Fp, MODULUS};
use crate::scheme::{BiaScheme, SchemeParams, SwitchMatrix};
use crate::seeding::{derive_seed, rng_for, Stream};

/// Nonzero field value for every (receiver, transmitter, mode).
#[derive(Debug, Clone)]
pub struct GenericChannelAssignment {
    k: usize,
    modes: usize,
    seed: u64,
    values: Vec<Fp>,
}

impl GenericChannelAssignment {
    pub fn from_seed(k: usize, modes: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, Stream::FieldAssignment, 0);
        let values = (0..k * k * modes)
            .map(|_| Fp::new(rng.random_range(1..MODULUS)))
            .collect();
        Self {
            k,
            modes,
            seed,
            values,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn index(&self, p: usize, q: usize, m: usize) -> usize {
        (p * self.k + q) * self.modes + m
    }

    pub fn value(&self, p: usize, q: usize, m: usize) -> Fp {
        self.values[self.index(p, q, m)]
    }

    /// Multiplies one gain by a nonzero constant.
    pub fn rescale(&mut self, p: usize, q: usize, m: usize, factor: Fp) {
        assert!(!factor.is_zero(), "rescaling factor must be nonzero");
        let i = self.index(p, q, m);
        self.values[i] = self.values[i] * factor;
    }
}

/// Diagonal of `H^[pq]`: slot `j` carries the gain of the mode receiver
/// `p` selects in slot `j`.
pub fn realize_diagonal(
    assignment: &GenericChannelAssignment,
    p: usize,
    q: usize,
    s: &SwitchMatrix,
) -> Result<Vec<Fp>> {
    if p >= s.cols() || q >= s.cols() {
        return Err(BiaError::Parameter(format!(
            "receiver {} / transmitter {} outside 1..={}",
            p + 1,
            q + 1,
            s.cols()
        )));
    }
    (0..s.rows())
        .map(|slot| {
            let m = s.mode(slot, p);
            if m >= assignment.modes {
                Err(BiaError::Schema(format!(
                    "slot {} of S_{} uses mode {m}, assignment has {} modes",
                    slot + 1,
                    p + 1,
                    assignment.modes
                )))
            } else {
                Ok(assignment.value(p, q, m))
            }
        })
        .collect()
}

fn apply(diag: &[Fp], v: &[u8]) -> Vec<Fp> {
    diag.iter()
        .zip(v)
        .map(|(&h, &b)| if b == 1 { h } else { Fp::ZERO })
        .collect()
}

/// Who holds which copy of each coalition's vector.
struct Holdings<'a> {
    scheme: &'a BiaScheme,
    labels: Vec<Coalition>,
    /// For each label: `(transmitter, vector)` for every holder, ascending.
    holders: Vec<Vec<(usize, &'a [u8])>>,
}

impl<'a> Holdings<'a> {
    fn new(scheme: &'a BiaScheme) -> Self {
        let labels = scheme.coalition_labels();
        let holders = labels
            .iter()
            .map(|label| {
                scheme
                    .precoders
                    .iter()
                    .filter_map(|set| set.vector_for(label).map(|v| (set.owner, v)))
                    .collect()
            })
            .collect();
        Self {
            scheme,
            labels,
            holders,
        }
    }
}

/// Precomputed diagonals `H^[pq]` for all pairs.
struct Diagonals {
    k: usize,
    diags: Vec<Vec<Fp>>,
}

impl Diagonals {
    fn new(scheme: &BiaScheme, a: &GenericChannelAssignment) -> Result<Self> {
        let k = scheme.k();
        let mut diags = Vec::with_capacity(k * k);
        for p in 0..k {
            for q in 0..k {
                diags.push(realize_diagonal(a, p, q, &scheme.s)?);
            }
        }
        Ok(Self { k, diags })
    }

    fn get(&self, p: usize, q: usize) -> &[Fp] {
        &self.diags[p * self.k + q]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmitterCheck {
    pub transmitter: usize,
    pub rank: usize,
    pub expected: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionCheck {
    pub coalition: Coalition,
    pub receiver: usize,
    pub rank: usize,
    pub expected: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverCheck {
    pub receiver: usize,
    pub desired_rank: usize,
    pub desired_expected: usize,
    pub interference_rank: usize,
    pub total_rank: usize,
    /// `total_rank - interference_rank`: dimensions of the desired signal
    /// left after removing interference.
    pub decodable_dims: usize,
    pub n: usize,
    /// `total_rank == n`.
    pub tight: bool,
    /// Coalitions whose columns fell into the span of earlier columns.
    pub deficient_coalitions: Vec<Coalition>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingCheck {
    pub receiver: usize,
    pub lhs: i64,
    pub n: usize,
    pub slack: i64,
    pub pass: bool,
}

/// Rank of each transmitter's binary precoder matrix over Q.
pub fn check_intra_tx_independence(scheme: &BiaScheme) -> Vec<TransmitterCheck> {
    map_indexed(scheme.k(), Execution::default(), |p| {
        let set = &scheme.precoders[p];
        let rank = rational_rank(&set.vectors);
        TransmitterCheck {
            transmitter: p + 1,
            rank,
            expected: set.len(),
            pass: rank == set.len(),
        }
    })
}

fn alignment_checks(
    h: &Holdings,
    d: &Diagonals,
    inside: bool,
    exec: Execution,
) -> Vec<CoalitionCheck> {
    let k = h.scheme.k();
    let pairs: Vec<(usize, usize)> = h
        .labels
        .iter()
        .enumerate()
        .flat_map(|(i, label)| {
            (0..k)
                .filter(move |&p| label.contains(p) == inside)
                .map(move |p| (i, p))
        })
        .collect();
    map_indexed(pairs.len(), exec, |idx| {
        let (i, p) = pairs[idx];
        let cols: Vec<Vec<Fp>> = h.holders[i]
            .iter()
            .map(|&(q, v)| apply(d.get(p, q), v))
            .collect();
        let rank = rank_of_columns(&cols);
        let expected = if inside { cols.len() } else { 1 };
        CoalitionCheck {
            coalition: h.labels[i].clone(),
            receiver: p + 1,
            rank,
            expected,
            pass: rank == expected,
        }
    })
}

/// Rank of `{H^[pq] v_Q : q in Q}` at every receiver `p` outside `Q`;
/// aligned means rank 1.
pub fn check_alignment(
    scheme: &BiaScheme,
    assignment: &GenericChannelAssignment,
) -> Result<Vec<CoalitionCheck>> {
    let d = Diagonals::new(scheme, assignment)?;
    Ok(alignment_checks(
        &Holdings::new(scheme),
        &d,
        false,
        Execution::default(),
    ))
}

/// Rank of `{H^[pq] v_Q : q in Q}` at every member receiver `p`; separable
/// means one dimension per holder.
pub fn check_coalition_separability(
    scheme: &BiaScheme,
    assignment: &GenericChannelAssignment,
) -> Result<Vec<CoalitionCheck>> {
    let d = Diagonals::new(scheme, assignment)?;
    Ok(alignment_checks(
        &Holdings::new(scheme),
        &d,
        true,
        Execution::default(),
    ))
}

fn decodability_at(h: &Holdings, d: &Diagonals, p: usize) -> ReceiverCheck {
    let scheme = h.scheme;
    let n = scheme.n();
    let own = &scheme.precoders[p];

    let mut all = EchelonBasis::new(n);
    for v in &own.vectors {
        all.insert(apply(d.get(p, p), v));
    }
    let desired_rank = all.rank();

    let mut interference = EchelonBasis::new(n);
    let mut deficient = Vec::new();
    for (label, holders) in h.labels.iter().zip(&h.holders) {
        let group: Vec<Vec<Fp>> = if label.contains(p) {
            holders
                .iter()
                .filter(|&&(q, _)| q != p)
                .map(|&(q, v)| apply(d.get(p, q), v))
                .collect()
        } else {
            // aligned: one representative, the smallest holder
            holders
                .first()
                .map(|&(q, v)| apply(d.get(p, q), v))
                .into_iter()
                .collect()
        };
        let mut grew = 0;
        for col in group.iter() {
            interference.insert(col.clone());
            grew += usize::from(all.insert(col.clone()));
        }
        if grew < group.len() {
            deficient.push(label.clone());
        }
    }
    let total_rank = all.rank();
    let interference_rank = interference.rank();
    let decodable_dims = total_rank - interference_rank;
    ReceiverCheck {
        receiver: p + 1,
        desired_rank,
        desired_expected: own.len(),
        interference_rank,
        total_rank,
        decodable_dims,
        n,
        tight: total_rank == n,
        deficient_coalitions: deficient,
        pass: desired_rank == own.len() && decodable_dims == own.len(),
    }
}

/// Whether each receiver's desired columns are independent and disjoint
/// from the span of all interference it sees.
pub fn check_decodability(
    scheme: &BiaScheme,
    assignment: &GenericChannelAssignment,
) -> Result<Vec<ReceiverCheck>> {
    let d = Diagonals::new(scheme, assignment)?;
    let h = Holdings::new(scheme);
    Ok(map_indexed(scheme.k(), Execution::default(), |p| {
        decodability_at(&h, &d, p)
    }))
}

/// `sum_i d_i - (r-1) sum_{L not containing p} d_L <= n` at each receiver,
/// with `d_L` the number of vectors common to every precoder set in `L`.
pub fn verify_counting_inequality(scheme: &BiaScheme) -> Vec<CountingCheck> {
    let (k, r, n) = (scheme.k(), scheme.params.r(), scheme.n());
    let sets: Vec<HashSet<&[u8]>> = scheme
        .precoders
        .iter()
        .map(|s| s.vectors.iter().map(Vec::as_slice).collect())
        .collect();
    let d_total: i64 = sets.iter().map(|s| s.len() as i64).sum();
    let shared: Vec<(Vec<usize>, i64)> = subsets(k, r)
        .map(|l| {
            let (first, rest) = l.split_first().expect("r >= 1");
            let count = sets[*first]
                .iter()
                .filter(|v| rest.iter().all(|&i| sets[i].contains(*v)))
                .count();
            (l, count as i64)
        })
        .collect();
    (0..k)
        .map(|p| {
            let outside: i64 = shared
                .iter()
                .filter(|(l, _)| !l.contains(&p))
                .map(|(_, c)| c)
                .sum();
            let lhs = d_total - (r as i64 - 1) * outside;
            CountingCheck {
                receiver: p + 1,
                lhs,
                n,
                slack: n as i64 - lhs,
                pass: lhs <= n as i64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AchievedDof {
    #[serde(with = "crate::rational::vec")]
    pub per_user: Vec<Dof>,
    #[serde(with = "crate::rational")]
    pub sum: Dof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: SchemeParams,
    pub seeds: Vec<u64>,
    pub independence: Vec<TransmitterCheck>,
    pub alignment: Vec<CoalitionCheck>,
    pub separability: Vec<CoalitionCheck>,
    pub decodability: Vec<ReceiverCheck>,
    pub counting: Vec<CountingCheck>,
    /// Checks whose rank differed between seeds.
    pub disagreements: Vec<String>,
    pub all_pass: bool,
    /// Sum over receivers of decodable dimensions, divided by `n`.
    #[serde(with = "crate::rational")]
    pub decodable_sum_dof: Dof,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_dof: Option<AchievedDof>,
}

impl VerificationReport {
    pub fn independence_pass(&self) -> bool {
        self.independence.iter().all(|c| c.pass)
    }
    pub fn alignment_pass(&self) -> bool {
        self.alignment.iter().all(|c| c.pass)
    }
    pub fn separability_pass(&self) -> bool {
        self.separability.iter().all(|c| c.pass)
    }
    pub fn decodability_pass(&self) -> bool {
        self.decodability.iter().all(|c| c.pass)
    }
    pub fn counting_pass(&self) -> bool {
        self.counting.iter().all(|c| c.pass)
    }
    /// Every receiver's columns fill all `n` dimensions.
    pub fn tight(&self) -> bool {
        self.decodability.iter().all(|c| c.tight)
    }

    /// Labelled verdicts of every individual check, in a fixed order.
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        out.extend(
            self.independence
                .iter()
                .map(|c| (format!("independence tx{}", c.transmitter), c.pass)),
        );
        out.extend(self.alignment.iter().map(|c| {
            (
                format!("alignment {} rx{}", c.coalition, c.receiver),
                c.pass,
            )
        }));
        out.extend(self.separability.iter().map(|c| {
            (
                format!("separability {} rx{}", c.coalition, c.receiver),
                c.pass,
            )
        }));
        out.extend(
            self.decodability
                .iter()
                .map(|c| (format!("decodability rx{}", c.receiver), c.pass)),
        );
        out.extend(
            self.counting
                .iter()
                .map(|c| (format!("counting rx{}", c.receiver), c.pass)),
        );
        out
    }
}

/// Per-seed outcome of the channel-dependent checks.
struct SeedOutcome {
    alignment: Vec<CoalitionCheck>,
    separability: Vec<CoalitionCheck>,
    decodability: Vec<ReceiverCheck>,
}

fn run_seed(scheme: &BiaScheme, seed: u64, exec: Execution) -> Result<SeedOutcome> {
    let a = GenericChannelAssignment::from_seed(scheme.k(), scheme.params.modes(), seed);
    let d = Diagonals::new(scheme, &a)?;
    let h = Holdings::new(scheme);
    Ok(SeedOutcome {
        alignment: alignment_checks(&h, &d, false, exec),
        separability: alignment_checks(&h, &d, true, exec),
        decodability: map_indexed(scheme.k(), exec, |p| decodability_at(&h, &d, p)),
    })
}

/// `count` evaluation seeds derived from one master seed.
pub fn evaluation_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| derive_seed(master, Stream::FieldAssignment, i))
        .collect()
}

/// Runs every check under each seed in `seeds` (at least 3).
pub fn verify(scheme: &BiaScheme, seeds: &[u64]) -> Result<VerificationReport> {
    verify_with(scheme, seeds, Execution::default())
}

/// [`verify`] with an explicit execution strategy.
pub fn verify_with(
    scheme: &BiaScheme,
    seeds: &[u64],
    exec: Execution,
) -> Result<VerificationReport> {
    if seeds.len() < 3 {
        return Err(BiaError::Parameter(format!(
            "verification needs at least 3 seeds, got {}",
            seeds.len()
        )));
    }
    let outcomes = seeds
        .iter()
        .map(|&s| run_seed(scheme, s, exec))
        .collect::<Result<Vec<_>>>()?;
    let (first, rest) = outcomes.split_first().expect("nonempty");

    let mut disagreements = Vec::new();
    for (i, other) in rest.iter().enumerate() {
        let seed = seeds[i + 1];
        for (a, b) in first.alignment.iter().zip(&other.alignment) {
            if a.rank != b.rank {
                disagreements.push(format!(
                    "alignment {} rx{}: rank {} vs {} under seed {seed}",
                    a.coalition, a.receiver, a.rank, b.rank
                ));
            }
        }
        for (a, b) in first.separability.iter().zip(&other.separability) {
            if a.rank != b.rank {
                disagreements.push(format!(
                    "separability {} rx{}: rank {} vs {} under seed {seed}",
                    a.coalition, a.receiver, a.rank, b.rank
                ));
            }
        }
        for (a, b) in first.decodability.iter().zip(&other.decodability) {
            if (a.desired_rank, a.interference_rank, a.total_rank)
                != (b.desired_rank, b.interference_rank, b.total_rank)
            {
                disagreements.push(format!(
                    "decodability rx{}: ranks ({}, {}, {}) vs ({}, {}, {}) under seed {seed}",
                    a.receiver,
                    a.desired_rank,
                    a.interference_rank,
                    a.total_rank,
                    b.desired_rank,
                    b.interference_rank,
                    b.total_rank
                ));
            }
        }
    }

    let SeedOutcome {
        alignment,
        separability,
        decodability,
    } = outcomes.into_iter().next().expect("nonempty");
    let independence = check_intra_tx_independence(scheme);
    let counting = verify_counting_inequality(scheme);
    let n = scheme.n() as u128;
    let decodable: usize = decodability.iter().map(|c| c.decodable_dims).sum();
    let mut report = VerificationReport {
        params: scheme.params,
        seeds: seeds.to_vec(),
        independence,
        alignment,
        separability,
        decodability,
        counting,
        disagreements,
        all_pass: false,
        decodable_sum_dof: Dof::new(decodable as u128, n),
        achieved_dof: None,
    };
    report.all_pass = report.disagreements.is_empty()
        && report.independence_pass()
        && report.alignment_pass()
        && report.separability_pass()
        && report.decodability_pass()
        && report.counting_pass();
    if report.all_pass {
        report.achieved_dof = Some(achieved_dof(scheme, &report)?);
    }
    Ok(report)
}

/// Per-user `|V^[p]| / n` and their sum; refuses unless every check passed.
pub fn achieved_dof(scheme: &BiaScheme, report: &VerificationReport) -> Result<AchievedDof> {
    if !report.all_pass {
        return Err(BiaError::Unverified(
            "achieved DoF is only reported for schemes that pass every check".into(),
        ));
    }
    let n = scheme.n() as u128;
    let per_user: Vec<Dof> = scheme
        .precoders
        .iter()
        .map(|s| Dof::new(s.len() as u128, n))
        .collect();
    let sum = per_user.iter().fold(Dof::from_integer(0), |a, b| a + b);
    Ok(AchievedDof { per_user, sum })
}

/// A scheme cleared for link simulation. The only constructors run the
/// verifier, so the simulator cannot be handed a scheme that failed it.
#[derive(Debug, Clone)]
pub struct VerifiedScheme {
    scheme: BiaScheme,
}

impl VerifiedScheme {
    /// Verifies `scheme` and accepts it only if every check passes.
    pub fn new(scheme: BiaScheme, seeds: &[u64]) -> Result<Self> {
        let report = verify(&scheme, seeds)?;
        Self::from_report(scheme, &report)
    }

    pub fn from_report(scheme: BiaScheme, report: &VerificationReport) -> Result<Self> {
        if report.params != scheme.params {
            return Err(BiaError::Consistency(
                "report was produced for different parameters".into(),
            ));
        }
        if !report.all_pass {
            let failed: Vec<String> = report
                .verdicts()
                .into_iter()
                .filter(|(_, ok)| !ok)
                .map(|(name, _)| name)
                .take(8)
                .collect();
            return Err(BiaError::Unverified(format!(
                "failing checks: {}",
                failed.join(", ")
            )));
        }
        Ok(Self { scheme })
    }

    pub fn scheme(&self) -> &BiaScheme {
        &self.scheme
    }

    pub fn into_scheme(self) -> BiaScheme {
        self.scheme
    }
}
