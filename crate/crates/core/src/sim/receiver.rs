use nalgebra::{DMatrix, DVector};

use super::channel::{simulate_supersymbol, ChannelModeTable, Noise, TransmitBlock};
use super::Complex64;
use crate::error::{BiaError, Result};
use crate::scheme::BiaScheme;
use crate::seeding::{derive_seed, rng_for, Stream};
use crate::verifier::VerifiedScheme;

/// Projected desired matrices with a larger condition number are treated
/// as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative singular-value threshold for the interference rank.
const RANK_TOL: f64 = 1e-10;

/// Columns spanning the interference seen at receiver `p`: for coalitions
/// containing `p`, every other holder's image; for the rest, the image
/// from the smallest holder.
fn interference_columns(
    scheme: &BiaScheme,
    table: &ChannelModeTable,
    p: usize,
) -> Vec<DVector<Complex64>> {
    let mut cols = Vec::new();
    for label in scheme.coalition_labels() {
        let holders = scheme
            .precoders
            .iter()
            .filter_map(|set| set.vector_for(&label).map(|v| (set.owner, v)));
        if label.contains(p) {
            cols.extend(
                holders
                    .filter(|&(q, _)| q != p)
                    .map(|(q, v)| table.apply(scheme, p, q, v)),
            );
        } else if let Some((q, v)) = holders.into_iter().next() {
            cols.push(table.apply(scheme, p, q, v));
        }
    }
    cols
}

/// Zero-forcing front end of one receiver for one channel realization.
#[derive(Debug, Clone)]
pub struct ZfReceiver {
    receiver: usize,
    /// Orthonormal basis of the interference span (`n x m`).
    interference_basis: DMatrix<Complex64>,
    /// Singular values of the interference-nulled desired matrix.
    singular_values: DVector<f64>,
    pseudo_inverse: Option<DMatrix<Complex64>>,
}

impl ZfReceiver {
    pub fn new(scheme: &BiaScheme, table: &ChannelModeTable, p: usize) -> Self {
        let n = scheme.n();
        let cols = interference_columns(scheme, table, p);
        let interference_basis = if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            let m = DMatrix::from_columns(&cols);
            let svd = m.svd(true, false);
            let u = svd.u.expect("requested U");
            let top = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&s| s > top * RANK_TOL)
                .count();
            u.columns(0, rank).into_owned()
        };

        let desired: Vec<DVector<Complex64>> = scheme.precoders[p]
            .vectors
            .iter()
            .map(|v| table.apply(scheme, p, p, v))
            .collect();
        let g = DMatrix::from_columns(&desired);
        let projected = &g - &interference_basis * (interference_basis.adjoint() * &g);
        let svd = projected.svd(true, true);
        let singular_values = svd.singular_values.clone();
        let cond = condition(&singular_values);
        let pseudo_inverse = (cond <= CONDITION_LIMIT).then(|| {
            svd.pseudo_inverse(0.0)
                .expect("pseudo-inverse of well-conditioned matrix")
        });
        Self {
            receiver: p,
            interference_basis,
            singular_values,
            pseudo_inverse,
        }
    }

    pub fn condition_number(&self) -> f64 {
        condition(&self.singular_values)
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.pseudo_inverse.is_some()
    }

    pub fn interference_rank(&self) -> usize {
        self.interference_basis.ncols()
    }

    /// `y - U U^H y`.
    pub fn project(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        let u = &self.interference_basis;
        y - u * (u.adjoint() * y)
    }

    /// Least-squares estimate of the desired symbols.
    pub fn decode(&self, y: &DVector<Complex64>) -> Result<Vec<Complex64>> {
        let pinv = self
            .pseudo_inverse
            .as_ref()
            .ok_or(BiaError::IllConditioned {
                receiver: self.receiver + 1,
                condition: self.condition_number(),
            })?;
        Ok((pinv * self.project(y)).iter().copied().collect())
    }

    /// `(1/n) log2 det(I + (rho/d) G^H P G)` for `d` desired symbols.
    pub fn rate(&self, rho: f64, d: usize, n: usize) -> f64 {
        let c = rho / d as f64;
        self.singular_values
            .iter()
            .map(|s| (1.0 + c * s * s).log2())
            .sum::<f64>()
            / n as f64
    }
}

fn condition(s: &DVector<f64>) -> f64 {
    if s.is_empty() {
        return 1.0;
    }
    let (lo, hi) = (s.min(), s.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Zero-forcing estimate of transmitter `p`'s symbols from `y^[p]`.
pub fn zf_decode(
    p: usize,
    y: &DVector<Complex64>,
    scheme: &VerifiedScheme,
    table: &ChannelModeTable,
) -> Result<Vec<Complex64>> {
    ZfReceiver::new(scheme.scheme(), table, p).decode(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerResult {
    pub symbol_errors: u64,
    pub symbols: u64,
    pub discarded_trials: u64,
}

impl SerResult {
    pub fn rate(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols.max(1) as f64
    }
}

fn qpsk_slice(x: Complex64) -> (bool, bool) {
    (x.re >= 0.0, x.im >= 0.0)
}

/// QPSK symbol error rate of ZF decoding at every receiver.
pub fn qpsk_symbol_error_rate(
    scheme: &VerifiedScheme,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<SerResult> {
    let s = scheme.scheme();
    let rho = 10f64.powf(snr_db / 10.0);
    let mut out = SerResult {
        symbol_errors: 0,
        symbols: 0,
        discarded_trials: 0,
    };
    for t in 0..trials as u64 {
        let table = ChannelModeTable::from_seed(
            s.k(),
            s.params.modes(),
            derive_seed(seed, Stream::ChannelTable, t),
        );
        let receivers: Vec<ZfReceiver> =
            (0..s.k()).map(|p| ZfReceiver::new(s, &table, p)).collect();
        if receivers.iter().any(|r| !r.is_well_conditioned()) {
            out.discarded_trials += 1;
            continue;
        }
        let mut rng = rng_for(seed, Stream::Symbols, t);
        let block = TransmitBlock::qpsk(s, rho, &mut rng);
        let y = simulate_supersymbol(
            scheme,
            &table,
            &block,
            Noise::Seeded(derive_seed(seed, Stream::Noise, t)),
        )?;
        for (p, rx) in receivers.iter().enumerate() {
            let est = rx.decode(&y[p])?;
            for (a, b) in est.iter().zip(&block.symbols[p]) {
                out.symbols += 1;
                if qpsk_slice(*a) != qpsk_slice(*b) {
                    out.symbol_errors += 1;
                }
            }
        }
    }
    Ok(out)
}
