use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::Complex64;
use crate::error::{BiaError, Result};
use crate::scheme::BiaScheme;
use crate::seeding::{rng_for, Stream};
use crate::verifier::VerifiedScheme;

/// Draws one circularly-symmetric complex Gaussian with unit variance.
pub(crate) fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex gain per (receiver, transmitter, mode), constant over one
/// supersymbol.
#[derive(Debug, Clone)]
pub struct ChannelModeTable {
    k: usize,
    modes: usize,
    seed: u64,
    gains: Vec<Complex64>,
}

impl ChannelModeTable {
    /// i.i.d. `CN(0, 1)` gains.
    pub fn from_seed(k: usize, modes: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, Stream::ChannelTable, 0);
        let gains = (0..k * k * modes)
            .map(|_| complex_normal(&mut rng))
            .collect();
        Self {
            k,
            modes,
            seed,
            gains,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gain(&self, p: usize, q: usize, m: usize) -> Complex64 {
        self.gains[(p * self.k + q) * self.modes + m]
    }

    /// Diagonal of `H^[pq]` under receiver `p`'s switching pattern.
    pub fn diagonal(&self, scheme: &BiaScheme, p: usize, q: usize) -> Vec<Complex64> {
        (0..scheme.n())
            .map(|slot| self.gain(p, q, scheme.s.mode(slot, p)))
            .collect()
    }

    /// `H^[pq] v` for a binary vector `v`.
    pub fn apply(&self, scheme: &BiaScheme, p: usize, q: usize, v: &[u8]) -> DVector<Complex64> {
        DVector::from_iterator(
            v.len(),
            v.iter().enumerate().map(|(slot, &b)| {
                if b == 1 {
                    self.gain(p, q, scheme.s.mode(slot, p))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        )
    }
}

/// Data symbols of every transmitter for one supersymbol.
#[derive(Debug, Clone)]
pub struct TransmitBlock {
    pub symbols: Vec<Vec<Complex64>>,
    /// Per-transmitter power `rho`; each symbol carries `rho / d_q`.
    pub power: f64,
}

impl TransmitBlock {
    /// Gaussian symbols with variance `rho / d_q`.
    pub fn gaussian<R: Rng>(scheme: &BiaScheme, power: f64, rng: &mut R) -> Self {
        let symbols = scheme
            .precoders
            .iter()
            .map(|set| {
                let scale = (power / set.len() as f64).sqrt();
                (0..set.len())
                    .map(|_| complex_normal(rng) * scale)
                    .collect()
            })
            .collect();
        Self { symbols, power }
    }

    /// QPSK symbols with energy `rho / d_q`.
    pub fn qpsk<R: Rng>(scheme: &BiaScheme, power: f64, rng: &mut R) -> Self {
        let symbols = scheme
            .precoders
            .iter()
            .map(|set| {
                let a = (power / set.len() as f64 / 2.0).sqrt();
                (0..set.len())
                    .map(|_| {
                        let re = if rng.random::<bool>() { a } else { -a };
                        let im = if rng.random::<bool>() { a } else { -a };
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        Self { symbols, power }
    }

    /// Per-slot transmit energy of transmitter `q`, averaged over the block.
    pub fn energy_per_slot(&self, scheme: &BiaScheme, q: usize) -> f64 {
        let set = &scheme.precoders[q];
        let total: f64 = set
            .vectors
            .iter()
            .zip(&self.symbols[q])
            .map(|(v, x)| x.norm_sqr() * v.iter().map(|&b| b as f64).sum::<f64>())
            .sum();
        total / scheme.n() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Disabled,
    /// Unit-variance complex Gaussian noise per slot.
    Seeded(u64),
}

/// Received vectors `y^[p] = sum_q H^[pq] V^[q] X^[q] + z^[p]` at every
/// receiver.
pub fn simulate_supersymbol(
    scheme: &VerifiedScheme,
    table: &ChannelModeTable,
    block: &TransmitBlock,
    noise: Noise,
) -> Result<Vec<DVector<Complex64>>> {
    let scheme = scheme.scheme();
    let (k, n) = (scheme.k(), scheme.n());
    if block.symbols.len() != k
        || block
            .symbols
            .iter()
            .zip(&scheme.precoders)
            .any(|(x, set)| x.len() != set.len())
    {
        return Err(BiaError::Parameter(
            "transmit block does not match the precoder dimensions".into(),
        ));
    }
    Ok((0..k)
        .map(|p| {
            let mut y = DVector::<Complex64>::zeros(n);
            for q in 0..k {
                let diag = table.diagonal(scheme, p, q);
                for (v, x) in scheme.precoders[q].vectors.iter().zip(&block.symbols[q]) {
                    for (slot, &b) in v.iter().enumerate() {
                        if b == 1 {
                            y[slot] += diag[slot] * x;
                        }
                    }
                }
            }
            if let Noise::Seeded(seed) = noise {
                let mut rng = rng_for(seed, Stream::Noise, p as u64);
                for slot in 0..n {
                    y[slot] += complex_normal(&mut rng);
                }
            }
            y
        })
        .collect())
}
