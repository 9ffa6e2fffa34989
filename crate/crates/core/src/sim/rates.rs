use serde::{Deserialize, Serialize};
use std::io::Write;

use super::channel::ChannelModeTable;
use super::receiver::ZfReceiver;
use crate::error::{BiaError, Result};
use crate::exec::{map_indexed, Execution};
use crate::seeding::{derive_seed, Stream};
use crate::verifier::VerifiedScheme;

/// Minimum number of Monte-Carlo trials.
pub const MIN_TRIALS: usize = 100;

/// Averaged rates over an SNR sweep, with the fitted DoF slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub snr_db: Vec<f64>,
    /// `per_user_rate[i][p]`: bits per channel use of user `p` at `snr_db[i]`.
    pub per_user_rate: Vec<Vec<f64>>,
    pub sum_rate: Vec<f64>,
    /// Slope of sum rate against `log2(rho)` over the top SNR decade.
    pub dof_slope: f64,
    /// 95% half-width of the slope from the spread of per-trial slopes.
    pub ci_half_width: f64,
    pub fit_snr_db: Vec<f64>,
    pub trials: usize,
    pub discarded: usize,
    pub seed: u64,
}

impl RateCurve {
    pub fn discard_rate(&self) -> f64 {
        self.discarded as f64 / self.trials as f64
    }
}

/// JSON summary emitted next to the rate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub dof_slope: f64,
    pub ci: f64,
    pub discard_rate: f64,
    pub trials: usize,
    pub fit_snr_db: Vec<f64>,
    pub seeds: SimulationSeeds,
    pub gain_model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSeeds {
    pub master: u64,
    /// Channel seed of trial 0; trial `t` uses stream index `t`.
    pub first_trial_channel: u64,
}

impl RateSummary {
    pub fn from_curve(curve: &RateCurve) -> Self {
        Self {
            dof_slope: curve.dof_slope,
            ci: curve.ci_half_width,
            discard_rate: curve.discard_rate(),
            trials: curve.trials,
            fit_snr_db: curve.fit_snr_db.clone(),
            seeds: SimulationSeeds {
                master: curve.seed,
                first_trial_channel: derive_seed(curve.seed, Stream::ChannelTable, 0),
            },
            gain_model: "iid circularly-symmetric complex Gaussian CN(0,1) per (rx, tx, mode)"
                .into(),
        }
    }
}

fn log2_rho(snr_db: f64) -> f64 {
    snr_db / 10.0 * std::f64::consts::LOG2_10
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Indices of the points used for the slope: those within 10 dB of the
/// highest SNR, or the top two if fewer qualify.
fn fit_indices(snr_db: &[f64]) -> Vec<usize> {
    let top = snr_db[snr_db.len() - 1];
    let idx: Vec<usize> = (0..snr_db.len())
        .filter(|&i| snr_db[i] >= top - 10.0)
        .collect();
    if idx.len() >= 2 {
        idx
    } else {
        vec![snr_db.len() - 2, snr_db.len() - 1]
    }
}

pub fn estimate_rates(
    scheme: &VerifiedScheme,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<RateCurve> {
    estimate_rates_with(scheme, snr_db, trials, seed, Execution::default())
}

/// Monte-Carlo rate sweep. Each trial draws one channel table and
/// evaluates every SNR point on it; trials whose ZF front end is
/// ill-conditioned at any receiver are discarded.
pub fn estimate_rates_with(
    scheme: &VerifiedScheme,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<RateCurve> {
    if snr_db.is_empty() {
        return Err(BiaError::Parameter("SNR list is empty".into()));
    }
    if snr_db.len() < 2 {
        return Err(BiaError::Parameter(
            "at least 2 SNR points are needed to fit a slope".into(),
        ));
    }
    if snr_db.windows(2).any(|w| w[0] >= w[1]) || snr_db.iter().any(|x| !x.is_finite()) {
        return Err(BiaError::Parameter(
            "SNR points must be finite and strictly increasing".into(),
        ));
    }
    if trials < MIN_TRIALS {
        return Err(BiaError::Parameter(format!(
            "at least {MIN_TRIALS} trials are required, got {trials}"
        )));
    }
    let s = scheme.scheme();
    let (k, n) = (s.k(), s.n());
    let rhos: Vec<f64> = snr_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();

    let per_trial: Vec<Option<Vec<Vec<f64>>>> = map_indexed(trials, exec, |t| {
        let table = ChannelModeTable::from_seed(
            k,
            s.params.modes(),
            derive_seed(seed, Stream::ChannelTable, t as u64),
        );
        let receivers: Vec<ZfReceiver> = (0..k).map(|p| ZfReceiver::new(s, &table, p)).collect();
        if receivers.iter().any(|r| !r.is_well_conditioned()) {
            return None;
        }
        Some(
            rhos.iter()
                .map(|&rho| {
                    receivers
                        .iter()
                        .enumerate()
                        .map(|(p, rx)| rx.rate(rho, s.precoders[p].len(), n))
                        .collect()
                })
                .collect(),
        )
    });

    let kept: Vec<&Vec<Vec<f64>>> = per_trial.iter().flatten().collect();
    let discarded = trials - kept.len();
    if kept.is_empty() {
        return Err(BiaError::Parameter(
            "every trial was discarded as ill-conditioned".into(),
        ));
    }
    let count = kept.len() as f64;
    let mut per_user_rate = vec![vec![0.0; k]; snr_db.len()];
    for trial in &kept {
        for (acc, row) in per_user_rate.iter_mut().zip(trial.iter()) {
            for (a, r) in acc.iter_mut().zip(row) {
                *a += r;
            }
        }
    }
    for row in per_user_rate.iter_mut() {
        for a in row.iter_mut() {
            *a /= count;
        }
    }
    let sum_rate: Vec<f64> = per_user_rate.iter().map(|r| r.iter().sum()).collect();

    let fit = fit_indices(snr_db);
    let x: Vec<f64> = fit.iter().map(|&i| log2_rho(snr_db[i])).collect();
    let y: Vec<f64> = fit.iter().map(|&i| sum_rate[i]).collect();
    let dof_slope = ls_slope(&x, &y);

    let trial_slopes: Vec<f64> = kept
        .iter()
        .map(|trial| {
            let y: Vec<f64> = fit.iter().map(|&i| trial[i].iter().sum()).collect();
            ls_slope(&x, &y)
        })
        .collect();
    let mean = trial_slopes.iter().sum::<f64>() / count;
    let var = if kept.len() > 1 {
        trial_slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let ci_half_width = 1.96 * (var / count).sqrt();

    Ok(RateCurve {
        snr_db: snr_db.to_vec(),
        per_user_rate,
        sum_rate,
        dof_slope,
        ci_half_width,
        fit_snr_db: fit.iter().map(|&i| snr_db[i]).collect(),
        trials,
        discarded,
        seed,
    })
}

/// CSV with columns `snr_db,user,rate_bpcu,sum_rate`; users are 1-based.
pub fn write_rates_csv<W: Write>(curve: &RateCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snr_db", "user", "rate_bpcu", "sum_rate"])?;
    for ((snr, users), sum) in curve
        .snr_db
        .iter()
        .zip(&curve.per_user_rate)
        .zip(&curve.sum_rate)
    {
        for (p, rate) in users.iter().enumerate() {
            w.write_record([
                snr.to_string(),
                (p + 1).to_string(),
                rate.to_string(),
                sum.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
