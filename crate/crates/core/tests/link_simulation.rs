use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use bia_core::seeding::{rng_for, Stream};
use bia_core::sim::{
    estimate_rates, estimate_rates_with, qpsk_symbol_error_rate, simulate_supersymbol, zf_decode,
    ChannelModeTable, Complex64, Noise, TransmitBlock, ZfReceiver,
};
use bia_core::verifier::evaluation_seeds;
use bia_core::{BiaError, BiaScheme, Execution, VerifiedScheme};

fn verified(k: usize, r: usize, pad: bool) -> VerifiedScheme {
    VerifiedScheme::new(
        BiaScheme::build(k, Some(r), pad).unwrap(),
        &evaluation_seeds(4, 3),
    )
    .unwrap()
}

fn zero_block(s: &BiaScheme) -> TransmitBlock {
    TransmitBlock {
        symbols: s
            .precoders
            .iter()
            .map(|p| vec![Complex64::new(0.0, 0.0); p.len()])
            .collect(),
        power: 1.0,
    }
}

fn columns(s: &BiaScheme, t: &ChannelModeTable, p: usize, own: bool) -> DMatrix<Complex64> {
    let cols: Vec<DVector<Complex64>> = (0..s.k())
        .filter(|&q| (q == p) == own)
        .flat_map(|q| {
            s.precoders[q]
                .vectors
                .iter()
                .map(move |v| t.apply(s, p, q, v))
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// Projector onto the orthogonal complement of the columns of `m`, built
/// from an orthonormal basis of the column space.
fn complement_projector(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let top = svd.singular_values.max();
    let basis: Vec<DVector<Complex64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * top)
        .map(|i| u.column(i).into_owned())
        .collect();
    let q = DMatrix::from_columns(&basis);
    DMatrix::identity(n, n) - &q * q.adjoint()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let norm: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (err / norm).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_decoding_is_exact(k in 2usize..=6, padded in any::<bool>(), seed in any::<u64>()) {
        let vs = if padded { verified(k, 2, true) } else { verified(k, 1, false) };
        let s = vs.scheme();
        let table = ChannelModeTable::from_seed(k, s.params.modes(), seed);
        let mut rng = rng_for(seed, Stream::Symbols, 0);
        let block = TransmitBlock::gaussian(s, 1.0, &mut rng);
        let y = simulate_supersymbol(&vs, &table, &block, Noise::Disabled).unwrap();
        for (p, yp) in y.iter().enumerate() {
            let rx = ZfReceiver::new(s, &table, p);
            prop_assume!(rx.is_well_conditioned());
            let est = rx.decode(yp).unwrap();
            prop_assert!(rel_err(&est, &block.symbols[p]) < 1e-9);
        }
    }

    #[test]
    fn received_vector_lies_in_receiver_span(k in 3usize..=6, seed in any::<u64>()) {
        let vs = verified(k, 2, true);
        let s = vs.scheme();
        let table = ChannelModeTable::from_seed(k, s.params.modes(), seed);
        let mut rng = rng_for(seed, Stream::Symbols, 1);
        let block = TransmitBlock::gaussian(s, 1.0, &mut rng);
        let y = simulate_supersymbol(&vs, &table, &block, Noise::Disabled).unwrap();
        for (p, yp) in y.iter().enumerate() {
            let all = {
                let own = columns(s, &table, p, true);
                let other = columns(s, &table, p, false);
                let mut m = DMatrix::zeros(s.n(), own.ncols() + other.ncols());
                m.columns_mut(0, own.ncols()).copy_from(&own);
                m.columns_mut(own.ncols(), other.ncols()).copy_from(&other);
                m
            };
            let residual = complement_projector(&all) * yp;
            prop_assert!(residual.norm() < 1e-9 * yp.norm());
        }
    }
}

#[test]
fn aligned_pairs_collapse_at_outside_receivers() {
    let vs = verified(5, 2, true);
    let s = vs.scheme();
    let table = ChannelModeTable::from_seed(5, 2, 31);
    // 16 interfering columns at RX1 span 6 aligned coalition directions
    // plus one dimension per member coalition
    let interference = columns(s, &table, 0, false);
    assert_eq!(interference.ncols(), 16);
    let rank = interference.rank(1e-9);
    assert_eq!(rank, ZfReceiver::new(s, &table, 0).interference_rank());
    assert_eq!(rank, 10);
}

#[test]
fn silent_transmitters_leave_only_noise() {
    let vs = verified(4, 2, true);
    let s = vs.scheme();
    let table = ChannelModeTable::from_seed(4, 2, 2);
    let block = zero_block(s);
    let quiet = simulate_supersymbol(&vs, &table, &block, Noise::Disabled).unwrap();
    assert!(quiet.iter().all(|y| y.iter().all(|x| x.norm() == 0.0)));
    let noisy = simulate_supersymbol(&vs, &table, &block, Noise::Seeded(5)).unwrap();
    let again = simulate_supersymbol(&vs, &table, &block, Noise::Seeded(5)).unwrap();
    assert_eq!(noisy, again);
    let energy: f64 = noisy
        .iter()
        .flat_map(|y| y.iter())
        .map(|x| x.norm_sqr())
        .sum();
    let slots = (4 * s.n()) as f64;
    assert!(energy > 0.2 * slots && energy < 3.0 * slots);
}

#[test]
fn mismatched_block_is_rejected() {
    let vs = verified(3, 2, true);
    let mut block = zero_block(vs.scheme());
    block.symbols[1].pop();
    let table = ChannelModeTable::from_seed(3, 2, 0);
    assert!(matches!(
        simulate_supersymbol(&vs, &table, &block, Noise::Disabled),
        Err(BiaError::Parameter(_))
    ));
}

#[test]
fn unverifiable_scheme_cannot_reach_the_simulator() {
    let s = BiaScheme::build(5, None, false).unwrap();
    assert!(matches!(
        VerifiedScheme::new(s, &evaluation_seeds(1, 3)),
        Err(BiaError::Unverified(_))
    ));
}

#[test]
fn sequential_and_parallel_sweeps_are_bit_identical() {
    let vs = verified(4, 2, true);
    let snr = [20.0, 30.0, 40.0];
    let seq = estimate_rates_with(&vs, &snr, 150, 42, Execution::Sequential).unwrap();
    let par = estimate_rates_with(&vs, &snr, 150, 42, Execution::default()).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq, estimate_rates(&vs, &snr, 150, 42).unwrap());
    let other = estimate_rates(&vs, &snr, 150, 43).unwrap();
    assert_ne!(seq.sum_rate, other.sum_rate);
}

#[test]
fn rates_increase_with_snr() {
    let vs = verified(5, 2, true);
    let snr: Vec<f64> = (0..=6).map(|i| 10.0 * i as f64).collect();
    let curve = estimate_rates(&vs, &snr, 200, 3).unwrap();
    for w in curve.sum_rate.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for user in 0..5 {
        for i in 1..snr.len() {
            assert!(curve.per_user_rate[i][user] >= curve.per_user_rate[i - 1][user]);
        }
    }
}

fn slope(vs: &VerifiedScheme) -> f64 {
    let snr: Vec<f64> = (0..=6).map(|i| 30.0 + 5.0 * i as f64).collect();
    let curve = estimate_rates(vs, &snr, 300, 17).unwrap();
    assert_eq!(curve.discarded, 0);
    assert!(curve.ci_half_width < 0.01);
    curve.dof_slope
}

#[test]
fn fitted_slopes_match_achieved_dof() {
    let single = VerifiedScheme::new(
        BiaScheme::build(1, None, false).unwrap(),
        &evaluation_seeds(1, 3),
    )
    .unwrap();
    assert!((slope(&single) - 1.0).abs() < 0.02);
    assert!((slope(&verified(3, 2, true)) - 1.0).abs() < 0.05);
    assert!((slope(&verified(5, 2, true)) - 4.0 / 3.0).abs() < 0.05 * 4.0 / 3.0);
    assert!((slope(&verified(4, 1, false)) - 1.0).abs() < 0.05);
}

#[test]
fn sweep_argument_errors() {
    let vs = verified(3, 2, true);
    assert!(estimate_rates(&vs, &[], 100, 0).is_err());
    assert!(estimate_rates(&vs, &[30.0], 100, 0).is_err());
    assert!(estimate_rates(&vs, &[30.0, 20.0], 100, 0).is_err());
    assert!(estimate_rates(&vs, &[20.0, 30.0], 99, 0).is_err());
}

#[test]
fn qpsk_at_40_db_is_nearly_error_free() {
    let vs = verified(5, 2, true);
    let ser = qpsk_symbol_error_rate(&vs, 40.0, 10_000, 8).unwrap();
    assert_eq!(ser.discarded_trials, 0);
    assert_eq!(ser.symbols, 10_000 * 20);
    assert!(ser.rate() < 1e-3, "SER {}", ser.rate());
}

/// Exhaustive maximum-likelihood search over QPSK hypotheses after
/// removing the interference subspace.
fn ml_decode(
    s: &BiaScheme,
    table: &ChannelModeTable,
    p: usize,
    y: &DVector<Complex64>,
    amplitude: f64,
) -> Vec<Complex64> {
    let proj = complement_projector(&columns(s, table, p, false));
    let g = &proj * columns(s, table, p, true);
    let py = &proj * y;
    let d = g.ncols();
    let point = |code: usize| {
        Complex64::new(
            if code & 1 == 0 { amplitude } else { -amplitude },
            if code & 2 == 0 { amplitude } else { -amplitude },
        )
    };
    let mut best = (f64::INFINITY, Vec::new());
    for h in 0..4usize.pow(d as u32) {
        let x: Vec<Complex64> = (0..d).map(|i| point((h >> (2 * i)) & 3)).collect();
        let dist = (&py - &g * DVector::from_vec(x.clone())).norm_squared();
        if dist < best.0 {
            best = (dist, x);
        }
    }
    best.1
}

#[test]
fn zero_forcing_decisions_agree_with_maximum_likelihood() {
    let vs = verified(4, 2, true);
    let s = vs.scheme();
    let rho = 10f64.powf(40.0 / 10.0);
    let slice = |x: Complex64| (x.re >= 0.0, x.im >= 0.0);
    for t in 0..8u64 {
        let table = ChannelModeTable::from_seed(4, 2, 1000 + t);
        let mut rng = rng_for(t, Stream::Symbols, 0);
        let block = TransmitBlock::qpsk(s, rho, &mut rng);
        let amplitude = block.symbols[0][0].re.abs();
        let y = simulate_supersymbol(&vs, &table, &block, Noise::Seeded(t)).unwrap();
        for (p, yp) in y.iter().enumerate() {
            let zf = zf_decode(p, yp, &vs, &table).unwrap();
            let ml = ml_decode(s, &table, p, yp, amplitude);
            let zf_bits: Vec<_> = zf.iter().map(|&x| slice(x)).collect();
            let ml_bits: Vec<_> = ml.iter().map(|&x| slice(x)).collect();
            let sent: Vec<_> = block.symbols[p].iter().map(|&x| slice(x)).collect();
            assert_eq!(ml_bits, sent, "trial {t} rx {p}");
            assert_eq!(zf_bits, ml_bits, "trial {t} rx {p}");
        }
    }
}
