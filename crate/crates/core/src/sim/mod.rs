//! Monte-Carlo link simulation: binary precoders, diagonal mode channels
//! from the switching patterns, complex Gaussian noise, zero-forcing
//! recovery and log-det rates.

mod channel;
mod rates;
mod receiver;

pub use channel::{simulate_supersymbol, ChannelModeTable, Noise, TransmitBlock};
pub use rates::{estimate_rates, estimate_rates_with, write_rates_csv, RateCurve, RateSummary};
pub use receiver::{qpsk_symbol_error_rate, zf_decode, SerResult, ZfReceiver, CONDITION_LIMIT};

pub type Complex64 = num_complex::Complex<f64>;
