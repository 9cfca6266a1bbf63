//! Wideband uplink capacity of a SISO-OFDM link assisted by a swarm of
//! network-controlled amplify-and-forward repeaters.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`geometry`]: BS, repeater grid and random UE drops.
//! - [`channel`]: stochastic multipath profiles per link.
//! - [`taps`]: symbol-rate tap synthesis `h[l] = c_d[l] + c_r[l]^T alpha`.
//! - [`noise`]: Toeplitz covariance of the amplified repeater noise.
//! - [`capacity`]: whitening, singular values, water-filling and capacity.
//! - [`activation`]: repeater activation strategies.
//! - [`harness`]: Monte-Carlo sweeps and CSV output.
//! - [`oracle`]: brute-force reference implementations used for validation.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod capacity;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod noise;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod taps;
pub mod units;

pub use num_complex::Complex64;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
