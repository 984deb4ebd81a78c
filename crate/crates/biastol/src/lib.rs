//! Nonparametric tolerance limits and sample-size determination under
//! biased sampling.
//!
//! The classic tolerance problem asks for the sample size `n` such that the
//! order statistics `(Y_r, Y_{n+1-m})` bracket at least a proportion `q` of
//! the target population with confidence `1 - alpha`. With an unbiased sample
//! the answer is distribution-free ([`tolerance_classic`]). When observations
//! are drawn from a weighted/censored sampling distribution `G != F`, the
//! problem is no longer distribution-free; all bias enters the solvers through
//! a single object, the quantile map `Phi = G o F^{-1}` ([`quantile_map`]).
//!
//! Two biased-sampling solvers are provided: a conservative inequality bound
//! built from two one-sided problems ([`tolerance_inequality`]) and an
//! FFT-convolution approximation of the coverage distribution
//! ([`tolerance_fft`], engine in [`fft_conv`]). The [`sim_harness`] module
//! reproduces the length-biased right-censored validation experiment, and
//! [`pilot`] estimates the quantile map nonparametrically from pilot survival
//! data.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod fft_conv;
pub mod order_stats;
pub mod pilot;
pub mod quantile_map;
pub mod sim_harness;
pub mod special;
pub mod tolerance_classic;
pub mod tolerance_fft;
pub mod tolerance_inequality;

pub(crate) mod search;

pub use error::{Error, Result};
