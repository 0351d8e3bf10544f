//! Quantile-pair spectral discriminants ("min/max networks") for pairwise
//! phoneme classification.
//!
//! A classifier compares `q1(r1) - q2(r2)` against a threshold, where `q1`,
//! `q2` are order statistics over two contiguous ranges of a log-periodogram.
//! The crate covers dataset loading ([`spectra`]), evaluation and hardware
//! lowering ([`classifier`]), exhaustive training ([`search`]), continuous
//! linear relaxations ([`baselines`]) and scanning over audio ([`stream`]).

pub mod baselines;
pub mod checks;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod search;
pub mod spectra;
pub mod stream;

pub use error::{Error, Result};
