//! Exact-arithmetic signal classes, recovery procedures and uniqueness-set
//! verification for finite complex sequences.
//!
//! Signals are length-`N` vectors of Gaussian rationals. Spectra are kept as
//! exact sums in cyclotomic fields, and transcendental quantities such as
//! `e^{i omega}` and `pi` are handled with rigorous ball arithmetic.

pub mod error;
pub mod exactnum;
pub mod recovery;
pub mod rounding;
pub mod signal;
pub mod spectral;
pub mod uniqueness;

pub use error::{Error, Result};
pub use signal::Signal;
