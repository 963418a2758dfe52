//! Hyperdimensional open modification search over spectral libraries, with a
//! behavioural model of a multi-level-cell RRAM crossbar for in-memory
//! encoding, storage and search.
//!
//! The modules follow the data flow: [`spectra`] turns peak lists into
//! binned vectors, [`hd`] encodes them into hypervectors, [`search`] ranks
//! references by Hamming similarity inside a precursor window and
//! [`pipeline`] adds decoys and the FDR filter. [`xbar`] simulates the
//! memory array and [`experiments`] drives the parameter sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod hd;
pub mod pipeline;
pub mod rng;
pub mod search;
pub mod spectra;
pub mod xbar;

pub use error::{Error, Result};
pub use hd::{Encoder, EncoderConfig, Hypervector};
pub use search::{ReferenceIndex, ScoredMatch, SearchConfig};
pub use spectra::{BinConfig, BinnedVector, Peak, PreprocessConfig, Spectrum};
