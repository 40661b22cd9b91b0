//! Nonbinary quasi-cyclic LDPC codes over GF(2^m).
//!
//! The crate covers the whole pipeline: simulated-annealing construction of
//! almost regular base matrices ([`anneal`]), labeling with circulant degrees
//! and field coefficients ([`labeler`]), ensemble-average weight spectra
//! ([`spectrum`]), ML error-probability bounds ([`bounds`]), and Monte Carlo
//! BP decoding over the AWGN channel ([`sim`]).

pub mod anneal;
pub mod bounds;
pub mod error;
pub mod formats;
pub mod gf;
pub mod graph;
pub mod labeler;
pub mod matrix;
pub mod qc;
pub mod seed;
pub mod sim;
pub mod special;
pub mod spectrum;

pub use bounds::{BoundPoint, ChannelPoint};
pub use error::{Error, Result};
pub use formats::{MatrixFile, MatrixKind};
pub use gf::{Element, GfContext};
pub use graph::{CycleCounts, Hypergraph, TannerCycle};
pub use matrix::{BinaryMatrix, IntMatrix};
pub use qc::{CodeMatrices, LiftedCode};
pub use sim::{FerConfig, FerRecord, FerReport};
pub use spectrum::{EnsembleSpec, WeightSpectrum};
