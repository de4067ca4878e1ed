//! Bivariate-bicycle codes under erasure-biased noise: circuit construction,
//! erasure compilation, Pauli conversion engines, stabilizer sampling,
//! BP+OSD decoding and scaling metrics.

pub mod bbcode;
pub mod circuit;
pub mod engines;
pub mod error;
pub mod compiler;
pub mod decoder;
pub mod gf2;
pub mod metrics;
pub mod report;
pub mod seeds;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
