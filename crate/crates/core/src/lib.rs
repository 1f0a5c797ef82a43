//! Construction, simulation and planning toolkit for yoked surface-code memories.

pub mod error;
pub mod gapstore;
pub mod gf2;
pub mod matcher;
pub mod outersim;
pub mod planner;
pub mod qpcc;
pub mod stabsim;

pub use error::{Error, Result};

/// Matching graph with real-valued log-likelihood weights.
pub type DetectorErrorGraph = matcher::ErrorGraph<f64>;
/// Decoder over [`DetectorErrorGraph`].
pub type Decoder<'g> = matcher::Decoder<'g, f64>;
