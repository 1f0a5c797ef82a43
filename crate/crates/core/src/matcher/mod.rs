//! Exact minimum-weight perfect matching decoding on detector error graphs.

pub mod blossom;
mod decode;
mod graph;

pub use decode::{boundary_potential, complementary_gap, decode, decode_forced, Decoder, GapValue, MatchResult, Matched};
pub use graph::{Edge, ErrorGraph};

use num_traits::{Bounded, Num, NumCast};
use std::fmt::Debug;

/// Scalar usable as an edge weight.
pub trait Weight: Copy + PartialOrd + Debug + Default + Send + Sync + Num + NumCast + Bounded + 'static {
    fn half(self) -> Self;
}

impl Weight for f32 {
    fn half(self) -> Self {
        self * 0.5
    }
}

impl Weight for f64 {
    fn half(self) -> Self {
        self * 0.5
    }
}

impl Weight for i32 {
    fn half(self) -> Self {
        self / 2
    }
}

impl Weight for i64 {
    fn half(self) -> Self {
        self / 2
    }
}

/// Converts natural-log likelihood units to decibels.
pub const NATS_TO_DB: f64 = 10.0 / std::f64::consts::LN_10;
