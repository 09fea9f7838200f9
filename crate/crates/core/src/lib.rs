//! Distributed channel assignment for D2D underlay cellular networks.
//!
//! D2D pairs choose channels by binary log-linear learning on noisy,
//! marginal-contribution utilities. The expected utilities form an exact
//! potential game whose potential is the expected sum rate, so at low
//! temperature the learning dynamics concentrate on sum-rate maximizers.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which every experiment uses.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod game;
pub mod learning;
pub mod profile;
pub mod radio;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use game::{UtilityEstimate, UtilityMode};
pub use profile::AssignmentProfile;
pub use radio::{generate_topology, rate, FadingMode, FadingRealization};
pub use scalar::Scalar;

pub type RadioParamsF64 = radio::RadioParams<f64>;
pub type TopologyF64 = radio::Topology<f64>;
pub type CapGameF64 = game::CapGame<f64>;
pub type RadioParamsF32 = radio::RadioParams<f32>;
pub type TopologyF32 = radio::Topology<f32>;
pub type CapGameF32 = game::CapGame<f32>;
