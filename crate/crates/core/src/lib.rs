//! Stochastic channel model for satellite mega-constellations.
//!
//! Satellites of one shell are modelled as a marked non-homogeneous
//! binomial point process. From it follow the distributions of channel
//! gain, delay and Doppler seen by a ground user, the delay-Doppler
//! scattering function and the global channel parameters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod channel;
pub mod commands;
pub mod config;
pub mod distributions;
mod doppler_engine;
pub mod error;
pub mod geometry;
pub mod nbpp;
pub mod orbit_sim;
pub mod propagation;
pub mod quadrature;
pub mod stats;
pub mod visibility;

pub use error::{ChannelError, Result};
pub use geometry::{ShellConfig, UserGeometry};
pub use nbpp::{MarkMode, NbppModel};
pub use propagation::{Mark, SatellitePoint};
pub use visibility::CapModel;
