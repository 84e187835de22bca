//! Terrain-aware radio propagation and packet-level link simulation.
//!
//! * [`terrain`]: elevation profiles, line of sight, knife-edge geometry
//! * [`proploss`]: free-space, two-ray, phasor, diffraction, troposcatter and
//!   composite terrain path loss
//! * [`fading`]: Rician envelopes, sum-of-sinusoids fading, multipath taps
//! * [`linksim`]: the received-power / SNR / BER / decision pipeline

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fading;
pub mod linksim;
pub mod proploss;
pub mod terrain;

pub use error::{Error, Result};
