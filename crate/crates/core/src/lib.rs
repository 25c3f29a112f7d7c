//! Statistical end-to-end performance bounds for a through flow crossing a
//! tandem of constant-rate servers, each loaded with long-range dependent
//! fractional Brownian motion (fBm) cross traffic.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: Gamma / Lambert W / Gaussian tail functions and the
//!   scalar optimizer every bound search is built on.
//! * [`traffic`]: fBm, Markov on-off (EBB) and constant-rate traffic models.
//! * [`envelope`]: point-wise and sample-path envelopes with their overflow
//!   profiles.
//! * [`bounds`]: single-server backlog and delay bounds.
//! * [`netcalc`]: leftover service curves, network service curves and
//!   end-to-end delay bounds.
//! * [`sim`]: exact fractional Gaussian noise synthesis and Monte-Carlo
//!   estimators used to validate the analytical bounds.
//!
//! All rates are in bits per time slot and all times in slots; see
//! [`units`] for the conversion to physical units.

pub mod bounds;
pub mod envelope;
mod error;
pub mod netcalc;
pub mod numerics;
pub mod sim;
pub mod traffic;
pub mod units;

pub use error::{Error, Result};
