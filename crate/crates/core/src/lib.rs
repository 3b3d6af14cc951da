//! Slow and stationary light in EIT media driven by counter-propagating
//! control beams.
//!
//! - [`model`]: medium, control schedules, signal inputs and field mappings
//! - [`dynamics`]: time-domain polariton solver and protocols
//! - [`dispersion`]: analytic dispersion relation and plane-wave checks
//! - [`cw_spectra`]: steady-state Bragg transmission and reflection

pub mod config;
pub mod cw_spectra;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod output;
pub mod run;

pub use error::{Error, Result};
