//! Slow-light polariton dynamics: the reduced spin-wave solver, multi-stage
//! protocols and the observables extracted from them.

mod observables;
mod protocol;
pub mod scheme;

use num_complex::Complex64;

pub use observables::{moments, observables, ObservableSet, SnapshotObservables, StageEnergy};
pub use protocol::{run_protocol, run_protocol_with, ProtocolOptions, Record, Snapshot, StageSummary, Trajectory};
pub use scheme::{
    advance_spin, apply_decoherence, slave_difference, stability_bound, BoundaryInputs,
    BoundaryOutputs, DifferenceMode,
};

/// Spin wave, polariton components and difference mode on the grid at one
/// instant. `z`, `t` and `tau` are in the units of the medium they belong
/// to.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonState {
    pub z: Vec<f64>,
    pub s: Vec<Complex64>,
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub t: f64,
    pub tau: f64,
}

impl PolaritonState {
    /// Builds `Ψ₊ = S + α₋D`, `Ψ₋ = S − α₊D` from a spin wave and its
    /// difference mode (given on the nodes).
    pub fn from_spin(
        z: Vec<f64>,
        s: Vec<Complex64>,
        d: Vec<Complex64>,
        alpha_plus: f64,
        alpha_minus: f64,
        t: f64,
        tau: f64,
    ) -> Self {
        let psi_plus = s.iter().zip(&d).map(|(s, d)| s + alpha_minus * d).collect();
        let psi_minus = s.iter().zip(&d).map(|(s, d)| s - alpha_plus * d).collect();
        PolaritonState {
            z,
            s,
            psi_plus,
            psi_minus,
            d,
            t,
            tau,
        }
    }
}
