use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Centroid, width and norm of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotObservables {
    pub t: f64,
    pub tau: f64,
    pub stage: usize,
    pub centroid: f64,
    pub width: f64,
    pub spin_norm: f64,
    /// `∫(|ℰ₊|² + |ℰ₋|²) dz`, proportional to the side fluorescence.
    pub intensity_total: f64,
}

/// Boundary energy released during one stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageEnergy {
    pub name: String,
    pub t_start: f64,
    pub t_end: f64,
    pub forward: f64,
    pub backward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSet {
    pub snapshots: Vec<SnapshotObservables>,
    pub stages: Vec<StageEnergy>,
}

impl ObservableSet {
    pub fn stage(&self, name: &str) -> Option<&StageEnergy> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// `(∫|v|² dz, centroid, RMS width)` of `|v|²` by the trapezoid rule.
/// Centroid and width are zero for a vanishing profile.
pub fn moments(z: &[f64], v: &[Complex64]) -> (f64, f64, f64) {
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for j in 0..z.len().saturating_sub(1) {
        let dz = z[j + 1] - z[j];
        let (a, b) = (v[j].norm_sqr(), v[j + 1].norm_sqr());
        m0 += 0.5 * dz * (a + b);
        m1 += 0.5 * dz * (a * z[j] + b * z[j + 1]);
        m2 += 0.5 * dz * (a * z[j] * z[j] + b * z[j + 1] * z[j + 1]);
    }
    if m0 <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let centroid = m1 / m0;
    let variance = (m2 / m0 - centroid * centroid).max(0.0);
    (m0, centroid, variance.sqrt())
}

/// Per-snapshot moments and per-stage released energies.
pub fn observables(traj: &Trajectory) -> Result<ObservableSet> {
    if traj.snapshots.is_empty() {
        return Err(Error::Domain("trajectory has no snapshots".into()));
    }
    let g2n = traj.medium.g2n;
    let snapshots = traj
        .snapshots
        .iter()
        .map(|snap| {
            let st = &snap.state;
            let (norm, centroid, width) = moments(&st.z, &st.s);
            let mut intensity = 0.0;
            if snap.omega_plus > 0.0 {
                intensity += snap.omega_plus.powi(2) / g2n * moments(&st.z, &st.psi_plus).0;
            }
            if snap.omega_minus > 0.0 {
                intensity += snap.omega_minus.powi(2) / g2n * moments(&st.z, &st.psi_minus).0;
            }
            SnapshotObservables {
                t: st.t,
                tau: st.tau,
                stage: snap.stage,
                centroid,
                width,
                spin_norm: norm,
                intensity_total: intensity,
            }
        })
        .collect();
    let stages = traj
        .stages
        .iter()
        .map(|s| StageEnergy {
            name: s.name.clone(),
            t_start: s.t_start,
            t_end: s.t_end,
            forward: s.energy_fwd,
            backward: s.energy_bwd,
        })
        .collect();
    Ok(ObservableSet { snapshots, stages })
}
