//! CSV serialization of run results. Numbers carry 9 significant digits.

use std::fmt::Write;

use crate::cw_spectra::Spectrum;
use crate::dispersion::DispersionPoint;
use crate::dynamics::Trajectory;

pub const TRAJECTORY_COLUMNS: &str = "t,tau,stage,flux_fwd,flux_bwd,spin_norm,centroid,width,intensity_total";
pub const SNAPSHOT_COLUMNS: &str = "t,z,re_S,im_S,abs_psi_plus,abs_psi_minus";
pub const STAGE_COLUMNS: &str = "stage,t_start,t_end,tau_span,energy_fwd,energy_bwd,spin_norm_end";
pub const DISPERSION_COLUMNS: &str = "k,re_omega,im_omega";
pub const SPECTRUM_COLUMNS: &str = "delta_Hz,T,R,A,T_bd_off";
pub const SWEEP_COLUMNS: &str = "run,value,input_energy,release_energy_fwd,release_energy_bwd,released_magnitude";

/// `x` in scientific notation with 9 significant digits.
pub fn num(x: f64) -> String {
    // Avoid "-0e0" for values that round to zero.
    if x == 0.0 {
        return format!("{:.8e}", 0.0);
    }
    format!("{x:.8e}")
}

fn row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = format!("{TRAJECTORY_COLUMNS}\n");
    for r in &traj.records {
        row(
            &mut out,
            &[
                num(r.t),
                num(r.tau),
                traj.stage_names[r.stage].clone(),
                num(r.flux_fwd),
                num(r.flux_bwd),
                num(r.spin_norm),
                num(r.centroid),
                num(r.width),
                num(r.intensity_total),
            ],
        );
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory) -> String {
    let mut out = format!("{SNAPSHOT_COLUMNS}\n");
    for snap in &traj.snapshots {
        let st = &snap.state;
        for j in 0..st.z.len() {
            row(
                &mut out,
                &[
                    num(st.t),
                    num(st.z[j]),
                    num(st.s[j].re),
                    num(st.s[j].im),
                    num(st.psi_plus[j].norm()),
                    num(st.psi_minus[j].norm()),
                ],
            );
        }
    }
    out
}

pub fn stages_csv(traj: &Trajectory) -> String {
    let mut out = format!("{STAGE_COLUMNS}\n");
    for s in &traj.stages {
        row(
            &mut out,
            &[
                s.name.clone(),
                num(s.t_start),
                num(s.t_end),
                num(s.tau_span),
                num(s.energy_fwd),
                num(s.energy_bwd),
                num(s.spin_norm_end),
            ],
        );
    }
    out
}

pub fn dispersion_csv(points: &[DispersionPoint]) -> String {
    let mut out = format!("{DISPERSION_COLUMNS}\n");
    for p in points {
        row(&mut out, &[num(p.k), num(p.omega.re), num(p.omega.im)]);
    }
    out
}

/// Detunings are written as `δ/2π`.
pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = format!("{SPECTRUM_COLUMNS}\n");
    for j in 0..s.detunings.len() {
        row(
            &mut out,
            &[
                num(s.detunings[j] / (2.0 * std::f64::consts::PI)),
                num(s.t[j]),
                num(s.r[j]),
                num(s.a[j]),
                num(s.t_bd_off[j]),
            ],
        );
    }
    out
}

/// One sweep row: released energy is that of the last stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub input_energy: f64,
    pub release_fwd: f64,
    pub release_bwd: f64,
}

impl SweepRow {
    pub fn from_trajectory(value: f64, traj: &Trajectory) -> Self {
        let last = traj.stages.last().expect("schedules have at least one stage");
        SweepRow {
            value,
            input_energy: traj.input_energy,
            release_fwd: last.energy_fwd,
            release_bwd: last.energy_bwd,
        }
    }

    /// Square root of the released energy, the pulse magnitude.
    pub fn magnitude(&self) -> f64 {
        (self.release_fwd + self.release_bwd).sqrt()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_COLUMNS}\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            num(r.value),
            num(r.input_energy),
            num(r.release_fwd),
            num(r.release_bwd),
            num(r.magnitude())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(num(-12345.678901), "-1.23456789e4");
        assert_eq!(num(-0.0), "0.00000000e0");
    }
}
