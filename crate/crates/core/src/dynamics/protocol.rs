use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::observables::moments;
use super::scheme::{self, BoundaryInputs};
use super::PolaritonState;
use crate::error::{Error, Result};
use crate::model::{
    compute_alphas, Alphas, ControlSchedule, Grid, MediumParams, Port, SignalInput,
};

/// Output decimation and step-size control for [`run_protocol_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolOptions {
    /// Target number of time-series rows over the schedule span.
    pub n_records: usize,
    /// Number of evenly spaced snapshots (the initial state is always kept).
    pub n_snapshots: usize,
    /// Keep every n-th node in snapshots; 0 picks a stride giving at most
    /// 201 points.
    pub snapshot_z_stride: usize,
    /// Fraction of the stability bound used when the step is automatic.
    pub safety: f64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            n_records: 2000,
            n_snapshots: 100,
            snapshot_z_stride: 0,
            safety: 0.8,
        }
    }
}

/// One row of the trajectory time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub tau: f64,
    /// Index of the schedule segment in force.
    pub stage: usize,
    /// `|ℰ₊(L, t)|²`
    pub flux_fwd: f64,
    /// `|ℰ₋(0, t)|²`
    pub flux_bwd: f64,
    /// `∫|S|² dz`
    pub spin_norm: f64,
    /// `∫z|S|² dz / ∫|S|² dz`
    pub centroid: f64,
    /// RMS width of `|S|²`.
    pub width: f64,
    /// `∫(|ℰ₊|² + |ℰ₋|²) dz`
    pub intensity_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub stage: usize,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub state: PolaritonState,
}

/// Per-stage totals accumulated at every solver step.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub name: String,
    pub t_start: f64,
    pub t_end: f64,
    /// Scaled time elapsed within the stage.
    pub tau_span: f64,
    /// `∫ c|ℰ₊(L)|² dt`
    pub energy_fwd: f64,
    /// `∫ c|ℰ₋(0)|² dt`
    pub energy_bwd: f64,
    /// `∫|S|² dz` at the end of the stage.
    pub spin_norm_end: f64,
}

/// Result of a protocol run. Times, lengths and energies are in the units
/// of the medium parameters; energies are normalised so that a pulse whose
/// spin wave has `∫|S|² dz = E` carries energy `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub medium: MediumParams,
    pub stage_names: Vec<String>,
    /// Control transition times, including both ends of the schedule.
    pub markers: Vec<f64>,
    pub z: Vec<f64>,
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
    pub stages: Vec<StageSummary>,
    /// `∫ c|ℰ_in|² dt` of the signal actually injected.
    pub input_energy: f64,
    pub final_spin: Vec<Complex64>,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Index of the stage with the given name.
    pub fn stage(&self, name: &str) -> Option<usize> {
        self.stage_names.iter().position(|n| n == name)
    }
}

/// Runs a protocol with default output options.
pub fn run_protocol(
    params: &MediumParams,
    schedule: &ControlSchedule,
    input: &SignalInput,
    grid: &Grid,
) -> Result<Trajectory> {
    run_protocol_with(params, schedule, input, grid, &ProtocolOptions::default())
}

struct Units {
    time: f64,
    length: f64,
}

struct Solver<'a> {
    xi: f64,
    g2n: f64,
    h: f64,
    input: &'a SignalInput,
}

impl Solver<'_> {
    fn inputs(&self, t: f64) -> BoundaryInputs {
        let v = self.input.envelope(t);
        match self.input.port {
            Port::Forward => BoundaryInputs {
                forward: v,
                backward: Complex64::default(),
            },
            Port::Backward => BoundaryInputs {
                forward: Complex64::default(),
                backward: v,
            },
        }
    }

    /// `c|ℰ_in|²` entering through the input port.
    fn input_power(&self, t: f64, omegas: (f64, f64)) -> f64 {
        let omega = match self.input.port {
            Port::Forward => omegas.0,
            Port::Backward => omegas.1,
        };
        omega * omega / self.g2n * self.input.envelope(t).norm_sqr()
    }

    /// Exit fluxes `(|ℰ₊(L)|², |ℰ₋(0)|²)`.
    fn fluxes(&self, s: &[Complex64], omegas: (f64, f64), t: f64) -> Result<(f64, f64)> {
        let Ok(alphas) = compute_alphas(omegas.0, omegas.1) else {
            return Ok((0.0, 0.0));
        };
        let out = scheme::boundary_outputs(s, alphas, self.xi, self.h, self.inputs(t))?;
        let fwd = omegas.0 * omegas.0 / self.g2n * out.forward.norm_sqr();
        let bwd = omegas.1 * omegas.1 / self.g2n * out.backward.norm_sqr();
        Ok((fwd, bwd))
    }

    /// Node values of `D` (zero when the controls are off) and the weights.
    fn difference(&self, s: &[Complex64], omegas: (f64, f64), t: f64) -> Result<(Vec<Complex64>, Alphas)> {
        match compute_alphas(omegas.0, omegas.1) {
            Ok(alphas) => {
                let d = scheme::slave_difference(s, alphas, self.xi, self.h, self.inputs(t))?;
                Ok((d.at_nodes(), alphas))
            }
            Err(_) => Ok((vec![Complex64::default(); s.len()], Alphas::FORWARD)),
        }
    }
}

/// Integrates a multi-stage protocol.
///
/// Stages where both controls are off hold the spin wave frozen (up to
/// decoherence). Elsewhere each step evaluates the weights at its midpoint,
/// advances the spin wave by the exact scaled-time increment of the step
/// and then applies decoherence over the real-time increment.
pub fn run_protocol_with(
    params: &MediumParams,
    schedule: &ControlSchedule,
    input: &SignalInput,
    grid: &Grid,
    options: &ProtocolOptions,
) -> Result<Trajectory> {
    params.validate()?;
    input.validate()?;
    grid.validate()?;
    if options.n_records == 0 || options.n_snapshots == 0 {
        return Err(Error::validation("output", "n_records and n_snapshots must be positive"));
    }
    if !(options.safety > 0.0 && options.safety <= 1.0) {
        return Err(Error::validation("output.safety", "must lie in (0, 1]"));
    }

    let units = Units {
        time: params.time_unit(),
        length: params.length,
    };
    let medium = params.scaled();
    let sched = schedule.scaled(units.time);
    let inp = input.scaled(units.time);
    let dt_user = grid.dt.map(|d| d / units.time);
    let nz = grid.nz;
    let h = 1.0 / (nz - 1) as f64;
    let solver = Solver {
        xi: medium.xi,
        g2n: medium.g2n,
        h,
        input: &inp,
    };

    let mut warnings = Vec::new();
    if h > 1.0 / medium.xi {
        warnings.push(format!(
            "grid too coarse: dz = {:.3e} exceeds the absorption length 1/xi = {:.3e}",
            h * units.length,
            units.length / medium.xi
        ));
    }
    let (om_p, om_m) = sched.omegas_at(inp.t0.clamp(sched.start(), sched.end()));
    let port_on = match inp.port {
        Port::Forward => om_p > 0.0,
        Port::Backward => om_m > 0.0,
    };
    if inp.amplitude.norm() > 0.0 && !port_on {
        warnings.push("input pulse peaks while its control beam is off; it is not stored".into());
    }
    if inp.t0 - 4.0 * inp.sigma_t < sched.start() || inp.t0 + 4.0 * inp.sigma_t > sched.end() {
        warnings.push("input pulse is truncated by the schedule span".into());
    }

    let z_internal: Vec<f64> = (0..nz).map(|j| j as f64 * h).collect();
    let z: Vec<f64> = z_internal.iter().map(|x| x * units.length).collect();
    let stride = if options.snapshot_z_stride > 0 {
        options.snapshot_z_stride
    } else {
        (nz - 1).div_ceil(200).max(1)
    };
    let mut snap_idx: Vec<usize> = (0..nz).step_by(stride).collect();
    if *snap_idx.last().unwrap() != nz - 1 {
        snap_idx.push(nz - 1);
    }

    let t_start = sched.start();
    let span = sched.end() - t_start;
    let record_dt = span / options.n_records as f64;
    let snapshot_dt = span / options.n_snapshots as f64;
    let eps_t = 1e-12 * span.max(t_start.abs());

    let mut s = vec![Complex64::default(); nz];
    let mut t = t_start;
    let mut tau = 0.0;
    let mut steps = 0usize;
    let mut input_energy = 0.0;
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut stages: Vec<StageSummary> = schedule
        .segments()
        .iter()
        .map(|seg| StageSummary {
            name: seg.name.clone(),
            t_start: seg.start,
            t_end: seg.end,
            tau_span: 0.0,
            energy_fwd: 0.0,
            energy_bwd: 0.0,
            spin_norm_end: 0.0,
        })
        .collect();

    let record = |s: &[Complex64], t: f64, tau: f64, stage: usize, omegas: (f64, f64)| -> Result<Record> {
        if s.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite spin wave at t = {}", t * units.time)));
        }
        let (flux_fwd, flux_bwd) = solver.fluxes(s, omegas, t)?;
        let (d, alphas) = solver.difference(s, omegas, t)?;
        let (norm, centroid, width) = moments(&z_internal, s);
        let mut intensity = 0.0;
        for (omega, sign, weight) in [(omegas.0, 1.0, alphas.minus), (omegas.1, -1.0, alphas.plus)] {
            if omega > 0.0 {
                let psi: Vec<Complex64> = s.iter().zip(&d).map(|(s, d)| s + sign * weight * d).collect();
                intensity += omega * omega / solver.g2n * moments(&z_internal, &psi).0;
            }
        }
        Ok(Record {
            t: t * units.time,
            tau: tau * units.time,
            stage,
            flux_fwd,
            flux_bwd,
            spin_norm: norm * units.length,
            centroid: centroid * units.length,
            width: width * units.length,
            intensity_total: intensity * units.length,
        })
    };
    let snapshot = |s: &[Complex64], t: f64, tau: f64, stage: usize, omegas: (f64, f64)| -> Result<Snapshot> {
        let (d, alphas) = solver.difference(s, omegas, t)?;
        let pick = |v: &[Complex64]| snap_idx.iter().map(|&j| v[j]).collect::<Vec<_>>();
        Ok(Snapshot {
            stage,
            omega_plus: omegas.0 / units.time,
            omega_minus: omegas.1 / units.time,
            state: PolaritonState::from_spin(
                snap_idx.iter().map(|&j| z[j]).collect(),
                pick(s),
                pick(&d),
                alphas.plus,
                alphas.minus,
                t * units.time,
                tau * units.time,
            ),
        })
    };

    let pieces = sched.pieces();
    records.push(record(&s, t, tau, 0, pieces[0].omegas(t))?);
    snapshots.push(snapshot(&s, t, tau, 0, pieces[0].omegas(t))?);
    let mut next_record = t_start + record_dt;
    let mut next_snapshot = t_start + snapshot_dt;

    for (pi, piece) in pieces.iter().enumerate() {
        let stage = piece.segment;
        let starts_segment = pi > 0 && pieces[pi - 1].segment != stage;
        if starts_segment {
            // Row on the new side of the transition (controls may jump).
            records.push(record(&s, t, tau, stage, piece.omegas(t))?);
        }
        let mut flux_start: Option<(f64, f64, f64)> = None;

        while piece.t1 - t > eps_t {
            let remaining = piece.t1 - t;
            if piece.is_dark() {
                let dt = remaining.min(record_dt);
                scheme::apply_decoherence(&mut s, medium.gamma_s, dt);
                t += dt;
                steps += 1;
            } else {
                let mut dt = match dt_user {
                    Some(d) => d,
                    None => {
                        let mut bound = f64::INFINITY;
                        for tt in [t, 0.5 * (t + piece.t1), piece.t1] {
                            let (p, m) = piece.omegas(tt);
                            if let Ok(a) = compute_alphas(p, m) {
                                bound = bound.min(scheme::stability_bound(a, medium.xi, h));
                            }
                        }
                        options.safety * bound * medium.g2n / piece.max_intensity(t, piece.t1)
                    }
                }
                .min(remaining)
                .min(record_dt);

                let (alphas, dtau) = loop {
                    let (p, m) = piece.omegas(t + 0.5 * dt);
                    let alphas = compute_alphas(p, m)?;
                    let dtau = piece.intensity_integral(t, t + dt) / medium.g2n;
                    let mut bound = scheme::stability_bound(alphas, medium.xi, h);
                    for tt in [t, t + dt] {
                        let (p, m) = piece.omegas(tt);
                        if let Ok(a) = compute_alphas(p, m) {
                            bound = bound.min(scheme::stability_bound(a, medium.xi, h));
                        }
                    }
                    if dtau <= bound {
                        break (alphas, dtau);
                    }
                    if dt_user.is_some() {
                        return Err(Error::StepSize { dtau, bound });
                    }
                    dt *= options.safety * bound / dtau;
                };

                let (f0, b0, p0) = match flux_start {
                    Some(v) => v,
                    None => {
                        let (f, b) = solver.fluxes(&s, piece.omegas(t), t)?;
                        (f, b, solver.input_power(t, piece.omegas(t)))
                    }
                };
                let stage_inputs = [solver.inputs(t), solver.inputs(t + dt), solver.inputs(t + 0.5 * dt)];
                s = scheme::advance_spin(&s, alphas, medium.xi, h, dtau, stage_inputs)?;
                scheme::apply_decoherence(&mut s, medium.gamma_s, dt);
                t += dt;
                tau += dtau;
                steps += 1;

                let omegas_end = piece.omegas(t);
                let (f1, b1) = solver.fluxes(&s, omegas_end, t)?;
                let p1 = solver.input_power(t, omegas_end);
                let summary = &mut stages[stage];
                summary.energy_fwd += 0.5 * (f0 + f1) * dt * units.length;
                summary.energy_bwd += 0.5 * (b0 + b1) * dt * units.length;
                summary.tau_span += dtau * units.time;
                input_energy += 0.5 * (p0 + p1) * dt * units.length;
                flux_start = Some((f1, b1, p1));
            }

            let at_end = piece.t1 - t <= eps_t;
            if at_end {
                t = piece.t1;
            }
            if t >= next_record - eps_t || (at_end && pi + 1 < pieces.len() && pieces[pi + 1].segment != stage) || (at_end && pi + 1 == pieces.len()) {
                records.push(record(&s, t, tau, stage, piece.omegas(t))?);
                while next_record <= t + eps_t {
                    next_record += record_dt;
                }
            }
            if t >= next_snapshot - eps_t {
                snapshots.push(snapshot(&s, t, tau, stage, piece.omegas(t))?);
                while next_snapshot <= t + eps_t {
                    next_snapshot += snapshot_dt;
                }
            }
        }
        let (norm, _, _) = moments(&z_internal, &s);
        stages[stage].spin_norm_end = norm * units.length;
    }

    Ok(Trajectory {
        medium: *params,
        stage_names: schedule.segments().iter().map(|s| s.name.clone()).collect(),
        markers: schedule.markers(),
        z,
        records,
        snapshots,
        stages,
        input_energy,
        final_spin: s,
        steps,
        warnings,
    })
}
