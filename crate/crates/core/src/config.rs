//! JSON run configuration.
//!
//! Every physical quantity carries its unit in the key name. A config is
//! written either in SI-style units (`"units": "si"`: `_m`, `_us`, `_MHz`
//! and `_kHz` for frequencies divided by 2π, `_per_m`, `_per_s2` for g²N in
//! rad²/s²) or in internal units (`"units": "dimensionless"`: every key ends
//! in `_dimless`, lengths in `L` and times in `L/c`). Keys of the other
//! system are rejected.
//!
//! A config may name a shipped preset; the user's keys are then merged
//! over it (objects recursively, arrays and scalars replaced).

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cw_spectra::{AtomParams, SpectrumOptions, StandingWaveControl, RB_D1_GAMMA_E, RB_D1_WAVELENGTH};
use crate::dynamics::ProtocolOptions;
use crate::error::{Error, Result};
use crate::model::{Alphas, ControlSchedule, Grid, MediumParams, Port, Segment, SignalInput, SPEED_OF_LIGHT};

/// Shipped presets as `(name, JSON text)`.
pub const PRESETS: [(&str, &str); 5] = [
    ("fig1c", include_str!("../presets/fig1c.json")),
    ("fig1d", include_str!("../presets/fig1d.json")),
    ("fig2c", include_str!("../presets/fig2c.json")),
    ("fig3a", include_str!("../presets/fig3a.json")),
    ("fig3c", include_str!("../presets/fig3c.json")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dynamics,
    Dispersion,
    Spectrum,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Si,
    #[default]
    Dimensionless,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawConfig {
    mode: Mode,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    caption: Option<String>,
    #[serde(default)]
    units: Units,
    #[serde(default)]
    medium: Option<RawMedium>,
    #[serde(default)]
    schedule: Option<RawSchedule>,
    #[serde(default)]
    input: Option<RawInput>,
    #[serde(default)]
    grid: Option<RawGrid>,
    #[serde(default)]
    dispersion: Option<RawDispersion>,
    #[serde(default)]
    spectrum: Option<RawSpectrum>,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawMedium {
    optical_depth_dimless: f64,
    length_m: Option<f64>,
    g2n_per_s2: Option<f64>,
    g2n_dimless: Option<f64>,
    gamma_s_kHz: Option<f64>,
    gamma_s_dimless: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSchedule {
    ramp_us: Option<f64>,
    ramp_dimless: Option<f64>,
    stages: Vec<RawStage>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawStage {
    name: String,
    duration_us: Option<f64>,
    duration_dimless: Option<f64>,
    omega_plus_MHz: Option<f64>,
    omega_plus_dimless: Option<f64>,
    omega_minus_MHz: Option<f64>,
    omega_minus_dimless: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawInput {
    #[serde(default = "one")]
    amplitude_dimless: f64,
    #[serde(default)]
    phase_rad: f64,
    t0_us: Option<f64>,
    t0_dimless: Option<f64>,
    sigma_t_us: Option<f64>,
    sigma_t_dimless: Option<f64>,
    #[serde(default = "forward")]
    port: Port,
}

fn one() -> f64 {
    1.0
}

fn forward() -> Port {
    Port::Forward
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawGrid {
    nz: usize,
    dt_us: Option<f64>,
    dt_dimless: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawDispersion {
    alpha_plus_dimless: f64,
    k_min_per_m: Option<f64>,
    k_min_dimless: Option<f64>,
    k_max_per_m: Option<f64>,
    k_max_dimless: Option<f64>,
    n_k: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSpectrum {
    gamma_e_MHz: Option<f64>,
    gamma_e_dimless: Option<f64>,
    omega_plus_MHz: Option<f64>,
    omega_plus_dimless: Option<f64>,
    omega_minus_MHz: Option<f64>,
    omega_minus_dimless: Option<f64>,
    #[serde(default)]
    phi_rad: f64,
    delta_beta_per_m: Option<f64>,
    delta_beta_dimless: Option<f64>,
    detuning_min_MHz: Option<f64>,
    detuning_min_dimless: Option<f64>,
    detuning_max_MHz: Option<f64>,
    detuning_max_dimless: Option<f64>,
    n_detunings: usize,
    #[serde(default = "default_harmonics")]
    harmonics: usize,
    /// 0 disables the truncation comparison.
    #[serde(default = "default_compare")]
    compare_order: usize,
    wavelength_m: Option<f64>,
    wavelength_dimless: Option<f64>,
}

fn default_harmonics() -> usize {
    1
}

fn default_compare() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOutput {
    stem: String,
    snapshots: bool,
    n_records: usize,
    n_snapshots: usize,
    snapshot_z_stride: usize,
    safety: f64,
}

impl Default for RawOutput {
    fn default() -> Self {
        let p = ProtocolOptions::default();
        RawOutput {
            stem: "run".into(),
            snapshots: true,
            n_records: p.n_records,
            n_snapshots: p.n_snapshots,
            snapshot_z_stride: p.snapshot_z_stride,
            safety: p.safety,
        }
    }
}

/// A fully resolved dynamics run in consistent units.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsJob {
    pub medium: MediumParams,
    pub schedule: ControlSchedule,
    pub input: SignalInput,
    pub grid: Grid,
    pub options: ProtocolOptions,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionJob {
    pub alphas: Alphas,
    pub xi: f64,
    pub c: f64,
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumJob {
    pub atom: AtomParams,
    pub control: StandingWaveControl,
    /// Angular detunings.
    pub detunings: Vec<f64>,
    pub options: SpectrumOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    pub parameter: String,
    pub values: Vec<f64>,
    pub runs: Vec<DynamicsJob>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Dynamics(DynamicsJob),
    Dispersion(DispersionJob),
    Spectrum(SpectrumJob),
    Sweep(SweepJob),
}

/// Validated configuration with defaults filled in and units converted.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub units: Units,
    pub preset: Option<String>,
    pub caption: Option<String>,
    pub stem: String,
    pub job: Job,
    /// The merged config as JSON; its canonical serialization is hashed.
    pub merged: Value,
}

impl RunConfig {
    /// SHA-256 of the canonical (key-sorted, compact) merged config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.merged).expect("JSON value serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads and validates a config file. `preset` overrides the file's
/// `preset` key.
pub fn parse_config(path: &Path, preset: Option<&str>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::validation("<root>", format!("malformed JSON: {e}")))?;
    parse_value(value, preset)
}

/// Config from a preset alone.
pub fn preset_config(name: &str) -> Result<RunConfig> {
    parse_value(Value::Object(Default::default()), Some(name))
}

/// Validates an in-memory config value.
pub fn parse_value(mut value: Value, preset: Option<&str>) -> Result<RunConfig> {
    if !value.is_object() {
        return Err(Error::validation("<root>", "config must be a JSON object"));
    }
    if let Some(name) = preset {
        value["preset"] = Value::String(name.to_string());
    }
    let merged = match value.get("preset") {
        None | Some(Value::Null) => value,
        Some(Value::String(name)) => {
            let text = preset_text(name)
                .ok_or_else(|| Error::validation("preset", format!("unknown preset `{name}`")))?;
            let mut base: Value = serde_json::from_str(text).expect("shipped presets are valid JSON");
            merge(&mut base, value);
            base
        }
        Some(_) => return Err(Error::validation("preset", "must be a string")),
    };
    resolve(merged)
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn deserialize(value: &Value) -> Result<RawConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })
}

fn resolve(merged: Value) -> Result<RunConfig> {
    let raw = deserialize(&merged)?;
    let units = raw.units;
    let stem = raw.output.stem.clone();
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(Error::validation("output.stem", "must be a plain non-empty file name"));
    }
    let job = match raw.mode {
        Mode::Dynamics => Job::Dynamics(dynamics_job(&raw)?),
        Mode::Dispersion => Job::Dispersion(dispersion_job(&raw)?),
        Mode::Spectrum => Job::Spectrum(spectrum_job(&raw)?),
        Mode::Sweep => Job::Sweep(sweep_job(&raw, &merged)?),
    };
    Ok(RunConfig {
        mode: raw.mode,
        units,
        preset: raw.preset,
        caption: raw.caption,
        stem,
        job,
        merged,
    })
}

/// One quantity given under an SI-style key or a `_dimless` key.
struct Quantity<'a> {
    path: String,
    si: (&'a str, Option<f64>),
    dimless: Option<f64>,
    scale: f64,
}

/// `_dimless` counterpart of an SI-style key.
fn dimless_key(si_name: &str) -> String {
    let stem = ["_per_s2", "_per_m", "_MHz", "_kHz", "_us", "_m"]
        .iter()
        .find_map(|suffix| si_name.strip_suffix(suffix))
        .unwrap_or(si_name);
    format!("{stem}_dimless")
}

impl Quantity<'_> {
    fn get(&self, units: Units) -> Result<Option<f64>> {
        let (si_name, si) = self.si;
        let dl_name = dimless_key(si_name);
        let (value, wrong) = match units {
            Units::Si => (si.map(|v| v * self.scale), self.dimless.map(|_| dl_name)),
            Units::Dimensionless => (self.dimless, si.map(|_| si_name.to_string())),
        };
        if let Some(key) = wrong {
            let want = match units {
                Units::Si => "si",
                Units::Dimensionless => "dimensionless",
            };
            return Err(Error::validation(
                format!("{}.{key}", self.path),
                format!("key does not match `units = {want}`"),
            ));
        }
        if let Some(v) = value {
            if !v.is_finite() {
                return Err(Error::validation(format!("{}.{si_name}", self.path), "must be finite"));
            }
        }
        Ok(value)
    }

    fn require(&self, units: Units) -> Result<f64> {
        self.get(units)?.ok_or_else(|| {
            let key = match units {
                Units::Si => self.si.0.to_string(),
                Units::Dimensionless => dimless_key(self.si.0),
            };
            Error::validation(format!("{}.{key}", self.path), "missing field")
        })
    }
}

fn q<'a>(path: &str, si_name: &'a str, si: Option<f64>, dimless: Option<f64>, scale: f64) -> Quantity<'a> {
    Quantity {
        path: path.to_string(),
        si: (si_name, si),
        dimless,
        scale,
    }
}

const US: f64 = 1e-6;
const MHZ: f64 = 2.0 * PI * 1e6;
const KHZ: f64 = 2.0 * PI * 1e3;

fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::validation(name, "missing section"))
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::validation(path, format!("must be positive, got {v}")))
    }
}

/// Medium parameters; `g2n` may be omitted when the job does not use it.
fn medium(raw: &RawConfig, need_g2n: bool) -> Result<MediumParams> {
    let m = section(&raw.medium, "medium")?;
    let u = raw.units;
    let d = positive("medium.optical_depth_dimless", m.optical_depth_dimless)?;
    let (length, c) = match u {
        Units::Si => (
            positive("medium.length_m", m.length_m.ok_or_else(|| Error::validation("medium.length_m", "missing field"))?)?,
            SPEED_OF_LIGHT,
        ),
        Units::Dimensionless => {
            if m.length_m.is_some() {
                return Err(Error::validation("medium.length_m", "key does not match `units = dimensionless`"));
            }
            (1.0, 1.0)
        }
    };
    let g2n_q = q("medium", "g2n_per_s2", m.g2n_per_s2, m.g2n_dimless, 1.0);
    let g2n_path = format!("medium.{}", if u == Units::Si { "g2n_per_s2".to_string() } else { dimless_key("g2n_per_s2") });
    let g2n = match g2n_q.get(u)? {
        Some(v) => positive(&g2n_path, v)?,
        None if need_g2n => return Err(Error::validation(g2n_path, "missing field")),
        None => 1.0,
    };
    let gamma_s = q("medium", "gamma_s_kHz", m.gamma_s_kHz, m.gamma_s_dimless, KHZ).get(u)?.unwrap_or(0.0);
    let params = MediumParams {
        xi: d / length,
        g2n,
        c,
        length,
        gamma_s,
    };
    params.validate()?;
    Ok(params)
}

fn dynamics_job(raw: &RawConfig) -> Result<DynamicsJob> {
    let u = raw.units;
    let medium = medium(raw, true)?;
    let s = section(&raw.schedule, "schedule")?;
    let ramp = q("schedule", "ramp_us", s.ramp_us, s.ramp_dimless, US).get(u)?.unwrap_or(0.0);
    if s.stages.is_empty() {
        return Err(Error::validation("schedule.stages", "need at least one stage"));
    }
    let mut segments = Vec::new();
    let mut t = 0.0;
    for (i, st) in s.stages.iter().enumerate() {
        let path = format!("schedule.stages[{i}]");
        if segments.iter().any(|seg: &Segment| seg.name == st.name) {
            return Err(Error::validation(format!("{path}.name"), "stage names must be unique"));
        }
        let duration = q(&path, "duration_us", st.duration_us, st.duration_dimless, US).require(u)?;
        if duration == 0.0 {
            // Zero-length stages are skipped, so a sweep may include t = 0.
            continue;
        }
        if !(duration > 0.0) {
            return Err(Error::validation(format!("{path}.duration"), "must not be negative"));
        }
        let omega_plus = q(&path, "omega_plus_MHz", st.omega_plus_MHz, st.omega_plus_dimless, MHZ).get(u)?.unwrap_or(0.0);
        let omega_minus = q(&path, "omega_minus_MHz", st.omega_minus_MHz, st.omega_minus_dimless, MHZ).get(u)?.unwrap_or(0.0);
        segments.push(Segment {
            name: st.name.clone(),
            start: t,
            end: t + duration,
            omega_plus,
            omega_minus,
        });
        t += duration;
    }
    if segments.is_empty() {
        return Err(Error::validation("schedule.stages", "all stages have zero duration"));
    }
    let schedule = ControlSchedule::new(segments, ramp).map_err(|e| match e {
        Error::Validation { path, message } => Error::validation(path.replace("segments", "stages"), message),
        other => other,
    })?;

    let i = section(&raw.input, "input")?;
    let input = SignalInput {
        amplitude: Complex64::from_polar(i.amplitude_dimless, i.phase_rad),
        t0: q("input", "t0_us", i.t0_us, i.t0_dimless, US).require(u)?,
        sigma_t: positive("input.sigma_t", q("input", "sigma_t_us", i.sigma_t_us, i.sigma_t_dimless, US).require(u)?)?,
        port: i.port,
    };
    input.validate()?;

    let g = section(&raw.grid, "grid")?;
    let grid = Grid {
        nz: g.nz,
        dt: q("grid", "dt_us", g.dt_us, g.dt_dimless, US).get(u)?,
    };
    grid.validate()?;

    let o = &raw.output;
    let options = ProtocolOptions {
        n_records: o.n_records,
        n_snapshots: o.n_snapshots,
        snapshot_z_stride: o.snapshot_z_stride,
        safety: o.safety,
    };
    if options.n_records == 0 || options.n_snapshots == 0 {
        return Err(Error::validation("output", "n_records and n_snapshots must be positive"));
    }
    if !(options.safety > 0.0 && options.safety <= 1.0) {
        return Err(Error::validation("output.safety", "must lie in (0, 1]"));
    }
    Ok(DynamicsJob {
        medium,
        schedule,
        input,
        grid,
        options,
        snapshots: o.snapshots,
    })
}

fn linspace(min: f64, max: f64, n: usize, path: &str) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::validation(path, "need at least one point"));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    if !(max > min) {
        return Err(Error::validation(path, "range maximum must exceed the minimum"));
    }
    Ok((0..n).map(|j| min + (max - min) * j as f64 / (n - 1) as f64).collect())
}

fn dispersion_job(raw: &RawConfig) -> Result<DispersionJob> {
    let u = raw.units;
    let medium = medium(raw, false)?;
    let d = section(&raw.dispersion, "dispersion")?;
    let alphas = Alphas::from_plus(d.alpha_plus_dimless)
        .map_err(|e| Error::validation("dispersion.alpha_plus_dimless", e.to_string()))?;
    let k_min = q("dispersion", "k_min_per_m", d.k_min_per_m, d.k_min_dimless, 1.0).require(u)?;
    let k_max = q("dispersion", "k_max_per_m", d.k_max_per_m, d.k_max_dimless, 1.0).require(u)?;
    Ok(DispersionJob {
        alphas,
        xi: medium.xi,
        c: medium.c,
        k: linspace(k_min, k_max, d.n_k, "dispersion.n_k")?,
    })
}

fn spectrum_job(raw: &RawConfig) -> Result<SpectrumJob> {
    let u = raw.units;
    let medium = medium(raw, false)?;
    let s = section(&raw.spectrum, "spectrum")?;
    let gamma_e = q("spectrum", "gamma_e_MHz", s.gamma_e_MHz, s.gamma_e_dimless, MHZ).get(u)?;
    let gamma_e = match (gamma_e, u) {
        (Some(g), _) => g,
        (None, Units::Si) => RB_D1_GAMMA_E,
        (None, Units::Dimensionless) => return Err(Error::validation("spectrum.gamma_e_dimless", "missing field")),
    };
    let wavelength = match (q("spectrum", "wavelength_m", s.wavelength_m, s.wavelength_dimless, 1.0).get(u)?, u) {
        (Some(w), _) => w,
        (None, Units::Si) => RB_D1_WAVELENGTH,
        (None, Units::Dimensionless) => RB_D1_WAVELENGTH / 0.04,
    };
    let atom = AtomParams {
        gamma_e,
        gamma_s: medium.gamma_s,
        d: medium.optical_depth(),
        length: medium.length,
        wavelength,
    };
    atom.validate()?;
    let control = StandingWaveControl {
        omega_plus: q("spectrum", "omega_plus_MHz", s.omega_plus_MHz, s.omega_plus_dimless, MHZ).require(u)?,
        omega_minus: q("spectrum", "omega_minus_MHz", s.omega_minus_MHz, s.omega_minus_dimless, MHZ).require(u)?,
        phi: s.phi_rad,
        delta_beta: q("spectrum", "delta_beta_per_m", s.delta_beta_per_m, s.delta_beta_dimless, 1.0).get(u)?.unwrap_or(0.0),
    };
    control.validate()?;
    let lo = q("spectrum", "detuning_min_MHz", s.detuning_min_MHz, s.detuning_min_dimless, MHZ).require(u)?;
    let hi = q("spectrum", "detuning_max_MHz", s.detuning_max_MHz, s.detuning_max_dimless, MHZ).require(u)?;
    if s.harmonics == 0 {
        return Err(Error::validation("spectrum.harmonics", "truncation order must be >= 1"));
    }
    Ok(SpectrumJob {
        atom,
        control,
        detunings: linspace(lo, hi, s.n_detunings, "spectrum.n_detunings")?,
        options: SpectrumOptions {
            harmonics: s.harmonics,
            compare_order: (s.compare_order > 0).then_some(s.compare_order),
        },
    })
}

/// Replaces the value at a dot-separated path. Array elements are selected
/// by index or by their `name` field. The final key must already exist.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<()> {
    let err = || Error::validation("sweep.parameter", format!("`{path}` does not name an existing config entry"));
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => map.get_mut(*part).ok_or_else(err)?,
            Value::Array(items) => {
                let idx = match part.parse::<usize>() {
                    Ok(n) => n,
                    Err(_) => items
                        .iter()
                        .position(|v| v.get("name").and_then(Value::as_str) == Some(part))
                        .ok_or_else(err)?,
                };
                items.get_mut(idx).ok_or_else(err)?
            }
            _ => return Err(err()),
        };
        if last {
            *cur = new;
            return Ok(());
        }
    }
    Err(err())
}

fn sweep_job(raw: &RawConfig, merged: &Value) -> Result<SweepJob> {
    let s = section(&raw.sweep, "sweep")?;
    if s.values.is_empty() {
        return Err(Error::validation("sweep.values", "need at least one value"));
    }
    let mut base = merged.clone();
    let obj = base.as_object_mut().expect("config root is an object");
    obj.remove("sweep");
    obj.insert("mode".into(), Value::String("dynamics".into()));
    let mut runs = Vec::with_capacity(s.values.len());
    for (i, v) in s.values.iter().enumerate() {
        let number = serde_json::Number::from_f64(*v)
            .ok_or_else(|| Error::validation(format!("sweep.values[{i}]"), "must be finite"))?;
        let mut run = base.clone();
        set_path(&mut run, &s.parameter, Value::Number(number))?;
        let raw_run = deserialize(&run)?;
        let job = dynamics_job(&raw_run).map_err(|e| match e {
            Error::Validation { path, message } => {
                Error::validation(format!("sweep.values[{i}] -> {path}"), message)
            }
            other => other,
        })?;
        runs.push(job);
    }
    Ok(SweepJob {
        parameter: s.parameter.clone(),
        values: s.values.clone(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> Value {
        json!({
            "mode": "dynamics",
            "medium": {"optical_depth_dimless": 50.0, "g2n_dimless": 1e4},
            "schedule": {"stages": [{"name": "write", "duration_dimless": 40.0, "omega_plus_dimless": 10.0}]},
            "input": {"t0_dimless": 10.0, "sigma_t_dimless": 2.0},
            "grid": {"nz": 101}
        })
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_value(minimal(), None).unwrap();
        let Job::Dynamics(job) = cfg.job else { panic!() };
        assert_eq!(job.medium.gamma_s, 0.0);
        assert_eq!(job.input.port, Port::Forward);
        assert_eq!(job.options, ProtocolOptions::default());
        assert_eq!(cfg.stem, "run");
    }

    #[test]
    fn every_preset_parses() {
        for (name, _) in PRESETS {
            let cfg = preset_config(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.preset.as_deref(), Some(name));
            assert!(cfg.caption.is_some());
        }
    }

    #[test]
    fn preset_with_override() {
        let cfg = parse_value(json!({"preset": "fig1c", "medium": {"gamma_s_dimless": 0.01}}), None).unwrap();
        let Job::Dynamics(job) = cfg.job else { panic!() };
        assert_eq!(job.medium.gamma_s, 0.01);
        assert_eq!(job.medium.xi, preset_dynamics("fig1c").medium.xi);
    }

    fn preset_dynamics(name: &str) -> DynamicsJob {
        match preset_config(name).unwrap().job {
            Job::Dynamics(j) => j,
            _ => panic!(),
        }
    }

    #[test]
    fn mhz_means_frequency_over_two_pi() {
        let cfg = preset_config("fig3a").unwrap();
        let raw: f64 = cfg.merged["schedule"]["stages"][0]["omega_plus_MHz"].as_f64().unwrap();
        let Job::Dynamics(job) = cfg.job else { panic!() };
        assert!((job.schedule.segments()[0].omega_plus - 2.0 * PI * 1e6 * raw).abs() < 1e-6);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut v = minimal();
        v["medium"]["xi_typo"] = json!(3.0);
        match parse_value(v, None) {
            Err(Error::Validation { path, .. }) => assert!(path.contains("medium"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_physical_value_is_rejected() {
        let mut v = minimal();
        v["medium"]["optical_depth_dimless"] = json!(-1.0);
        match parse_value(v, None) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "medium.optical_depth_dimless"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_unit_system_is_rejected() {
        let mut v = minimal();
        v["schedule"]["stages"][0]["omega_minus_MHz"] = json!(3.0);
        match parse_value(v, None) {
            Err(Error::Validation { path, message }) => {
                assert_eq!(path, "schedule.stages[0].omega_minus_MHz");
                assert!(message.contains("dimensionless"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let mut v = minimal();
        v["input"].as_object_mut().unwrap().remove("t0_dimless");
        match parse_value(v, None) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "input.t0_dimless"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_expands_in_declared_order() {
        let cfg = preset_config("fig3c").unwrap();
        let Job::Sweep(sweep) = cfg.job else { panic!() };
        assert_eq!(sweep.values.len(), sweep.runs.len());
        let holds: Vec<f64> = sweep
            .runs
            .iter()
            .map(|r| {
                r.schedule
                    .segments()
                    .iter()
                    .find(|s| s.name == "hold")
                    .map_or(0.0, |s| (s.end - s.start) / 1e-6)
            })
            .collect();
        for (h, v) in holds.iter().zip(&sweep.values) {
            assert!((h - v).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_path_must_exist() {
        let mut v = minimal();
        v["mode"] = json!("sweep");
        v["sweep"] = json!({"parameter": "schedule.stages.hold.duration_dimless", "values": [1.0]});
        match parse_value(v, None) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "sweep.parameter"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_value(minimal(), None).unwrap().hash();
        assert_eq!(a, parse_value(minimal(), None).unwrap().hash());
        let mut v = minimal();
        v["grid"]["nz"] = json!(102);
        assert_ne!(a, parse_value(v, None).unwrap().hash());
    }
}
