//! Executes a validated config and writes its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Job, Mode, RunConfig, SweepJob};
use crate::cw_spectra::{transfer_spectrum, TruncationReport};
use crate::dispersion::dispersion_point;
use crate::dynamics::{run_protocol_with, Trajectory};
use crate::error::{Error, Result};
use crate::output;

/// Summary of a completed run, written next to the data as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub mode: Mode,
    pub preset: Option<String>,
    pub caption: Option<String>,
    /// SHA-256 of the canonical merged config.
    pub config_sha256: String,
    /// Data files, relative to the output directory. The manifest itself is
    /// listed last.
    pub files: Vec<String>,
    pub wall_time_s: f64,
    pub threads: usize,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
    pub truncation: Option<TruncationReport>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for spectra and sweeps; `None` uses all cores.
    pub threads: Option<usize>,
    /// Reserved: every solver is deterministic.
    pub seed: Option<u64>,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
    names: Vec<String>,
}

impl Artifacts {
    fn write(&mut self, name: String, contents: &str) -> Result<()> {
        let path = self.dir.join(&name);
        self.written.push(path.clone());
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.names.push(name);
        Ok(())
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Runs the config, writing CSV artifacts and `<stem>_manifest.json` into
/// `out_dir`. On failure every file written so far is removed.
pub fn run(config: &RunConfig, out_dir: &Path, options: &RunOptions) -> Result<RunManifest> {
    let started = Instant::now();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.threads {
        if n == 0 {
            return Err(Error::validation("--threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();

    let mut artifacts = Artifacts {
        dir: out_dir.to_path_buf(),
        written: Vec::new(),
        names: Vec::new(),
    };
    let result = pool.install(|| execute(config, &mut artifacts));
    let (warnings, truncation) = match result {
        Ok(v) => v,
        Err(e) => {
            artifacts.discard();
            return Err(e);
        }
    };

    let manifest_name = format!("{}_manifest.json", config.stem);
    let mut files = artifacts.names.clone();
    files.push(manifest_name.clone());
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        mode: config.mode,
        preset: config.preset.clone(),
        caption: config.caption.clone(),
        config_sha256: config.hash(),
        files,
        wall_time_s: started.elapsed().as_secs_f64(),
        threads,
        seed: options.seed,
        warnings,
        truncation,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = artifacts.write(manifest_name, &text) {
        artifacts.discard();
        return Err(e);
    }
    Ok(manifest)
}

type Extras = (Vec<String>, Option<TruncationReport>);

fn execute(config: &RunConfig, artifacts: &mut Artifacts) -> Result<Extras> {
    let stem = &config.stem;
    match &config.job {
        Job::Dynamics(job) => {
            let traj = run_protocol_with(&job.medium, &job.schedule, &job.input, &job.grid, &job.options)?;
            artifacts.write(format!("{stem}_trajectory.csv"), &output::trajectory_csv(&traj))?;
            artifacts.write(format!("{stem}_stages.csv"), &output::stages_csv(&traj))?;
            if job.snapshots {
                artifacts.write(format!("{stem}_snapshots.csv"), &output::snapshots_csv(&traj))?;
            }
            Ok((traj.warnings, None))
        }
        Job::Dispersion(job) => {
            let points: Vec<_> = job.k.iter().map(|&k| dispersion_point(k, job.alphas, job.xi, job.c)).collect();
            artifacts.write(format!("{stem}_dispersion.csv"), &output::dispersion_csv(&points))?;
            Ok((Vec::new(), None))
        }
        Job::Spectrum(job) => {
            let spectrum = transfer_spectrum(&job.detunings, &job.control, &job.atom, &job.options)?;
            artifacts.write(format!("{stem}_spectrum.csv"), &output::spectrum_csv(&spectrum))?;
            Ok((Vec::new(), spectrum.truncation))
        }
        Job::Sweep(job) => {
            let trajectories = sweep_trajectories(job)?;
            let mut warnings = Vec::new();
            let mut rows = Vec::new();
            for (i, (value, traj)) in job.values.iter().zip(&trajectories).enumerate() {
                artifacts.write(format!("{stem}_{i:03}_trajectory.csv"), &output::trajectory_csv(traj))?;
                rows.push(output::SweepRow::from_trajectory(*value, traj));
                warnings.extend(traj.warnings.iter().map(|w| format!("run {i}: {w}")));
            }
            artifacts.write(format!("{stem}_sweep.csv"), &output::sweep_csv(&rows))?;
            Ok((warnings, None))
        }
    }
}

/// All sweep entries, run concurrently on the current pool, in declared
/// order.
pub fn sweep_trajectories(job: &SweepJob) -> Result<Vec<Trajectory>> {
    job.runs
        .par_iter()
        .map(|r| run_protocol_with(&r.medium, &r.schedule, &r.input, &r.grid, &r.options))
        .collect()
}
