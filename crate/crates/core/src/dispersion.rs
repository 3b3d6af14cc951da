//! Dispersion relation of the coupled polariton envelopes.
//!
//! Envelopes are expanded as `exp(i(kz + ωτ))`, `τ` being the scaled time.
//! In this convention the relation
//!
//! ```text
//! ω(k) = −ck (ξ(α₊ − α₋) − ik) / (ξ − ik(α₊ − α₋))
//! ```
//!
//! gives `ω = −ck` for a forward-only control (drift toward `+z`) and
//! `Im ω > 0` (decay) for every nonzero real `k` once both controls are on.
//! Speeds are also reported as a magnitude plus a direction, which does not
//! depend on the Fourier sign convention.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::scheme;
use crate::error::{Error, Result};
use crate::model::Alphas;

/// One evaluated point of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: Complex64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub xi: f64,
}

/// Direction of envelope drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Toward `+z`, i.e. along the forward control.
    Forward,
    Backward,
    Stationary,
}

/// Leading small-`k` behaviour: advection plus diffusion in scaled time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallK {
    /// `c|α₊ − α₋|`
    pub speed: f64,
    pub direction: Direction,
    /// `4cα₊α₋/ξ`
    pub diffusion: f64,
}

/// `ω(k)` for complex `k`. Fails at the pole `k = −iξ/(α₊ − α₋)`.
pub fn omega_of_k_complex(k: Complex64, alphas: Alphas, xi: f64, c: f64) -> Result<Complex64> {
    let i = Complex64::i();
    let imbalance = alphas.imbalance();
    let denominator = xi - i * k * imbalance;
    if denominator.norm() <= 1e-14 * xi.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "k = {k} is the pole of the dispersion relation"
        )));
    }
    Ok(-c * k * (xi * imbalance - i * k) / denominator)
}

/// `ω(k)` for real `k`; never singular.
pub fn omega_of_k(k: f64, alphas: Alphas, xi: f64, c: f64) -> Complex64 {
    let i = Complex64::i();
    let imbalance = alphas.imbalance();
    -c * k * (xi * imbalance - i * k) / (xi - i * k * imbalance)
}

pub fn dispersion_point(k: f64, alphas: Alphas, xi: f64, c: f64) -> DispersionPoint {
    DispersionPoint {
        k,
        omega: omega_of_k(k, alphas, xi, c),
        alpha_plus: alphas.plus,
        alpha_minus: alphas.minus,
        xi,
    }
}

pub fn small_k_expansion(alphas: Alphas, xi: f64, c: f64) -> Result<SmallK> {
    if !(xi > 0.0) {
        return Err(Error::Domain("xi must be positive".into()));
    }
    let imbalance = alphas.imbalance();
    let direction = if imbalance.abs() < scheme::BALANCE_EPS {
        Direction::Stationary
    } else if imbalance > 0.0 {
        Direction::Forward
    } else {
        Direction::Backward
    };
    Ok(SmallK {
        speed: c * imbalance.abs(),
        direction,
        diffusion: 4.0 * c * alphas.product() / xi,
    })
}

/// Order-of-magnitude relative spreading `δl/l ∼ cτ/(ξl²)` of a
/// stationary pulse of length `l` after scaled time `τ`.
pub fn spreading_estimate(l: f64, tau: f64, xi: f64, c: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain("pulse length must be positive".into()));
    }
    Ok(c * tau / (xi * l * l))
}

/// Plane-wave validation run on a periodic medium of unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneWaveCheck {
    /// Fitted `λ` in `S(τ) = S(0) e^{λτ}`; equals `iω` in the convention
    /// above.
    pub measured_rate: Complex64,
    /// `ω(k)` from the analytic relation.
    pub predicted_omega: Complex64,
}

impl PlaneWaveCheck {
    /// Measured decay rate `−Re λ`, to compare with `Im ω`.
    pub fn measured_decay(&self) -> f64 {
        -self.measured_rate.re
    }

    /// Measured phase speed magnitude `|Im λ / k|`.
    pub fn measured_phase_speed(&self, k: f64) -> f64 {
        (self.measured_rate.im / k).abs()
    }
}

/// Evolves `S = exp(ikz)` on a ring of `nz` nodes with the dynamics solver
/// for scaled time `tau` and fits the complex rate.
///
/// Works in internal units (`L = c = 1`, `xi` = optical depth). `k` must be
/// a multiple of `2π`.
pub fn plane_wave_check(k: f64, alphas: Alphas, xi: f64, nz: usize, tau: f64) -> Result<PlaneWaveCheck> {
    let cycles = k / (2.0 * std::f64::consts::PI);
    if (cycles - cycles.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "k = {k} is not commensurate with the periodic grid"
        )));
    }
    if nz < 16 {
        return Err(Error::Domain("need at least 16 nodes".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain("tau must be positive".into()));
    }
    let h = 1.0 / nz as f64;
    let mode: Vec<Complex64> = (0..nz)
        .map(|j| Complex64::from_polar(1.0, k * j as f64 * h))
        .collect();
    let predicted_omega = omega_of_k(k, alphas, xi, 1.0);
    if cycles.round() == 0.0 {
        return Ok(PlaneWaveCheck {
            measured_rate: Complex64::default(),
            predicted_omega,
        });
    }

    let bound = scheme::stability_bound(alphas, xi, h);
    let steps = (tau / (0.8 * bound)).ceil().max(1.0) as usize;
    let dtau = tau / steps as f64;
    let mut s = mode.clone();
    for _ in 0..steps {
        s = scheme::advance_spin_periodic(&s, alphas, xi, h, dtau)?;
    }
    // Projection onto the initial mode.
    let overlap: Complex64 = s.iter().zip(&mode).map(|(a, m)| a * m.conj()).sum::<Complex64>() / nz as f64;
    let measured_rate = overlap.ln() / tau;
    Ok(PlaneWaveCheck {
        measured_rate,
        predicted_omega,
    })
}
