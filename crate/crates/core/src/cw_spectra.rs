//! Steady-state transmission and reflection of a weak signal through an EIT
//! medium dressed by counter-propagating control beams.
//!
//! The standing-wave control intensity
//! `Ω²(z) = Ω₊² + Ω₋² + 2Ω₊Ω₋ cos(2k_c z + φ)` turns the local Λ-system
//! attenuation into a periodic absorption grating. Its Fourier harmonics
//! couple the forward and backward signal envelopes:
//!
//! ```text
//! dE₊/dz = −Λ₀E₊ − Λ₊₁E₋ e^{+iΔβz}
//! dE₋/dz = +Λ₀E₋ + Λ₋₁E₊ e^{−iΔβz}
//! ```
//!
//! solved with `E₊(0) = 1`, `E₋(L) = 0` through the closed-form 2×2 matrix
//! exponential. Higher truncation orders add the non-phase-matched space
//! harmonics `k_s − 2mk_c` and eliminate them adiabatically, which
//! renormalises the 2×2 coupling matrix.
//!
//! Rates are angular frequencies (rad/s); lengths share one unit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rubidium D1 optical wavelength, m.
pub const RB_D1_WAVELENGTH: f64 = 794.979e-9;

/// Optical-coherence decay of the Rb D1 line, `Γ/2` with `Γ/2π = 5.746 MHz`.
pub const RB_D1_GAMMA_E: f64 = std::f64::consts::PI * 5.746e6;

const QUAD_START: usize = 64;
const QUAD_CAP: usize = 1 << 22;
const QUAD_TOL: f64 = 1e-12;
const QUAD_ACCEPT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    /// Optical coherence decay rate.
    pub gamma_e: f64,
    /// Spin decoherence rate.
    pub gamma_s: f64,
    /// Resonant optical depth (intensity convention).
    pub d: f64,
    pub length: f64,
    /// Optical wavelength; only the higher-order harmonic corrections use it.
    pub wavelength: f64,
}

impl AtomParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("gamma_e", self.gamma_e > 0.0),
            ("gamma_s", self.gamma_s >= 0.0),
            ("d", self.d > 0.0),
            ("length", self.length > 0.0),
            ("wavelength", self.wavelength > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::validation(format!("atom.{name}"), "out of range"));
            }
        }
        Ok(())
    }

    /// Control wavenumber `k_c = 2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandingWaveControl {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Relative phase of the standing wave.
    pub phi: f64,
    /// Residual wavevector mismatch of the Bragg condition, 1/length.
    pub delta_beta: f64,
}

impl StandingWaveControl {
    pub fn new(omega_plus: f64, omega_minus: f64) -> Self {
        StandingWaveControl {
            omega_plus,
            omega_minus,
            phi: 0.0,
            delta_beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_plus >= 0.0 && self.omega_minus >= 0.0) {
            return Err(Error::validation("control", "Rabi frequencies must be >= 0"));
        }
        Ok(())
    }
}

/// Amplitude attenuation per unit length of a three-level Λ medium at
/// signal detuning `delta` and local control intensity `omega_sq`:
///
/// `Λ = (d/2L) γ_e (γ_s − iδ) / [(γ_e − iδ)(γ_s − iδ) + Ω²]`
pub fn eit_attenuation(delta: f64, omega_sq: f64, atom: &AtomParams) -> Complex64 {
    let i = Complex64::i();
    let spin = atom.gamma_s - i * delta;
    let optical = atom.gamma_e - i * delta;
    atom.d / (2.0 * atom.length) * atom.gamma_e * spin / (optical * spin + omega_sq)
}

/// Fourier harmonics `Λ_n`, `n = −order..=order`, of the absorption grating.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonics {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl Harmonics {
    /// First-order grating with given `Λ₀`, `Λ₊₁`, `Λ₋₁`.
    pub fn from_leading(l0: Complex64, lp: Complex64, lm: Complex64) -> Self {
        Harmonics {
            order: 1,
            coeffs: vec![lm, l0, lp],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `Λ_n`; zero beyond the computed order.
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.order {
            return Complex64::default();
        }
        self.coeffs[(n + self.order as i64) as usize]
    }

    /// `(Λ₀, Λ₊₁, Λ₋₁)`
    pub fn leading(&self) -> (Complex64, Complex64, Complex64) {
        (self.get(0), self.get(1), self.get(-1))
    }
}

/// Grating harmonics by periodic trapezoid quadrature over one period,
/// refined by doubling until converged.
pub fn grating_harmonics(
    delta: f64,
    control: &StandingWaveControl,
    atom: &AtomParams,
    order: usize,
) -> Result<Harmonics> {
    let n_coeffs = 2 * order + 1;
    let base = control.omega_plus.powi(2) + control.omega_minus.powi(2);
    let modulation = 2.0 * control.omega_plus * control.omega_minus;
    if modulation == 0.0 {
        let mut coeffs = vec![Complex64::default(); n_coeffs];
        coeffs[order] = eit_attenuation(delta, base, atom);
        return Ok(Harmonics { order, coeffs });
    }

    let sample = |theta: f64| eit_attenuation(delta, base + modulation * (theta + control.phi).cos(), atom);
    // Sums Σ f(θ_j) e^{−inθ_j} over the current node set.
    let mut sums = vec![Complex64::default(); n_coeffs];
    let mut scale = 0.0;
    let add = |sums: &mut [Complex64], scale: &mut f64, theta: f64| {
        let f = sample(theta);
        *scale += f.norm();
        for (idx, s) in sums.iter_mut().enumerate() {
            let n = idx as f64 - order as f64;
            *s += f * Complex64::from_polar(1.0, -n * theta);
        }
    };

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut m = QUAD_START;
    for j in 0..m {
        add(&mut sums, &mut scale, two_pi * j as f64 / m as f64);
    }
    let mut estimate: Vec<Complex64> = sums.iter().map(|s| s / m as f64).collect();
    loop {
        for j in 0..m {
            add(&mut sums, &mut scale, two_pi * (j as f64 + 0.5) / m as f64);
        }
        m *= 2;
        let next: Vec<Complex64> = sums.iter().map(|s| s / m as f64).collect();
        let mean_abs = scale / m as f64;
        let change = next
            .iter()
            .zip(&estimate)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        estimate = next;
        if change <= QUAD_TOL * mean_abs {
            break;
        }
        if m >= QUAD_CAP {
            if change <= QUAD_ACCEPT * mean_abs {
                break;
            }
            return Err(Error::Numerical(format!(
                "grating quadrature did not converge at detuning {delta:.6e} rad/s (relative change {:.2e})",
                change / mean_abs
            )));
        }
    }
    Ok(Harmonics {
        order,
        coeffs: estimate,
    })
}

/// Amplitude reflection and transmission of the constant-coefficient
/// two-mode system `d/dz (E₊, F₋) = M (E₊, F₋)` over length `length`,
/// with `E₊(0) = 1`, `F₋(L) = 0`.
fn two_mode_solve(m: [[Complex64; 2]; 2], length: f64) -> Option<(Complex64, Complex64)> {
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    let n11 = m[0][0] - half_trace;
    let n22 = m[1][1] - half_trace;
    let n21 = m[1][0];
    let q = (n11 * n11 + m[0][1] * n21).sqrt();
    let x = q * length;
    // tanh(qL)/q and 1/cosh(qL), stable for large Re(qL) ≥ 0.
    let (tanh_over_q, sech) = if x.norm() < 1e-6 {
        (length * (1.0 - x * x / 3.0), 1.0 - x * x / 2.0)
    } else {
        let e = (-2.0 * x).exp();
        ((1.0 - e) / (1.0 + e) / q, 2.0 * (-x).exp() / (1.0 + e))
    };
    let denom = 1.0 + n22 * tanh_over_q;
    if denom.norm() < 1e-300 || !denom.re.is_finite() {
        return None;
    }
    let r = -n21 * tanh_over_q / denom;
    let t = (half_trace * length).exp() * sech / denom;
    Some((r, t))
}

/// Mode index list `−(order−1)..=order`; 0 is the forward and 1 the
/// backward phase-matched wave.
fn modes(order: usize) -> Vec<i64> {
    (-(order as i64 - 1)..=order as i64).collect()
}

/// Effective 2×2 coupling matrix at the given truncation order.
fn coupling_matrix(
    harmonics: &Harmonics,
    order: usize,
    control: &StandingWaveControl,
    atom: &AtomParams,
) -> Result<[[Complex64; 2]; 2]> {
    let i = Complex64::i();
    let lam = |n: i64| {
        if n.unsigned_abs() as usize > order {
            Complex64::default()
        } else {
            harmonics.get(n)
        }
    };
    let kc = atom.wavenumber();
    // Entry of A' = M A for mode m' driven by mode m.
    let entry = |row: i64, col: i64| -> Complex64 {
        let sign = 1.0 / (1.0 - 2.0 * row as f64);
        let mut v = -lam(col - row) * sign;
        if row == col {
            if row == 1 {
                v += i * control.delta_beta;
            } else if row != 0 {
                let r = row as f64;
                v += i * 2.0 * kc * r * (1.0 - r) / (1.0 - 2.0 * r);
            }
        }
        v
    };
    let mut pp = [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]];
    if order <= 1 {
        return Ok(pp);
    }
    let q: Vec<i64> = modes(order).into_iter().filter(|&m| m != 0 && m != 1).collect();
    let nq = q.len();
    let mqq = DMatrix::from_fn(nq, nq, |a, b| entry(q[a], q[b]));
    let mqp = DMatrix::from_fn(nq, 2, |a, b| entry(q[a], b as i64));
    let mpq = DMatrix::from_fn(2, nq, |a, b| entry(a as i64, q[b]));
    let solved = mqq
        .lu()
        .solve(&mqp)
        .ok_or_else(|| Error::Numerical("singular off-resonant mode block".into()))?;
    let correction = mpq * solved;
    for (a, row) in pp.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v -= correction[(a, b)];
        }
    }
    Ok(pp)
}

/// Amplitude reflection and transmission for given harmonics.
pub fn reflect_transmit(
    harmonics: &Harmonics,
    order: usize,
    control: &StandingWaveControl,
    atom: &AtomParams,
) -> Result<(Complex64, Complex64)> {
    if order > harmonics.order() {
        return Err(Error::Domain("truncation order exceeds the computed harmonics".into()));
    }
    let m = coupling_matrix(harmonics, order, control, atom)?;
    two_mode_solve(m, atom.length)
        .ok_or_else(|| Error::Numerical("degenerate transfer matrix".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOptions {
    /// Harmonic truncation order `N_h` (at least 1).
    pub harmonics: usize,
    /// Second order whose difference from `harmonics` is reported.
    pub compare_order: Option<usize>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            harmonics: 1,
            compare_order: Some(3),
        }
    }
}

/// Largest spectrum change between two truncation orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub order: usize,
    pub compare_order: usize,
    pub max_abs_delta_t: f64,
    pub max_abs_delta_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub detunings: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// Transmission with the backward control off.
    pub t_bd_off: Vec<f64>,
    pub truncation: Option<TruncationReport>,
}

/// Transmission, reflection and absorption at every detuning, in input
/// order.
pub fn transfer_spectrum(
    detunings: &[f64],
    control: &StandingWaveControl,
    atom: &AtomParams,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    atom.validate()?;
    control.validate()?;
    if options.harmonics == 0 || options.compare_order == Some(0) {
        return Err(Error::validation("spectrum.harmonics", "truncation order must be >= 1"));
    }
    let order = options.harmonics;
    let max_order = options.compare_order.unwrap_or(order).max(order);

    let rows: Vec<Result<(f64, f64, f64, Option<(f64, f64)>)>> = detunings
        .par_iter()
        .map(|&delta| {
            let harmonics = grating_harmonics(delta, control, atom, max_order)?;
            let solve = |ord: usize| -> Result<(f64, f64)> {
                let (r, t) = reflect_transmit(&harmonics, ord, control, atom).map_err(|e| match e {
                    Error::Numerical(msg) => Error::Numerical(format!("{msg} at detuning {delta:.6e} rad/s")),
                    other => other,
                })?;
                Ok((t.norm_sqr(), r.norm_sqr()))
            };
            let (t, r) = solve(order)?;
            let compare = options.compare_order.map(solve).transpose()?;
            let bare = eit_attenuation(delta, control.omega_plus.powi(2), atom);
            let t_off = (-2.0 * bare.re * atom.length).exp();
            Ok((t, r, t_off, compare))
        })
        .collect();

    let mut spectrum = Spectrum {
        detunings: detunings.to_vec(),
        t: Vec::with_capacity(detunings.len()),
        r: Vec::with_capacity(detunings.len()),
        a: Vec::with_capacity(detunings.len()),
        t_bd_off: Vec::with_capacity(detunings.len()),
        truncation: None,
    };
    let mut deltas = (0.0f64, 0.0f64);
    for row in rows {
        let (t, r, t_off, compare) = row?;
        spectrum.t.push(t);
        spectrum.r.push(r);
        spectrum.a.push(1.0 - t - r);
        spectrum.t_bd_off.push(t_off);
        if let Some((t2, r2)) = compare {
            deltas.0 = deltas.0.max((t2 - t).abs());
            deltas.1 = deltas.1.max((r2 - r).abs());
        }
    }
    if let Some(compare_order) = options.compare_order {
        spectrum.truncation = Some(TruncationReport {
            order,
            compare_order,
            max_abs_delta_t: deltas.0,
            max_abs_delta_r: deltas.1,
        });
    }
    Ok(spectrum)
}

/// Full width at half maximum of the peak of `values` nearest to index
/// `peak`, by linear interpolation on `x`. `None` when a half-maximum
/// crossing lies outside the sampled range.
pub fn peak_width(x: &[f64], values: &[f64], peak: usize) -> Option<f64> {
    let half = 0.5 * values[peak];
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (values[a], values[b]);
        x[a] + (half - ya) * (x[b] - x[a]) / (yb - ya)
    };
    let mut left = None;
    for j in (0..peak).rev() {
        if values[j] <= half {
            left = Some(cross(j, j + 1));
            break;
        }
    }
    let mut right = None;
    for j in peak + 1..values.len() {
        if values[j] <= half {
            right = Some(cross(j - 1, j));
            break;
        }
    }
    Some(right? - left?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(d: f64, gamma_s: f64) -> AtomParams {
        AtomParams {
            gamma_e: 1.0,
            gamma_s,
            d,
            length: 1.0,
            wavelength: 1e-3,
        }
    }

    #[test]
    fn attenuation_examples() {
        let bare = eit_attenuation(0.0, 0.0, &atom(15.0, 1e-3));
        let a = atom(15.0, 0.0);
        assert!((bare - Complex64::new(7.5, 0.0)).norm() < 1e-14);
        assert!(((-2.0 * bare.re).exp() - (-15f64).exp()).abs() < 1e-20);
        assert_eq!(eit_attenuation(0.0, 4.0, &a).norm(), 0.0);
        assert!(eit_attenuation(1e9, 4.0, &a).norm() < 1e-7);
    }

    #[test]
    fn single_beam_has_no_grating() {
        let a = atom(15.0, 1e-3);
        let c = StandingWaveControl::new(2.0, 0.0);
        let h = grating_harmonics(0.3, &c, &a, 3).unwrap();
        let (l0, lp, lm) = h.leading();
        assert_eq!((lp, lm), (Complex64::default(), Complex64::default()));
        assert!((l0 - eit_attenuation(0.3, 4.0, &a)).norm() < 1e-15);
    }

    /// Midpoint rule on 2^21 points as an independent oracle.
    fn brute_force_harmonic(n: i64, delta: f64, c: &StandingWaveControl, a: &AtomParams) -> Complex64 {
        let m = 1usize << 21;
        let two_pi = 2.0 * std::f64::consts::PI;
        let base = c.omega_plus.powi(2) + c.omega_minus.powi(2);
        let modulation = 2.0 * c.omega_plus * c.omega_minus;
        (0..m)
            .map(|j| {
                let theta = two_pi * (j as f64 + 0.5) / m as f64;
                eit_attenuation(delta, base + modulation * (theta + c.phi).cos(), a)
                    * Complex64::from_polar(1.0, -(n as f64) * theta)
            })
            .sum::<Complex64>()
            / m as f64
    }

    #[test]
    fn balanced_grating_absorbs_at_nodes() {
        let a = atom(15.0, 1e-3);
        let c = StandingWaveControl::new(2.0, 2.0);
        let h = grating_harmonics(0.0, &c, &a, 1).unwrap();
        let (l0, lp, lm) = h.leading();
        assert!(l0.re > 0.0);
        for (n, v) in [(0, l0), (1, lp), (-1, lm)] {
            let oracle = brute_force_harmonic(n, 0.0, &c, &a);
            assert!((v - oracle).norm() <= 1e-8 * oracle.norm(), "n={n}: {v} vs {oracle}");
        }
        assert!((lp - lm).norm() <= 1e-12 * lp.norm());
    }

    #[test]
    fn harmonic_magnitude_independent_of_phase() {
        let a = atom(15.0, 1e-2);
        let mut c = StandingWaveControl::new(1.5, 1.0);
        let h0 = grating_harmonics(0.4, &c, &a, 2).unwrap();
        c.phi = std::f64::consts::FRAC_PI_2;
        let h1 = grating_harmonics(0.4, &c, &a, 2).unwrap();
        for n in -2..=2 {
            assert!((h0.get(n).norm() - h1.get(n).norm()).abs() < 1e-10);
            // Λ_n(φ) = e^{inφ} Λ_n(0)
            let rotated = h0.get(n) * Complex64::from_polar(1.0, n as f64 * c.phi);
            assert!((rotated - h1.get(n)).norm() < 1e-10);
        }
    }

    fn fixed(l0: Complex64, lp: Complex64, lm: Complex64) -> Harmonics {
        Harmonics::from_leading(l0, lp, lm)
    }

    #[test]
    fn decoupled_modes_transmit_exponentially() {
        let a = atom(15.0, 0.0);
        let c = StandingWaveControl::new(1.0, 1.0);
        let l0 = Complex64::new(0.7, -0.2);
        let (r, t) = reflect_transmit(&fixed(l0, Complex64::default(), Complex64::default()), 1, &c, &a).unwrap();
        assert_eq!(r.norm(), 0.0);
        assert!((t.norm_sqr() - (-2.0 * 0.7f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn lossless_grating_matches_tanh() {
        for kappa_l in [0.1, 1.0, 2.5, 8.0] {
            let a = AtomParams {
                length: 2.0,
                ..atom(15.0, 0.0)
            };
            let kappa = kappa_l / a.length;
            let ik = Complex64::new(0.0, kappa);
            let c = StandingWaveControl::new(1.0, 1.0);
            let (r, t) = reflect_transmit(&fixed(Complex64::default(), ik, ik), 1, &c, &a).unwrap();
            let expected = kappa_l.tanh().powi(2);
            assert!((r.norm_sqr() - expected).abs() < 1e-12);
            assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    /// RK4 shooting on the coupled-mode equations in the original
    /// (phase-carrying) basis, 20000 steps.
    fn shooting_oracle(h: &Harmonics, dbeta: f64, length: f64) -> (Complex64, Complex64) {
        let (l0, lp, lm) = h.leading();
        let rhs = |z: f64, e: [Complex64; 2]| {
            let ph = Complex64::from_polar(1.0, dbeta * z);
            [-l0 * e[0] - lp * ph * e[1], l0 * e[1] + lm * ph.conj() * e[0]]
        };
        let shoot = |start: [Complex64; 2]| {
            let n = 20_000;
            let dz = length / n as f64;
            let mut e = start;
            for k in 0..n {
                let z = k as f64 * dz;
                let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
                let k1 = rhs(z, e);
                let k2 = rhs(z + dz / 2.0, add(e, k1, dz / 2.0));
                let k3 = rhs(z + dz / 2.0, add(e, k2, dz / 2.0));
                let k4 = rhs(z + dz, add(e, k3, dz));
                for c in 0..2 {
                    e[c] += dz / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
            }
            e
        };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let a = shoot([one, zero]);
        let b = shoot([zero, one]);
        let r = -a[1] / b[1];
        (r, a[0] + b[0] * r)
    }

    #[test]
    fn closed_form_matches_shooting() {
        let a = AtomParams {
            length: 1.0,
            ..atom(15.0, 1e-3)
        };
        for (delta, wp, wm, dbeta) in [(0.0, 2.0, 2.0, 0.0), (0.8, 2.0, 1.5, 0.7), (-2.5, 3.0, 3.0, -1.2), (4.0, 1.0, 2.0, 3.0)] {
            let mut c = StandingWaveControl::new(wp, wm);
            c.delta_beta = dbeta;
            let h = grating_harmonics(delta, &c, &a, 1).unwrap();
            let (r, t) = reflect_transmit(&h, 1, &c, &a).unwrap();
            let (r_ref, t_ref) = shooting_oracle(&h, dbeta, a.length);
            assert!((r - r_ref).norm() < 1e-9, "r {r} vs {r_ref}");
            assert!((t - t_ref).norm() < 1e-9, "t {t} vs {t_ref}");
        }
    }

    #[test]
    fn higher_orders_are_small_for_short_wavelength() {
        let om = 2.0 * std::f64::consts::PI * 15e6;
        let a = AtomParams {
            gamma_e: RB_D1_GAMMA_E,
            gamma_s: 2.0 * std::f64::consts::PI * 3e3,
            d: 15.0,
            length: 0.04,
            wavelength: RB_D1_WAVELENGTH,
        };
        let c = StandingWaveControl::new(om, om);
        let det: Vec<f64> = (-10..=10).map(|j| 2.0 * std::f64::consts::PI * 3e6 * j as f64).collect();
        let s = transfer_spectrum(&det, &c, &a, &SpectrumOptions::default()).unwrap();
        let report = s.truncation.unwrap();
        assert!(report.max_abs_delta_t < 1e-4 && report.max_abs_delta_r < 1e-4);
        // A grating period comparable to the absorption length breaks the
        // two-mode picture.
        let coarse = AtomParams { wavelength: 0.01, ..a };
        let s = transfer_spectrum(&det, &c, &coarse, &SpectrumOptions::default()).unwrap();
        assert!(s.truncation.unwrap().max_abs_delta_t > report.max_abs_delta_t);
    }

    #[test]
    fn peak_width_of_triangle() {
        let x: Vec<f64> = (0..=20).map(|j| j as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (10.0 - (v - 10.0).abs()).max(0.0)).collect();
        assert!((peak_width(&x, &y, 10).unwrap() - 10.0).abs() < 1e-12);
        let flat = vec![1.0; 21];
        assert!(peak_width(&x, &flat, 10).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn passive_medium(
            delta in -20.0f64..20.0, wp in 0.0f64..5.0, wm in 0.0f64..5.0,
            gamma_s in 0.0f64..0.1, d in 0.5f64..40.0, dbeta in -3.0f64..3.0,
        ) {
            let a = atom(d, gamma_s);
            prop_assume!(gamma_s > 0.0 || delta.abs() > 1e-3 || wp * wm == 0.0);
            prop_assert!(eit_attenuation(delta, wp * wp, &a).re >= 0.0);
            let mut c = StandingWaveControl::new(wp, wm);
            c.delta_beta = dbeta;
            let opts = SpectrumOptions { harmonics: 1, compare_order: None };
            let s = transfer_spectrum(&[delta], &c, &a, &opts).unwrap();
            prop_assert!(s.t[0] + s.r[0] <= 1.0 + 1e-9);
            prop_assert!(s.a[0] >= -1e-9);
        }

        #[test]
        fn beam_exchange_leaves_spectrum_unchanged(delta in -10.0f64..10.0, wp in 0.1f64..4.0, wm in 0.1f64..4.0) {
            let a = atom(15.0, 1e-2);
            let opts = SpectrumOptions { harmonics: 1, compare_order: None };
            let s1 = transfer_spectrum(&[delta], &StandingWaveControl::new(wp, wm), &a, &opts).unwrap();
            let s2 = transfer_spectrum(&[delta], &StandingWaveControl::new(wm, wp), &a, &opts).unwrap();
            prop_assert!((s1.t[0] - s2.t[0]).abs() <= 1e-12);
            prop_assert!((s1.r[0] - s2.r[0]).abs() <= 1e-12);
        }
    }
}
