//! Physical parameters, control schedules and the polariton bookkeeping
//! shared by the solvers.
//!
//! All types accept any consistent unit system. The dynamics solver works
//! internally in units where the medium length `L` and the light-crossing
//! time `L/c` are one; [`MediumParams::scaled`] and
//! [`ControlSchedule::scaled`] perform that mapping.
//!
//! The spin coherence is normalised as `S = α₊Ψ₊ + α₋Ψ₋`, i.e. without the
//! `N^{-1/2}` prefactor of the microscopic definition. Only ratios of `S`
//! enter any observable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Weights of the two polariton components, `α± = |Ω±|² / (|Ω₊|² + |Ω₋|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub plus: f64,
    pub minus: f64,
}

impl Alphas {
    pub const FORWARD: Alphas = Alphas {
        plus: 1.0,
        minus: 0.0,
    };
    pub const BACKWARD: Alphas = Alphas {
        plus: 0.0,
        minus: 1.0,
    };
    pub const BALANCED: Alphas = Alphas {
        plus: 0.5,
        minus: 0.5,
    };

    /// Weights from `α₊`; `α₋ = 1 − α₊`.
    pub fn from_plus(plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&plus) {
            return Err(Error::Domain(format!("alpha_plus = {plus} outside [0, 1]")));
        }
        Ok(Alphas {
            plus,
            minus: 1.0 - plus,
        })
    }

    /// `α₊ − α₋`, the normalised intensity imbalance of the control beams.
    pub fn imbalance(&self) -> f64 {
        self.plus - self.minus
    }

    /// `α₊α₋`
    pub fn product(&self) -> f64 {
        self.plus * self.minus
    }

    /// Exchange of the two beams (mirror image `z → L − z`).
    pub fn swapped(&self) -> Self {
        Alphas {
            plus: self.minus,
            minus: self.plus,
        }
    }
}

/// Polariton weights for a pair of control Rabi frequencies.
///
/// Fails with [`Error::ControlsOff`] when both beams are off; in that regime
/// the spin wave must be held frozen instead.
pub fn compute_alphas(omega_plus: f64, omega_minus: f64) -> Result<Alphas> {
    let p = omega_plus * omega_plus;
    let m = omega_minus * omega_minus;
    let total = p + m;
    if total == 0.0 {
        return Err(Error::ControlsOff);
    }
    // α₋ is formed as 1 − α₊ so the pair sums to one exactly.
    let plus = p / total;
    Ok(Alphas {
        plus,
        minus: 1.0 - plus,
    })
}

/// Envelope group velocity `v_g = c (|Ω₊|² − |Ω₋|²) / g²N`, positive
/// toward `+z`.
pub fn group_velocity(omega_plus: f64, omega_minus: f64, g2n: f64, c: f64) -> f64 {
    c * (omega_plus * omega_plus - omega_minus * omega_minus) / g2n
}

/// Physical constants of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Resonant intensity absorption coefficient, 1/length.
    pub xi: f64,
    /// Collective coupling `g²N`, (rad/time)².
    pub g2n: f64,
    /// Vacuum speed of light, length/time.
    pub c: f64,
    /// Medium length.
    pub length: f64,
    /// Spin decoherence rate, 1/time.
    pub gamma_s: f64,
}

impl MediumParams {
    /// Medium in units where `L = c = 1`, specified by its optical depth.
    pub fn dimensionless(optical_depth: f64, g2n: f64, gamma_s: f64) -> Self {
        MediumParams {
            xi: optical_depth,
            g2n,
            c: 1.0,
            length: 1.0,
            gamma_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("xi", self.xi > 0.0 && self.xi.is_finite()),
            ("g2n", self.g2n > 0.0 && self.g2n.is_finite()),
            ("c", self.c > 0.0 && self.c.is_finite()),
            ("length", self.length > 0.0 && self.length.is_finite()),
            ("gamma_s", self.gamma_s >= 0.0 && self.gamma_s.is_finite()),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::validation(
                    format!("medium.{name}"),
                    "must be positive and finite (gamma_s may be zero)",
                ));
            }
        }
        if !self.optical_depth().is_finite() {
            return Err(Error::validation("medium", "optical depth xi*L is not finite"));
        }
        Ok(())
    }

    /// `d = ξL`
    pub fn optical_depth(&self) -> f64 {
        self.xi * self.length
    }

    /// Light-crossing time `L/c`, the internal unit of time.
    pub fn time_unit(&self) -> f64 {
        self.length / self.c
    }

    /// Same medium in internal units (`L = c = 1`).
    pub fn scaled(&self) -> ScaledMedium {
        let tu = self.time_unit();
        ScaledMedium {
            xi: self.optical_depth(),
            g2n: self.g2n * tu * tu,
            gamma_s: self.gamma_s * tu,
        }
    }
}

/// Medium parameters in internal units: lengths in `L`, times in `L/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMedium {
    /// Absorption coefficient per medium length, i.e. the optical depth.
    pub xi: f64,
    pub g2n: f64,
    pub gamma_s: f64,
}

/// One stage of a control schedule. The envelopes ramp linearly from the
/// previous stage's levels to `omega_plus`/`omega_minus` over the schedule's
/// ramp time, starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

/// Piecewise-linear control envelopes `Ω₊(t)`, `Ω₋(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
    ramp_time: f64,
}

/// Interval on which both envelopes are linear in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub plus: (f64, f64),
    pub minus: (f64, f64),
    pub segment: usize,
}

impl Piece {
    pub fn omegas(&self, t: f64) -> (f64, f64) {
        let width = self.t1 - self.t0;
        let x = if width > 0.0 {
            ((t - self.t0) / width).clamp(0.0, 1.0)
        } else {
            1.0
        };
        (
            self.plus.0 + (self.plus.1 - self.plus.0) * x,
            self.minus.0 + (self.minus.1 - self.minus.0) * x,
        )
    }

    /// `∫ (Ω₊² + Ω₋²) dt` over `[a, b] ⊂ [t0, t1]`, exact for linear envelopes.
    pub fn intensity_integral(&self, a: f64, b: f64) -> f64 {
        let width = self.t1 - self.t0;
        let integral = |(v0, v1): (f64, f64)| {
            let slope = if width > 0.0 { (v1 - v0) / width } else { 0.0 };
            let anti = |u: f64| v0 * v0 * u + v0 * slope * u * u + slope * slope * u * u * u / 3.0;
            anti(b - self.t0) - anti(a - self.t0)
        };
        integral(self.plus) + integral(self.minus)
    }

    /// Largest `Ω₊² + Ω₋²` on `[a, b]`; squares of non-negative linear
    /// functions are convex so the endpoints suffice.
    pub fn max_intensity(&self, a: f64, b: f64) -> f64 {
        let i = |t: f64| {
            let (p, m) = self.omegas(t);
            p * p + m * m
        };
        i(a).max(i(b))
    }

    pub fn is_dark(&self) -> bool {
        self.plus == (0.0, 0.0) && self.minus == (0.0, 0.0)
    }
}

impl ControlSchedule {
    pub fn new(segments: Vec<Segment>, ramp_time: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::validation("schedule.segments", "at least one segment required"));
        }
        if !(ramp_time >= 0.0 && ramp_time.is_finite()) {
            return Err(Error::validation("schedule.ramp", "must be non-negative"));
        }
        for (i, seg) in segments.iter().enumerate() {
            let path = format!("schedule.segments[{i}]");
            if !(seg.end > seg.start) || !seg.start.is_finite() || !seg.end.is_finite() {
                return Err(Error::validation(path, "segment must have end > start"));
            }
            if !(seg.omega_plus >= 0.0 && seg.omega_minus >= 0.0)
                || !seg.omega_plus.is_finite()
                || !seg.omega_minus.is_finite()
            {
                return Err(Error::validation(path, "Rabi frequencies must be >= 0"));
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if (seg.start - prev.end).abs() > 1e-12 * seg.start.abs().max(1.0) {
                    return Err(Error::validation(
                        path,
                        "segments must be contiguous and non-overlapping",
                    ));
                }
                if ramp_time > seg.end - seg.start {
                    return Err(Error::validation(path, "ramp time exceeds segment duration"));
                }
            }
        }
        Ok(ControlSchedule {
            segments,
            ramp_time,
        })
    }

    /// Contiguous segments laid end to end starting at `t = 0`.
    pub fn from_durations<'a, I>(stages: I, ramp_time: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64, f64, f64)>,
    {
        let mut t = 0.0;
        let mut segments = Vec::new();
        for (name, duration, omega_plus, omega_minus) in stages {
            segments.push(Segment {
                name: name.to_string(),
                start: t,
                end: t + duration,
                omega_plus,
                omega_minus,
            });
            t += duration;
        }
        Self::new(segments, ramp_time)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn ramp_time(&self) -> f64 {
        self.ramp_time
    }

    pub fn start(&self) -> f64 {
        self.segments[0].start
    }

    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    /// Times of control transitions (segment boundaries, including both ends).
    pub fn markers(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        m.push(self.end());
        m
    }

    /// Index of the segment containing `t` (the later one at a boundary).
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .iter()
            .rposition(|s| t >= s.start)
            .unwrap_or(0)
    }

    /// Envelope values `(Ω₊(t), Ω₋(t))`.
    pub fn omegas_at(&self, t: f64) -> (f64, f64) {
        let pieces = self.pieces();
        let idx = pieces
            .iter()
            .rposition(|p| t >= p.t0)
            .unwrap_or(0);
        pieces[idx].omegas(t)
    }

    pub(crate) fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::with_capacity(2 * self.segments.len());
        for (i, seg) in self.segments.iter().enumerate() {
            let level = (seg.omega_plus, seg.omega_minus);
            let ramp_end = seg.start + self.ramp_time;
            if i > 0 && self.ramp_time > 0.0 {
                let prev = &self.segments[i - 1];
                let from = (prev.omega_plus, prev.omega_minus);
                if from != level {
                    out.push(Piece {
                        t0: seg.start,
                        t1: ramp_end,
                        plus: (from.0, level.0),
                        minus: (from.1, level.1),
                        segment: i,
                    });
                    if seg.end > ramp_end {
                        out.push(Piece {
                            t0: ramp_end,
                            t1: seg.end,
                            plus: (level.0, level.0),
                            minus: (level.1, level.1),
                            segment: i,
                        });
                    }
                    continue;
                }
            }
            out.push(Piece {
                t0: seg.start,
                t1: seg.end,
                plus: (level.0, level.0),
                minus: (level.1, level.1),
                segment: i,
            });
        }
        out
    }

    /// Scaled time `τ(t) = ∫ (Ω₊² + Ω₋²)/g²N dt` measured from the schedule
    /// start.
    pub fn scaled_time(&self, t: f64, g2n: f64) -> Result<f64> {
        if t < self.start() || t > self.end() || t.is_nan() {
            return Err(Error::Domain(format!(
                "t = {t} outside schedule span [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let mut total = 0.0;
        for p in self.pieces() {
            if p.t0 >= t {
                break;
            }
            total += p.intensity_integral(p.t0, p.t1.min(t));
        }
        Ok(total / g2n)
    }

    /// The same schedule with times divided by `time_unit` and Rabi
    /// frequencies multiplied by it.
    pub fn scaled(&self, time_unit: f64) -> ControlSchedule {
        ControlSchedule {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    name: s.name.clone(),
                    start: s.start / time_unit,
                    end: s.end / time_unit,
                    omega_plus: s.omega_plus * time_unit,
                    omega_minus: s.omega_minus * time_unit,
                })
                .collect(),
            ramp_time: self.ramp_time / time_unit,
        }
    }
}

/// Entrance port of the signal pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    /// Enters at `z = 0` travelling toward `+z`.
    Forward,
    /// Enters at `z = L` travelling toward `−z`.
    Backward,
}

/// Gaussian signal pulse, given as the polariton envelope at the entrance
/// port: `Ψ(t) = A exp(−(t − t0)² / 2σ_t²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalInput {
    pub amplitude: Complex64,
    pub t0: f64,
    pub sigma_t: f64,
    pub port: Port,
}

impl SignalInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_t > 0.0 && self.sigma_t.is_finite()) {
            return Err(Error::validation("input.sigma_t", "must be positive"));
        }
        if !self.t0.is_finite() || !self.amplitude.norm().is_finite() {
            return Err(Error::validation("input", "amplitude and t0 must be finite"));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> Complex64 {
        let x = (t - self.t0) / self.sigma_t;
        self.amplitude * (-0.5 * x * x).exp()
    }

    pub fn scaled(&self, time_unit: f64) -> SignalInput {
        SignalInput {
            t0: self.t0 / time_unit,
            sigma_t: self.sigma_t / time_unit,
            ..*self
        }
    }
}

/// Spatial grid and optional fixed time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Number of grid nodes including both boundaries.
    pub nz: usize,
    /// Fixed real-time step; `None` selects the step from the stability
    /// bound.
    pub dt: Option<f64>,
}

impl Grid {
    pub const MIN_NODES: usize = 16;

    pub fn new(nz: usize) -> Self {
        Grid { nz, dt: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nz < Self::MIN_NODES {
            return Err(Error::validation(
                "grid.nz",
                format!("need at least {} nodes", Self::MIN_NODES),
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::validation("grid.dt", "must be positive"));
            }
        }
        Ok(())
    }

    /// Node spacing for a medium of length `length`.
    pub fn spacing(&self, length: f64) -> f64 {
        length / (self.nz - 1) as f64
    }
}

/// Signal field envelopes `ℰ± = Ω± Ψ± / √(g²N)` on the grid.
///
/// A channel whose control is off carries no field, whatever its polariton
/// amplitude.
pub fn polariton_to_fields(
    psi_plus: &[Complex64],
    psi_minus: &[Complex64],
    omega_plus: f64,
    omega_minus: f64,
    g2n: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let root = g2n.sqrt();
    let map = |psi: &[Complex64], omega: f64| -> Vec<Complex64> {
        if omega == 0.0 {
            vec![Complex64::new(0.0, 0.0); psi.len()]
        } else {
            psi.iter().map(|&p| p * (omega / root)).collect()
        }
    };
    (map(psi_plus, omega_plus), map(psi_minus, omega_minus))
}

/// Inverse of [`polariton_to_fields`] on channels with a nonzero control.
/// Channels with a zero control map back to zero.
pub fn fields_to_polariton(
    e_plus: &[Complex64],
    e_minus: &[Complex64],
    omega_plus: f64,
    omega_minus: f64,
    g2n: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let root = g2n.sqrt();
    let map = |e: &[Complex64], omega: f64| -> Vec<Complex64> {
        if omega == 0.0 {
            vec![Complex64::new(0.0, 0.0); e.len()]
        } else {
            e.iter().map(|&f| f * (root / omega)).collect()
        }
    };
    (map(e_plus, omega_plus), map(e_minus, omega_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alphas_examples() {
        let a = compute_alphas(3.0, 3.0).unwrap();
        assert_eq!((a.plus, a.minus), (0.5, 0.5));
        let a = compute_alphas(7.0, 0.0).unwrap();
        assert_eq!((a.plus, a.minus), (1.0, 0.0));
        let a = compute_alphas(2f64.sqrt() * 1.5, 1.5).unwrap();
        assert!((a.plus - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.minus - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(compute_alphas(0.0, 0.0), Err(Error::ControlsOff)));
    }

    #[test]
    fn group_velocity_examples() {
        assert_eq!(group_velocity(2.0, 2.0, 100.0, 1.0), 0.0);
        assert_eq!(group_velocity(3.0, 0.0, 100.0, 2.0), 2.0 * 9.0 / 100.0);
        let v = group_velocity(2f64.sqrt(), 1.0, 100.0, 1.0);
        assert!((v - 0.01).abs() < 1e-15);
    }

    #[test]
    fn scaled_time_constant_and_dark() {
        let s = ControlSchedule::from_durations([("hold", 4.0, 3.0, 3.0)], 0.0).unwrap();
        let tau = s.scaled_time(2.5, 50.0).unwrap();
        assert!((tau - 2.0 * 9.0 * 2.5 / 50.0).abs() < 1e-14);

        let s = ControlSchedule::from_durations([("store", 4.0, 0.0, 0.0)], 0.0).unwrap();
        assert_eq!(s.scaled_time(3.0, 50.0).unwrap(), 0.0);
        assert!(s.scaled_time(-1.0, 50.0).is_err());
        assert!(s.scaled_time(4.5, 50.0).is_err());
    }

    /// Adaptive Simpson quadrature of the intensity, evaluated through the
    /// public envelope accessor only.
    fn quadrature_tau(s: &ControlSchedule, t: f64, g2n: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
        let f = |x: f64| {
            let (p, m) = s.omegas_at(x);
            (p * p + m * m) / g2n
        };
        // Split at the kinks so each panel is smooth.
        let mut knots: Vec<f64> = s.markers();
        for seg in s.segments().iter().skip(1) {
            knots.push(seg.start + s.ramp_time());
        }
        knots.retain(|&k| k < t);
        knots.push(t);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();
        knots
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
                let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                simpson(&f, a, b, fa, fm, fb, whole, 1e-14, 40)
            })
            .sum()
    }

    #[test]
    fn scaled_time_linear_ramp_matches_quadrature() {
        let s = ControlSchedule::from_durations(
            [("dark", 1.0, 0.0, 0.0), ("write", 5.0, 4.0, 0.0), ("hold", 3.0, 2.0, 2.5)],
            1.3,
        )
        .unwrap();
        for &t in &[0.5, 1.2, 2.3, 4.0, 6.0, 6.7, 8.9] {
            let exact = s.scaled_time(t, 7.0).unwrap();
            let oracle = quadrature_tau(&s, t, 7.0);
            assert!(
                (exact - oracle).abs() <= 1e-10 * oracle.abs().max(1e-300),
                "t={t}: {exact} vs {oracle}"
            );
        }
    }

    #[test]
    fn schedule_rejects_overlap_and_negative_rabi() {
        let seg = |s: f64, e: f64, p: f64| Segment {
            name: "x".into(),
            start: s,
            end: e,
            omega_plus: p,
            omega_minus: 0.0,
        };
        assert!(ControlSchedule::new(vec![seg(0.0, 1.0, 1.0), seg(0.5, 2.0, 1.0)], 0.0).is_err());
        assert!(ControlSchedule::new(vec![seg(0.0, 1.0, -1.0)], 0.0).is_err());
        assert!(ControlSchedule::new(vec![seg(0.0, 1.0, 1.0), seg(1.0, 1.1, 1.0)], 0.5).is_err());
    }

    #[test]
    fn envelope_continuous_across_ramped_boundaries() {
        let s = ControlSchedule::from_durations(
            [("a", 2.0, 1.0, 0.0), ("b", 2.0, 0.0, 0.0), ("c", 2.0, 1.0, 1.0)],
            0.25,
        )
        .unwrap();
        for m in s.markers() {
            let before = s.omegas_at(m - 1e-9);
            let after = s.omegas_at(m + 1e-9);
            assert!((before.0 - after.0).abs() < 1e-6 && (before.1 - after.1).abs() < 1e-6);
        }
    }

    #[test]
    fn field_conversion_examples() {
        let s: Vec<Complex64> = (0..8).map(|j| Complex64::new(j as f64, -0.5)).collect();
        let (ep, em) = polariton_to_fields(&s, &s, 2.0, 0.0, 16.0);
        assert!(em.iter().all(|e| e.norm() == 0.0));
        assert!((ep[3] - s[3] * 0.5).norm() < 1e-15);

        let (ep, em) = polariton_to_fields(&s, &s, 2.0, 2.0, 16.0);
        assert!(ep.iter().zip(&em).all(|(a, b)| (a.norm() - b.norm()).abs() < 1e-15));

        let (ep2, _) = polariton_to_fields(&s, &s, 4.0, 2.0, 16.0);
        assert!(ep.iter().zip(&ep2).all(|(a, b)| (*b - *a * 2.0).norm() < 1e-14));
    }

    proptest! {
        #[test]
        fn alphas_sum_to_one(p in 0.0f64..1e6, m in 0.0f64..1e6) {
            prop_assume!(p > 0.0 || m > 0.0);
            let a = compute_alphas(p, m).unwrap();
            prop_assert_eq!(a.plus + a.minus, 1.0);
            prop_assert!((0.0..=1.0).contains(&a.plus) && (0.0..=1.0).contains(&a.minus));
        }

        #[test]
        fn group_velocity_antisymmetric(p in 0.0f64..1e3, m in 0.0f64..1e3, g in 1e-3f64..1e6) {
            prop_assert_eq!(group_velocity(p, m, g, 3.0), -group_velocity(m, p, g, 3.0));
        }

        #[test]
        fn tau_invariant_under_splitting(
            d1 in 0.1f64..5.0, d2 in 0.1f64..5.0, split in 0.05f64..0.95,
            p in 0.0f64..10.0, m in 0.0f64..10.0,
        ) {
            let coarse = ControlSchedule::from_durations([("a", d1, 1.0, 0.0), ("b", d2, p, m)], 0.0).unwrap();
            let fine = ControlSchedule::from_durations(
                [("a", d1, 1.0, 0.0), ("b1", d2 * split, p, m), ("b2", d2 * (1.0 - split), p, m)],
                0.0,
            ).unwrap();
            let t = d1 + d2;
            let a = coarse.scaled_time(t, 3.0).unwrap();
            let b = fine.scaled_time(t.min(fine.end()), 3.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }

        #[test]
        fn tau_monotone(ts in proptest::collection::vec(0.0f64..9.0, 2..20)) {
            let s = ControlSchedule::from_durations(
                [("a", 3.0, 2.0, 0.0), ("b", 3.0, 0.0, 0.0), ("c", 3.0, 1.0, 1.5)],
                0.4,
            ).unwrap();
            let mut ts = ts;
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let taus: Vec<f64> = ts.iter().map(|&t| s.scaled_time(t, 2.0).unwrap()).collect();
            prop_assert!(taus.windows(2).all(|w| w[1] >= w[0]));
        }

        #[test]
        fn field_round_trip(
            re in proptest::collection::vec(-10.0f64..10.0, 4..16),
            op in 1e-3f64..1e3, om in 1e-3f64..1e3, g in 1e-2f64..1e8,
        ) {
            let psi: Vec<Complex64> = re.iter().map(|&x| Complex64::new(x, 0.3 * x)).collect();
            let (ep, em) = polariton_to_fields(&psi, &psi, op, om, g);
            let (pp, pm) = fields_to_polariton(&ep, &em, op, om, g);
            for ((a, b), c) in pp.iter().zip(&pm).zip(&psi) {
                prop_assert!((a - c).norm() <= 1e-12 * c.norm().max(1e-300));
                prop_assert!((b - c).norm() <= 1e-12 * c.norm().max(1e-300));
            }
        }
    }
}
