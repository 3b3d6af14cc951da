//! Spatial and temporal discretisation of the two-component polariton
//! equations.
//!
//! Writing `Ψ₊ = S + α₋D` and `Ψ₋ = S − α₊D` splits the system into one
//! dynamic mode and one constraint:
//!
//! ```text
//! (α₋ − α₊) ∂z D + ξ D = −2 ∂z S                      (instantaneous)
//! ∂τ S = −∂z F,   F = c (α₊Ψ₊ − α₋Ψ₋) = c ((α₊ − α₋) S + 2α₊α₋ D)
//! ```
//!
//! `S` lives on the grid nodes, `D` on the midpoints between them (so the
//! balanced closure `D = −(2/ξ)∂zS` yields the compact three-point
//! Laplacian), plus one value at each boundary. All routines work in
//! internal units (`L = c = 1`); `h` is the node spacing and `xi` the
//! absorption coefficient per medium length, i.e. the optical depth.
//!
//! Routines are written for `α₊ ≥ α₋`; the other case is its mirror image
//! `z → L − z`, which exchanges `Ψ₊ ↔ Ψ₋` and flips the sign of `D`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Alphas;

/// Imbalances `|α₊ − α₋|` below this use the algebraic closure for `D`.
pub const BALANCE_EPS: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Incoming polariton amplitudes `Ψ₊(0)` and `Ψ₋(L)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryInputs {
    pub forward: Complex64,
    pub backward: Complex64,
}

impl BoundaryInputs {
    fn mirrored(self) -> Self {
        BoundaryInputs {
            forward: self.backward,
            backward: self.forward,
        }
    }
}

/// Outgoing polariton amplitudes `Ψ₊(L)` and `Ψ₋(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryOutputs {
    pub forward: Complex64,
    pub backward: Complex64,
}

/// Difference mode `D = Ψ₊ − Ψ₋` on the staggered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMode {
    /// Values at `z_{j+1/2}`, `j = 0..N−1`.
    pub mid: Vec<Complex64>,
    /// `D(0)`
    pub left: Complex64,
    /// `D(L)`
    pub right: Complex64,
}

impl DifferenceMode {
    /// Interpolated onto the nodes.
    pub fn at_nodes(&self) -> Vec<Complex64> {
        let n = self.mid.len() + 1;
        let mut out = Vec::with_capacity(n);
        out.push(self.left);
        for w in self.mid.windows(2) {
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(self.right);
        out
    }

    fn mirrored(self) -> Self {
        DifferenceMode {
            mid: self.mid.into_iter().rev().map(|d| -d).collect(),
            left: -self.right,
            right: -self.left,
        }
    }
}

/// Solves the difference-mode constraint for a given spin wave.
///
/// The sweep runs from the boundary toward which the constraint is stable:
/// from `z = L` (where `Ψ₋(L)` is imposed) when `α₊ > α₋`, from `z = 0`
/// when `α₋ > α₊`. Within each cell it is an exponential integrator with
/// the forcing interpolated linearly. Near balance both boundary
/// conditions are imposed directly and `D = −(2/ξ)∂zS` in the interior.
pub fn slave_difference(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    inputs: BoundaryInputs,
) -> Result<DifferenceMode> {
    check_alphas(alphas)?;
    if s.len() < 2 {
        return Err(Error::Domain("spin wave needs at least two nodes".into()));
    }
    if alphas.imbalance() < -BALANCE_EPS {
        let rev: Vec<Complex64> = s.iter().rev().copied().collect();
        let m = slave_difference_forward(&rev, alphas.swapped(), xi, h, inputs.mirrored());
        Ok(m.mirrored())
    } else {
        Ok(slave_difference_forward(s, alphas, xi, h, inputs))
    }
}

fn check_alphas(alphas: Alphas) -> Result<()> {
    let ok = alphas.plus.is_finite()
        && alphas.minus.is_finite()
        && (alphas.plus + alphas.minus - 1.0).abs() < 1e-9
        && alphas.plus >= 0.0
        && alphas.minus >= 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::ControlsOff)
    }
}

/// `(E, φ)` for the exponential step of length `x = κh`: a step from `a`
/// to `b` maps `D ↦ E·D + φ·G_a + (1 − E − φ)·G_b`.
fn exp_weights(x: f64) -> (f64, f64) {
    let e = (-x).exp();
    let phi = if x < 1e-4 {
        x / 2.0 - x * x / 3.0 + x * x * x / 8.0
    } else {
        -(-x).exp_m1() / x - e
    };
    (e, phi)
}

fn forcing(s: &[Complex64], xi: f64, h: f64) -> Vec<Complex64> {
    let scale = -2.0 / (xi * h);
    s.windows(2).map(|w| (w[1] - w[0]) * scale).collect()
}

fn slave_difference_forward(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    inputs: BoundaryInputs,
) -> DifferenceMode {
    let n = s.len();
    let g = forcing(s, xi, h);
    let imbalance = alphas.imbalance();

    if imbalance < BALANCE_EPS {
        // Ψ₊(0) and Ψ₋(L) fix both ends.
        return DifferenceMode {
            mid: g,
            left: (inputs.forward - s[0]) / alphas.minus,
            right: (s[n - 1] - inputs.backward) / alphas.plus,
        };
    }

    let kappa = xi / imbalance;
    let (e_half, _) = exp_weights(0.5 * kappa * h);
    let (e_full, phi_full) = exp_weights(kappa * h);

    let right = (s[n - 1] - inputs.backward) / alphas.plus;
    let mut mid = vec![ZERO; n - 1];
    mid[n - 2] = e_half * right + (1.0 - e_half) * g[n - 2];
    for j in (0..n - 2).rev() {
        mid[j] = e_full * mid[j + 1] + phi_full * g[j + 1] + (1.0 - e_full - phi_full) * g[j];
    }
    let left = e_half * mid[0] + (1.0 - e_half) * g[0];
    DifferenceMode { mid, left, right }
}

/// Explicit step bound on the scaled time: advective CFL combined with the
/// explicit-diffusion limit of the leading-order closure.
pub fn stability_bound(alphas: Alphas, xi: f64, h: f64) -> f64 {
    let advective = h / (alphas.imbalance().abs() + 1e-12);
    let product = alphas.product();
    let diffusive = if product > 0.0 {
        h * h * xi / (8.0 * product)
    } else {
        f64::INFINITY
    };
    0.5 * advective.min(diffusive)
}

/// `∂τS` together with the outgoing boundary amplitudes.
pub fn spin_rate(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    inputs: BoundaryInputs,
) -> Result<(Vec<Complex64>, BoundaryOutputs)> {
    check_alphas(alphas)?;
    if alphas.imbalance() < -BALANCE_EPS {
        let rev: Vec<Complex64> = s.iter().rev().copied().collect();
        let (mut rate, out) = spin_rate_forward(&rev, alphas.swapped(), xi, h, inputs.mirrored());
        rate.reverse();
        Ok((
            rate,
            BoundaryOutputs {
                forward: out.backward,
                backward: out.forward,
            },
        ))
    } else {
        Ok(spin_rate_forward(s, alphas, xi, h, inputs))
    }
}

fn spin_rate_forward(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    inputs: BoundaryInputs,
) -> (Vec<Complex64>, BoundaryOutputs) {
    let n = s.len();
    let d = slave_difference_forward(s, alphas, xi, h, inputs);
    let imbalance = alphas.imbalance().max(0.0);
    let coupling = 2.0 * alphas.product();

    // Third-order upwind-biased face values; first-order at the inflow face.
    let mut flux = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let face = if j == 0 {
            s[0]
        } else {
            (-s[j - 1] + 5.0 * s[j] + 2.0 * s[j + 1]) / 6.0
        };
        flux.push(imbalance * face + coupling * d.mid[j]);
    }

    let psi_minus_left = s[0] - alphas.plus * d.left;
    let psi_plus_right = s[n - 1] + alphas.minus * d.right;
    let flux_left = alphas.plus * inputs.forward - alphas.minus * psi_minus_left;
    let flux_right = alphas.plus * psi_plus_right - alphas.minus * inputs.backward;

    let mut rate = vec![ZERO; n];
    let half = 0.5 * h;
    rate[0] = -(flux[0] - flux_left) / half;
    for j in 1..n - 1 {
        rate[j] = -(flux[j] - flux[j - 1]) / h;
    }
    rate[n - 1] = -(flux_right - flux[n - 2]) / half;

    (
        rate,
        BoundaryOutputs {
            forward: psi_plus_right,
            backward: psi_minus_left,
        },
    )
}

/// Outgoing amplitudes `Ψ₊(L)`, `Ψ₋(0)` for the current spin wave.
pub fn boundary_outputs(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    inputs: BoundaryInputs,
) -> Result<BoundaryOutputs> {
    let d = slave_difference(s, alphas, xi, h, inputs)?;
    let n = s.len();
    Ok(BoundaryOutputs {
        forward: s[n - 1] + alphas.minus * d.right,
        backward: s[0] - alphas.plus * d.left,
    })
}

/// One strong-stability-preserving third-order Runge–Kutta step of the spin
/// wave over `dtau`. `inputs` are the boundary amplitudes at the start, the
/// end and the middle of the step (the order of the stages).
///
/// To leading order in `1/ξ` the update is advection at `c(α₊ − α₋)` plus
/// diffusion with coefficient `4cα₊α₋/ξ`.
pub fn advance_spin(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    dtau: f64,
    inputs: [BoundaryInputs; 3],
) -> Result<Vec<Complex64>> {
    let bound = stability_bound(alphas, xi, h);
    if !(dtau >= 0.0) || dtau > bound * (1.0 + 1e-12) {
        return Err(Error::StepSize { dtau, bound });
    }
    if dtau == 0.0 {
        return Ok(s.to_vec());
    }
    let (k1, _) = spin_rate(s, alphas, xi, h, inputs[0])?;
    let s1: Vec<Complex64> = s.iter().zip(&k1).map(|(a, k)| a + dtau * k).collect();
    let (k2, _) = spin_rate(&s1, alphas, xi, h, inputs[1])?;
    let s2: Vec<Complex64> = s
        .iter()
        .zip(&s1)
        .zip(&k2)
        .map(|((a, b), k)| 0.75 * a + 0.25 * (b + dtau * k))
        .collect();
    let (k3, _) = spin_rate(&s2, alphas, xi, h, inputs[2])?;
    Ok(s
        .iter()
        .zip(&s2)
        .zip(&k3)
        .map(|((a, b), k)| a / 3.0 + 2.0 / 3.0 * (b + dtau * k))
        .collect())
}

/// `S ← S·exp(−γ_s Δt)` with `Δt` in real (unscaled) time.
pub fn apply_decoherence(s: &mut [Complex64], gamma_s: f64, dt: f64) {
    if gamma_s == 0.0 || dt == 0.0 {
        return;
    }
    let factor = (-gamma_s * dt).exp();
    for v in s.iter_mut() {
        *v *= factor;
    }
}

/// Periodic (ring) version of [`spin_rate`], used to measure plane-wave
/// rates. Node `j` sits at `z = j h` with `h = L/N`.
pub fn spin_rate_periodic(s: &[Complex64], alphas: Alphas, xi: f64, h: f64) -> Result<Vec<Complex64>> {
    check_alphas(alphas)?;
    if alphas.imbalance() < -BALANCE_EPS {
        let rev: Vec<Complex64> = s.iter().rev().copied().collect();
        let mut rate = spin_rate_periodic_forward(&rev, alphas.swapped(), xi, h);
        rate.reverse();
        Ok(rate)
    } else {
        Ok(spin_rate_periodic_forward(s, alphas, xi, h))
    }
}

fn spin_rate_periodic_forward(s: &[Complex64], alphas: Alphas, xi: f64, h: f64) -> Vec<Complex64> {
    let n = s.len();
    let at = |j: isize| s[j.rem_euclid(n as isize) as usize];
    let scale = -2.0 / (xi * h);
    let g: Vec<Complex64> = (0..n as isize).map(|j| (at(j + 1) - at(j)) * scale).collect();
    let imbalance = alphas.imbalance().max(0.0);

    let d = if imbalance < BALANCE_EPS {
        g.clone()
    } else {
        let (e, phi) = exp_weights(xi / imbalance * h);
        let sweep = |start: Complex64| {
            let mut d = vec![ZERO; n];
            let mut cur = start;
            // Walk toward −z around the ring: n steps end back at n−1.
            for step in 0..n {
                let j = (2 * n - 2 - step) % n;
                let from = (j + 1) % n;
                cur = e * cur + phi * g[from] + (1.0 - e - phi) * g[j];
                d[j] = cur;
            }
            d
        };
        let particular = sweep(ZERO)[n - 1];
        let loop_gain = e.powi(n as i32);
        sweep(particular / (1.0 - loop_gain))
    };

    let coupling = 2.0 * alphas.product();
    let flux: Vec<Complex64> = (0..n as isize)
        .map(|j| {
            let face = (-at(j - 1) + 5.0 * at(j) + 2.0 * at(j + 1)) / 6.0;
            imbalance * face + coupling * d[j as usize]
        })
        .collect();
    (0..n)
        .map(|j| -(flux[j] - flux[(j + n - 1) % n]) / h)
        .collect()
}

/// Periodic counterpart of [`advance_spin`].
pub fn advance_spin_periodic(
    s: &[Complex64],
    alphas: Alphas,
    xi: f64,
    h: f64,
    dtau: f64,
) -> Result<Vec<Complex64>> {
    let bound = stability_bound(alphas, xi, h);
    if !(dtau >= 0.0) || dtau > bound * (1.0 + 1e-12) {
        return Err(Error::StepSize { dtau, bound });
    }
    let k1 = spin_rate_periodic(s, alphas, xi, h)?;
    let s1: Vec<Complex64> = s.iter().zip(&k1).map(|(a, k)| a + dtau * k).collect();
    let k2 = spin_rate_periodic(&s1, alphas, xi, h)?;
    let s2: Vec<Complex64> = s
        .iter()
        .zip(&s1)
        .zip(&k2)
        .map(|((a, b), k)| 0.75 * a + 0.25 * (b + dtau * k))
        .collect();
    let k3 = spin_rate_periodic(&s2, alphas, xi, h)?;
    Ok(s
        .iter()
        .zip(&s2)
        .zip(&k3)
        .map(|((a, b), k)| a / 3.0 + 2.0 / 3.0 * (b + dtau * k))
        .collect())
}
