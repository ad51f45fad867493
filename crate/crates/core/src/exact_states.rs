//! Closed-form solutions riding on the moment trajectory: the complex germ,
//! the classical action, Hermite–Gaussian Fock states, trajectory-coherent
//! states, and Floquet quasi-energies of the periodic ones.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamilton_ehrenfest::{
    closed_form, coherent_constants, periodic_constants, Constants, TrajectoryState,
};
use crate::model::Model;
use crate::wavefunction::{Grid, WaveFunction};

/// Simpson panels per drive period.
pub const PANELS_PER_PERIOD: usize = 2048;
/// Default relative tolerance on the Simpson error estimate.
pub const ACTION_TOLERANCE: f64 = 1e-10;

/// Solution (B, C) of the variational system Ḃ = −mΩ²C, Ċ = B/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub t: f64,
    pub b: Complex64,
    pub c: Complex64,
}

impl VariationalSolution {
    /// Skew product {a, a*} = B C* − C B*.
    pub fn skew_norm(&self) -> Complex64 {
        self.b * self.c.conj() - self.c * self.b.conj()
    }
}

pub fn germ_solution(model: &Model, t: f64) -> VariationalSolution {
    let m = model.params.m;
    let w = model.freqs.omega_width;
    let c = Complex64::from_polar(1.0 / (m * w).sqrt(), w * t);
    let b = Complex64::new(0.0, m * w) * c;
    VariationalSolution { t, b, c }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub s: f64,
    pub t: f64,
    pub constants: Constants,
}

/// Mean-field energy 𝓗 evaluated on a trajectory point, without the ħ-order
/// zero-point terms (those enter through the Fock phase).
pub fn hamiltonian_value(model: &Model, g: &TrajectoryState) -> f64 {
    let p = &model.params;
    let m = p.m;
    let kappa = model.freqs.kappa_eff;
    g.p * g.p / (2.0 * m) + 0.5 * p.k * g.x * g.x
        - p.e_charge * p.e_field * g.x * (p.omega * g.t).cos()
        + 0.5 * kappa * p.c * g.sigma_xx
        + 0.5 * kappa * (p.a + 2.0 * p.b + p.c) * g.x * g.x
}

/// Integrand P Ẋ − 𝓗 of the action.
pub fn lagrangian(model: &Model, c: &Constants, t: f64) -> f64 {
    let g = closed_form(model, c, t);
    g.p * g.p / model.params.m - hamiltonian_value(model, &g)
}

fn simpson(model: &Model, c: &Constants, t: f64, panels: usize) -> f64 {
    let h = t / panels as f64;
    let mut acc = lagrangian(model, c, 0.0) + lagrangian(model, c, t);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * lagrangian(model, c, i as f64 * h);
    }
    acc * h / 3.0
}

/// S(t) = ∫₀ᵗ (P Ẋ − 𝓗) dτ by composite Simpson, with the usual
/// |S_n − S_{n/2}|/15 error estimate checked against `tolerance·max(1,|S|)`.
pub fn action_with_tolerance(
    model: &Model,
    c: &Constants,
    t: f64,
    tolerance: f64,
) -> Result<ActionValue> {
    if t == 0.0 {
        return Ok(ActionValue {
            s: 0.0,
            t,
            constants: *c,
        });
    }
    let periods = t.abs() / model.period();
    let panels = ((periods * PANELS_PER_PERIOD as f64).ceil() as usize)
        .max(4)
        .next_multiple_of(4);
    let fine = simpson(model, c, t, panels);
    let coarse = simpson(model, c, t, panels / 2);
    let estimate = (fine - coarse).abs() / 15.0;
    if estimate > tolerance * fine.abs().max(1.0) {
        return Err(Error::Quadrature {
            estimate,
            tolerance: tolerance * fine.abs().max(1.0),
        });
    }
    Ok(ActionValue {
        s: fine,
        t,
        constants: *c,
    })
}

pub fn action(model: &Model, c: &Constants, t: f64) -> Result<ActionValue> {
    action_with_tolerance(model, c, t, ACTION_TOLERANCE)
}

/// Closed form of the action for constants (0, 0, 0, 0, C5): a secular term
/// plus a second harmonic of the drive.
pub fn action_periodic(model: &Model, c5: f64, t: f64) -> f64 {
    let p = &model.params;
    let (m, w) = (p.m, p.omega);
    let d = model.detuning_sq();
    let w2 = model.freqs.omega_energy_sq();
    let ee = (p.e_charge * p.e_field).powi(2);
    let secular = ee / (2.0 * m * d) * (1.0 + (w * w - w2) / (2.0 * d));
    let ripple = ee / (4.0 * m * w * d) * (1.0 + (-w * w - w2) / (2.0 * d));
    secular * t - 0.5 * model.freqs.kappa_eff * p.c * c5 * t + ripple * (2.0 * w * t).sin()
}

/// Orthonormal Hermite functions h_0..=h_n at ξ, by the normalized recurrence.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI.powf(-0.25) * (-0.5 * xi * xi).exp());
    if n >= 1 {
        h.push(2f64.sqrt() * xi * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Grid resolution needed to sample the n-th Fock state on trajectory point g.
fn check_fock_resolution(model: &Model, grid: &Grid, n: usize, g: &TrajectoryState) -> Result<()> {
    let hbar = model.params.hbar;
    let scale = (model.params.m * model.freqs.omega_width / hbar).sqrt();
    let h_xi = grid.spacing() * scale;
    let nodes = (2.0 * n as f64 + 1.0).sqrt();
    if h_xi * nodes > 1.0 {
        return Err(Error::Grid(format!(
            "spacing {:.3e} too coarse for level {n} (needs ≤ {:.3e})",
            grid.spacing(),
            1.0 / (scale * nodes)
        )));
    }
    let sigma_p = hbar * scale * nodes / 2f64.sqrt();
    let k_needed = (g.p.abs() + 6.0 * sigma_p) / hbar;
    if k_needed >= grid.nyquist() {
        return Err(Error::Grid(format!(
            "momentum content {k_needed:.3e} reaches the Nyquist wavenumber {:.3e}",
            grid.nyquist()
        )));
    }
    Ok(())
}

/// Φ_n(x, t, 𝔤(t, 𝔠)) sampled on `grid`.
pub fn fock_state(
    model: &Model,
    grid: &Grid,
    n: usize,
    c: &Constants,
    t: f64,
) -> Result<WaveFunction> {
    let g = closed_form(model, c, t);
    check_fock_resolution(model, grid, n, &g)?;
    let s = action(model, c, t)?.s;
    Ok(fock_state_with_action(model, grid, n, &g, s))
}

pub(crate) fn fock_state_with_action(
    model: &Model,
    grid: &Grid,
    n: usize,
    g: &TrajectoryState,
    s: f64,
) -> WaveFunction {
    WaveFunction::from_fn(*grid, |x| fock_levels_with_action(model, n, g, s, x)[n])
}

fn fock_levels_with_action(
    model: &Model,
    n_max: usize,
    g: &TrajectoryState,
    s: f64,
    x: f64,
) -> Vec<Complex64> {
    let hbar = model.params.hbar;
    let w = model.freqs.omega_width;
    let scale = (model.params.m * w / hbar).sqrt();
    let dx = x - g.x;
    let envelope = Complex64::from_polar(scale.sqrt(), (s + g.p * dx) / hbar - 0.5 * w * g.t);
    let step = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -w * g.t);
    let mut phase = envelope;
    hermite_functions(n_max, scale * dx)
        .into_iter()
        .map(|h| {
            let v = phase * h;
            phase *= step;
            v
        })
        .collect()
}

/// Φ_0(x)..Φ_{n_max}(x) at a single point, without any grid.
pub fn fock_levels(
    model: &Model,
    n_max: usize,
    c: &Constants,
    t: f64,
    x: f64,
) -> Result<Vec<Complex64>> {
    let g = closed_form(model, c, t);
    let s = action(model, c, t)?.s;
    Ok(fock_levels_with_action(model, n_max, &g, s, x))
}

/// Fock state with the edge-decay check applied.
pub fn fock_state_checked(
    model: &Model,
    grid: &Grid,
    n: usize,
    c: &Constants,
    t: f64,
) -> Result<WaveFunction> {
    let psi = fock_state(model, grid, n, c, t)?;
    psi.check_concentrated()?;
    Ok(psi)
}

/// n-th trajectory-coherent state started at (p0, x0).
pub fn trajectory_coherent_state(
    model: &Model,
    grid: &Grid,
    n: usize,
    p0: f64,
    x0: f64,
    t: f64,
) -> Result<WaveFunction> {
    let c = coherent_constants(model, n, p0, x0);
    fock_state_checked(model, grid, n, &c, t)
}

/// n-th time-periodic state, using the closed-form action.
pub fn periodic_state(model: &Model, grid: &Grid, n: usize, t: f64) -> Result<WaveFunction> {
    let c = periodic_constants(model, n);
    let g = closed_form(model, &c, t);
    check_fock_resolution(model, grid, n, &g)?;
    let s = action_periodic(model, c.c5(), t);
    let psi = fock_state_with_action(model, grid, n, &g, s);
    psi.check_concentrated()?;
    Ok(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergy {
    pub n: usize,
    pub energy: f64,
    pub aa_phase: f64,
    pub period: f64,
}

pub fn quasi_energy(model: &Model, n: usize) -> QuasiEnergy {
    let p = &model.params;
    let (m, w, hbar) = (p.m, p.omega, p.hbar);
    let d = model.detuning_sq();
    let ee = (p.e_charge * p.e_field).powi(2);
    let w2 = model.freqs.omega_energy_sq();
    let ww = model.freqs.omega_width;
    let level = hbar * (ww + model.freqs.kappa_eff * p.c / (2.0 * m * ww)) * (n as f64 + 0.5);
    let energy = -ee / (2.0 * m * d) - ee * (w * w - w2) / (4.0 * m * d * d) + level;
    let period = model.period();
    let aa_phase = period * ee * w * w / (2.0 * hbar * m * d * d);
    QuasiEnergy {
        n,
        energy,
        aa_phase,
        period,
    }
}

/// Wrap an angle into (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}
