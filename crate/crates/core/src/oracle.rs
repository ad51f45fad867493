//! Direct Strang-splitting integrator for the Hartree equation.
//!
//! The quadratic kernel separates, so the nonlocal potential only needs the
//! three integrals N₀ = ∫|ψ|², M₁ = ∫y|ψ|², M₂ = ∫y²|ψ|². Within a step the
//! potential is frozen at moments of the half-kinetic predictor state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::wavefunction::{apply_momentum, fft, ifft, moments, MomentSet, WaveFunction};

/// dt·max(Ω, Ω̃, ω) must stay below this.
pub const MAX_STEP_PHASE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub splitting_order: u8,
    pub renormalize: bool,
}

impl SolverConfig {
    /// 4096 steps per drive period.
    pub fn default_for(model: &Model) -> Self {
        SolverConfig {
            dt: model.period() / 4096.0,
            splitting_order: 2,
            renormalize: false,
        }
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.splitting_order != 2 {
            return Err(Error::InvalidParameter(format!(
                "splitting_order must be 2 (got {})",
                self.splitting_order
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0 (got {})",
                self.dt
            )));
        }
        let f = &model.freqs;
        let fmax = f.omega_width.max(f.omega_centroid).max(model.params.omega);
        if self.dt * fmax >= MAX_STEP_PHASE {
            return Err(Error::Step {
                value: self.dt * fmax,
                limit: MAX_STEP_PHASE,
            });
        }
        Ok(())
    }
}

/// Raw integrals (N₀, M₁, M₂) of |ψ|².
pub fn density_integrals(psi: &WaveFunction) -> (f64, f64, f64) {
    let grid = psi.grid;
    let h = grid.spacing();
    let (mut n0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, v) in psi.values.iter().enumerate() {
        let x = grid.point(i);
        let d = v.norm_sqr();
        n0 += d;
        m1 += d * x;
        m2 += d * x * x;
    }
    (n0 * h, m1 * h, m2 * h)
}

fn potential_from_integrals(model: &Model, integrals: (f64, f64, f64), t: f64, x: f64) -> f64 {
    let p = &model.params;
    let (n0, m1, m2) = integrals;
    0.5 * p.kappa * (p.a * x * x * n0 + 2.0 * p.b * x * m1 + p.c * m2) + 0.5 * p.k * x * x
        - p.e_charge * p.e_field * x * (p.omega * t).cos()
}

/// Self-consistent potential on the grid of ψ at time t.
pub fn effective_potential(model: &Model, psi: &WaveFunction, t: f64) -> Vec<f64> {
    let integrals = density_integrals(psi);
    psi.grid
        .points()
        .into_iter()
        .map(|x| potential_from_integrals(model, integrals, t, x))
        .collect()
}

pub struct SplitStepSolver {
    pub model: Model,
    pub config: SolverConfig,
    half_kinetic: Vec<Complex64>,
}

impl SplitStepSolver {
    pub fn new(
        model: &Model,
        config: SolverConfig,
        grid: &crate::wavefunction::Grid,
    ) -> Result<Self> {
        config.validate(model)?;
        let (m, hbar) = (model.params.m, model.params.hbar);
        let dt = config.dt;
        let half_kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -hbar * k * k * dt / (4.0 * m)))
            .collect();
        Ok(SplitStepSolver {
            model: *model,
            config,
            half_kinetic,
        })
    }

    fn kinetic(&self, values: &mut [Complex64]) {
        fft(values);
        for (v, f) in values.iter_mut().zip(&self.half_kinetic) {
            *v *= f;
        }
        ifft(values);
    }

    /// One Strang step from t to t + dt.
    pub fn step(&self, psi: &WaveFunction, t: f64) -> WaveFunction {
        let dt = self.config.dt;
        let hbar = self.model.params.hbar;
        let mut values = psi.values.clone();
        self.kinetic(&mut values);
        let mid = WaveFunction {
            grid: psi.grid,
            values,
        };
        let integrals = density_integrals(&mid);
        let t_mid = t + 0.5 * dt;
        let mut values = mid.values;
        for (i, v) in values.iter_mut().enumerate() {
            let x = psi.grid.point(i);
            let u = potential_from_integrals(&self.model, integrals, t_mid, x);
            *v *= Complex64::from_polar(1.0, -u * dt / hbar);
        }
        self.kinetic(&mut values);
        let out = WaveFunction {
            grid: psi.grid,
            values,
        };
        if self.config.renormalize {
            let n0 = psi.norm();
            let n1 = out.norm();
            if n1 > 0.0 {
                return out.scaled(Complex64::new(n0 / n1, 0.0));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub moments: Option<MomentSet>,
    pub state: Option<WaveFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub final_state: WaveFunction,
    pub samples: Vec<OracleSample>,
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let ratio = (t1 - t0) / dt;
    let n = ratio.round();
    if n < 0.0 || (ratio - n).abs() > 1e-6 * ratio.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "(t1 − t0)/dt = {ratio} is not a non-negative integer"
        )));
    }
    Ok(n as usize)
}

/// Integrate from t0 to t1, sampling every `stride` steps (0 disables sampling).
/// Moments are recorded for nonzero states; states are kept when `keep_states`.
pub fn run_sampled(
    model: &Model,
    psi: &WaveFunction,
    t0: f64,
    t1: f64,
    config: SolverConfig,
    stride: usize,
    keep_states: bool,
) -> Result<OracleRun> {
    let steps = step_count(t0, t1, config.dt)?;
    let solver = SplitStepSolver::new(model, config, &psi.grid)?;
    if psi.norm_sq() > 0.0 {
        psi.check_resolved()?;
    }
    let hbar = model.params.hbar;
    let sample = |t: f64, state: &WaveFunction| -> Result<OracleSample> {
        let ms = if state.norm_sq() > 0.0 {
            Some(moments(state, 2, hbar)?)
        } else {
            None
        };
        Ok(OracleSample {
            t,
            moments: ms,
            state: keep_states.then(|| state.clone()),
        })
    };
    let mut samples = Vec::new();
    if stride > 0 {
        samples.push(sample(t0, psi)?);
    }
    let mut state = psi.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * config.dt;
        state = solver.step(&state, t);
        if stride > 0 && (k + 1) % stride == 0 {
            samples.push(sample(t0 + (k + 1) as f64 * config.dt, &state)?);
        }
    }
    if state.norm_sq() > 0.0 {
        state.check_resolved()?;
    }
    Ok(OracleRun {
        final_state: state,
        samples,
    })
}

pub fn run(
    model: &Model,
    psi: &WaveFunction,
    t0: f64,
    t1: f64,
    config: SolverConfig,
) -> Result<WaveFunction> {
    run_sampled(model, psi, t0, t1, config, 0, false).map(|r| r.final_state)
}

/// Hψ with the self-consistent potential of ψ itself.
pub fn apply_hamiltonian(model: &Model, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
    let m = model.params.m;
    let kinetic = apply_momentum(psi, 2, model.params.hbar)?;
    let v = effective_potential(model, psi, t);
    let values = kinetic
        .values
        .iter()
        .zip(&psi.values)
        .zip(&v)
        .map(|((k, p), u)| k / (2.0 * m) + p * u)
        .collect();
    Ok(WaveFunction {
        grid: psi.grid,
        values,
    })
}

/// ⟨ψ|H|ψ⟩ / ‖ψ‖².
pub fn energy_expectation(model: &Model, psi: &WaveFunction, t: f64) -> Result<f64> {
    let h = apply_hamiltonian(model, psi, t)?;
    Ok(psi.inner(&h).re / psi.norm_sq())
}

/// ‖iħ∂tΨ − HΨ‖ at t for a time-dependent state, with ∂t from a
/// fourth-order central stencil of step h.
pub fn pde_residual(
    model: &Model,
    state: impl Fn(f64) -> Result<WaveFunction>,
    t: f64,
    h: f64,
) -> Result<f64> {
    let f = [
        state(t - 2.0 * h)?,
        state(t - h)?,
        state(t + h)?,
        state(t + 2.0 * h)?,
    ];
    let center = state(t)?;
    let w = [1.0, -8.0, 8.0, -1.0];
    let mut dt = WaveFunction::zeros(center.grid);
    for (s, c) in f.iter().zip(w) {
        dt = dt.add(&s.scaled(Complex64::new(c / (12.0 * h), 0.0)));
    }
    let lhs = dt.scaled(Complex64::new(0.0, model.params.hbar));
    let rhs = apply_hamiltonian(model, &center, t)?;
    Ok(lhs.l2_distance(&rhs))
}
