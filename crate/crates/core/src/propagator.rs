//! The nonlinear evolution operator as an explicit Gaussian integral kernel.
//!
//! For a state ψ given at time `from`, the trajectory constants 𝔠 are fixed
//! by the moments of ψ, and the state at `to` is ∫ G(x, y) ψ(y) dy with the
//! Mehler-type kernel built on the trajectory 𝔤(t, 𝔠). The dependence of the
//! kernel on ψ through 𝔠 is what makes the operator nonlinear. Running the
//! same kernel with `to` and `from` exchanged gives the left inverse.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_states::action;
use crate::hamilton_ehrenfest::{closed_form, constants_from_moments, Constants, TrajectoryState};
use crate::model::Model;
use crate::wavefunction::{moments, WaveFunction};

/// Kernels with |sin Ω(to − from)| at or below this are rejected.
pub const CAUSTIC_TOLERANCE: f64 = 1e-6;
/// Largest phase Ω·Δt per substep chosen by [`compose_auto`].
pub const AUTO_SUBSTEP_PHASE: f64 = 0.6 * PI;
/// Amplitude threshold, relative to the peak, that delimits a state's support.
const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub to: f64,
    pub from: f64,
    pub constants: Constants,
    pub action_to: f64,
    pub action_from: f64,
    pub g_to: TrajectoryState,
    pub g_from: TrajectoryState,
    /// ν = ⌊Ω(to − from)/π⌋, the number of caustics crossed.
    pub maslov_index: i64,
    /// Ω(to − from).
    pub theta: f64,
    m: f64,
    omega: f64,
    hbar: f64,
    prefactor: Complex64,
}

impl KernelSpec {
    pub fn new(model: &Model, constants: &Constants, from: f64, to: f64) -> Result<Self> {
        let omega = model.freqs.omega_width;
        let theta = omega * (to - from);
        let sin = theta.sin();
        if to != from && sin.abs() <= CAUSTIC_TOLERANCE {
            return Err(Error::Caustic {
                sin: sin.abs(),
                tolerance: CAUSTIC_TOLERANCE,
            });
        }
        let (m, hbar) = (model.params.m, model.params.hbar);
        let maslov_index = (theta / PI).floor() as i64;
        let prefactor = if to == from {
            Complex64::new(0.0, 0.0)
        } else {
            let modulus = (m * omega / (2.0 * PI * hbar * sin.abs())).sqrt();
            Complex64::from_polar(modulus, -PI / 4.0 - maslov_index as f64 * PI / 2.0)
        };
        Ok(KernelSpec {
            to,
            from,
            constants: *constants,
            action_to: action(model, constants, to)?.s,
            action_from: action(model, constants, from)?.s,
            g_to: closed_form(model, constants, to),
            g_from: closed_form(model, constants, from),
            maslov_index,
            theta,
            m,
            omega,
            hbar,
            prefactor,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.to == self.from
    }

    /// Largest y-frequency of the kernel chirp over |Δx| ≤ dx_max, |Δy| ≤ dy_max.
    fn chirp_bandwidth(&self, dx_max: f64, dy_max: f64) -> f64 {
        let scale = self.m * self.omega / (self.hbar * self.theta.sin().abs());
        scale * (dx_max + self.theta.cos().abs() * dy_max)
    }
}

/// G(x, y) for the kernel's (to, from) pair. Not defined when `to == from`.
pub fn green_kernel(spec: &KernelSpec, x: f64, y: f64) -> Complex64 {
    let dx = x - spec.g_to.x;
    let dy = y - spec.g_from.x;
    let (sin, cos) = spec.theta.sin_cos();
    let linear =
        (spec.action_to - spec.action_from + spec.g_to.p * dx - spec.g_from.p * dy) / spec.hbar;
    let quad = -spec.m * spec.omega / (2.0 * spec.hbar)
        * (2.0 * dx * dy - (dx * dx + dy * dy) * cos)
        / sin;
    spec.prefactor * Complex64::from_polar(1.0, linear + quad)
}

/// Dense quadrature matrix h·G(x_i, y_j) on a grid.
pub struct KernelMatrix {
    pub spec: KernelSpec,
    n: usize,
    data: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn build(spec: &KernelSpec, grid: &crate::wavefunction::Grid) -> Self {
        let n = grid.n_points;
        let h = grid.spacing();
        let xs = grid.points();
        let data: Vec<Complex64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = xs[i];
                xs.iter()
                    .map(move |&y| green_kernel(spec, x, y) * h)
                    .collect::<Vec<_>>()
            })
            .collect();
        KernelMatrix {
            spec: *spec,
            n,
            data,
        }
    }

    pub fn apply(&self, psi: &WaveFunction) -> WaveFunction {
        let values = self
            .data
            .par_chunks(self.n)
            .map(|row| row.iter().zip(&psi.values).map(|(g, v)| g * v).sum())
            .collect();
        WaveFunction {
            grid: psi.grid,
            values,
        }
    }
}

/// Trajectory constants for ψ regarded as the state at time `at`.
pub fn constants_for(model: &Model, psi: &WaveFunction, at: f64) -> Result<Constants> {
    let ms = moments(psi, 2, model.params.hbar)?;
    Ok(constants_from_moments(model, &ms.trajectory_state(at), at))
}

fn support_extent(psi: &WaveFunction, center: f64) -> f64 {
    let peak = psi.max_abs();
    let grid = psi.grid;
    psi.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > SUPPORT_THRESHOLD * peak)
        .map(|(i, _)| (grid.point(i) - center).abs())
        .fold(0.0, f64::max)
}

fn check_kernel_resolution(spec: &KernelSpec, psi: &WaveFunction, sigma_pp: f64) -> Result<()> {
    let grid = psi.grid;
    let dx_max = (grid.x_min - spec.g_to.x)
        .abs()
        .max((grid.x_max - spec.g_to.x).abs());
    let dy_max = support_extent(psi, spec.g_from.x);
    let band = spec.chirp_bandwidth(dx_max, dy_max) + 6.0 * sigma_pp.sqrt() / spec.hbar;
    let limit = 2.0 * PI / grid.spacing();
    if band >= limit {
        return Err(Error::Grid(format!(
            "kernel chirp bandwidth {band:.3e} exceeds the sampling limit {limit:.3e}; refine the grid or change the step"
        )));
    }
    Ok(())
}

/// One kernel application from `from` to `to`, returning the constants used.
pub fn propagate_with_constants(
    model: &Model,
    psi: &WaveFunction,
    from: f64,
    to: f64,
) -> Result<(WaveFunction, Constants)> {
    psi.check_concentrated()?;
    let ms = moments(psi, 2, model.params.hbar)?;
    let constants = constants_from_moments(model, &ms.trajectory_state(from), from);
    let spec = KernelSpec::new(model, &constants, from, to)?;
    if spec.is_identity() {
        return Ok((psi.clone(), constants));
    }
    check_kernel_resolution(&spec, psi, ms.sigma_pp())?;
    let out = KernelMatrix::build(&spec, &psi.grid).apply(psi);
    out.check_concentrated()?;
    Ok((out, constants))
}

pub fn propagate(model: &Model, psi: &WaveFunction, from: f64, to: f64) -> Result<WaveFunction> {
    propagate_with_constants(model, psi, from, to).map(|(w, _)| w)
}

/// U(t, s, ψ): ψ given at s, result at t.
pub fn evolve(model: &Model, psi: &WaveFunction, s: f64, t: f64) -> Result<WaveFunction> {
    propagate(model, psi, s, t)
}

/// U⁻¹(t, s, Ψ): Ψ given at t, result at s.
pub fn inverse_evolve(model: &Model, psi: &WaveFunction, s: f64, t: f64) -> Result<WaveFunction> {
    propagate(model, psi, t, s)
}

/// Chain `n_steps` equal kernel applications, refreshing 𝔠 at each stop.
pub fn compose(
    model: &Model,
    psi: &WaveFunction,
    from: f64,
    to: f64,
    n_steps: usize,
) -> Result<WaveFunction> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    let dt = (to - from) / n_steps as f64;
    let mut state = psi.clone();
    for k in 0..n_steps {
        let a = from + k as f64 * dt;
        let b = if k + 1 == n_steps {
            to
        } else {
            from + (k + 1) as f64 * dt
        };
        state = propagate(model, &state, a, b)?;
    }
    Ok(state)
}

/// Substep count keeping every step below [`AUTO_SUBSTEP_PHASE`] and clear of caustics.
pub fn auto_steps(model: &Model, from: f64, to: f64) -> usize {
    let theta = (model.freqs.omega_width * (to - from)).abs();
    let mut n = ((theta / AUTO_SUBSTEP_PHASE).ceil() as usize).max(1);
    while (theta / n as f64).sin().abs() < 1e-3 && theta > 0.0 {
        n += 1;
    }
    n
}

pub fn compose_auto(model: &Model, psi: &WaveFunction, from: f64, to: f64) -> Result<WaveFunction> {
    compose(model, psi, from, to, auto_steps(model, from, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_states::{fock_state, trajectory_coherent_state};
    use crate::hamilton_ehrenfest::coherent_constants;
    use crate::model::ModelParams;
    use crate::wavefunction::Grid;

    fn driven() -> Model {
        Model::new(ModelParams {
            e_field: 0.5,
            omega: 1.5,
            a: 0.3,
            b: 0.2,
            c: 0.1,
            kappa: 0.5,
            ..ModelParams::default()
        })
        .unwrap()
    }

    fn grid() -> Grid {
        Grid::new(-16.0, 16.0, 512).unwrap()
    }

    fn gaussian(grid: Grid, x0: f64, p0: f64, s: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| {
            let d = x - x0;
            Complex64::from_polar((-d * d / (4.0 * s)).exp(), p0 * x)
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn caustic_rejected_and_identity() {
        let model = driven();
        let c = Constants([0.0, 0.0, 0.0, 0.0, 0.5]);
        let t = PI / model.freqs.omega_width;
        assert!(matches!(
            KernelSpec::new(&model, &c, 0.0, t),
            Err(Error::Caustic { .. })
        ));
        assert!(KernelSpec::new(&model, &c, 0.3, 0.3).unwrap().is_identity());
        let psi = gaussian(grid(), 0.2, 0.1, 0.6);
        assert_eq!(evolve(&model, &psi, 0.4, 0.4).unwrap(), psi);
        assert_eq!(inverse_evolve(&model, &psi, 0.4, 0.4).unwrap(), psi);
    }

    #[test]
    fn maslov_index_counts_caustics() {
        let model = driven();
        let c = Constants::default();
        let w = model.freqs.omega_width;
        assert_eq!(
            KernelSpec::new(&model, &c, 0.0, 0.5 / w)
                .unwrap()
                .maslov_index,
            0
        );
        assert_eq!(
            KernelSpec::new(&model, &c, 0.0, 4.0 / w)
                .unwrap()
                .maslov_index,
            1
        );
        assert_eq!(
            KernelSpec::new(&model, &c, 0.0, -0.5 / w)
                .unwrap()
                .maslov_index,
            -1
        );
    }

    #[test]
    fn kernel_symmetric_on_resting_trajectory() {
        let model = Model::new(ModelParams {
            e_field: 0.0,
            ..driven().params
        })
        .unwrap();
        let c = Constants([0.0, 0.0, 0.0, 0.0, 0.5]);
        let spec = KernelSpec::new(&model, &c, 0.1, 0.9).unwrap();
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.7)] {
            assert!((green_kernel(&spec, x, y) - green_kernel(&spec, y, x)).norm() < 1e-14);
        }
    }

    #[test]
    fn kernel_is_spectral_sum() {
        // The Fock expansion of G converges when applied to a state, not pointwise.
        let model = driven();
        let c = coherent_constants(&model, 0, 0.3, -0.2);
        let (s, t) = (0.2, 0.2 + 0.9 / model.freqs.omega_width);
        let spec = KernelSpec::new(&model, &c, s, t).unwrap();
        let g = Grid::new(-12.0, 12.0, 512).unwrap();
        let psi = gaussian(g, 0.6, -0.4, 0.35);
        let exact = KernelMatrix::build(&spec, &g).apply(&psi);
        let mut sum = WaveFunction::zeros(g);
        for n in 0..60 {
            let at_s = fock_state(&model, &g, n, &c, s).unwrap();
            let at_t = fock_state(&model, &g, n, &c, t).unwrap();
            sum = sum.add(&at_t.scaled(at_s.inner(&psi)));
        }
        assert!(
            sum.sup_distance(&exact) < 1e-6,
            "{}",
            sum.sup_distance(&exact)
        );
    }

    #[test]
    fn short_time_limit_is_identity() {
        let model = driven();
        let g = Grid::new(-8.0, 8.0, 1024).unwrap();
        let psi = gaussian(g, 0.3, 0.2, 0.4);
        let mut last = f64::INFINITY;
        for &eps in &[0.4, 0.2, 0.1, 0.05] {
            let err = evolve(&model, &psi, 1.0, 1.0 + eps)
                .unwrap()
                .l2_distance(&psi);
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.1);
    }

    #[test]
    fn coherent_state_transport() {
        let model = driven();
        let psi0 = trajectory_coherent_state(&model, &grid(), 0, 0.2, 0.1, 0.0).unwrap();
        let t = 1.3;
        let evolved = evolve(&model, &psi0, 0.0, t).unwrap();
        let exact = trajectory_coherent_state(&model, &grid(), 0, 0.2, 0.1, t).unwrap();
        assert!(evolved.sup_distance(&exact) < 1e-6);
        assert!((evolved.norm_sq() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn round_trips() {
        let model = driven();
        let psi = gaussian(grid(), -0.5, 0.4, 0.7);
        let forward = evolve(&model, &psi, 0.1, 1.4).unwrap();
        let back = inverse_evolve(&model, &forward, 0.1, 1.4).unwrap();
        assert!(back.l2_distance(&psi) < 1e-6);
        let pre = inverse_evolve(&model, &psi, 0.1, 1.4).unwrap();
        let again = evolve(&model, &pre, 0.1, 1.4).unwrap();
        assert!(again.l2_distance(&psi) < 1e-6);
    }

    #[test]
    fn composition_consistency() {
        let model = driven();
        let psi = gaussian(grid(), 0.5, -0.3, 0.5);
        let one = compose(&model, &psi, 0.0, 1.2, 1).unwrap();
        assert_eq!(one, evolve(&model, &psi, 0.0, 1.2).unwrap());
        let two = compose(&model, &psi, 0.0, 1.2, 2).unwrap();
        let three = compose(&model, &psi, 0.0, 1.2, 3).unwrap();
        assert!(two.l2_distance(&three) < 1e-8);
        assert!(two.l2_distance(&one) < 1e-6);
        assert!(compose(&model, &psi, 0.0, 1.2, 0).is_err());
        let caustic = PI / model.freqs.omega_width;
        assert!(matches!(
            evolve(&model, &psi, 0.0, caustic),
            Err(Error::Caustic { .. })
        ));
        assert!(compose(&model, &psi, 0.0, caustic, 2).is_ok());
    }

    #[test]
    fn grid_escape_detected() {
        let model = driven();
        let g = Grid::new(-6.0, 6.0, 256).unwrap();
        let psi = gaussian(g, 3.0, 4.0, 0.3);
        assert!(matches!(
            evolve(&model, &psi, 0.0, 0.8),
            Err(Error::Grid(_))
        ));
    }
}
