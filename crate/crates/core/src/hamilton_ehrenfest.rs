//! Moment transport for the quadratic Hartree equation.
//!
//! First and second moments form the 5-vector g = (P, X, σpp, σpx, σxx),
//! which obeys a linear ODE with constant matrix and harmonic forcing. The
//! centered Weyl moments α^{(j,l)} (j powers of Δp, l powers of Δx) of any
//! order evolve as the classical monomials p^j x^l under the width
//! oscillator with frequency Ω, because Weyl symbols of a quadratic
//! Hamiltonian are transported along classical flow.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

/// Largest accepted dt·max(Ω, Ω̃) for the RK4 integrator.
pub const MAX_STEP_PHASE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub p: f64,
    pub x: f64,
    pub sigma_pp: f64,
    pub sigma_px: f64,
    pub sigma_xx: f64,
}

impl TrajectoryState {
    pub fn as_vector(&self) -> [f64; 5] {
        [self.p, self.x, self.sigma_pp, self.sigma_px, self.sigma_xx]
    }

    pub fn from_vector(t: f64, g: [f64; 5]) -> Self {
        TrajectoryState {
            t,
            p: g[0],
            x: g[1],
            sigma_pp: g[2],
            sigma_px: g[3],
            sigma_xx: g[4],
        }
    }
}

/// Integration constants C1..C5 of the closed-form trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Constants(pub [f64; 5]);

impl Constants {
    pub fn c1(&self) -> f64 {
        self.0[0]
    }
    pub fn c2(&self) -> f64 {
        self.0[1]
    }
    pub fn c3(&self) -> f64 {
        self.0[2]
    }
    pub fn c4(&self) -> f64 {
        self.0[3]
    }
    pub fn c5(&self) -> f64 {
        self.0[4]
    }

    pub fn max_abs_diff(&self, other: &Constants) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Centered moments of order 3..=M, keyed by (momentum power, position power).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherMoments {
    pub order: usize,
    pub values: BTreeMap<(usize, usize), f64>,
}

impl HigherMoments {
    pub fn zeros(order: usize) -> Self {
        let mut values = BTreeMap::new();
        for total in 3..=order {
            for j in 0..=total {
                values.insert((j, total - j), 0.0);
            }
        }
        HigherMoments { order, values }
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.values.get(&(j, l)).copied().unwrap_or(0.0)
    }
}

/// Closed-form trajectory at time t.
pub fn closed_form(model: &Model, c: &Constants, t: f64) -> TrajectoryState {
    let m = model.params.m;
    let w = model.params.omega;
    let wc = model.freqs.omega_centroid;
    let ww = model.freqs.omega_width;
    let amp = model.drive_amplitude();
    let (sc, cc) = (wc * t).sin_cos();
    let (s2, c2) = (2.0 * ww * t).sin_cos();
    let x = c.c1() * sc + c.c2() * cc + amp * (w * t).cos();
    let p = m * wc * (c.c1() * cc - c.c2() * sc) - m * amp * w * (w * t).sin();
    let sigma_xx = c.c3() * s2 + c.c4() * c2 + c.c5();
    let sigma_px = m * ww * (c.c3() * c2 - c.c4() * s2);
    let sigma_pp = m * m * ww * ww * (-c.c3() * s2 - c.c4() * c2 + c.c5());
    TrajectoryState {
        t,
        p,
        x,
        sigma_pp,
        sigma_px,
        sigma_xx,
    }
}

/// Closed form evaluated at many times in parallel.
pub fn sample_closed_form(model: &Model, c: &Constants, times: &[f64]) -> Vec<TrajectoryState> {
    times
        .par_iter()
        .map(|&t| closed_form(model, c, t))
        .collect()
}

/// Constant matrix of ġ = A g + drive(t) for g = (P, X, σpp, σpx, σxx).
pub fn system_matrix(model: &Model) -> [[f64; 5]; 5] {
    let m = model.params.m;
    let wc2 = model.freqs.omega_centroid.powi(2);
    let ww2 = model.freqs.omega_width.powi(2);
    [
        [0.0, -m * wc2, 0.0, 0.0, 0.0],
        [1.0 / m, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -2.0 * m * ww2, 0.0],
        [0.0, 0.0, 1.0 / m, 0.0, -m * ww2],
        [0.0, 0.0, 0.0, 2.0 / m, 0.0],
    ]
}

pub fn drive(model: &Model, t: f64) -> [f64; 5] {
    let p = &model.params;
    [
        p.e_charge * p.e_field * (p.omega * t).cos(),
        0.0,
        0.0,
        0.0,
        0.0,
    ]
}

/// Constants whose closed-form trajectory passes through `g0` at time `s`.
pub fn constants_from_moments(model: &Model, g0: &TrajectoryState, s: f64) -> Constants {
    let m = model.params.m;
    let w = model.params.omega;
    let wc = model.freqs.omega_centroid;
    let ww = model.freqs.omega_width;
    let amp = model.drive_amplitude();

    let xh = g0.x - amp * (w * s).cos();
    let ph = (g0.p + m * amp * w * (w * s).sin()) / (m * wc);
    let (sc, cc) = (wc * s).sin_cos();
    let c1 = xh * sc + ph * cc;
    let c2 = xh * cc - ph * sc;

    let pp = g0.sigma_pp / (m * m * ww * ww);
    let c5 = 0.5 * (g0.sigma_xx + pp);
    let u = 0.5 * (g0.sigma_xx - pp);
    let v = g0.sigma_px / (m * ww);
    let (s2, c2w) = (2.0 * ww * s).sin_cos();
    let c3 = u * s2 + v * c2w;
    let c4 = u * c2w - v * s2;
    Constants([c1, c2, c3, c4, c5])
}

/// σpp σxx − σpx², conserved along every trajectory.
pub fn uncertainty_invariant(state: &TrajectoryState) -> f64 {
    state.sigma_pp * state.sigma_xx - state.sigma_px * state.sigma_px
}

/// Whether a state respects the Robertson–Schrödinger bound up to `slack`.
pub fn satisfies_uncertainty(state: &TrajectoryState, hbar: f64, slack: f64) -> bool {
    state.sigma_pp >= 0.0
        && state.sigma_xx >= 0.0
        && uncertainty_invariant(state) >= 0.25 * hbar * hbar - slack
}

/// Constants of the time-periodic n-th level: no free centroid or
/// breathing oscillation, width fixed at the Fock variance.
pub fn periodic_constants(model: &Model, n: usize) -> Constants {
    Constants([0.0, 0.0, 0.0, 0.0, model.fock_variance(n)])
}

/// Constants of the n-th trajectory-coherent state centred at (p0, x0) at t = 0.
pub fn coherent_constants(model: &Model, n: usize, p0: f64, x0: f64) -> Constants {
    let m = model.params.m;
    let ww = model.freqs.omega_width;
    let sxx = model.fock_variance(n);
    let g0 = TrajectoryState {
        t: 0.0,
        p: p0,
        x: x0,
        sigma_pp: m * m * ww * ww * sxx,
        sigma_px: 0.0,
        sigma_xx: sxx,
    };
    constants_from_moments(model, &g0, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub state: TrajectoryState,
    pub higher: HigherMoments,
}

struct Layout {
    keys: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
}

impl Layout {
    fn new(order: usize) -> Self {
        let keys: Vec<_> = HigherMoments::zeros(order).values.keys().copied().collect();
        let index = keys.iter().enumerate().map(|(i, k)| (*k, 5 + i)).collect();
        Layout { keys, index }
    }

    /// Index of α^{(j,l)} in the packed state, including order two.
    fn slot(&self, j: usize, l: usize) -> Option<usize> {
        match (j, l) {
            (2, 0) => Some(2),
            (1, 1) => Some(3),
            (0, 2) => Some(4),
            _ => self.index.get(&(j, l)).copied(),
        }
    }
}

fn rhs(model: &Model, layout: &Layout, t: f64, y: &[f64], out: &mut [f64]) {
    let a = system_matrix(model);
    let f = drive(model, t);
    for i in 0..5 {
        out[i] = f[i] + (0..5).map(|k| a[i][k] * y[k]).sum::<f64>();
    }
    let m = model.params.m;
    let ww2 = model.freqs.omega_width.powi(2);
    for (i, &(j, l)) in layout.keys.iter().enumerate() {
        let mut d = 0.0;
        if l > 0 {
            if let Some(s) = layout.slot(j + 1, l - 1) {
                d += l as f64 / m * y[s];
            }
        }
        if j > 0 {
            if let Some(s) = layout.slot(j - 1, l + 1) {
                d -= j as f64 * m * ww2 * y[s];
            }
        }
        out[5 + i] = d;
    }
}

/// Fixed-step RK4 integration of the order-M moment system from t0 to t1.
///
/// The step is shrunk so that an integer number of steps spans the interval.
/// Returns the initial sample followed by one sample per step.
pub fn integrate(
    model: &Model,
    g0: &TrajectoryState,
    higher0: &HigherMoments,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<TrajectorySample>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dt must be > 0 (got {dt})"
        )));
    }
    if higher0.order < 2 {
        return Err(Error::InvalidParameter(
            "moment order must be at least 2".into(),
        ));
    }
    let fmax = model.freqs.omega_width.max(model.freqs.omega_centroid);
    if dt * fmax > MAX_STEP_PHASE {
        return Err(Error::Step {
            value: dt * fmax,
            limit: MAX_STEP_PHASE,
        });
    }
    let layout = Layout::new(higher0.order);
    let dim = 5 + layout.keys.len();
    let mut y = vec![0.0; dim];
    y[..5].copy_from_slice(&g0.as_vector());
    for (i, key) in layout.keys.iter().enumerate() {
        y[5 + i] = higher0.values.get(key).copied().unwrap_or(0.0);
    }

    let span = t1 - t0;
    let n = ((span.abs() / dt).ceil() as usize).max(1);
    let h = span / n as f64;

    let pack = |t: f64, y: &[f64]| {
        let state = TrajectoryState::from_vector(t, [y[0], y[1], y[2], y[3], y[4]]);
        let values = layout
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, y[5 + i]))
            .collect();
        TrajectorySample {
            state,
            higher: HigherMoments {
                order: higher0.order,
                values,
            },
        }
    };

    let mut out = Vec::with_capacity(n + 1);
    out.push(pack(t0, &y));
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut tmp = vec![0.0; dim];
    for step in 0..n {
        let t = t0 + step as f64 * h;
        rhs(model, &layout, t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(model, &layout, t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(model, &layout, t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(model, &layout, t + h, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(pack(t0 + (step + 1) as f64 * h, &y));
    }
    Ok(out)
}
