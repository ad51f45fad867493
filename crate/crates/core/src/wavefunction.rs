//! Sampled wavefunctions on a uniform periodic grid.
//!
//! Integrals use the trapezoid rule h·Σ, which for smooth functions that
//! decay before the grid edge converges spectrally. Momentum operators act
//! through FFT multipliers.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamilton_ehrenfest::TrajectoryState;

/// Allowed fraction of spectral mass in the top band of wavenumbers.
pub const ALIAS_TOLERANCE: f64 = 1e-6;
/// Allowed edge amplitude relative to the peak.
pub const EDGE_TOLERANCE: f64 = 1e-8;
/// Wavenumbers above this fraction of Nyquist count as spectral tail.
const TAIL_BAND: f64 = 0.9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft(values: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(values.len()));
    plan.process(values);
}

/// Inverse FFT including the 1/N factor.
pub(crate) fn ifft(values: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(values.len()));
    plan.process(values);
    let scale = 1.0 / values.len() as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Grid(format!(
                "need x_max > x_min (got [{x_min}, {x_max}])"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n_points must be a power of two >= 16 (got {n_points})"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Symmetric grid [center − half_width, center + half_width].
    pub fn around(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Grid::new(center - half_width, center + half_width, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        (0..n)
            .map(|i| {
                if i < n / 2 {
                    i as f64 * dk
                } else {
                    (i as f64 - n as f64) * dk
                }
            })
            .collect()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Grid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Grid("non-finite sample".into()));
        }
        Ok(WaveFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        WaveFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        WaveFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        WaveFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// ⟨self, other⟩ with the conjugate on `self`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.spacing()
    }

    pub fn add(&self, other: &WaveFunction) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        WaveFunction {
            grid: self.grid,
            values,
        }
    }

    pub fn sub(&self, other: &WaveFunction) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        WaveFunction {
            grid: self.grid,
            values,
        }
    }

    pub fn l2_distance(&self, other: &WaveFunction) -> f64 {
        self.sub(other).norm()
    }

    pub fn sup_distance(&self, other: &WaveFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product with a function of x.
    pub fn multiply(&self, f: impl Fn(f64) -> Complex64) -> Self {
        let grid = self.grid;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * f(grid.point(i)))
            .collect();
        WaveFunction { grid, values }
    }

    /// Largest edge amplitude relative to the peak, over the outer 5% of nodes.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        let edge = (n / 40).max(1);
        let head = self.values[..edge].iter();
        let tail = self.values[n - edge..].iter();
        head.chain(tail).map(|v| v.norm()).fold(0.0, f64::max) / peak
    }

    pub fn check_concentrated(&self) -> Result<()> {
        let ratio = self.edge_ratio();
        if ratio >= EDGE_TOLERANCE {
            return Err(Error::Grid(format!(
                "edge amplitude {ratio:e} of peak exceeds {EDGE_TOLERANCE:e}; state escapes the grid"
            )));
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        fft(&mut buf);
        buf
    }

    /// Fraction of spectral mass above 90% of the Nyquist wavenumber.
    pub fn spectral_tail(&self) -> f64 {
        let spec = self.spectrum();
        let k = self.grid.wavenumbers();
        let cut = TAIL_BAND * self.grid.nyquist();
        let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = spec
            .iter()
            .zip(&k)
            .filter(|(_, k)| k.abs() > cut)
            .map(|(v, _)| v.norm_sqr())
            .sum();
        tail / total
    }

    pub fn check_resolved(&self) -> Result<()> {
        let tail = self.spectral_tail();
        if tail > ALIAS_TOLERANCE {
            return Err(Error::Alias {
                tail,
                limit: ALIAS_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Apply a multiplier m(k) in Fourier space.
    pub fn fourier_multiply(&self, f: impl Fn(f64) -> Complex64) -> Self {
        let mut buf = self.spectrum();
        for (v, k) in buf.iter_mut().zip(self.grid.wavenumbers()) {
            *v *= f(k);
        }
        ifft(&mut buf);
        WaveFunction {
            grid: self.grid,
            values: buf,
        }
    }

    /// x ↦ ψ(x + d), exact for band-limited periodic data.
    pub fn translate(&self, d: f64) -> Self {
        self.fourier_multiply(|k| Complex64::from_polar(1.0, k * d))
    }
}

/// (−iħ d/dx − shift)^order ψ through Fourier differentiation.
///
/// The Nyquist mode is dropped, since its derivative is not defined on the
/// periodic grid.
pub fn apply_shifted_momentum(
    psi: &WaveFunction,
    order: usize,
    hbar: f64,
    shift: f64,
) -> Result<WaveFunction> {
    psi.check_resolved()?;
    let n = psi.grid.n_points;
    let mut buf = psi.spectrum();
    let k = psi.grid.wavenumbers();
    for (i, v) in buf.iter_mut().enumerate() {
        if i == n / 2 && order > 0 {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= (hbar * k[i] - shift).powi(order as i32);
        }
    }
    ifft(&mut buf);
    Ok(WaveFunction {
        grid: psi.grid,
        values: buf,
    })
}

pub fn apply_momentum(psi: &WaveFunction, order: usize, hbar: f64) -> Result<WaveFunction> {
    apply_shifted_momentum(psi, order, hbar, 0.0)
}

/// Norm, means and centered Weyl-ordered moments of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub norm_sq: f64,
    pub p_mean: f64,
    pub x_mean: f64,
    pub order: usize,
    /// α^{(j,l)}: j powers of Δp, l powers of Δx, for j + l ≤ order.
    pub centered: BTreeMap<(usize, usize), f64>,
}

impl MomentSet {
    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.centered.get(&(j, l)).copied().unwrap_or(0.0)
    }

    pub fn sigma_xx(&self) -> f64 {
        self.get(0, 2)
    }

    pub fn sigma_pp(&self) -> f64 {
        self.get(2, 0)
    }

    pub fn sigma_px(&self) -> f64 {
        self.get(1, 1)
    }

    pub fn trajectory_state(&self, t: f64) -> TrajectoryState {
        TrajectoryState {
            t,
            p: self.p_mean,
            x: self.x_mean,
            sigma_pp: self.sigma_pp(),
            sigma_px: self.sigma_px(),
            sigma_xx: self.sigma_xx(),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moments of ψ/‖ψ‖ up to total order `order`.
///
/// Weyl ordering uses McCoy's identity
/// {Δx^l Δp^j}_W = 2^{−l} Σ_k C(l,k) Δx^k Δp^j Δx^{l−k}, which is exact for
/// every order, so α^{(j,l)} is real up to quadrature noise.
pub fn moments(psi: &WaveFunction, order: usize, hbar: f64) -> Result<MomentSet> {
    let norm_sq = psi.norm_sq();
    if !(norm_sq > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let psi = psi.normalized()?;
    psi.check_resolved()?;
    let grid = psi.grid;
    let xs = grid.points();

    let x_mean = grid.spacing()
        * psi
            .values
            .iter()
            .zip(&xs)
            .map(|(v, x)| v.norm_sqr() * x)
            .sum::<f64>();
    let p_psi = apply_momentum(&psi, 1, hbar)?;
    let p_mean = psi.inner(&p_psi).re;

    // powers[r] = Δx^r ψ; applied[r][j] = Δp^j Δx^r ψ.
    let mut powers = vec![psi.clone()];
    for r in 1..=order {
        let prev = &powers[r - 1];
        powers.push(WaveFunction {
            grid,
            values: prev
                .values
                .iter()
                .zip(&xs)
                .map(|(v, x)| v * (x - x_mean))
                .collect(),
        });
    }
    let mut applied: Vec<Vec<WaveFunction>> = Vec::with_capacity(order + 1);
    for (r, power) in powers.iter().enumerate() {
        let row = (0..=(order - r))
            .map(|j| apply_shifted_momentum(power, j, hbar, p_mean))
            .collect::<Result<Vec<_>>>()?;
        applied.push(row);
    }

    let mut centered = BTreeMap::new();
    for total in 0..=order {
        for (j, l) in (0..=total).map(|j| (j, total - j)) {
            let value = match (j, l) {
                (0, 0) => 1.0,
                (1, 0) | (0, 1) => 0.0,
                _ => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, power) in powers.iter().enumerate().take(l + 1) {
                        acc += binomial(l, k) * power.inner(&applied[l - k][j]);
                    }
                    acc.re / 2f64.powi(l as i32)
                }
            };
            centered.insert((j, l), value);
        }
    }
    Ok(MomentSet {
        norm_sq,
        p_mean,
        x_mean,
        order,
        centered,
    })
}

/// The unsymmetrized expectation ⟨Δp Δx⟩ of ψ/‖ψ‖.
pub fn ordered_momentum_position(psi: &WaveFunction, hbar: f64) -> Result<Complex64> {
    let m = moments(psi, 1, hbar)?;
    let psi = psi.normalized()?;
    let dx = psi.multiply(|x| Complex64::new(x - m.x_mean, 0.0));
    let pdx = apply_shifted_momentum(&dx, 1, hbar, m.p_mean)?;
    Ok(psi.inner(&pdx))
}
