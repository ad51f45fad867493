//! Symmetry operators Â = U ∘ â ∘ U⁻¹ built from linear operators â acting
//! on initial data, with the ladder and displacement families as the main
//! instances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_states::fock_state_checked;
use crate::hamilton_ehrenfest::{coherent_constants, Constants};
use crate::model::Model;
use crate::propagator::{compose_auto, constants_for};
use crate::wavefunction::{apply_shifted_momentum, Grid, WaveFunction};

/// Results with relative norm below this are treated as the zero state.
pub const ZERO_STATE_TOLERANCE: f64 = 1e-8;

/// Linear operator on states at the reference time 0.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearKernelOp {
    Identity,
    /// â⁺(0) = (Δp̂ + imΩΔx)/√(2ħmΩ) around (p0, x0).
    LadderPlus {
        p0: f64,
        x0: f64,
    },
    /// â(0) = (Δp̂ − imΩΔx)/√(2ħmΩ) around (p0, x0).
    LadderMinus {
        p0: f64,
        x0: f64,
    },
    /// exp(αâ⁺ − α*â) around (p0, x0).
    Displacement {
        alpha: Complex64,
        p0: f64,
        x0: f64,
    },
    /// ψ ↦ f·ψ + g·(−iħ ψ'), with f and g sampled on the state's grid.
    Custom {
        multiply: Vec<Complex64>,
        momentum: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl DisplacementParams {
    pub fn new(model: &Model, alpha: Complex64) -> Self {
        let (m, hbar) = (model.params.m, model.params.hbar);
        let w = model.freqs.omega_width;
        let beta = (alpha - alpha.conj()) / (2.0 * hbar * m * w).sqrt();
        let gamma =
            Complex64::new(0.0, 1.0) * (alpha + alpha.conj()) * (m * w / (2.0 * hbar)).sqrt();
        DisplacementParams { alpha, beta, gamma }
    }

    /// Momentum kick α₁√(2mΩħ).
    pub fn momentum_shift(&self, model: &Model) -> f64 {
        let (m, hbar) = (model.params.m, model.params.hbar);
        self.alpha.re * (2.0 * m * model.freqs.omega_width * hbar).sqrt()
    }

    /// Position shift −α₂√(2ħ/(mΩ)).
    pub fn position_shift(&self, model: &Model) -> f64 {
        let (m, hbar) = (model.params.m, model.params.hbar);
        -self.alpha.im * (2.0 * hbar / (m * model.freqs.omega_width)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderSign {
    Plus,
    Minus,
}

pub fn ladder_build(sign: LadderSign, p0: f64, x0: f64) -> LinearKernelOp {
    match sign {
        LadderSign::Plus => LinearKernelOp::LadderPlus { p0, x0 },
        LadderSign::Minus => LinearKernelOp::LadderMinus { p0, x0 },
    }
}

fn ladder(model: &Model, psi: &WaveFunction, p0: f64, x0: f64, sign: f64) -> Result<WaveFunction> {
    let (m, hbar) = (model.params.m, model.params.hbar);
    let w = model.freqs.omega_width;
    let norm = 1.0 / (2.0 * hbar * m * w).sqrt();
    let dp = apply_shifted_momentum(psi, 1, hbar, p0)?;
    let grid = psi.grid;
    let values = dp
        .values
        .iter()
        .zip(&psi.values)
        .enumerate()
        .map(|(i, (d, v))| {
            let dx = grid.point(i) - x0;
            (d + Complex64::new(0.0, sign * m * w * dx) * v) * norm
        })
        .collect();
    Ok(WaveFunction { grid, values })
}

/// D₀(α)ψ = e^{−iħβγ/2} e^{γΔx} e^{βΔp̂} ψ, with the momentum exponential
/// applied as an exact spectral translation.
pub fn displace(
    model: &Model,
    psi: &WaveFunction,
    alpha: Complex64,
    p0: f64,
    x0: f64,
) -> WaveFunction {
    let dp = DisplacementParams::new(model, alpha);
    let hbar = model.params.hbar;
    let shift = -dp.position_shift(model);
    let phase = (Complex64::new(0.0, -0.5 * hbar) * dp.beta * dp.gamma - dp.beta * p0).exp();
    let gamma = dp.gamma;
    psi.translate(shift)
        .multiply(|x| phase * (gamma * (x - x0)).exp())
}

/// Apply â to a state at the reference time.
pub fn apply_op(model: &Model, op: &LinearKernelOp, psi: &WaveFunction) -> Result<WaveFunction> {
    match op {
        LinearKernelOp::Identity => Ok(psi.clone()),
        LinearKernelOp::LadderPlus { p0, x0 } => ladder(model, psi, *p0, *x0, 1.0),
        LinearKernelOp::LadderMinus { p0, x0 } => ladder(model, psi, *p0, *x0, -1.0),
        LinearKernelOp::Displacement { alpha, p0, x0 } => {
            Ok(displace(model, psi, *alpha, *p0, *x0))
        }
        LinearKernelOp::Custom { multiply, momentum } => {
            let n = psi.grid.n_points;
            if multiply.len() != n || momentum.len() != n {
                return Err(Error::Grid(
                    "custom operator samples do not match the grid".into(),
                ));
            }
            let dp = apply_shifted_momentum(psi, 1, model.params.hbar, 0.0)?;
            let values = (0..n)
                .map(|i| multiply[i] * psi.values[i] + momentum[i] * dp.values[i])
                .collect();
            Ok(WaveFunction {
                grid: psi.grid,
                values,
            })
        }
    }
}

/// Â(Ψ) = U(t, â U⁻¹(t, Ψ)) with reference time 0. The outer evolution uses
/// constants recomputed from â φ. Returns `None` for the constants when the
/// image is the zero state.
pub fn symmetry_apply(
    model: &Model,
    op: &LinearKernelOp,
    psi: &WaveFunction,
    t: f64,
) -> Result<(WaveFunction, Option<Constants>)> {
    let initial = if t == 0.0 {
        psi.clone()
    } else {
        compose_auto(model, psi, t, 0.0)?
    };
    let image = apply_op(model, op, &initial)?;
    if image.norm() <= ZERO_STATE_TOLERANCE * initial.norm() {
        return Ok((WaveFunction::zeros(psi.grid), None));
    }
    image
        .check_concentrated()
        .map_err(|e| Error::Class(e.to_string()))?;
    image
        .check_resolved()
        .map_err(|e| Error::Class(e.to_string()))?;
    let constants = constants_for(model, &image, 0.0)?;
    let out = if t == 0.0 {
        image
    } else {
        compose_auto(model, &image, 0.0, t)?
    };
    Ok((out, Some(constants)))
}

/// Closed form of D(α) applied to the ground trajectory-coherent state
/// centred at (p0, x0): e^{iφ_α} Φ₀(x, t, 𝔤(t, 𝔠_α)).
pub fn coherent_state(
    model: &Model,
    grid: &Grid,
    alpha: Complex64,
    p0: f64,
    x0: f64,
    t: f64,
) -> Result<WaveFunction> {
    let dp = DisplacementParams::new(model, alpha);
    let p_alpha = p0 + dp.momentum_shift(model);
    let x_alpha = x0 + dp.position_shift(model);
    let phase = alpha.re * alpha.im + p_alpha * (x_alpha - x0) / model.params.hbar;
    let c = coherent_constants(model, 0, p_alpha, x_alpha);
    let psi = fock_state_checked(model, grid, 0, &c, t)?;
    Ok(psi.scaled(Complex64::from_polar(1.0, phase)))
}

pub fn displacement_apply(
    model: &Model,
    grid: &Grid,
    alpha: Complex64,
    p0: f64,
    x0: f64,
    t: f64,
) -> Result<WaveFunction> {
    coherent_state(model, grid, alpha, p0, x0, t)
}

/// Generator b̂ of a one-parameter family α ↦ exp(α b̂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyGenerator {
    Zero,
    /// b̂ = d â⁺ − d* â, so that exp(α b̂) = D₀(α d) for real α.
    Displacement {
        direction: Complex64,
        p0: f64,
        x0: f64,
    },
}

impl FamilyGenerator {
    pub fn exponential(&self, alpha: f64) -> LinearKernelOp {
        match *self {
            FamilyGenerator::Zero => LinearKernelOp::Identity,
            FamilyGenerator::Displacement { direction, p0, x0 } => LinearKernelOp::Displacement {
                alpha: direction * alpha,
                p0,
                x0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorValue {
    pub derivative: WaveFunction,
    /// Richardson estimate |D_h − D_{h/2}|/3 in L².
    pub error_estimate: f64,
}

/// d/dα B̂(α, Ψ)|_{α=0} by a central difference with step h/2, where
/// B̂(α, ·) = U ∘ exp(α b̂) ∘ U⁻¹. The result is a tangent vector, not a
/// symmetry operator image.
pub fn family_generator(
    model: &Model,
    generator: &FamilyGenerator,
    psi: &WaveFunction,
    t: f64,
    h: f64,
    tolerance: f64,
) -> Result<GeneratorValue> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be > 0 (got {h})"
        )));
    }
    if let FamilyGenerator::Zero = generator {
        return Ok(GeneratorValue {
            derivative: WaveFunction::zeros(psi.grid),
            error_estimate: 0.0,
        });
    }
    let family = |a: f64| symmetry_apply(model, &generator.exponential(a), psi, t).map(|(w, _)| w);
    let central = |step: f64| -> Result<WaveFunction> {
        let plus = family(step)?;
        let minus = family(-step)?;
        Ok(plus.sub(&minus).scaled(Complex64::new(0.5 / step, 0.0)))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let error_estimate = fine.l2_distance(&coarse) / 3.0;
    if error_estimate > tolerance {
        return Err(Error::Tolerance {
            estimate: error_estimate,
            requested: tolerance,
        });
    }
    Ok(GeneratorValue {
        derivative: fine,
        error_estimate,
    })
}
