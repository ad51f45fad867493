//! Equation parameters and the characteristic frequencies derived from them.
//!
//! The Hartree equation handled by this crate is
//!
//! ```text
//! iħ ∂tΨ = [ p̂²/2m + kx²/2 − eEx cos ωt + κ V(Ψ) ] Ψ,
//! V(Ψ)(x) = ½ ∫ (a x² + 2b x y + c y²) |Ψ(y)|² dy .
//! ```
//!
//! Because the interaction kernel is quadratic, the nonlocal term only sees
//! the norm and the first two position moments of Ψ. Centroid motion is
//! governed by `omega_centroid` (curvature k + κ̃(a+b)) and the second
//! moments by `omega_width` (curvature k + κ̃a).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative resonance tolerance: |Ω̃² − ω²| must exceed this times Ω̃².
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub k: f64,
    pub e_charge: f64,
    pub e_field: f64,
    /// Drive frequency ω.
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    pub hbar: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            m: 1.0,
            k: 1.0,
            e_charge: 1.0,
            e_field: 0.0,
            omega: 1.0,
            a: 0.0,
            b: 0.0,
            c: 0.0,
            kappa: 0.0,
            hbar: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("k", self.k),
            ("hbar", self.hbar),
            ("omega", self.omega),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0 (got {value})"
                )));
            }
        }
        let finite = [
            ("e", self.e_charge),
            ("E", self.e_field),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("kappa", self.kappa),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequencies {
    /// Effective coupling κ̃ = κ‖Ψ‖².
    pub kappa_eff: f64,
    /// √(k/m).
    pub omega0: f64,
    pub omega_nl_a: f64,
    pub omega_nl_ab: f64,
    pub omega_nl_abc: f64,
    pub zeta_a: f64,
    pub zeta_ab: f64,
    pub zeta_abc: f64,
    /// Ω: frequency of the second-moment (width) dynamics.
    pub omega_width: f64,
    /// Ω̃: frequency of the centroid dynamics.
    pub omega_centroid: f64,
}

/// Sign with sign(0) = 0.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn nonlinear_frequency(kappa_eff: f64, u: f64, m: f64) -> (f64, f64) {
    let zeta = sign(kappa_eff * u);
    let omega_nl = ((kappa_eff * u).abs() / m).sqrt();
    (omega_nl, zeta)
}

impl Frequencies {
    /// ζ(u)·ω_nl²(u) rebuilt from the stored sign/magnitude pair.
    pub fn shift_a(&self) -> f64 {
        self.zeta_a * self.omega_nl_a * self.omega_nl_a
    }

    pub fn shift_ab(&self) -> f64 {
        self.zeta_ab * self.omega_nl_ab * self.omega_nl_ab
    }

    pub fn shift_abc(&self) -> f64 {
        self.zeta_abc * self.omega_nl_abc * self.omega_nl_abc
    }

    /// ω₀² + ζ(a+2b+c)ω_nl²(a+2b+c): curvature seen by the mean-field energy.
    pub fn omega_energy_sq(&self) -> f64 {
        self.omega0 * self.omega0 + self.shift_abc()
    }
}

pub fn derive_frequencies(params: &ModelParams, norm_sq: f64) -> Result<Frequencies> {
    params.validate()?;
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "norm_sq must be > 0 (got {norm_sq})"
        )));
    }
    let m = params.m;
    let kappa_eff = params.kappa * norm_sq;
    let omega0 = (params.k / m).sqrt();
    let (omega_nl_a, zeta_a) = nonlinear_frequency(kappa_eff, params.a, m);
    let (omega_nl_ab, zeta_ab) = nonlinear_frequency(kappa_eff, params.a + params.b, m);
    let (omega_nl_abc, zeta_abc) =
        nonlinear_frequency(kappa_eff, params.a + 2.0 * params.b + params.c, m);

    let width_sq = omega0 * omega0 + zeta_a * omega_nl_a * omega_nl_a;
    let centroid_sq = omega0 * omega0 + zeta_ab * omega_nl_ab * omega_nl_ab;
    if !(width_sq > 0.0) {
        return Err(Error::Regime(format!(
            "Ω² = ω₀² + κ̃a/m = {width_sq} violates Ω² > 0"
        )));
    }
    if !(centroid_sq > 0.0) {
        return Err(Error::Regime(format!(
            "Ω̃² = ω₀² + κ̃(a+b)/m = {centroid_sq} violates Ω̃² > 0"
        )));
    }
    let detuning = (centroid_sq - params.omega * params.omega).abs();
    let tolerance = RESONANCE_TOLERANCE * centroid_sq;
    if detuning < tolerance {
        return Err(Error::Resonance {
            detuning,
            tolerance,
        });
    }
    Ok(Frequencies {
        kappa_eff,
        omega0,
        omega_nl_a,
        omega_nl_ab,
        omega_nl_abc,
        zeta_a,
        zeta_ab,
        zeta_abc,
        omega_width: width_sq.sqrt(),
        omega_centroid: centroid_sq.sqrt(),
    })
}

/// Parameters together with frequencies derived for unit-norm states.
///
/// Incoming states are treated as normalized, so κ̃ = κ throughout; every
/// operation taking a `Model` is positively homogeneous in the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: ModelParams,
    pub freqs: Frequencies,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let freqs = derive_frequencies(&params, 1.0)?;
        Ok(Model { params, freqs })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.params.omega
    }

    /// Amplitude eE / (m(Ω̃² − ω²)) of the driven centroid oscillation.
    pub fn drive_amplitude(&self) -> f64 {
        let p = &self.params;
        p.e_charge * p.e_field / (p.m * self.detuning_sq())
    }

    /// Ω̃² − ω².
    pub fn detuning_sq(&self) -> f64 {
        self.freqs.omega_centroid.powi(2) - self.params.omega.powi(2)
    }

    /// Position variance ħ(2n+1)/(2mΩ) of the n-th Fock state.
    pub fn fock_variance(&self, n: usize) -> f64 {
        self.params.hbar * (2 * n + 1) as f64 / (2.0 * self.params.m * self.freqs.omega_width)
    }
}
