//! The one-parameter family of nonclassical-teleportation witnesses: the
//! operator table, evaluation on assemblages, closed forms for the ideal and
//! noisy channel families, and θ-optimization.
//!
//! A witness value below zero certifies that the assemblage cannot come
//! from a classical (separable-state) teleportation channel.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{check_range, TelecertError};
use crate::linalg::ComplexMatrix;
use crate::noise_optics::NoiseParams;
use crate::states::{ket, pauli, InputLabel, PauliAxis};
use crate::teleport::{Assemblage, OutcomeLabel};

/// Witness values below this threshold count as a nonclassicality
/// certificate.
pub const NONCLASSICAL_TOL: f64 = 1e-12;

/// Lower edge of the open θ domain used by the numeric minimizer.
pub const THETA_FLOOR: f64 = 1e-6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Witness operators F_{a|ψx}(θ) on Bob's qubit for one θ. Only the a = 0
/// (singlet) outcome carries nonzero operators.
#[derive(Debug, Clone)]
pub struct WitnessFamily {
    theta: f64,
    operators: Vec<(InputLabel, ComplexMatrix)>,
}

impl WitnessFamily {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Operator for the singlet outcome and the given input.
    pub fn singlet_operator(&self, input: InputLabel) -> &ComplexMatrix {
        &self
            .operators
            .iter()
            .find(|(l, _)| *l == input)
            .expect("all six inputs present")
            .1
    }
}

/// Scalar witness evaluation outcome.
#[derive(Debug, Clone, Copy)]
pub struct WitnessResult {
    pub theta: f64,
    pub value: f64,
    pub nonclassical: bool,
}

/// Builds the operator table for one θ ∈ (0, π/2]:
/// F_{0|±x} = ∓2sinθ·σ_x, F_{0|±y} = ∓2sinθ·σ_y,
/// F_{0||0⟩} = 4(1-cosθ)|1⟩⟨1|, F_{0||1⟩} = 4(1+cosθ)|0⟩⟨0|.
pub fn witness_operators(theta: f64) -> Result<WitnessFamily, TelecertError> {
    check_theta(theta)?;
    let s = theta.sin();
    let cth = theta.cos();
    let sx = pauli(PauliAxis::X);
    let sy = pauli(PauliAxis::Y);
    let operators = vec![
        (InputLabel::PlusX, sx.scale(c(-2.0 * s, 0.0))),
        (InputLabel::MinusX, sx.scale(c(2.0 * s, 0.0))),
        (InputLabel::PlusY, sy.scale(c(-2.0 * s, 0.0))),
        (InputLabel::MinusY, sy.scale(c(2.0 * s, 0.0))),
        (
            InputLabel::PlusZ,
            ComplexMatrix::projector(&ket(1)).scale(c(4.0 * (1.0 - cth), 0.0)),
        ),
        (
            InputLabel::MinusZ,
            ComplexMatrix::projector(&ket(0)).scale(c(4.0 * (1.0 + cth), 0.0)),
        ),
    ];
    Ok(WitnessFamily { theta, operators })
}

fn check_theta(theta: f64) -> Result<(), TelecertError> {
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(TelecertError::ParameterOutOfRange {
            name: "theta",
            value: theta,
            lo: 0.0,
            hi: FRAC_PI_2,
        });
    }
    Ok(())
}

/// Evaluates W = Σ_{a,x} p(a|ψx)·tr[F_{a|ψx} ρ_{a|ψx}] on an assemblage
/// over the six Pauli inputs and the singlet-resolving partial BSM. Uses
/// the unnormalized members p·ρ, so null outcomes contribute zero without
/// any division.
pub fn evaluate_witness(asm: &Assemblage, theta: f64) -> Result<WitnessResult, TelecertError> {
    if asm.inputs().len() != 6 {
        return Err(TelecertError::AssemblageShape(format!(
            "expected 6 inputs, got {}",
            asm.inputs().len()
        )));
    }
    if !asm.outcomes().contains(&OutcomeLabel::PsiMinus) {
        return Err(TelecertError::AssemblageShape(
            "assemblage lacks the singlet outcome".into(),
        ));
    }
    let family = witness_operators(theta)?;
    let mut value = 0.0;
    for input in InputLabel::ALL {
        let member = asm
            .get(OutcomeLabel::PsiMinus, input)
            .ok_or_else(|| TelecertError::AssemblageShape(format!("missing input {}", input.name())))?;
        let f = family.singlet_operator(input);
        value += f.matmul(&member.unnormalized).trace().re;
    }
    Ok(WitnessResult {
        theta,
        value,
        nonclassical: value < -NONCLASSICAL_TOL,
    })
}

/// Closed form for the ideal family: -2γsinθ + 2(1-γ)(1-cosθ).
pub fn witness_ideal_closed_form(gamma: f64, theta: f64) -> f64 {
    -2.0 * gamma * theta.sin() + 2.0 * (1.0 - gamma) * (1.0 - theta.cos())
}

/// γ above which the witness at this θ goes negative:
/// (1-cosθ)/(1-cosθ+sinθ).
pub fn violation_threshold_gamma(theta: f64) -> Result<f64, TelecertError> {
    check_theta(theta)?;
    let omc = 1.0 - theta.cos();
    Ok(omc / (omc + theta.sin()))
}

/// θ* with tanθ* = γ/(1-γ), the largest-violation witness for the ideal
/// family; γ = 1 maps to π/2 by limit.
pub fn optimal_theta_ideal(gamma: f64) -> Result<f64, TelecertError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    if gamma >= 1.0 {
        return Ok(FRAC_PI_2);
    }
    Ok((gamma / (1.0 - gamma)).atan())
}

/// Minimal witness value over θ for the ideal family:
/// 2(1-γ)(1 - √(1 + (γ/(1-γ))²)); the γ = 1 limit is -2.
pub fn witness_min_ideal(gamma: f64) -> Result<f64, TelecertError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    if gamma >= 1.0 {
        return Ok(-2.0);
    }
    let r = gamma / (1.0 - gamma);
    Ok(2.0 * (1.0 - gamma) * (1.0 - (1.0 + r * r).sqrt()))
}

/// Closed form on the noisy family (V convention):
/// 1 + V - 2γV - (1-γ)(1+V)cosθ - 2γ(1-2δ)²V·sinθ.
pub fn witness_noisy_closed_form(gamma: f64, theta: f64, params: NoiseParams) -> f64 {
    let NoiseParams { v, delta } = params;
    let coh = (1.0 - 2.0 * delta).powi(2);
    1.0 + v
        - 2.0 * gamma * v
        - (1.0 - gamma) * (1.0 + v) * theta.cos()
        - 2.0 * gamma * coh * v * theta.sin()
}

/// Minimizing θ for the noisy closed form:
/// arctan[2(1-2δ)²Vγ / ((1+V)(1-γ))].
pub fn theta_min_noisy(gamma: f64, params: NoiseParams) -> Result<f64, TelecertError> {
    if gamma >= 1.0 {
        return Err(TelecertError::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    check_range("gamma", gamma, 0.0, 1.0)?;
    let NoiseParams { v, delta } = params;
    let num = 2.0 * (1.0 - 2.0 * delta).powi(2) * v * gamma;
    let den = (1.0 + v) * (1.0 - gamma);
    Ok((num / den).atan())
}

/// Golden-section search for the witness minimum over θ ∈ (1e-6, π/2],
/// absolute tolerance 1e-8 in θ.
pub fn minimize_witness_numeric(asm: &Assemblage) -> Result<WitnessResult, TelecertError> {
    // probe once up front so shape errors surface before the search
    evaluate_witness(asm, FRAC_PI_2)?;
    let f = |theta: f64| evaluate_witness(asm, theta).expect("shape validated").value;
    let (theta, value) = golden_section_min(f, THETA_FLOOR, FRAC_PI_2, 1e-8);
    Ok(WitnessResult {
        theta,
        value,
        nonclassical: value < -NONCLASSICAL_TOL,
    })
}

/// Golden-section minimization of a unimodal scalar function on [a, b] to
/// absolute x-tolerance `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5)-1)/2
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // include the endpoints: the minimum may sit on the boundary
    let (mut best_x, mut best_f) = if f(a) < f(b) { (a, f(a)) } else { (b, f(b)) };
    while (b - a) > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (xm, fm) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if fm < best_f {
        best_x = xm;
        best_f = fm;
    }
    (best_x, best_f)
}
