//! Teleportation assemblages: Alice measures the input system A₀ together
//! with her half A of the channel state, leaving Bob's qubit B in a
//! conditional state per outcome. Tensor order is (A₀, A, B) throughout.

use num_complex::Complex64;

use crate::error::TelecertError;
use crate::linalg::{partial_trace_matrix, ComplexMatrix, DensityMatrix};
use crate::states::{psi_plus, singlet, InputEnsemble, InputLabel};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Probability below which an outcome is treated as null: no conditional
/// state is formed and downstream sums use the unnormalized member.
pub const NULL_OUTCOME_TOL: f64 = 1e-12;

/// Labels for the partial Bell-state measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeLabel {
    /// Projection onto the singlet |ψ⁻⟩.
    PsiMinus,
    /// Projection onto the triplet |ψ⁺⟩ (three-outcome variant only).
    PsiPlus,
    /// Everything the apparatus cannot resolve.
    Rest,
}

impl OutcomeLabel {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeLabel::PsiMinus => "psi-",
            OutcomeLabel::PsiPlus => "psi+",
            OutcomeLabel::Rest => "rest",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [OutcomeLabel::PsiMinus, OutcomeLabel::PsiPlus, OutcomeLabel::Rest]
            .into_iter()
            .find(|o| o.name() == s)
    }
}

/// Complete measurement on the 4-dimensional A₀A space.
#[derive(Debug, Clone)]
pub struct Measurement {
    operators: Vec<(OutcomeLabel, ComplexMatrix)>,
}

impl Measurement {
    /// Validates positivity (1e-10) and completeness (operators sum to 𝟙₄).
    pub fn new(operators: Vec<(OutcomeLabel, ComplexMatrix)>) -> Result<Self, TelecertError> {
        let mut sum = ComplexMatrix::zeros(4, 4);
        for (label, op) in &operators {
            if op.rows() != 4 || op.cols() != 4 {
                return Err(TelecertError::Shape(format!(
                    "measurement operator {} must be 4x4",
                    label.name()
                )));
            }
            if !op.is_hermitian(1e-10) {
                return Err(TelecertError::NotHermitian);
            }
            let min = op.hermitian_eigenvalues()?[0];
            if min < -1e-10 {
                return Err(TelecertError::NotPositive(min));
            }
            sum = sum.add(op);
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(4)) > 1e-10 {
            return Err(TelecertError::Shape(
                "measurement operators do not sum to identity".into(),
            ));
        }
        Ok(Self { operators })
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeLabel, &ComplexMatrix)> {
        self.operators.iter().map(|(l, m)| (*l, m))
    }

    pub fn outcomes(&self) -> Vec<OutcomeLabel> {
        self.operators.iter().map(|(l, _)| *l).collect()
    }
}

/// Two-outcome partial BSM {|ψ⁻⟩⟨ψ⁻|, 𝟙 - |ψ⁻⟩⟨ψ⁻|} used by the witness.
pub fn partial_bsm_two_outcome() -> Measurement {
    let proj = ComplexMatrix::projector(&singlet());
    let rest = ComplexMatrix::identity(4).sub(&proj);
    Measurement::new(vec![
        (OutcomeLabel::PsiMinus, proj),
        (OutcomeLabel::Rest, rest),
    ])
    .expect("projective decomposition is complete")
}

/// Three-outcome variant {|ψ⁻⟩⟨ψ⁻|, |ψ⁺⟩⟨ψ⁺|, rest} used for fidelity,
/// matching an apparatus that resolves ψ± but not φ±.
pub fn partial_bsm_three_outcome() -> Measurement {
    let minus = ComplexMatrix::projector(&singlet());
    let plus = ComplexMatrix::projector(&psi_plus());
    let rest = ComplexMatrix::identity(4).sub(&minus).sub(&plus);
    Measurement::new(vec![
        (OutcomeLabel::PsiMinus, minus),
        (OutcomeLabel::PsiPlus, plus),
        (OutcomeLabel::Rest, rest),
    ])
    .expect("projective decomposition is complete")
}

/// One (outcome, input) cell of an assemblage.
#[derive(Debug, Clone)]
pub struct AssemblageMember {
    pub outcome: OutcomeLabel,
    pub input: InputLabel,
    /// p(a|ψx).
    pub probability: f64,
    /// Unnormalized member p·ρ on Bob's qubit.
    pub unnormalized: ComplexMatrix,
    /// Normalized conditional state; absent for null outcomes.
    pub conditional: Option<DensityMatrix>,
}

/// The set {p(a|ψx), ρ_{a|ψx}} Bob receives for each input/outcome pair.
#[derive(Debug, Clone)]
pub struct Assemblage {
    members: Vec<AssemblageMember>,
    outcomes: Vec<OutcomeLabel>,
    inputs: Vec<InputLabel>,
}

impl Assemblage {
    pub fn members(&self) -> &[AssemblageMember] {
        &self.members
    }

    pub fn outcomes(&self) -> &[OutcomeLabel] {
        &self.outcomes
    }

    pub fn inputs(&self) -> &[InputLabel] {
        &self.inputs
    }

    pub fn get(&self, outcome: OutcomeLabel, input: InputLabel) -> Option<&AssemblageMember> {
        self.members
            .iter()
            .find(|m| m.outcome == outcome && m.input == input)
    }
}

/// Computes the teleportation assemblage
/// σ_{a|ψx} = tr_{A₀A}[(M_a ⊗ 𝟙_B)·(|ψx⟩⟨ψx| ⊗ ρ_AB)].
pub fn assemblage(
    rho_ab: &DensityMatrix,
    inputs: &InputEnsemble,
    measurement: &Measurement,
) -> Result<Assemblage, TelecertError> {
    if rho_ab.dims() != [2, 2] {
        return Err(TelecertError::Shape(format!(
            "channel state must have dims [2, 2], got {:?}",
            rho_ab.dims()
        )));
    }
    let mut members = Vec::new();
    for (input, psi) in inputs.iter() {
        let total = psi.projector().kron(rho_ab.matrix()); // (A0, A, B)
        for (outcome, m_op) in measurement.iter() {
            let lifted = m_op.kron(&ComplexMatrix::identity(2));
            let product = lifted.matmul(&total);
            // trace over A0 then A (indices 0, 0 after removal)
            let after_a0 = partial_trace_matrix(&product, &[2, 2, 2], 0)?;
            let sigma = partial_trace_matrix(&after_a0, &[2, 2], 0)?;
            let p = sigma.trace().re;
            let conditional = if p > NULL_OUTCOME_TOL {
                Some(DensityMatrix::new(
                    sigma.scale(c(1.0 / p, 0.0)),
                    vec![2],
                )?)
            } else {
                None
            };
            members.push(AssemblageMember {
                outcome,
                input,
                probability: p,
                unnormalized: sigma,
                conditional,
            });
        }
    }
    Ok(Assemblage {
        members,
        outcomes: measurement.outcomes(),
        inputs: inputs.iter().map(|(l, _)| l).collect(),
    })
}

/// Fast path for the singlet projection: σ_{0|ψ} = ½ tr_A[(|χ⟩⟨χ| ⊗ 𝟙)ρ_AB]
/// with |χ⟩ = a*|1⟩ - b*|0⟩ for input a|0⟩ + b|1⟩. Used as a cross-check of
/// the full 8-dimensional construction.
pub fn singlet_member_fast(
    rho_ab: &DensityMatrix,
    input_amplitudes: &[Complex64],
) -> ComplexMatrix {
    let a = input_amplitudes[0];
    let b = input_amplitudes[1];
    let chi = [-b.conj(), a.conj()];
    let proj = ComplexMatrix::projector(&chi).kron(&ComplexMatrix::identity(2));
    let product = proj.matmul(rho_ab.matrix());
    partial_trace_matrix(&product, &[2, 2], 0)
        .expect("fixed dims")
        .scale(c(0.5, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{channel_state_ideal, input_states, ket};

    #[test]
    fn bsm_operators_complete_and_projective() {
        let two = partial_bsm_two_outcome();
        let sum = two
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, (_, m)| acc.add(m));
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-14);

        let psi_m = singlet();
        let m0 = &two.iter().next().unwrap().1.clone();
        let val: Complex64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| psi_m[i].conj() * m0[(i, j)] * psi_m[j])
            .sum();
        assert!((val.re - 1.0).abs() < 1e-14);

        let three = partial_bsm_three_outcome();
        let sum = three
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, (_, m)| acc.add(m));
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-14);
        // psi+ projector kills phi+ = (|00> + |11>)/sqrt(2)
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi_p = [
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
        ];
        let mp = three
            .iter()
            .find(|(l, _)| *l == OutcomeLabel::PsiPlus)
            .unwrap()
            .1
            .clone();
        let out = mp.apply(&phi_p);
        assert!(out.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn pure_singlet_teleports_every_input() {
        let rho = channel_state_ideal(1.0).unwrap();
        let asm = assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
        for (label, psi) in input_states().iter() {
            let member = asm.get(OutcomeLabel::PsiMinus, label).unwrap();
            assert!((member.probability - 0.25).abs() < 1e-12);
            let cond = member.conditional.as_ref().unwrap();
            assert!(cond.matrix().max_abs_diff(&psi.projector()) < 1e-10);
        }
    }

    #[test]
    fn ket_one_input_conditional() {
        // sigma_{0| |1>} = (gamma/4)|1><1| for the ideal family
        for &gamma in &[0.2, 0.6, 0.9] {
            let rho = channel_state_ideal(gamma).unwrap();
            let asm = assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
            let member = asm.get(OutcomeLabel::PsiMinus, InputLabel::MinusZ).unwrap();
            assert!((member.probability - gamma / 4.0).abs() < 1e-12);
            if gamma > 0.0 {
                let cond = member.conditional.as_ref().unwrap();
                assert!(
                    cond.matrix().max_abs_diff(&ComplexMatrix::projector(&ket(1))) < 1e-10
                );
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_per_input() {
        for &gamma in &[0.0, 0.35, 1.0] {
            let rho = channel_state_ideal(gamma).unwrap();
            for m in [partial_bsm_two_outcome(), partial_bsm_three_outcome()] {
                let asm = assemblage(&rho, &input_states(), &m).unwrap();
                for input in asm.inputs() {
                    let total: f64 = asm
                        .members()
                        .iter()
                        .filter(|mem| mem.input == *input)
                        .map(|mem| mem.probability)
                        .sum();
                    assert!((total - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn no_signaling() {
        let rho = channel_state_ideal(0.7).unwrap();
        let asm = assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
        let bob_marginal = rho.partial_trace(0).unwrap();
        for input in asm.inputs() {
            let summed = asm
                .members()
                .iter()
                .filter(|m| m.input == *input)
                .fold(ComplexMatrix::zeros(2, 2), |acc, m| acc.add(&m.unnormalized));
            assert!(summed.max_abs_diff(bob_marginal.matrix()) < 1e-10);
        }
    }

    #[test]
    fn assemblage_linearity() {
        let rho_a = channel_state_ideal(0.2).unwrap();
        let rho_b = channel_state_ideal(0.9).unwrap();
        let mix = DensityMatrix::new(
            rho_a
                .matrix()
                .scale(Complex64::new(0.4, 0.0))
                .add(&rho_b.matrix().scale(Complex64::new(0.6, 0.0))),
            vec![2, 2],
        )
        .unwrap();
        let ens = input_states();
        let m = partial_bsm_two_outcome();
        let asm_mix = assemblage(&mix, &ens, &m).unwrap();
        let asm_a = assemblage(&rho_a, &ens, &m).unwrap();
        let asm_b = assemblage(&rho_b, &ens, &m).unwrap();
        for (ma, (mb, mm)) in asm_a
            .members()
            .iter()
            .zip(asm_b.members().iter().zip(asm_mix.members()))
        {
            let combined = ma
                .unnormalized
                .scale(Complex64::new(0.4, 0.0))
                .add(&mb.unnormalized.scale(Complex64::new(0.6, 0.0)));
            assert!(combined.max_abs_diff(&mm.unnormalized) < 1e-12);
        }
    }

    #[test]
    fn fast_path_matches_full_construction() {
        for &gamma in &[0.0, 0.3, 0.8, 1.0] {
            let rho = channel_state_ideal(gamma).unwrap();
            let asm = assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
            for (label, psi) in input_states().iter() {
                let fast = singlet_member_fast(&rho, psi.amplitudes());
                let full = &asm.get(OutcomeLabel::PsiMinus, label).unwrap().unnormalized;
                assert!(fast.max_abs_diff(full) < 1e-12);
            }
        }
    }

    #[test]
    fn null_outcome_has_no_conditional() {
        // gamma = 0, input |0>: p(psi-| |0>) = 1/2 * <1|1> weight... use |1> input
        // on gamma = 0 where p(psi-||1>) = 0
        let rho = channel_state_ideal(0.0).unwrap();
        let asm = assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
        let member = asm.get(OutcomeLabel::PsiMinus, InputLabel::MinusZ).unwrap();
        assert!(member.probability.abs() < 1e-13);
        assert!(member.conditional.is_none());
    }
}
