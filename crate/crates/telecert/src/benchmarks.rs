//! Average teleportation fidelity with fixed correction unitaries, the
//! classical 2/3 bound, and PPT-based entanglement detection with a
//! γ-threshold bisection.

use crate::error::TelecertError;
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::noise_optics::{noisy_channel_state, NoiseParams};
use crate::states::{pauli, InputEnsemble, PauliAxis};
use crate::teleport::{Assemblage, OutcomeLabel};

/// Maximal average fidelity reachable with a classical channel.
pub fn classical_bound() -> f64 {
    2.0 / 3.0
}

/// Map from BSM outcome to the 2x2 correction unitary Bob applies.
#[derive(Debug, Clone)]
pub struct CorrectionScheme {
    unitaries: Vec<(OutcomeLabel, ComplexMatrix)>,
}

impl CorrectionScheme {
    pub fn new(unitaries: Vec<(OutcomeLabel, ComplexMatrix)>) -> Result<Self, TelecertError> {
        for (label, u) in &unitaries {
            if u.rows() != 2 || u.cols() != 2 {
                return Err(TelecertError::Shape(format!(
                    "correction for {} must be 2x2",
                    label.name()
                )));
            }
            let uu = u.conjugate_transpose().matmul(u);
            if uu.max_abs_diff(&ComplexMatrix::identity(2)) > 1e-10 {
                return Err(TelecertError::Shape(format!(
                    "correction for {} is not unitary",
                    label.name()
                )));
            }
        }
        Ok(Self { unitaries })
    }

    /// Standard corrections for the ψ±-resolving measurement:
    /// U_{ψ⁻} = 𝟙, U_{ψ⁺} = σ_z.
    pub fn standard() -> Self {
        Self::new(vec![
            (OutcomeLabel::PsiMinus, ComplexMatrix::identity(2)),
            (OutcomeLabel::PsiPlus, pauli(PauliAxis::Z)),
        ])
        .expect("fixed unitaries")
    }

    pub fn get(&self, outcome: OutcomeLabel) -> Option<&ComplexMatrix> {
        self.unitaries
            .iter()
            .find(|(l, _)| *l == outcome)
            .map(|(_, u)| u)
    }

    pub fn outcomes(&self) -> Vec<OutcomeLabel> {
        self.unitaries.iter().map(|(l, _)| *l).collect()
    }
}

/// Raw and detection-normalized average fidelity.
///
/// Only the outcomes covered by the correction scheme count as detected;
/// `normalized` divides by the total detected probability (per input on
/// average), `raw` divides by the number of inputs only.
#[derive(Debug, Clone, Copy)]
pub struct FidelityReport {
    pub raw: f64,
    pub normalized: f64,
    pub detected_probability: f64,
}

/// Average fidelity F̄ = Σ p(a|ψx)·⟨ψx|U_a ρ_{a|ψx} U_a†|ψx⟩ over the
/// corrected outcomes, both raw (divided by |x|) and renormalized by the
/// detected probability.
pub fn average_fidelity(
    asm: &Assemblage,
    inputs: &InputEnsemble,
    corrections: &CorrectionScheme,
) -> Result<FidelityReport, TelecertError> {
    let n_inputs = asm.inputs().len();
    if n_inputs == 0 {
        return Err(TelecertError::AssemblageShape("empty assemblage".into()));
    }
    let mut fid_sum = 0.0;
    let mut prob_sum = 0.0;
    for outcome in corrections.outcomes() {
        let u = corrections
            .get(outcome)
            .ok_or_else(|| TelecertError::MissingCorrection(outcome.name().into()))?;
        for input in asm.inputs() {
            let member = asm.get(outcome, *input).ok_or_else(|| {
                TelecertError::MissingCorrection(format!(
                    "assemblage lacks outcome {} for input {}",
                    outcome.name(),
                    input.name()
                ))
            })?;
            prob_sum += member.probability;
            // tr[U† |ψx><ψx| U · σ] with σ the unnormalized member
            let psi = inputs.get(*input);
            let target = psi.projector().conjugate_by(&u.conjugate_transpose());
            fid_sum += target.matmul(&member.unnormalized).trace().re;
        }
    }
    let raw = fid_sum / n_inputs as f64;
    let detected = prob_sum / n_inputs as f64;
    let normalized = if detected > 1e-15 { raw / detected } else { 0.0 };
    Ok(FidelityReport {
        raw,
        normalized,
        detected_probability: detected,
    })
}

/// Closed form F̄(γ) = (1+2γ)/3 for the ideal family under the standard
/// ψ± corrections and detection normalization. Confirmed against the
/// brute-force assemblage evaluation in the test suite.
pub fn fidelity_ideal_closed_form(gamma: f64) -> Result<f64, TelecertError> {
    crate::error::check_range("gamma", gamma, 0.0, 1.0)?;
    Ok((1.0 + 2.0 * gamma) / 3.0)
}

/// Minimum eigenvalue of the partial transpose; negative iff entangled
/// (exact for two qubits).
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> Result<f64, TelecertError> {
    let pt = rho.partial_transpose(1)?;
    Ok(pt.hermitian_eigenvalues()?[0])
}

/// Result of the entanglement-threshold search over γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaThreshold {
    /// Entangled for every γ > 0.
    AlwaysEntangled,
    /// Entangled exactly above this γ.
    Threshold(f64),
    /// Separable across the whole γ range.
    NeverEntangled,
}

impl GammaThreshold {
    /// Numeric value for data emission: 0, the threshold, or a sentinel
    /// just above 1.
    pub fn as_f64(self) -> f64 {
        match self {
            GammaThreshold::AlwaysEntangled => 0.0,
            GammaThreshold::Threshold(g) => g,
            GammaThreshold::NeverEntangled => 1.0 + 1e-9,
        }
    }
}

/// Smallest γ at which the noisy channel state turns PT-negative, found by
/// bisection to 1e-8.
pub fn gamma_entanglement_threshold(params: NoiseParams) -> Result<GammaThreshold, TelecertError> {
    let neg = |gamma: f64| -> Result<bool, TelecertError> {
        Ok(ppt_min_eigenvalue(&noisy_channel_state(gamma, params)?)? < 0.0)
    };
    if !neg(1.0)? {
        return Ok(GammaThreshold::NeverEntangled);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if neg(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let threshold = 0.5 * (lo + hi);
    if threshold < 1e-7 {
        Ok(GammaThreshold::AlwaysEntangled)
    } else {
        Ok(GammaThreshold::Threshold(threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{channel_state_ideal, input_states, singlet};
    use num_complex::Complex64;
    use crate::teleport::{assemblage, partial_bsm_three_outcome};
    use crate::witness::witness_min_ideal;

    fn fidelity_of_ideal(gamma: f64) -> FidelityReport {
        let rho = channel_state_ideal(gamma).unwrap();
        let ens = input_states();
        let asm = assemblage(&rho, &ens, &partial_bsm_three_outcome()).unwrap();
        average_fidelity(&asm, &ens, &CorrectionScheme::standard()).unwrap()
    }

    #[test]
    fn key_fidelity_values() {
        assert!((fidelity_of_ideal(1.0).normalized - 1.0).abs() < 1e-12);
        assert!((fidelity_of_ideal(0.5).normalized - 2.0 / 3.0).abs() < 1e-12);
        assert!((fidelity_of_ideal(0.0).normalized - 1.0 / 3.0).abs() < 1e-12);
    }

    // brute-force confirmation of the (1+2g)/3 closed form across the grid
    #[test]
    fn closed_form_matches_brute_force() {
        for i in 0..=20 {
            let gamma = i as f64 / 20.0;
            let brute = fidelity_of_ideal(gamma).normalized;
            let closed = fidelity_ideal_closed_form(gamma).unwrap();
            assert!((brute - closed).abs() < 1e-10, "gamma={gamma}");
        }
    }

    #[test]
    fn fidelity_monotone_and_crosses_classical_bound() {
        let mut prev = -1.0;
        for i in 0..=100 {
            let gamma = i as f64 / 100.0;
            let f = fidelity_of_ideal(gamma).normalized;
            assert!(f > prev);
            prev = f;
        }
        assert!((fidelity_of_ideal(0.5).normalized - classical_bound()).abs() < 1e-9);
        assert!(fidelity_of_ideal(0.4).normalized < classical_bound());
    }

    #[test]
    fn witness_beats_fidelity_below_half() {
        for &gamma in &[0.1, 0.3] {
            let f = fidelity_of_ideal(gamma).normalized;
            assert!(f < classical_bound());
            assert!(witness_min_ideal(gamma).unwrap() < 0.0);
        }
    }

    #[test]
    fn missing_correction_is_an_error() {
        let rho = channel_state_ideal(0.5).unwrap();
        let ens = input_states();
        let asm = assemblage(&rho, &ens, &crate::teleport::partial_bsm_two_outcome()).unwrap();
        // standard scheme covers psi+ which the two-outcome measurement lacks
        assert!(average_fidelity(&asm, &ens, &CorrectionScheme::standard()).is_err());
    }

    #[test]
    fn correction_scheme_rejects_non_unitary() {
        let bad = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(CorrectionScheme::new(vec![(OutcomeLabel::PsiMinus, bad)]).is_err());
    }

    #[test]
    fn ppt_detects_entanglement() {
        let rho = DensityMatrix::new(ComplexMatrix::projector(&singlet()), vec![2, 2]).unwrap();
        assert!((ppt_min_eigenvalue(&rho).unwrap() + 0.5).abs() < 1e-10);
        let mixed = DensityMatrix::new(
            ComplexMatrix::identity(4).scale(Complex64::new(0.25, 0.0)),
            vec![2, 2],
        )
        .unwrap();
        assert!((ppt_min_eigenvalue(&mixed).unwrap() - 0.25).abs() < 1e-10);
        // ideal family entangled for all gamma > 0; spectral bound -1/2
        for i in 1..=100 {
            let gamma = 1e-3_f64.max(i as f64 / 100.0);
            let min = ppt_min_eigenvalue(&channel_state_ideal(gamma).unwrap()).unwrap();
            assert!((-0.5 - 1e-12..0.0).contains(&min));
        }
    }

    #[test]
    fn entanglement_thresholds() {
        assert_eq!(
            gamma_entanglement_threshold(NoiseParams::ideal()).unwrap(),
            GammaThreshold::AlwaysEntangled
        );
        assert_eq!(
            gamma_entanglement_threshold(NoiseParams::new(0.0, 0.3).unwrap()).unwrap(),
            GammaThreshold::NeverEntangled
        );
        let params = NoiseParams::new(0.925, 0.872).unwrap();
        match gamma_entanglement_threshold(params).unwrap() {
            GammaThreshold::Threshold(g) => {
                assert!(g > 0.0 && g < 1.0);
                // bisection oracle: PT-positive just below, PT-negative just above
                let below = ppt_min_eigenvalue(&noisy_channel_state(g - 1e-6, params).unwrap())
                    .unwrap();
                let above = ppt_min_eigenvalue(&noisy_channel_state(g + 1e-6, params).unwrap())
                    .unwrap();
                assert!(below >= 0.0 && above < 0.0);
            }
            other => panic!("expected finite threshold, got {:?}", other),
        }
    }
}
