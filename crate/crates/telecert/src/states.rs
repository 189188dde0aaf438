//! Canonical qubit states, Pauli operators, the six-input ensemble and the
//! ideal one-parameter channel-state family.
//!
//! Basis dictionary: |0⟩ ≡ |H⟩ (horizontal), |1⟩ ≡ |V⟩ (vertical), so the
//! product limit of the channel family is |11⟩ = |VV⟩.

use num_complex::Complex64;

use crate::error::{check_range, TelecertError};
use crate::linalg::{ComplexMatrix, DensityMatrix};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Standard 2x2 Pauli matrix.
pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let entries = match axis {
        PauliAxis::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        PauliAxis::Y => vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        PauliAxis::Z => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    };
    ComplexMatrix::new(2, 2, entries).unwrap()
}

/// Computational basis ket |0⟩ or |1⟩.
pub fn ket(bit: usize) -> Vec<Complex64> {
    assert!(bit < 2);
    let mut v = vec![c(0.0, 0.0); 2];
    v[bit] = c(1.0, 0.0);
    v
}

/// Singlet (|01⟩ - |10⟩)/√2.
pub fn singlet() -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(SQRT_HALF, 0.0), c(-SQRT_HALF, 0.0), c(0.0, 0.0)]
}

/// Triplet (|01⟩ + |10⟩)/√2.
pub fn psi_plus() -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0), c(0.0, 0.0)]
}

/// |11⟩ = |VV⟩.
pub fn ket11() -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
}

/// Normalized pure state of one or two qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, TelecertError> {
        if amplitudes.len() != 2 && amplitudes.len() != 4 {
            return Err(TelecertError::Shape(format!(
                "pure state must have 2 or 4 amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TelecertError::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &[Complex64]) -> f64 {
        let ip: Complex64 = self
            .amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum();
        ip.norm_sqr()
    }
}

/// Label for the six Pauli-eigenvector inputs, in the published order
/// x = 0..5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputLabel {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
}

impl InputLabel {
    pub const ALL: [InputLabel; 6] = [
        InputLabel::PlusX,
        InputLabel::MinusX,
        InputLabel::PlusY,
        InputLabel::MinusY,
        InputLabel::PlusZ,
        InputLabel::MinusZ,
    ];

    /// Pauli whose eigenvector this input is. Bob measures this basis.
    pub fn axis(self) -> PauliAxis {
        match self {
            InputLabel::PlusX | InputLabel::MinusX => PauliAxis::X,
            InputLabel::PlusY | InputLabel::MinusY => PauliAxis::Y,
            InputLabel::PlusZ | InputLabel::MinusZ => PauliAxis::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InputLabel::PlusX => "+x",
            InputLabel::MinusX => "-x",
            InputLabel::PlusY => "+y",
            InputLabel::MinusY => "-y",
            InputLabel::PlusZ => "+z",
            InputLabel::MinusZ => "-z",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        InputLabel::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// The ordered six-state input ensemble.
#[derive(Debug, Clone)]
pub struct InputEnsemble {
    states: Vec<(InputLabel, PureState)>,
}

impl InputEnsemble {
    pub fn iter(&self) -> impl Iterator<Item = (InputLabel, &PureState)> {
        self.states.iter().map(|(l, s)| (*l, s))
    }

    pub fn get(&self, label: InputLabel) -> &PureState {
        &self
            .states
            .iter()
            .find(|(l, _)| *l == label)
            .expect("all six labels present")
            .1
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// The six Pauli eigenvectors in order
/// {(|0⟩+|1⟩)/√2, (|0⟩-|1⟩)/√2, (|0⟩+i|1⟩)/√2, (|0⟩-i|1⟩)/√2, |0⟩, |1⟩}.
pub fn input_states() -> InputEnsemble {
    let h = SQRT_HALF;
    let make = |amps: Vec<Complex64>| PureState::new(amps).unwrap();
    InputEnsemble {
        states: vec![
            (InputLabel::PlusX, make(vec![c(h, 0.0), c(h, 0.0)])),
            (InputLabel::MinusX, make(vec![c(h, 0.0), c(-h, 0.0)])),
            (InputLabel::PlusY, make(vec![c(h, 0.0), c(0.0, h)])),
            (InputLabel::MinusY, make(vec![c(h, 0.0), c(0.0, -h)])),
            (InputLabel::PlusZ, make(ket(0))),
            (InputLabel::MinusZ, make(ket(1))),
        ],
    }
}

/// Ideal channel family γ|ψ⁻⟩⟨ψ⁻| + (1-γ)|11⟩⟨11|.
pub fn channel_state_ideal(gamma: f64) -> Result<DensityMatrix, TelecertError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let sing = ComplexMatrix::projector(&singlet());
    let vv = ComplexMatrix::projector(&ket11());
    let m = sing
        .scale(c(gamma, 0.0))
        .add(&vv.scale(c(1.0 - gamma, 0.0)));
    DensityMatrix::new(m, vec![2, 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_actions() {
        let out = pauli(PauliAxis::Z).apply(&ket(0));
        assert!((out[0] - c(1.0, 0.0)).norm() < 1e-15 && out[1].norm() < 1e-15);
        let out = pauli(PauliAxis::X).apply(&ket(0));
        assert!((out[1] - c(1.0, 0.0)).norm() < 1e-15 && out[0].norm() < 1e-15);
        let eigs = pauli(PauliAxis::Y).hermitian_eigenvalues().unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-12 && (eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn input_ensemble_order_and_eigenvectors() {
        let ens = input_states();
        let entries: Vec<_> = ens.iter().collect();
        assert_eq!(entries.len(), 6);
        // x=0 is (|0>+|1>)/sqrt(2), x=4 is |0>
        assert!(entries[0].1.overlap(&[c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0)]) > 1.0 - 1e-12);
        assert!(entries[4].1.overlap(&ket(0)) > 1.0 - 1e-12);

        // each is a ±1 eigenvector of its Pauli
        let signs = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        for ((label, state), sign) in entries.iter().zip(signs) {
            let applied = pauli(label.axis()).apply(state.amplitudes());
            for (a, b) in applied.iter().zip(state.amplitudes()) {
                assert!((a - b * c(sign, 0.0)).norm() < 1e-12, "{:?}", label);
            }
        }
        // pairwise orthogonality within each Pauli pair
        for pair in entries.chunks(2) {
            assert!(pair[0].1.overlap(pair[1].1.amplitudes()) < 1e-12);
        }
    }

    #[test]
    fn channel_state_limits() {
        let rho1 = channel_state_ideal(1.0).unwrap();
        assert!(rho1
            .matrix()
            .max_abs_diff(&ComplexMatrix::projector(&singlet()))
            < 1e-14);
        let rho0 = channel_state_ideal(0.0).unwrap();
        assert!(rho0.matrix().max_abs_diff(&ComplexMatrix::projector(&ket11())) < 1e-14);
    }

    #[test]
    fn channel_state_half() {
        let rho = channel_state_ideal(0.5).unwrap();
        let m = rho.matrix();
        // diag(0, 1/4, 1/4, 1/2) with -1/4 off-diagonals at (01,10)
        assert!(m[(0, 0)].norm() < 1e-14);
        assert!((m[(1, 1)] - c(0.25, 0.0)).norm() < 1e-14);
        assert!((m[(2, 2)] - c(0.25, 0.0)).norm() < 1e-14);
        assert!((m[(3, 3)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((m[(1, 2)] - c(-0.25, 0.0)).norm() < 1e-14);
        assert!((m[(2, 1)] - c(-0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn channel_state_rejects_out_of_range() {
        assert!(channel_state_ideal(-0.1).is_err());
        assert!(channel_state_ideal(1.1).is_err());
    }

    #[test]
    fn singlet_orthogonal_to_vv() {
        let ip: Complex64 = singlet()
            .iter()
            .zip(ket11())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert_eq!(ip, c(0.0, 0.0));
    }

    #[test]
    fn channel_state_valid_and_entangled_across_gamma() {
        for i in 0..1000 {
            let gamma = i as f64 / 999.0;
            let rho = channel_state_ideal(gamma).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            if gamma > 0.0 {
                let pt = rho.partial_transpose(1).unwrap();
                let min = pt.hermitian_eigenvalues().unwrap()[0];
                assert!(min < 0.0, "gamma {} not PT-negative ({})", gamma, min);
            }
        }
    }
}
