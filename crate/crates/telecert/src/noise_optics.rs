//! Constructive photonic model for the channel-state family: calcite
//! displacers coupling polarization to a path degree of freedom, half-wave
//! plates, per-calcite dephasing, SPDC white noise, the γ(α) map, and the
//! explicit noisy channel state.
//!
//! Parameter convention: the canonical noise parameter is the singlet
//! weight `V` of the SPDC source, ρ_SPDC = V|ψ⁻⟩⟨ψ⁻| + (1-V)·𝟙/4. The
//! noisy channel state is linear in V and the closed-form witness is
//! quadratic in the amplitude √V; [`NoiseParams::v_amplitude`] converts.

use num_complex::Complex64;

use crate::error::{check_range, TelecertError};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::states::{pauli, singlet, PauliAxis};

/// Path levels tracked through the interferometer: τ₁, τ₂ and the τ₃ sink.
/// Two calcites starting from τ₁ cannot populate anything beyond τ₃.
const NPATH: usize = 3;
/// Index of the lost path level.
const LOST: usize = NPATH - 1;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// SPDC singlet weight V and calcite dephasing parameter δ, both in [0,1].
/// δ = 1 is noiseless, δ = 1/2 fully dephasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub v: f64,
    pub delta: f64,
}

impl NoiseParams {
    pub fn new(v: f64, delta: f64) -> Result<Self, TelecertError> {
        check_range("V", v, 0.0, 1.0)?;
        check_range("delta", delta, 0.0, 1.0)?;
        Ok(Self { v, delta })
    }

    /// Noiseless configuration (V = δ = 1).
    pub fn ideal() -> Self {
        Self { v: 1.0, delta: 1.0 }
    }

    /// Singlet amplitude √V, for comparison against amplitude-convention
    /// reports.
    pub fn v_amplitude(&self) -> f64 {
        self.v.sqrt()
    }
}

/// Density matrix on (polarization A) ⊗ (polarization B) ⊗ (path of B),
/// with path truncated to {τ₁, τ₂, τ₃ = lost}. The trace over the kept
/// (non-lost) levels may fall below 1; the deficit is the loss probability.
#[derive(Debug, Clone)]
pub struct PathExtendedState {
    matrix: ComplexMatrix, // 12x12, dims [2, 2, 3]
}

impl PathExtendedState {
    /// Embeds a two-qubit polarization state into path level τ₁.
    pub fn from_polarization(rho: &ComplexMatrix) -> Self {
        assert_eq!(rho.rows(), 4);
        let mut tau1 = ComplexMatrix::zeros(NPATH, NPATH);
        tau1[(0, 0)] = c(1.0, 0.0);
        Self {
            matrix: rho.kron(&tau1),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Trace over the kept path levels (excluding the τ₃ sink).
    pub fn kept_trace(&self) -> f64 {
        let mut tr = 0.0;
        for pol in 0..4 {
            for t in 0..LOST {
                let i = pol * NPATH + t;
                tr += self.matrix[(i, i)].re;
            }
        }
        tr
    }

    /// Weight currently sitting on |V, τ₃⟩ of photon B (any A polarization).
    fn weight_on_v_tau3(&self) -> f64 {
        let mut w = 0.0;
        for a in 0..2 {
            let i = (a * 2 + 1) * NPATH + LOST;
            w += self.matrix[(i, i)].re;
        }
        w
    }

    /// Traces out the path, keeping τ₁ and τ₂ and discarding the lost sink,
    /// then renormalizes by the kept trace.
    pub fn trace_out_path(&self) -> Result<DensityMatrix, TelecertError> {
        let mut out = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                for t in 0..LOST {
                    out[(i, j)] += self.matrix[(i * NPATH + t, j * NPATH + t)];
                }
            }
        }
        let kept = out.trace().re;
        if kept < 1e-12 {
            return Err(TelecertError::TotalLoss(kept));
        }
        DensityMatrix::new(out.scale(c(1.0 / kept, 0.0)), vec![2, 2])
    }
}

/// γ(α) = 4 sin²2α / (3 - cos 4α), monotone increasing on [0, π/4].
pub fn gamma_from_alpha(alpha: f64) -> Result<f64, TelecertError> {
    check_range("alpha", alpha, 0.0, std::f64::consts::FRAC_PI_4)?;
    let s = (2.0 * alpha).sin();
    Ok(4.0 * s * s / (3.0 - (4.0 * alpha).cos()))
}

/// Inverse of [`gamma_from_alpha`] on [0, π/4], by bisection.
pub fn alpha_from_gamma(gamma: f64) -> Result<f64, TelecertError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    // the map is flat at its endpoints; resolve them exactly
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma == 1.0 {
        return Ok(std::f64::consts::FRAC_PI_4);
    }
    let mut lo = 0.0;
    let mut hi = std::f64::consts::FRAC_PI_4;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gamma_from_alpha(mid)? < gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Calcite displacer on (pol A) ⊗ (pol B) ⊗ (path): keeps |H,τᵢ⟩, maps
/// |V,τᵢ⟩ → |V,τᵢ₊₁⟩ on photon B. Amplitudes reaching τ₃ stay in the sink
/// and are dropped by [`PathExtendedState::trace_out_path`].
pub fn calcite_operator() -> ComplexMatrix {
    let mut op = ComplexMatrix::zeros(2 * NPATH, 2 * NPATH);
    for t in 0..NPATH {
        op[(t, t)] = c(1.0, 0.0); // |H,τ_i⟩⟨H,τ_i|
    }
    for t in 0..NPATH - 1 {
        op[(NPATH + t + 1, NPATH + t)] = c(1.0, 0.0); // |V,τ_{i+1}⟩⟨V,τ_i|
    }
    ComplexMatrix::identity(2).kron(&op)
}

/// Half-wave plate Jones matrix [[cos2α, sin2α], [sin2α, -cos2α]].
pub fn hwp_unitary(alpha: f64) -> ComplexMatrix {
    let cos2a = (2.0 * alpha).cos();
    let sin2a = (2.0 * alpha).sin();
    ComplexMatrix::from_real(2, 2, &[cos2a, sin2a, sin2a, -cos2a]).unwrap()
}

fn hwp_on_b(alpha: f64) -> ComplexMatrix {
    ComplexMatrix::identity(2)
        .kron(&hwp_unitary(alpha))
        .kron(&ComplexMatrix::identity(NPATH))
}

/// Dephasing channel Δ[ρ] = δρ + (1-δ)(𝟙⊗σ_z⊗𝟙)ρ(𝟙⊗σ_z⊗𝟙) on photon B's
/// polarization.
pub fn dephasing(rho: &PathExtendedState, delta: f64) -> Result<PathExtendedState, TelecertError> {
    check_range("delta", delta, 0.0, 1.0)?;
    let z = ComplexMatrix::identity(2)
        .kron(&pauli(PauliAxis::Z))
        .kron(&ComplexMatrix::identity(NPATH));
    let flipped = rho.matrix().conjugate_by(&z);
    let m = rho
        .matrix()
        .scale(c(delta, 0.0))
        .add(&flipped.scale(c(1.0 - delta, 0.0)));
    Ok(PathExtendedState { matrix: m })
}

/// One noisy calcite pass: unitary displacement followed by dephasing.
fn noisy_calcite(rho: &PathExtendedState, delta: f64) -> Result<PathExtendedState, TelecertError> {
    debug_assert!(
        rho.weight_on_v_tau3() < 1e-12,
        "path truncation violated: weight already on |V,τ3⟩"
    );
    let shifted = PathExtendedState {
        matrix: rho.matrix().conjugate_by(&calcite_operator()),
    };
    dephasing(&shifted, delta)
}

/// SPDC source state V|ψ⁻⟩⟨ψ⁻| + (1-V)·𝟙/4 on the two polarizations.
pub fn spdc_state(v: f64) -> Result<DensityMatrix, TelecertError> {
    check_range("V", v, 0.0, 1.0)?;
    let m = ComplexMatrix::projector(&singlet())
        .scale(c(v, 0.0))
        .add(&ComplexMatrix::identity(4).scale(c((1.0 - v) / 4.0, 0.0)));
    DensityMatrix::new(m, vec![2, 2])
}

/// Explicit noisy channel state in the basis {00, 01, 10, 11}:
///
/// ```text
/// 1/4 · [ (1-V)γ          0                   0              0
///         0               2-V(2-3γ)-γ        -2(1-2δ)²Vγ     0
///         0              -2(1-2δ)²Vγ          (1+V)γ         0
///         0               0                   0              2+V(2-3γ)-γ ]
/// ```
pub fn noisy_channel_state(gamma: f64, params: NoiseParams) -> Result<DensityMatrix, TelecertError> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let NoiseParams { v, delta } = params;
    let coh = 2.0 * (1.0 - 2.0 * delta).powi(2) * v * gamma;
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = c((1.0 - v) * gamma / 4.0, 0.0);
    m[(1, 1)] = c((2.0 - v * (2.0 - 3.0 * gamma) - gamma) / 4.0, 0.0);
    m[(2, 2)] = c((1.0 + v) * gamma / 4.0, 0.0);
    m[(3, 3)] = c((2.0 + v * (2.0 - 3.0 * gamma) - gamma) / 4.0, 0.0);
    m[(1, 2)] = c(-coh / 4.0, 0.0);
    m[(2, 1)] = c(-coh / 4.0, 0.0);
    DensityMatrix::new(m, vec![2, 2])
}

/// Runs the full interferometer: SPDC state → noisy calcite → HWP(α) →
/// noisy calcite → HWP(π/4) → trace out path with renormalization.
///
/// Matches [`noisy_channel_state`] at γ = γ(α) to 1e-10.
pub fn constructive_pipeline(
    alpha: f64,
    params: NoiseParams,
) -> Result<DensityMatrix, TelecertError> {
    check_range("alpha", alpha, 0.0, std::f64::consts::FRAC_PI_4)?;
    let mut state = PathExtendedState::from_polarization(spdc_state(params.v)?.matrix());
    state = noisy_calcite(&state, params.delta)?;
    state = PathExtendedState {
        matrix: state.matrix().conjugate_by(&hwp_on_b(alpha)),
    };
    state = noisy_calcite(&state, params.delta)?;
    state = PathExtendedState {
        matrix: state
            .matrix()
            .conjugate_by(&hwp_on_b(std::f64::consts::FRAC_PI_4)),
    };
    state.trace_out_path()
}
