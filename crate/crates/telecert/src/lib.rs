//! Simulation and certification of nonclassical qubit teleportation.
//!
//! The crate models a tunable teleportation channel
//! ρ(γ) = γ|ψ⁻⟩⟨ψ⁻| + (1-γ)|11⟩⟨11|, the photonic interferometer that
//! produces it (including SPDC white noise and calcite dephasing), the
//! conditional-state assemblages Bob receives under a partial Bell-state
//! measurement, a one-parameter family of teleportation witnesses whose
//! negativity certifies a nonclassical channel, average-fidelity
//! benchmarking against the classical 2/3 bound, Poissonian count
//! simulation, and noise-parameter fitting.

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod montecarlo;
pub mod noise_optics;
pub mod states;
pub mod teleport;
pub mod witness;

pub use error::TelecertError;
