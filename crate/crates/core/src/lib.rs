//! Entanglement capability and entanglement-assisted communication of
//! two-qubit gates.
//!
//! - [`qla`]: complex matrices, qubit states, partial traces and entropies.
//! - [`canonical`]: reduction of any two-qubit unitary to
//!   `exp[−i(α₁ σ₁⊗σ₁ + α₂ σ₂⊗σ₂ + α₃ σ₃⊗σ₃)]` dressed by local unitaries.
//! - [`entcap`]: numerical entanglement capability `E_U` and maximal
//!   decrease `E_U⁻` in the Alice {0,1} | Bob {2,3} layout.
//! - [`ensembles`]: Holevo information and the Pauli-coded ensembles whose
//!   communication grows by `E_U` (one way) and `2E_U` (both ways).
//! - [`protocols`]: scripted communication protocols and the
//!   superposition-of-messages entanglement audit.
//! - [`cli`]: gate specs, the analysis pipeline and canonical JSON output.

pub mod canonical;
pub mod cli;
pub mod ensembles;
pub mod entcap;
pub mod error;
pub mod protocols;
pub mod qla;

pub use error::{Error, Result};
