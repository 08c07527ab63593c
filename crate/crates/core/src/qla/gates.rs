//! Pauli matrices and the named two-qubit gates.
//!
//! Two-qubit matrices are written in the basis `|00⟩, |01⟩, |10⟩, |11⟩`
//! with the first qubit most significant; for CNOT the first qubit is the
//! control.

use super::matrix::{c64, ComplexMatrix, I, ONE, ZERO};
use super::state::{apply_unchecked, validate_qubits, PureState};
use crate::error::{Error, Result};

/// `σ_k` for `k ∈ {0, 1, 2, 3}` (σ₀ = identity).
pub fn pauli(k: u8) -> Result<ComplexMatrix> {
    let m = match k {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        other => return Err(Error::PauliIndex(other)),
    };
    Ok(ComplexMatrix::from_rows(m))
}

pub(crate) fn pauli_unchecked(k: u8) -> ComplexMatrix {
    pauli(k).expect("Pauli index in range")
}

/// Tensor product of Paulis placed on `num_qubits` qubits; unlisted qubits
/// carry the identity.
pub fn pauli_word(indices: &[(usize, u8)], num_qubits: usize) -> Result<ComplexMatrix> {
    let qubits: Vec<usize> = indices.iter().map(|&(q, _)| q).collect();
    validate_qubits(&qubits, num_qubits, "Pauli word")?;
    let mut factors = vec![0u8; num_qubits];
    for &(q, k) in indices {
        if k > 3 {
            return Err(Error::PauliIndex(k));
        }
        factors[q] = k;
    }
    let mut out = ComplexMatrix::identity(1);
    for k in factors {
        out = out.kron(&pauli_unchecked(k));
    }
    Ok(out)
}

/// Applies a Pauli word qubit by qubit, without forming the full matrix.
pub fn apply_pauli_word(psi: &PureState, indices: &[(usize, u8)]) -> Result<PureState> {
    let qubits: Vec<usize> = indices.iter().map(|&(q, _)| q).collect();
    validate_qubits(&qubits, psi.num_qubits(), "Pauli word")?;
    let mut out = psi.clone();
    for &(q, k) in indices {
        let p = pauli(k)?;
        if k != 0 {
            out = apply_unchecked(&p, &out, &[q]);
        }
    }
    Ok(out)
}

pub fn identity4() -> ComplexMatrix {
    ComplexMatrix::identity(4)
}

pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn cz() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

pub fn iswap() -> ComplexMatrix {
    ComplexMatrix::from_rows([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ZERO, I, ZERO],
        [ZERO, I, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows([[h, h], [h, -h]])
}

pub fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, I]])
}

/// `exp(−iθ/2 · σ_k)`.
pub fn rotation(k: u8, theta: f64) -> Result<ComplexMatrix> {
    let p = pauli(k)?;
    let (s, c) = (theta / 2.0).sin_cos();
    Ok(ComplexMatrix::identity(2)
        .scale(c64(c, 0.0))
        .add(&p.scale(c64(0.0, -s))))
}

/// Looks up a gate by name (case-insensitive). Knows the single-qubit
/// `I, X, Y, Z, H, S` and two-qubit `IDENTITY, CNOT, CZ, SWAP, ISWAP`.
pub fn named(name: &str) -> Option<ComplexMatrix> {
    let g = match name.to_ascii_uppercase().as_str() {
        "I" => ComplexMatrix::identity(2),
        "X" => pauli_unchecked(1),
        "Y" => pauli_unchecked(2),
        "Z" => pauli_unchecked(3),
        "H" => hadamard(),
        "S" => phase_s(),
        "IDENTITY" | "I4" => identity4(),
        "CNOT" | "CX" => cnot(),
        "CZ" => cz(),
        "SWAP" => swap(),
        "ISWAP" => iswap(),
        _ => return None,
    };
    Some(g)
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.matmul(b).distance(&b.matmul(a))
}
