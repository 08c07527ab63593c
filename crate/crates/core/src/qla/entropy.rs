//! Von Neumann entropy, entropy of entanglement and the Schmidt
//! decomposition. All logarithms are base 2.

use num_complex::Complex64;

use super::eigen::{hermitian_eigen, hermitian_eigenvalues};
use super::matrix::ZERO;
use super::state::{scatter_bits, Bipartition, DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Eigenvalues below this are treated as exact zeros.
pub const ZERO_EIGENVALUE: f64 = 1e-12;
/// Eigenvalues below this indicate a broken density matrix.
pub const NEGATIVE_FLOOR: f64 = -1e-10;

/// `−Σ λ log₂ λ` with the clamping rule: values in `[−1e-10, 1e-12)` count
/// as zero, anything more negative is an error.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in values {
        if l < NEGATIVE_FLOOR {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l >= ZERO_EIGENVALUE {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// `S(ρ) = −Tr ρ log₂ ρ`, in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = hermitian_eigenvalues(rho.matrix())?;
    entropy_of_spectrum(&values)
}

/// Entropy of entanglement of `psi` across `cut`, in ebits.
pub fn entanglement_entropy(psi: &PureState, cut: &Bipartition) -> Result<f64> {
    check_cut(psi, cut)?;
    // the smaller side gives the smaller eigenproblem; both spectra agree
    let side = if cut.side_a().len() <= cut.side_b().len() {
        cut.side_a()
    } else {
        cut.side_b()
    };
    vn_entropy(&psi.reduced(side)?)
}

fn check_cut(psi: &PureState, cut: &Bipartition) -> Result<()> {
    if cut.num_qubits() != psi.num_qubits() {
        return Err(Error::Qubits(format!(
            "cut over {} qubits applied to a {}-qubit state",
            cut.num_qubits(),
            psi.num_qubits()
        )));
    }
    Ok(())
}

/// `ψ = Σ_n c_n |φ_n⟩|χ_n⟩` with `c_n` descending. Vectors on side A (B)
/// are indexed with side A's (B's) qubits in ascending order, first qubit
/// most significant.
#[derive(Debug, Clone)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub basis_a: Vec<Vec<Complex64>>,
    pub basis_b: Vec<Vec<Complex64>>,
    cut: Bipartition,
}

/// Terms with `c_n² ≤ 1e-24` are dropped.
const DROP_WEIGHT: f64 = 1e-24;

pub fn schmidt(psi: &PureState, cut: &Bipartition) -> Result<Schmidt> {
    check_cut(psi, cut)?;
    let rho_a = psi.reduced(cut.side_a())?;
    let eig = hermitian_eigen(rho_a.matrix())?;
    let m = psi.amplitude_matrix(cut.side_a());
    let da = 1usize << cut.side_a().len();
    let db = m.len() / da;

    let mut coefficients = Vec::new();
    let mut basis_a = Vec::new();
    let mut basis_b = Vec::new();
    for k in (0..da).rev() {
        let lambda = eig.values[k];
        if lambda <= DROP_WEIGHT {
            continue;
        }
        let phi = eig.vectors.column(k);
        // χ_b = Σ_a conj(φ_a) M_ab / √λ
        let c = lambda.sqrt();
        let chi: Vec<Complex64> = (0..db)
            .map(|b| (0..da).map(|a| phi[a].conj() * m[a * db + b]).sum::<Complex64>() / c)
            .collect();
        coefficients.push(c);
        basis_a.push(phi);
        basis_b.push(chi);
    }
    Ok(Schmidt {
        coefficients,
        basis_a,
        basis_b,
        cut: cut.clone(),
    })
}

impl Schmidt {
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    pub fn entropy(&self) -> f64 {
        self.weights()
            .iter()
            .filter(|&&l| l >= ZERO_EIGENVALUE)
            .map(|l| -l * l.log2())
            .sum()
    }

    /// `Σ_n c_n φ_n ⊗ χ_n` on the original qubit layout (unnormalized).
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let n = self.cut.num_qubits();
        let (sa, sb) = (self.cut.side_a(), self.cut.side_b());
        let mut out = vec![ZERO; 1 << n];
        for ((c, phi), chi) in self.coefficients.iter().zip(&self.basis_a).zip(&self.basis_b) {
            for (a, pa) in phi.iter().enumerate() {
                let oa = scatter_bits(a, sa, n);
                for (b, pb) in chi.iter().enumerate() {
                    out[oa | scatter_bits(b, sb, n)] += pa * pb * *c;
                }
            }
        }
        out
    }

    /// Mutual information (bits) of the outcome pair obtained by measuring
    /// side A in `{φ_n}` and side B in `{χ_m}`.
    pub fn measurement_mutual_information(&self, psi: &PureState) -> f64 {
        let n = self.cut.num_qubits();
        let (sa, sb) = (self.cut.side_a(), self.cut.side_b());
        let r = self.coefficients.len();
        let mut joint = vec![0.0; r * r];
        for (i, phi) in self.basis_a.iter().enumerate() {
            for (j, chi) in self.basis_b.iter().enumerate() {
                let mut amp = ZERO;
                for (a, pa) in phi.iter().enumerate() {
                    let oa = scatter_bits(a, sa, n);
                    for (b, pb) in chi.iter().enumerate() {
                        amp += (pa * pb).conj() * psi.amplitudes()[oa | scatter_bits(b, sb, n)];
                    }
                }
                joint[i * r + j] = amp.norm_sqr();
            }
        }
        let pa: Vec<f64> = (0..r).map(|i| (0..r).map(|j| joint[i * r + j]).sum()).collect();
        let pb: Vec<f64> = (0..r).map(|j| (0..r).map(|i| joint[i * r + j]).sum()).collect();
        let mut mi = 0.0;
        for i in 0..r {
            for j in 0..r {
                let p = joint[i * r + j];
                if p > 1e-300 {
                    mi += p * (p / (pa[i] * pb[j])).log2();
                }
            }
        }
        mi
    }
}
