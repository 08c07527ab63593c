//! Dense complex linear algebra for small qubit registers.

pub mod eigen;
pub mod entropy;
pub mod gates;
pub mod matrix;
pub mod state;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use entropy::{entanglement_entropy, entropy_of_spectrum, schmidt, vn_entropy, Schmidt};
pub use gates::{apply_pauli_word, pauli, pauli_word};
pub use matrix::{c64, tensor, ComplexMatrix};
pub use state::{apply_on_qubits, partial_trace, Bipartition, DensityMatrix, PureState};
