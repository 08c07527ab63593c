//! Qubit registers, pure states and density matrices.
//!
//! Qubits are numbered from 0. Qubit 0 is the most significant bit of the
//! amplitude index, so for three qubits the amplitude of `|q0 q1 q2⟩` lives
//! at index `4·q0 + 2·q1 + q2`. Every routine that takes an ordered list of
//! qubits treats the first listed qubit as the most significant bit of the
//! corresponding sub-index.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Offset contributed to a full amplitude index by the bits of `sub`
/// placed on `qubits` (first listed qubit = most significant bit of `sub`).
#[inline]
pub(crate) fn scatter_bits(sub: usize, qubits: &[usize], num_qubits: usize) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
        let bit = (sub >> (k - 1 - j)) & 1;
        acc | (bit << (num_qubits - 1 - q))
    })
}

pub(crate) fn offsets(qubits: &[usize], num_qubits: usize) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|s| scatter_bits(s, qubits, num_qubits))
        .collect()
}

pub(crate) fn complement(qubits: &[usize], num_qubits: usize) -> Vec<usize> {
    (0..num_qubits).filter(|q| !qubits.contains(q)).collect()
}

pub(crate) fn validate_qubits(qubits: &[usize], num_qubits: usize, what: &str) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits {
            return Err(Error::Qubits(format!(
                "{what}: qubit {q} out of range for {num_qubits} qubits"
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(Error::Qubits(format!("{what}: qubit {q} listed twice")));
        }
    }
    Ok(())
}

fn qubit_count(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// Normalized state vector of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that must already be normalized within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubit_count(amplitudes.len())
            .ok_or_else(|| Error::InvalidState(format!("{} amplitudes is not a power of two", amplitudes.len())))?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes)
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self { num_qubits, amplitudes }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self::from_raw(num_qubits, amplitudes))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self ⊗ other`; `other`'s qubits are appended after `self`'s.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState::from_raw(self.num_qubits + other.num_qubits, amps)
    }

    /// Entry-wise complex conjugate in the computational basis.
    pub fn conj(&self) -> PureState {
        PureState::from_raw(self.num_qubits, self.amplitudes.iter().map(|z| z.conj()).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product of mismatched states");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &PureState) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance of mismatched states");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Distance after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a * phase - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn projector(&self) -> DensityMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            num_qubits: self.num_qubits,
            matrix: m,
        }
    }

    /// Reduced density matrix on `keep` (in the listed order), tracing out
    /// every other qubit.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Qubits("partial trace must keep at least one qubit".into()));
        }
        validate_qubits(keep, self.num_qubits, "partial trace")?;
        let m = self.amplitude_matrix(keep);
        let k = 1usize << keep.len();
        let cols = m.len() / k;
        let mut out = ComplexMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let ra = &m[a * cols..(a + 1) * cols];
                let rb = &m[b * cols..(b + 1) * cols];
                let z: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
                out[(a, b)] = z;
                out[(b, a)] = z.conj();
            }
        }
        Ok(DensityMatrix {
            num_qubits: keep.len(),
            matrix: out,
        })
    }

    /// Amplitudes reshaped to a `2^|rows| × 2^(n−|rows|)` row-major matrix;
    /// the column index runs over the remaining qubits in ascending order.
    pub(crate) fn amplitude_matrix(&self, rows: &[usize]) -> Vec<Complex64> {
        let rest = complement(rows, self.num_qubits);
        let ro = offsets(rows, self.num_qubits);
        let co = offsets(&rest, self.num_qubits);
        let mut m = Vec::with_capacity(ro.len() * co.len());
        for &r in &ro {
            for &c in &co {
                m.push(self.amplitudes[r | c]);
            }
        }
        m
    }
}

/// Unit-trace Hermitian operator on `num_qubits` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks squareness, Hermiticity (1e-12) and unit trace (1e-12).
    /// Positivity is checked where the spectrum is computed.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity("matrix is not square".into()));
        }
        let num_qubits = qubit_count(matrix.rows())
            .ok_or_else(|| Error::InvalidDensity(format!("dimension {} is not a power of two", matrix.rows())))?;
        let herm = matrix.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("Hermiticity residual {herm:.3e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self {
            num_qubits,
            matrix: ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub(crate) fn from_raw(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Convex mixture `Σ p_i ρ_i`. Weights are used as given.
    pub fn mixture<'a, I>(items: I) -> Result<DensityMatrix>
    where
        I: IntoIterator<Item = (f64, &'a DensityMatrix)>,
    {
        let mut acc: Option<(usize, ComplexMatrix)> = None;
        for (p, rho) in items {
            let scaled = rho.matrix.scale(Complex64::new(p, 0.0));
            acc = Some(match acc {
                None => (rho.num_qubits, scaled),
                Some((n, m)) => {
                    if n != rho.num_qubits {
                        return Err(Error::Dimension(format!(
                            "mixing {n}-qubit and {}-qubit states",
                            rho.num_qubits
                        )));
                    }
                    (n, m.add(&scaled))
                }
            });
        }
        let (n, m) = acc.ok_or_else(|| Error::Ensemble("empty mixture".into()))?;
        Ok(DensityMatrix::from_raw(n, m))
    }
}

/// Traces out every qubit not in `keep`; the kept qubits appear in the
/// listed order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits;
    if keep.is_empty() {
        return Err(Error::Qubits("partial trace must keep at least one qubit".into()));
    }
    validate_qubits(keep, n, "partial trace")?;
    let traced = complement(keep, n);
    let ko = offsets(keep, n);
    let to = offsets(&traced, n);
    let k = ko.len();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            out[(a, b)] = to.iter().map(|&t| m[(ko[a] | t, ko[b] | t)]).sum();
        }
    }
    Ok(DensityMatrix::from_raw(keep.len(), out))
}

/// An Alice|Bob cut of a qubit register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut side_a: Vec<usize>, mut side_b: Vec<usize>) -> Result<Self> {
        side_a.sort_unstable();
        side_b.sort_unstable();
        let n = side_a.len() + side_b.len();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::Qubits("both sides of a cut must be nonempty".into()));
        }
        let mut all: Vec<usize> = side_a.iter().chain(&side_b).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::Qubits(format!(
                "cut {side_a:?}|{side_b:?} does not cover 0..{n} exactly once"
            )));
        }
        Ok(Self { side_a, side_b })
    }

    /// Single-gate layout: Alice {0, 1}, Bob {2, 3}. Qubit 0 is Alice's
    /// ancilla, 1 and 2 carry the gate, 3 is Bob's ancilla.
    pub fn alice_bob() -> Self {
        Self {
            side_a: vec![0, 1],
            side_b: vec![2, 3],
        }
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn num_qubits(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn swapped(&self) -> Self {
        Self {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }
}

/// Applies `u` to `targets` (first target = most significant bit of `u`'s
/// index). `u` must be unitary within 1e-10.
pub fn apply_on_qubits(u: &ComplexMatrix, psi: &PureState, targets: &[usize]) -> Result<PureState> {
    validate_qubits(targets, psi.num_qubits, "gate targets")?;
    if targets.is_empty() {
        return Err(Error::Qubits("gate needs at least one target".into()));
    }
    let k = 1usize << targets.len();
    if !u.is_square() || u.rows() != k {
        return Err(Error::Dimension(format!(
            "{}x{} gate on {} qubits",
            u.rows(),
            u.cols(),
            targets.len()
        )));
    }
    u.ensure_unitary(UNITARY_TOL)?;
    Ok(apply_unchecked(u, psi, targets))
}

pub(crate) fn apply_unchecked(u: &ComplexMatrix, psi: &PureState, targets: &[usize]) -> PureState {
    let n = psi.num_qubits;
    let rest = complement(targets, n);
    let to = offsets(targets, n);
    let ro = offsets(&rest, n);
    let k = to.len();
    let mut out = psi.amplitudes.clone();
    let mut buf = vec![ZERO; k];
    for &r in &ro {
        for (j, &t) in to.iter().enumerate() {
            buf[j] = psi.amplitudes[r | t];
        }
        for (i, &t) in to.iter().enumerate() {
            out[r | t] = u.row(i).iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
    PureState::from_raw(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::gates;
    use crate::qla::matrix::c64;

    #[test]
    fn scatter_places_msb_first() {
        // qubit 0 is the MSB of a 3-qubit index
        assert_eq!(scatter_bits(1, &[0], 3), 4);
        assert_eq!(scatter_bits(1, &[2], 3), 1);
        assert_eq!(scatter_bits(0b10, &[2, 0], 3), 1);
        assert_eq!(scatter_bits(0b01, &[2, 0], 3), 4);
    }

    #[test]
    fn rejects_unnormalized_and_odd_lengths() {
        assert!(PureState::new(vec![c64(1.0, 0.0); 3]).is_err());
        assert!(PureState::new(vec![c64(1.0, 0.0); 2]).is_err());
        assert!(PureState::normalized(vec![ZERO; 4]).is_err());
    }

    #[test]
    fn cnot_on_middle_qubits() {
        // |0 1 0 0⟩ with CNOT on (1, 2) -> |0 1 1 0⟩
        let psi = PureState::basis(4, 0b0100).unwrap();
        let out = apply_on_qubits(&gates::cnot(), &psi, &[1, 2]).unwrap();
        assert_eq!(out, PureState::basis(4, 0b0110).unwrap());
    }

    #[test]
    fn x_on_first_qubit() {
        let psi = PureState::basis(4, 0).unwrap();
        let out = apply_on_qubits(&gates::pauli(1).unwrap(), &psi, &[0]).unwrap();
        assert_eq!(out, PureState::basis(4, 0b1000).unwrap());
    }

    #[test]
    fn gate_errors() {
        let psi = PureState::basis(3, 0).unwrap();
        assert!(matches!(
            apply_on_qubits(&gates::cnot(), &psi, &[1, 1]),
            Err(Error::Qubits(_))
        ));
        assert!(matches!(
            apply_on_qubits(&gates::cnot(), &psi, &[1, 3]),
            Err(Error::Qubits(_))
        ));
        let not_unitary = ComplexMatrix::identity(4).scale(c64(2.0, 0.0));
        assert!(matches!(
            apply_on_qubits(&not_unitary, &psi, &[0, 1]),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn partial_trace_errors() {
        let rho = PureState::basis(2, 0).unwrap().projector();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
    }

    #[test]
    fn bell_pair_marginal_is_maximally_mixed() {
        let h = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![c64(h, 0.0), ZERO, ZERO, c64(h, 0.0)]).unwrap();
        let rho = partial_trace(&bell.projector(), &[0]).unwrap();
        assert!(rho.matrix().distance(DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
        let direct = bell.reduced(&[0]).unwrap();
        assert!(direct.matrix().distance(rho.matrix()) < 1e-15);
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(vec![0, 1], vec![1, 2]).is_err());
        assert!(Bipartition::new(vec![0], vec![2]).is_err());
        assert!(Bipartition::new(vec![], vec![0]).is_err());
        let cut = Bipartition::new(vec![3, 0], vec![2, 1]).unwrap();
        assert_eq!(cut.side_a(), &[0, 3]);
    }
}
