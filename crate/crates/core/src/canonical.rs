//! Canonical nonlocal form of two-qubit unitaries.
//!
//! Every `U ∈ U(4)` factors as
//!
//! ```text
//! U = phase · (after_a ⊗ after_b) · U_d(α) · (before_a ⊗ before_b)
//! U_d(α) = exp[−i(α₁ σ₁⊗σ₁ + α₂ σ₂⊗σ₂ + α₃ σ₃⊗σ₃)]
//! ```
//!
//! with `π/4 ≥ α₁ ≥ α₂ ≥ |α₃|`. On the chamber face `α₁ = π/4` the
//! representative with `α₃ ≥ 0` is chosen.
//!
//! The factorization goes through the magic basis, whose columns are
//!
//! ```text
//! m₀ = (|00⟩ + |11⟩)/√2        m₁ = i(|00⟩ − |11⟩)/√2
//! m₂ = i(|01⟩ + |10⟩)/√2       m₃ = (|01⟩ − |10⟩)/√2
//! ```
//!
//! In this basis local `SU(2) ⊗ SU(2)` maps onto `SO(4)` and `U_d(α)` is
//! `diag(e^{−iλ_k})` with `λ = (α₁−α₂+α₃, −α₁+α₂+α₃, α₁+α₂−α₃, −α₁−α₂−α₃)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qla::eigen::hermitian_eigen;
use crate::qla::gates::{hadamard, pauli_unchecked, phase_s, rotation};
use crate::qla::matrix::{c64, ComplexMatrix, I, ZERO};

/// Reconstruction tolerance (Frobenius norm).
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Inputs must satisfy `‖U†U − I‖_F ≤ UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Width of the band around the chamber walls treated as on the wall.
const WALL: f64 = 1e-9;
/// Seed for the directions used to split degenerate eigenspaces.
const DEGENERACY_SEED: u64 = 0x5eed_cafe;

#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub alphas: [f64; 3],
    pub before_a: ComplexMatrix,
    pub before_b: ComplexMatrix,
    pub after_a: ComplexMatrix,
    pub after_b: ComplexMatrix,
    pub global_phase: Complex64,
}

impl CanonicalForm {
    pub fn u_d(&self) -> ComplexMatrix {
        u_d(self.alphas)
    }

    pub fn before(&self) -> ComplexMatrix {
        self.before_a.kron(&self.before_b)
    }

    pub fn after(&self) -> ComplexMatrix {
        self.after_a.kron(&self.after_b)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.after()
            .matmul(&self.u_d())
            .matmul(&self.before())
            .scale(self.global_phase)
    }

    pub fn residual(&self, u: &ComplexMatrix) -> f64 {
        self.reconstruct().distance(u)
    }
}

/// `exp[−i(α₁ σ₁⊗σ₁ + α₂ σ₂⊗σ₂ + α₃ σ₃⊗σ₃)]`, built as the product of the
/// three commuting factors `cos α_k − i sin α_k σ_k⊗σ_k`.
pub fn u_d(alphas: [f64; 3]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(4);
    for (k, &a) in alphas.iter().enumerate() {
        let p = pauli_unchecked(k as u8 + 1);
        let pp = p.kron(&p);
        let (s, c) = a.sin_cos();
        let factor = ComplexMatrix::identity(4)
            .scale(c64(c, 0.0))
            .add(&pp.scale(c64(0.0, -s)));
        out = out.matmul(&factor);
    }
    out
}

/// Magic basis change, columns `m₀..m₃` as documented above.
pub fn magic_basis() -> ComplexMatrix {
    let h = c64(FRAC_1_SQRT_2, 0.0);
    let ih = c64(0.0, FRAC_1_SQRT_2);
    ComplexMatrix::from_rows([
        [h, ih, ZERO, ZERO],
        [ZERO, ZERO, ih, h],
        [ZERO, ZERO, ih, -h],
        [h, -ih, ZERO, ZERO],
    ])
}

/// Whether `alphas` lies in the canonical chamber within `tol`.
pub fn in_weyl_chamber(alphas: [f64; 3], tol: f64) -> bool {
    let [a1, a2, a3] = alphas;
    FRAC_PI_4 + tol >= a1 && a1 + tol >= a2 && a2 + tol >= a3.abs()
}

pub fn decompose(u: &ComplexMatrix) -> Result<CanonicalForm> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::Dimension(format!(
            "canonical decomposition needs a 4x4 matrix, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    u.ensure_unitary(UNITARY_TOL)?;

    let det_root = u.determinant().powf(0.25);
    let v = u.scale(det_root.inv());
    let magic = magic_basis();
    let magic_dag = magic.adjoint();
    let up = magic_dag.matmul(&v).matmul(&magic);
    let m2 = up.transpose().matmul(&up);

    let p = diagonalize_symmetric_unitary(&m2)?;
    let d = p.transpose().matmul(&m2).matmul(&p);

    let mut lambda = [0.0; 4];
    for k in 0..3 {
        lambda[k] = -d[(k, k)].arg() / 2.0;
    }
    lambda[3] = -(lambda[0] + lambda[1] + lambda[2]);
    let d_inv: Vec<Complex64> = lambda.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();

    // up = O₁ · diag(e^{−iλ}) · Pᵀ with O₁ real orthogonal
    let o1 = up.matmul(&p).matmul(&ComplexMatrix::diagonal(&d_inv));
    let k1 = magic.matmul(&o1).matmul(&magic_dag);
    let k2 = magic.matmul(&p.transpose()).matmul(&magic_dag);
    let (ph1, a1, b1) = factor_local(&k1)?;
    let (ph2, a2, b2) = factor_local(&k2)?;

    let alphas = [
        (lambda[0] + lambda[2]) / 2.0,
        (lambda[1] + lambda[2]) / 2.0,
        (lambda[0] + lambda[1]) / 2.0,
    ];
    let mut frame = Frame {
        phase: det_root * ph1 * ph2,
        a1,
        b1,
        alphas,
        a2,
        b2,
    };
    frame.canonicalize();

    let cf = CanonicalForm {
        alphas: frame.alphas,
        before_a: frame.a2,
        before_b: frame.b2,
        after_a: frame.a1,
        after_b: frame.b1,
        global_phase: frame.phase,
    };
    let residual = cf.residual(u);
    if residual.is_nan() || residual >= RECONSTRUCTION_TOL {
        return Err(Error::Decomposition(format!(
            "reconstruction residual {residual:.3e} exceeds {RECONSTRUCTION_TOL:.0e}"
        )));
    }
    Ok(cf)
}

/// Real orthogonal `P` (det +1) with `Pᵀ m2 P` diagonal, for a symmetric
/// unitary `m2`. Its real and imaginary parts commute, so a generic real
/// combination of the two shares their eigenvectors. Two seeded directions
/// are tried before giving up.
fn diagonalize_symmetric_unitary(m2: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEGENERACY_SEED);
    let mut worst = f64::INFINITY;
    for _attempt in 0..2 {
        let cr: f64 = StandardNormal.sample(&mut rng);
        let ci: f64 = StandardNormal.sample(&mut rng);
        let data = m2.as_slice().iter().map(|z| c64(cr * z.re + ci * z.im, 0.0)).collect();
        let mut h = ComplexMatrix::new(4, 4, data)?;
        // symmetrize away rounding so the solver sees an exactly real symmetric matrix
        for i in 0..4 {
            for j in i + 1..4 {
                let s = 0.5 * (h[(i, j)].re + h[(j, i)].re);
                h[(i, j)] = c64(s, 0.0);
                h[(j, i)] = c64(s, 0.0);
            }
        }
        let eig = hermitian_eigen(&h)?;
        let mut p = ComplexMatrix::new(4, 4, eig.vectors.as_slice().iter().map(|z| c64(z.re, 0.0)).collect())?;
        if p.determinant().re < 0.0 {
            for r in 0..4 {
                p[(r, 3)] = -p[(r, 3)];
            }
        }
        let d = p.transpose().matmul(m2).matmul(&p);
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < 1e-11 {
            return Ok(p);
        }
        worst = worst.min(off);
    }
    Err(Error::Decomposition(format!(
        "could not split a degenerate eigenspace of UᵀU in the magic basis \
         (best off-diagonal residual {worst:.3e})"
    )))
}

/// Splits `k = c · (a ⊗ b)` with `a, b ∈ SU(2)` and `|c| = 1`.
pub(crate) fn factor_local(k: &ComplexMatrix) -> Result<(Complex64, ComplexMatrix, ComplexMatrix)> {
    let block = |i: usize, j: usize| {
        ComplexMatrix::from_rows([
            [k[(2 * i, 2 * j)], k[(2 * i, 2 * j + 1)]],
            [k[(2 * i + 1, 2 * j)], k[(2 * i + 1, 2 * j + 1)]],
        ])
    };
    let (bi, bj) = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .max_by(|&(i, j), &(x, y)| block(i, j).frobenius_norm().total_cmp(&block(x, y).frobenius_norm()))
        .unwrap();
    let pivot = block(bi, bj);
    let b = pivot.scale(pivot.determinant().sqrt().inv());
    let b_dag = b.adjoint();
    let mut a = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = b_dag.matmul(&block(i, j)).trace() / 2.0;
        }
    }
    let c = a.determinant().sqrt();
    let a = a.scale(c.inv());
    let residual = a.kron(&b).scale(c).distance(k);
    if residual.is_nan() || residual > 1e-10 {
        return Err(Error::Decomposition(format!(
            "local factor is not a tensor product (residual {residual:.3e})"
        )));
    }
    Ok((c, a, b))
}

/// Running factorization `U = phase · (a1⊗b1) · U_d(alphas) · (a2⊗b2)`;
/// every move keeps the product unchanged.
struct Frame {
    phase: Complex64,
    a1: ComplexMatrix,
    b1: ComplexMatrix,
    alphas: [f64; 3],
    a2: ComplexMatrix,
    b2: ComplexMatrix,
}

impl Frame {
    /// `α_k += s·π/2` using `U_d(α) = U_d(α') · (i s) σ_k⊗σ_k`.
    fn shift(&mut self, k: usize, s: f64) {
        self.alphas[k] += s * FRAC_PI_2;
        self.phase *= I * s;
        let p = pauli_unchecked(k as u8 + 1);
        self.a2 = p.matmul(&self.a2);
        self.b2 = p.matmul(&self.b2);
    }

    /// Swaps `α_i ↔ α_j` using `(W⊗W) U_d(α) (W⊗W)† = U_d(α with i, j swapped)`.
    fn swap(&mut self, i: usize, j: usize) {
        let w = match (i.min(j), i.max(j)) {
            (0, 1) => phase_s(),
            (1, 2) => rotation(1, FRAC_PI_2).expect("valid axis"),
            (0, 2) => hadamard(),
            _ => unreachable!("alpha indices are 0..3"),
        };
        let w_dag = w.adjoint();
        self.alphas.swap(i, j);
        self.a1 = self.a1.matmul(&w_dag);
        self.b1 = self.b1.matmul(&w_dag);
        self.a2 = w.matmul(&self.a2);
        self.b2 = w.matmul(&self.b2);
    }

    /// Negates every `α_j` with `j ≠ k` using conjugation by `σ_k ⊗ 1`.
    fn flip(&mut self, k: usize) {
        for j in 0..3 {
            if j != k {
                self.alphas[j] = -self.alphas[j];
            }
        }
        let p = pauli_unchecked(k as u8 + 1);
        self.a1 = self.a1.matmul(&p);
        self.a2 = p.matmul(&self.a2);
    }

    fn canonicalize(&mut self) {
        // each α into [−π/4, π/4], with the lower wall folded onto the upper one
        for k in 0..3 {
            let m = (self.alphas[k] / FRAC_PI_2).round();
            let steps = m.abs() as usize;
            for _ in 0..steps {
                self.shift(k, -m.signum());
            }
            if self.alphas[k] < -FRAC_PI_4 + WALL {
                self.shift(k, 1.0);
            }
        }
        // |α₁| ≥ |α₂| ≥ |α₃|
        for _ in 0..2 {
            for k in 0..2 {
                if self.alphas[k].abs() < self.alphas[k + 1].abs() {
                    self.swap(k, k + 1);
                }
            }
        }
        // α₁, α₂ ≥ 0
        match (self.alphas[0] < 0.0, self.alphas[1] < 0.0) {
            (true, true) => self.flip(2),
            (true, false) => self.flip(1),
            (false, true) => self.flip(0),
            (false, false) => {}
        }
        // on the α₁ = π/4 face, prefer α₃ ≥ 0
        if self.alphas[0] > FRAC_PI_4 - WALL && self.alphas[2] < 0.0 {
            self.shift(0, -1.0);
            self.flip(1);
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugationReport {
    /// `‖U_d* − U_d†‖_F`
    pub conjugate_vs_adjoint: f64,
    /// `‖U_d U_d† − 1‖_F`
    pub unitarity: f64,
}

impl ConjugationReport {
    pub fn max(&self) -> f64 {
        self.conjugate_vs_adjoint.max(self.unitarity)
    }
}

/// Checks `U_d* = U_d† = U_d⁻¹` numerically.
pub fn conjugation_check(alphas: [f64; 3]) -> ConjugationReport {
    let ud = u_d(alphas);
    let adj = ud.adjoint();
    ConjugationReport {
        conjugate_vs_adjoint: ud.conj().distance(&adj),
        unitarity: ud.matmul(&adj).distance(&ComplexMatrix::identity(4)),
    }
}

/// Matrix of `U_d(α)` built directly from the magic basis; used to cross
/// check [`u_d`].
pub fn u_d_via_magic_basis(alphas: [f64; 3]) -> ComplexMatrix {
    let [a1, a2, a3] = alphas;
    let lambda = [a1 - a2 + a3, -a1 + a2 + a3, a1 + a2 - a3, -a1 - a2 - a3];
    let d: Vec<Complex64> = lambda.iter().map(|&l| Complex64::from_polar(1.0, -l)).collect();
    let m = magic_basis();
    m.matmul(&ComplexMatrix::diagonal(&d)).matmul(&m.adjoint())
}
