//! Entanglement capability of a two-qubit gate.
//!
//! The gate acts on qubits 1 and 2 of a four-qubit register split as
//! Alice {0, 1} | Bob {2, 3}; qubits 0 and 3 are the local ancillas.
//! `E_U` is the largest increase `E(Uψ) − E(ψ)` over all four-qubit `ψ`,
//! `E_U⁻` the largest decrease. Both are found by multi-start gradient
//! ascent on the unit sphere in `C¹⁶ ≅ R³²`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::canonical::{decompose, u_d};
use crate::error::{Error, Result};
use crate::qla::eigen::jacobi_in_place;
use crate::qla::entropy::entanglement_entropy;
use crate::qla::matrix::{ComplexMatrix, ZERO};
use crate::qla::state::{apply_on_qubits, Bipartition, PureState};

/// Qubits the gate acts on.
pub const GATE_QUBITS: [usize; 2] = [1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Increase => 1.0,
            Direction::Decrease => -1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// Central finite-difference step.
    pub fd_step: f64,
    /// An iteration gaining less than this counts as a plateau.
    pub plateau_tol: f64,
    /// Size of the random kick applied on a plateau.
    pub perturbation: f64,
    pub max_perturbations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iters: 5000,
            grad_tol: 1e-7,
            seed: 0,
            fd_step: 1e-6,
            plateau_tol: 1e-9,
            perturbation: 1e-4,
            max_perturbations: 3,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidState("optimizer needs at least one restart".into()));
        }
        let positive = [self.grad_tol, self.fd_step, self.plateau_tol, self.perturbation];
        if positive.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::InvalidState(
                "optimizer tolerances and step sizes must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CapabilityResult {
    /// Largest increase (or decrease) found, in ebits.
    pub value: f64,
    pub argmax_state: PureState,
    pub direction: Direction,
    pub restarts_used: usize,
    pub converged: bool,
    pub seed: u64,
    /// Index of the restart that produced `argmax_state`.
    pub best_restart: usize,
    /// Gradient norm at `argmax_state`.
    pub grad_norm: f64,
    pub iterations: usize,
}

/// `E(Uψ) − E(ψ)` across Alice {0,1} | Bob {2,3}, with `U` on qubits 1, 2.
pub fn delta_e(u: &ComplexMatrix, psi: &PureState) -> Result<f64> {
    if psi.num_qubits() != 4 {
        return Err(Error::Qubits(format!(
            "entanglement change needs a 4-qubit state, got {} qubits",
            psi.num_qubits()
        )));
    }
    let cut = Bipartition::alice_bob();
    let out = apply_on_qubits(u, psi, &GATE_QUBITS)?;
    Ok(entanglement_entropy(&out, &cut)? - entanglement_entropy(psi, &cut)?)
}

/// Stack-only evaluation of the objective for one fixed gate.
#[derive(Clone)]
pub(crate) struct Kernel {
    u: [[Complex64; 4]; 4],
}

impl Kernel {
    pub(crate) fn new(u: &ComplexMatrix) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = u[(i, j)];
            }
        }
        Kernel { u: m }
    }

    fn apply(&self, psi: &[Complex64; 16]) -> [Complex64; 16] {
        let mut out = [ZERO; 16];
        for anc in 0..4 {
            // ancilla bits: qubit 0 -> bit 3, qubit 3 -> bit 0
            let base = ((anc >> 1) << 3) | (anc & 1);
            let idx = |j: usize| base | (j << 1);
            let v = [psi[idx(0)], psi[idx(1)], psi[idx(2)], psi[idx(3)]];
            for (i, row) in self.u.iter().enumerate() {
                out[idx(i)] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
        out
    }

    /// `E(Uψ) − E(ψ)` for a normalized `ψ`.
    pub(crate) fn delta(&self, psi: &[Complex64; 16]) -> f64 {
        cut_entropy(&self.apply(psi)) - cut_entropy(psi)
    }

    fn objective(&self, v: &[f64; 32], sign: f64) -> f64 {
        sign * self.delta(&to_state(v))
    }
}

/// Entropy of Alice's half {0,1} of a normalized four-qubit state.
pub(crate) fn cut_entropy(psi: &[Complex64; 16]) -> f64 {
    let mut rho = [ZERO; 16];
    for a in 0..4 {
        for b in a..4 {
            let mut z = ZERO;
            for k in 0..4 {
                z += psi[4 * a + k] * psi[4 * b + k].conj();
            }
            rho[4 * a + b] = z;
            rho[4 * b + a] = z.conj();
        }
    }
    // a 4x4 Gram matrix always converges; fall back to zero entropy otherwise
    if jacobi_in_place(&mut rho, 4, None).is_err() {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..4 {
        let l = rho[5 * i].re;
        if l >= crate::qla::entropy::ZERO_EIGENVALUE {
            s -= l * l.log2();
        }
    }
    s
}

fn to_state(v: &[f64; 32]) -> [Complex64; 16] {
    let n = norm(v);
    std::array::from_fn(|i| Complex64::new(v[2 * i] / n, v[2 * i + 1] / n))
}

fn norm(v: &[f64; 32]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64; 32]) {
    let n = norm(v);
    v.iter_mut().for_each(|x| *x /= n);
}

fn gaussian_vector(rng: &mut ChaCha8Rng) -> [f64; 32] {
    let mut v: [f64; 32] = std::array::from_fn(|_| StandardNormal.sample(&mut *rng));
    normalize(&mut v);
    v
}

fn gradient(kernel: &Kernel, v: &[f64; 32], sign: f64, h: f64) -> [f64; 32] {
    let mut g = [0.0; 32];
    let mut w = *v;
    for i in 0..32 {
        let x = w[i];
        w[i] = x + h;
        let fp = kernel.objective(&w, sign);
        w[i] = x - h;
        let fm = kernel.objective(&w, sign);
        w[i] = x;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

struct RestartOutcome {
    value: f64,
    v: [f64; 32],
    grad_norm: f64,
    iterations: usize,
}

fn run_restart(kernel: &Kernel, sign: f64, config: &OptimizerConfig, seed: u64) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = gaussian_vector(&mut rng);
    let mut f = kernel.objective(&v, sign);
    let mut best = (f, v);
    let mut step: f64 = 0.1;
    let mut perturbations = 0;
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let g = gradient(kernel, &v, sign, config.fd_step);
        let gn2: f64 = g.iter().map(|x| x * x).sum();
        if gn2.sqrt() < config.grad_tol {
            break;
        }

        // backtracking line search with Armijo acceptance
        let mut accepted = None;
        let mut trial_step = (step * 2.0).min(10.0);
        while trial_step > 1e-14 {
            let mut w = v;
            for (wi, gi) in w.iter_mut().zip(&g) {
                *wi += trial_step * gi;
            }
            normalize(&mut w);
            let fw = kernel.objective(&w, sign);
            if fw >= f + 1e-4 * trial_step * gn2 {
                accepted = Some((w, fw));
                break;
            }
            trial_step *= 0.5;
        }

        let gained = match accepted {
            Some((w, fw)) => {
                let gain = fw - f;
                v = w;
                f = fw;
                step = trial_step;
                gain
            }
            None => 0.0,
        };
        if f > best.0 {
            best = (f, v);
        }

        if gained < config.plateau_tol {
            if perturbations == config.max_perturbations {
                break;
            }
            perturbations += 1;
            let kick = gaussian_vector(&mut rng);
            for (vi, ki) in v.iter_mut().zip(&kick) {
                *vi += config.perturbation * ki;
            }
            normalize(&mut v);
            f = kernel.objective(&v, sign);
            step = 0.1;
        }
    }

    let g = gradient(kernel, &best.1, sign, config.fd_step);
    RestartOutcome {
        value: best.0,
        v: best.1,
        grad_norm: g.iter().map(|x| x * x).sum::<f64>().sqrt(),
        iterations,
    }
}

/// `E_U` (increase) or `E_U⁻` (decrease) by multi-start gradient ascent.
/// Restart `r` draws its start and perturbations from seed `config.seed + r`;
/// the best restart wins, ties going to the lower index.
pub fn capability(u: &ComplexMatrix, direction: Direction, config: &OptimizerConfig) -> Result<CapabilityResult> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::Dimension(format!(
            "entanglement capability needs a 4x4 gate, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    u.ensure_unitary(crate::qla::state::UNITARY_TOL)?;
    config.validate()?;

    let kernel = Kernel::new(u);
    let sign = direction.sign();
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut iterations = 0;
    for r in 0..config.restarts {
        let outcome = run_restart(&kernel, sign, config, config.seed.wrapping_add(r as u64));
        iterations += outcome.iterations;
        if best.as_ref().is_none_or(|(_, b)| outcome.value > b.value) {
            best = Some((r, outcome));
        }
    }
    let (best_restart, outcome) = best.expect("at least one restart");

    let state = to_state(&outcome.v);
    let argmax_state = PureState::normalized(state.to_vec())?;
    let value = sign * delta_e(u, &argmax_state)?;
    Ok(CapabilityResult {
        value,
        argmax_state,
        direction,
        restarts_used: config.restarts,
        converged: outcome.grad_norm < config.grad_tol,
        seed: config.seed,
        best_restart,
        grad_norm: outcome.grad_norm,
        iterations,
    })
}

#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub alphas: [f64; 3],
    pub increase: CapabilityResult,
    pub decrease: CapabilityResult,
    /// `|E_U − E_U⁻|`
    pub gap: f64,
    /// `U_d* Ψ*` on the gate qubits, `Ψ` the increase argmax.
    pub witness_state: PureState,
    /// `ΔE` of `U_d` at the witness state; equals `−E_U`.
    pub witness_delta: f64,
    /// `|witness_delta + E_U|`
    pub witness_residual: f64,
}

/// Compares `E_U` with `E_U⁻` for the canonical core of `u` and builds the
/// conjugate witness whose entanglement `U_d` lowers by exactly `E_U`.
pub fn symmetry_check(u: &ComplexMatrix, config: &OptimizerConfig) -> Result<SymmetryReport> {
    let cf = decompose(u)?;
    let ud = u_d(cf.alphas);
    let increase = capability(&ud, Direction::Increase, config)?;
    let decrease = capability(&ud, Direction::Decrease, config)?;
    let witness_state = conjugate_witness(&ud, &increase.argmax_state)?;
    let witness_delta = delta_e(&ud, &witness_state)?;
    Ok(SymmetryReport {
        alphas: cf.alphas,
        gap: (increase.value - decrease.value).abs(),
        witness_residual: (witness_delta + increase.value).abs(),
        increase,
        decrease,
        witness_state,
        witness_delta,
    })
}

/// `U* ψ*` with `U*` on the gate qubits.
pub fn conjugate_witness(u: &ComplexMatrix, psi: &PureState) -> Result<PureState> {
    apply_on_qubits(&u.conj(), &psi.conj(), &GATE_QUBITS)
}

/// Best `±ΔE` over `samples` Haar-random four-qubit states; a lower bound
/// for the optimizer to beat.
pub fn random_search(u: &ComplexMatrix, direction: Direction, samples: usize, seed: u64) -> Result<f64> {
    u.ensure_unitary(crate::qla::state::UNITARY_TOL)?;
    let kernel = Kernel::new(u);
    let sign = direction.sign();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let v = gaussian_vector(&mut rng);
        best = best.max(kernel.objective(&v, sign));
    }
    Ok(best)
}
