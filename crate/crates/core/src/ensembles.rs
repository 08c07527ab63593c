//! Holevo information and the Pauli-coded ensembles.
//!
//! The one-way ensemble applies the 16 words `σ_{i'}⁽⁰⁾ σ_i⁽¹⁾ σ_i⁽²⁾ σ_{i'}⁽³⁾`
//! with equal weight to a state `Ψ` that the canonical core `U_d` makes less
//! entangled by `E_U`. Each `σ_i⊗σ_i` on the gate qubits commutes with
//! `U_d`, so every member loses `E_U` ebits, while the average of Bob's
//! reduced states stays maximally mixed. Bob's Holevo information therefore
//! rises by exactly `E_U`. Applying a second, independent word for the
//! other direction gives 256 states and a total rise of `2E_U`.

use serde::{Deserialize, Serialize};

use crate::canonical::{decompose, CanonicalForm};
use crate::entcap::GATE_QUBITS;
use crate::error::{Error, Result};
use crate::qla::entropy::vn_entropy;
use crate::qla::gates::{apply_pauli_word, pauli_unchecked};
use crate::qla::matrix::{c64, ComplexMatrix};
use crate::qla::state::{apply_on_qubits, apply_unchecked, Bipartition, DensityMatrix, PureState};

pub const PROBABILITY_TOL: f64 = 1e-12;
/// Uniform weight of each Pauli code word.
pub const WORD_PROBABILITY: f64 = 1.0 / 16.0;
/// Documented in serialized ensembles.
pub const QUBIT_ORDER: &str = "qubit 0 is the most significant bit of the amplitude index";

/// Alice's qubits in the four-qubit layout.
pub const ALICE: [usize; 2] = [0, 1];
/// Bob's qubits in the four-qubit layout.
pub const BOB: [usize; 2] = [2, 3];

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo(items: &[(f64, DensityMatrix)]) -> Result<f64> {
    let (first, second) = holevo_terms(items)?;
    Ok(first - second)
}

/// `(S(Σ p_i ρ_i), Σ p_i S(ρ_i))`
pub fn holevo_terms(items: &[(f64, DensityMatrix)]) -> Result<(f64, f64)> {
    check_probabilities(items.iter().map(|(p, _)| *p))?;
    let average = DensityMatrix::mixture(items.iter().map(|(p, r)| (*p, r)))?;
    let mut second = 0.0;
    for (p, rho) in items {
        if *p > 0.0 {
            second += p * vn_entropy(rho)?;
        }
    }
    Ok((vn_entropy(&average)?, second))
}

fn check_probabilities(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Ensemble(format!("invalid probability {p}")));
        }
        total += p;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Ensemble("ensemble is empty".into()));
    }
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::Ensemble(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// `‖(1/16) Σ_{i,i'} (σ_i⊗σ_i') ρ (σ_i⊗σ_i') − Tr(ρ) 1/4‖_F` for a
/// two-qubit `ρ`; zero for every input.
pub fn twirl_check(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 2 {
        return Err(Error::Dimension(format!(
            "twirl needs a two-qubit state, got {} qubits",
            rho.num_qubits()
        )));
    }
    let m = rho.matrix();
    let mut acc = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let w = pauli_unchecked(i).kron(&pauli_unchecked(j));
            acc = acc.add(&w.matmul(m).matmul(&w));
        }
    }
    let target = ComplexMatrix::identity(4).scale(m.trace() / 4.0);
    Ok(acc.scale(c64(WORD_PROBABILITY, 0.0)).distance(&target))
}

/// The code word `σ_{i'}⁽⁰⁾ σ_i⁽¹⁾ σ_i⁽²⁾ σ_{i'}⁽³⁾` for `word = 4i + i'`.
pub fn code_word(word: usize) -> [(usize, u8); 4] {
    let (i, ip) = ((word / 4) as u8, (word % 4) as u8);
    [(0, ip), (1, i), (2, i), (3, ip)]
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    probabilities: Vec<f64>,
    states: Vec<PureState>,
    cut: Bipartition,
}

impl Ensemble {
    pub fn new(probabilities: Vec<f64>, states: Vec<PureState>, cut: Bipartition) -> Result<Self> {
        if probabilities.len() != states.len() {
            return Err(Error::Ensemble(format!(
                "{} probabilities for {} states",
                probabilities.len(),
                states.len()
            )));
        }
        check_probabilities(probabilities.iter().copied())?;
        for s in &states {
            if s.num_qubits() != cut.num_qubits() {
                return Err(Error::Ensemble(format!(
                    "state on {} qubits in an ensemble over {} qubits",
                    s.num_qubits(),
                    cut.num_qubits()
                )));
            }
        }
        Ok(Ensemble {
            probabilities,
            states,
            cut,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn cut(&self) -> &Bipartition {
        &self.cut
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = EnsembleFile {
            qubit_order: QUBIT_ORDER.into(),
            num_qubits: self.cut.num_qubits(),
            alice: self.cut.side_a().to_vec(),
            bob: self.cut.side_b().to_vec(),
            states: self
                .probabilities
                .iter()
                .zip(&self.states)
                .map(|(&probability, s)| WeightedState {
                    probability,
                    amplitudes: amplitudes_to_pairs(s),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("ensemble serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        let cut = Bipartition::new(file.alice, file.bob)?;
        let mut probs = Vec::new();
        let mut states = Vec::new();
        for w in file.states {
            probs.push(w.probability);
            states.push(state_from_pairs(&w.amplitudes)?);
        }
        Ensemble::new(probs, states, cut)
    }
}

#[derive(Debug, Clone)]
pub struct BidirectionalEnsemble {
    row_probs: Vec<f64>,
    col_probs: Vec<f64>,
    /// `states[i][j]`: row `i` is Alice's message, column `j` is Bob's.
    states: Vec<Vec<PureState>>,
    cut: Bipartition,
}

impl BidirectionalEnsemble {
    pub fn new(
        row_probs: Vec<f64>,
        col_probs: Vec<f64>,
        states: Vec<Vec<PureState>>,
        cut: Bipartition,
    ) -> Result<Self> {
        check_probabilities(row_probs.iter().copied())?;
        check_probabilities(col_probs.iter().copied())?;
        if states.len() != row_probs.len() || states.iter().any(|r| r.len() != col_probs.len()) {
            return Err(Error::Ensemble(format!(
                "state grid does not match {} x {} probabilities",
                row_probs.len(),
                col_probs.len()
            )));
        }
        if states.iter().flatten().any(|s| s.num_qubits() != cut.num_qubits()) {
            return Err(Error::Ensemble("state size does not match the cut".into()));
        }
        Ok(BidirectionalEnsemble {
            row_probs,
            col_probs,
            states,
            cut,
        })
    }

    pub fn row_probs(&self) -> &[f64] {
        &self.row_probs
    }

    pub fn col_probs(&self) -> &[f64] {
        &self.col_probs
    }

    pub fn state(&self, i: usize, j: usize) -> &PureState {
        &self.states[i][j]
    }

    pub fn states(&self) -> impl Iterator<Item = &PureState> {
        self.states.iter().flatten()
    }

    pub fn cut(&self) -> &Bipartition {
        &self.cut
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = BidirectionalFile {
            qubit_order: QUBIT_ORDER.into(),
            num_qubits: self.cut.num_qubits(),
            alice: self.cut.side_a().to_vec(),
            bob: self.cut.side_b().to_vec(),
            row_probabilities: self.row_probs.clone(),
            column_probabilities: self.col_probs.clone(),
            states: self
                .states
                .iter()
                .map(|row| row.iter().map(amplitudes_to_pairs).collect())
                .collect(),
        };
        serde_json::to_value(file).expect("ensemble serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BidirectionalFile = serde_json::from_str(text)?;
        let cut = Bipartition::new(file.alice, file.bob)?;
        let states = file
            .states
            .iter()
            .map(|row| row.iter().map(|a| state_from_pairs(a)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        BidirectionalEnsemble::new(file.row_probabilities, file.column_probabilities, states, cut)
    }
}

#[derive(Serialize, Deserialize)]
struct WeightedState {
    probability: f64,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    qubit_order: String,
    num_qubits: usize,
    alice: Vec<usize>,
    bob: Vec<usize>,
    states: Vec<WeightedState>,
}

#[derive(Serialize, Deserialize)]
struct BidirectionalFile {
    qubit_order: String,
    num_qubits: usize,
    alice: Vec<usize>,
    bob: Vec<usize>,
    row_probabilities: Vec<f64>,
    column_probabilities: Vec<f64>,
    states: Vec<Vec<Vec<[f64; 2]>>>,
}

pub(crate) fn amplitudes_to_pairs(s: &PureState) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn state_from_pairs(pairs: &[[f64; 2]]) -> Result<PureState> {
    PureState::new(pairs.iter().map(|&[re, im]| c64(re, im)).collect())
}

fn check_four_qubits(psi: &PureState) -> Result<()> {
    if psi.num_qubits() != 4 {
        return Err(Error::Ensemble(format!(
            "code words act on 4-qubit states, got {} qubits",
            psi.num_qubits()
        )));
    }
    Ok(())
}

fn check_alphas(alphas: [f64; 3]) -> Result<()> {
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::Ensemble(format!("non-finite alphas {alphas:?}")));
    }
    Ok(())
}

/// The 16 states `σ_{i'}⁽⁰⁾ σ_i⁽¹⁾ σ_i⁽²⁾ σ_{i'}⁽³⁾ Ψ`, each with weight 1/16.
/// The words commute with `U_d(alphas)` for any `alphas`; `psi` should be
/// a state whose entanglement `U_d` lowers by `E_U`.
pub fn build_one_way(alphas: [f64; 3], psi: &PureState) -> Result<Ensemble> {
    check_alphas(alphas)?;
    check_four_qubits(psi)?;
    let states = (0..16)
        .map(|w| apply_pauli_word(psi, &code_word(w)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(vec![WORD_PROBABILITY; 16], states, Bipartition::alice_bob())
}

/// The 256 states `V_{ii'} W_{jj'} Ψ`, both factors drawn from the one-way
/// code words, with row (Alice) and column (Bob) weights 1/16.
pub fn build_bidirectional(alphas: [f64; 3], psi: &PureState) -> Result<BidirectionalEnsemble> {
    check_alphas(alphas)?;
    check_four_qubits(psi)?;
    let mut states = Vec::with_capacity(16);
    for i in 0..16 {
        let vi = apply_pauli_word(psi, &code_word(i))?;
        let row = (0..16)
            .map(|j| apply_pauli_word(&vi, &code_word(j)))
            .collect::<Result<Vec<_>>>()?;
        states.push(row);
    }
    BidirectionalEnsemble::new(
        vec![WORD_PROBABILITY; 16],
        vec![WORD_PROBABILITY; 16],
        states,
        Bipartition::alice_bob(),
    )
}

/// Moves a state between the gate's frame and its canonical frame: with
/// `U = phase · after · U_d · before`, the canonical-frame state is
/// `before · ψ` on the gate qubits.
pub fn to_canonical_frame(cf: &CanonicalForm, psi: &PureState) -> Result<PureState> {
    apply_on_qubits(&cf.before(), psi, &GATE_QUBITS)
}

pub fn from_canonical_frame(cf: &CanonicalForm, psi: &PureState) -> Result<PureState> {
    apply_on_qubits(&cf.before().adjoint(), psi, &GATE_QUBITS)
}

/// One-way ensemble for an arbitrary gate `u`: `psi` is given in `u`'s own
/// frame, the code words are applied in the canonical frame and the states
/// mapped back.
pub fn one_way_for_gate(u: &ComplexMatrix, psi: &PureState) -> Result<(Ensemble, CanonicalForm)> {
    let cf = decompose(u)?;
    let canon = build_one_way(cf.alphas, &to_canonical_frame(&cf, psi)?)?;
    let back = cf.before().adjoint();
    let states = canon
        .states
        .iter()
        .map(|s| apply_unchecked(&back, s, &GATE_QUBITS))
        .collect();
    Ok((Ensemble::new(canon.probabilities, states, canon.cut)?, cf))
}

/// Bidirectional analogue of [`one_way_for_gate`].
pub fn bidirectional_for_gate(u: &ComplexMatrix, psi: &PureState) -> Result<(BidirectionalEnsemble, CanonicalForm)> {
    let cf = decompose(u)?;
    let canon = build_bidirectional(cf.alphas, &to_canonical_frame(&cf, psi)?)?;
    let back = cf.before().adjoint();
    let states = canon
        .states
        .iter()
        .map(|row| row.iter().map(|s| apply_unchecked(&back, s, &GATE_QUBITS)).collect())
        .collect();
    Ok((
        BidirectionalEnsemble::new(canon.row_probs, canon.col_probs, states, canon.cut)?,
        cf,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct StateEntropy {
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub chi_before: f64,
    pub chi_after: f64,
    pub gain: f64,
    /// `S` of the averaged receiver state, before and after.
    pub first_term_before: f64,
    pub first_term_after: f64,
    /// Average `S` of the receiver states, before and after.
    pub second_term_before: f64,
    pub second_term_after: f64,
    /// Entanglement of each member, before and after `U`.
    pub entropies: Vec<StateEntropy>,
    /// Largest `‖ρ̄ − 1/d‖_F` of the averaged receiver state.
    pub first_term_residual: f64,
}

fn check_gate(u: &ComplexMatrix, num_qubits: usize) -> Result<()> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::Dimension(format!(
            "expected a 4x4 gate, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    if num_qubits != 4 {
        return Err(Error::Ensemble(format!(
            "gain evaluation needs 4-qubit ensembles, got {num_qubits} qubits"
        )));
    }
    u.ensure_unitary(crate::qla::state::UNITARY_TOL)
}

fn mixed_residual(items: &[(f64, DensityMatrix)]) -> Result<f64> {
    let avg = DensityMatrix::mixture(items.iter().map(|(p, r)| (*p, r)))?;
    let d = avg.dim();
    Ok(avg
        .matrix()
        .distance(&ComplexMatrix::identity(d).scale(c64(1.0 / d as f64, 0.0))))
}

/// `χ(Tr_A U𝓔) − χ(Tr_A 𝓔)`: the rise of the Holevo information of the
/// states Bob holds.
pub fn gain_one_way(u: &ComplexMatrix, ensemble: &Ensemble) -> Result<GainReport> {
    check_gate(u, ensemble.cut.num_qubits())?;
    let bob = ensemble.cut.side_b();
    let mut before = Vec::with_capacity(ensemble.len());
    let mut after = Vec::with_capacity(ensemble.len());
    for (&p, s) in ensemble.probabilities.iter().zip(&ensemble.states) {
        before.push((p, s.reduced(bob)?));
        after.push((p, apply_unchecked(u, s, &GATE_QUBITS).reduced(bob)?));
    }
    let (fb, sb) = holevo_terms(&before)?;
    let (fa, sa) = holevo_terms(&after)?;
    let entropies = before
        .iter()
        .zip(&after)
        .map(|((_, rb), (_, ra))| {
            Ok(StateEntropy {
                before: vn_entropy(rb)?,
                after: vn_entropy(ra)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (chi_before, chi_after) = (fb - sb, fa - sa);
    Ok(GainReport {
        chi_before,
        chi_after,
        gain: chi_after - chi_before,
        first_term_before: fb,
        first_term_after: fa,
        second_term_before: sb,
        second_term_after: sa,
        entropies,
        first_term_residual: mixed_residual(&before)?.max(mixed_residual(&after)?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionalGain {
    pub chi_before: f64,
    pub chi_after: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BidirectionalGainReport {
    /// Alice to Bob, conditioned on Bob's own message.
    pub forward: DirectionalGain,
    /// Bob to Alice, conditioned on Alice's own message.
    pub backward: DirectionalGain,
    /// `χ^↔` of the ensemble before `U`.
    pub total_before: f64,
    /// `χ^↔` of the ensemble after `U`.
    pub total_after: f64,
    pub total_gain: f64,
    /// Largest deviation of a conditionally averaged receiver state from
    /// the maximally mixed state.
    pub first_term_residual: f64,
}

/// Directional Holevo quantities of a grid of receiver states: for each
/// condition `c`, the Holevo information of `{w_m, ρ_{m,c}}`, averaged over
/// `c` with weights `v_c`. Returns the value and the largest residual of
/// the conditional averages from `1/d`.
fn conditional_holevo(
    grid: &[Vec<DensityMatrix>],
    message_probs: &[f64],
    condition_probs: &[f64],
    by_row: bool,
) -> Result<(f64, f64)> {
    let mut chi = 0.0;
    let mut residual: f64 = 0.0;
    for (c, &vc) in condition_probs.iter().enumerate() {
        let items: Vec<(f64, DensityMatrix)> = message_probs
            .iter()
            .enumerate()
            .map(|(m, &w)| {
                let rho = if by_row { &grid[m][c] } else { &grid[c][m] };
                (w, rho.clone())
            })
            .collect();
        chi += vc * holevo(&items)?;
        residual = residual.max(mixed_residual(&items)?);
    }
    Ok((chi, residual))
}

fn directional(be: &BidirectionalEnsemble, u: Option<&ComplexMatrix>) -> Result<(f64, f64, f64)> {
    let mut bob_states = Vec::with_capacity(be.states.len());
    let mut alice_states = Vec::with_capacity(be.states.len());
    for row in &be.states {
        let mut b_row = Vec::with_capacity(row.len());
        let mut a_row = Vec::with_capacity(row.len());
        for s in row {
            let s = match u {
                Some(u) => apply_unchecked(u, s, &GATE_QUBITS),
                None => s.clone(),
            };
            b_row.push(s.reduced(be.cut.side_b())?);
            a_row.push(s.reduced(be.cut.side_a())?);
        }
        bob_states.push(b_row);
        alice_states.push(a_row);
    }
    // Bob decodes the row message for each fixed column, Alice the column
    // message for each fixed row
    let (fwd, r1) = conditional_holevo(&bob_states, &be.row_probs, &be.col_probs, true)?;
    let (bwd, r2) = conditional_holevo(&alice_states, &be.col_probs, &be.row_probs, false)?;
    Ok((fwd, bwd, r1.max(r2)))
}

/// Per-direction and total Holevo gains of a bidirectional ensemble.
pub fn gain_bidirectional(u: &ComplexMatrix, be: &BidirectionalEnsemble) -> Result<BidirectionalGainReport> {
    check_gate(u, be.cut.num_qubits())?;
    let (fb, bb, r_before) = directional(be, None)?;
    let (fa, ba, r_after) = directional(be, Some(u))?;
    let forward = DirectionalGain {
        chi_before: fb,
        chi_after: fa,
        gain: fa - fb,
    };
    let backward = DirectionalGain {
        chi_before: bb,
        chi_after: ba,
        gain: ba - bb,
    };
    Ok(BidirectionalGainReport {
        total_before: fb + bb,
        total_after: fa + ba,
        total_gain: forward.gain + backward.gain,
        forward,
        backward,
        first_term_residual: r_before.max(r_after),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::u_d;
    use crate::qla::entropy::entanglement_entropy;
    use crate::qla::gates;
    use crate::qla::matrix::ZERO;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn ket(n: usize, entries: &[(usize, (f64, f64))]) -> PureState {
        let mut a = vec![ZERO; 1 << n];
        for &(i, (re, im)) in entries {
            a[i] = c64(re, im);
        }
        PureState::normalized(a).unwrap()
    }

    /// `|0⟩ ⊗ (|00⟩ + i|11⟩)/√2 ⊗ |0⟩`, disentangled by `U_d(π/4,0,0)`.
    fn canonical_cnot_state() -> PureState {
        ket(4, &[(0b0000, (1.0, 0.0)), (0b0110, (0.0, 1.0))])
    }

    #[test]
    fn holevo_examples() {
        let zero = PureState::basis(1, 0).unwrap().projector();
        let one = PureState::basis(1, 1).unwrap().projector();
        let plus = ket(1, &[(0, (1.0, 0.0)), (1, (1.0, 0.0))]).projector();
        assert_eq!(holevo(&[(0.5, zero.clone()), (0.5, one)]).unwrap(), 1.0);
        let l = 0.5 + 0.5 * FRAC_1_SQRT_2;
        let expect = -(l * l.log2() + (1.0 - l) * (1.0 - l).log2());
        assert!((holevo(&[(0.5, zero.clone()), (0.5, plus)]).unwrap() - expect).abs() < 1e-12);
        assert_eq!(holevo(&[(1.0, zero.clone())]).unwrap(), 0.0);
        assert!(holevo(&[(0.4, zero.clone()), (0.4, zero)]).is_err());
    }

    #[test]
    fn twirl_examples() {
        assert_eq!(twirl_check(&DensityMatrix::maximally_mixed(2)).unwrap(), 0.0);
        assert!(twirl_check(&PureState::basis(2, 0).unwrap().projector()).unwrap() < 1e-12);
        assert!(twirl_check(&DensityMatrix::maximally_mixed(1)).is_err());
    }

    #[test]
    fn one_way_cnot_canonical() {
        let alphas = [FRAC_PI_4, 0.0, 0.0];
        let e = build_one_way(alphas, &canonical_cnot_state()).unwrap();
        assert_eq!(e.len(), 16);
        let ud = u_d(alphas);
        let cut = Bipartition::alice_bob();
        for s in e.states() {
            assert!((entanglement_entropy(s, &cut).unwrap() - 1.0).abs() < 1e-12);
            assert!((crate::entcap::delta_e(&ud, s).unwrap() + 1.0).abs() < 1e-9);
        }
        let r = gain_one_way(&ud, &e).unwrap();
        assert!((r.chi_before - 1.0).abs() < 1e-9);
        assert!((r.chi_after - 2.0).abs() < 1e-9);
        assert!((r.gain - 1.0).abs() < 1e-9);
        assert!(r.first_term_residual < 1e-12);
    }

    #[test]
    fn literal_cnot_through_the_frame() {
        // |0⟩ ⊗ Φ⁺ ⊗ |0⟩, which CNOT maps to a product state
        let psi = ket(4, &[(0b0000, (1.0, 0.0)), (0b0110, (1.0, 0.0))]);
        let (e, _) = one_way_for_gate(&gates::cnot(), &psi).unwrap();
        let r = gain_one_way(&gates::cnot(), &e).unwrap();
        assert!((r.gain - 1.0).abs() < 1e-9, "{}", r.gain);
        let (be, _) = bidirectional_for_gate(&gates::cnot(), &psi).unwrap();
        let r = gain_bidirectional(&gates::cnot(), &be).unwrap();
        assert!((r.forward.gain - 1.0).abs() < 1e-9);
        assert!((r.backward.gain - 1.0).abs() < 1e-9);
        assert_eq!(r.total_gain, r.forward.gain + r.backward.gain);
    }

    #[test]
    fn identity_gains_nothing() {
        let psi = canonical_cnot_state();
        let e = build_one_way([0.0; 3], &psi).unwrap();
        assert!(gain_one_way(&gates::identity4(), &e).unwrap().gain.abs() < 1e-12);
        let be = build_bidirectional([0.0; 3], &psi).unwrap();
        assert!(gain_bidirectional(&gates::identity4(), &be).unwrap().total_gain.abs() < 1e-12);
    }

    #[test]
    fn swap_gains_two_and_four() {
        // Bell(0,2) ⊗ Bell(1,3): SWAP on (1,2) leaves Bell(0,1) ⊗ Bell(2,3)
        let psi = ket(
            4,
            &[
                (0b0000, (1.0, 0.0)),
                (0b0101, (1.0, 0.0)),
                (0b1010, (1.0, 0.0)),
                (0b1111, (1.0, 0.0)),
            ],
        );
        assert!((crate::entcap::delta_e(&gates::swap(), &psi).unwrap() + 2.0).abs() < 1e-12);
        let e = build_one_way([FRAC_PI_4; 3], &psi).unwrap();
        assert!((gain_one_way(&gates::swap(), &e).unwrap().gain - 2.0).abs() < 1e-9);
        let be = build_bidirectional([FRAC_PI_4; 3], &psi).unwrap();
        assert!((gain_bidirectional(&gates::swap(), &be).unwrap().total_gain - 4.0).abs() < 1e-9);
    }

    #[test]
    fn word_order_is_irrelevant() {
        let psi = PureState::normalized((0..16).map(|k| c64(1.0 + k as f64, (k as f64).sin())).collect()).unwrap();
        for i in [1, 6, 11, 15] {
            for j in [2, 7, 9, 12] {
                let ij = apply_pauli_word(&apply_pauli_word(&psi, &code_word(i)).unwrap(), &code_word(j)).unwrap();
                let ji = apply_pauli_word(&apply_pauli_word(&psi, &code_word(j)).unwrap(), &code_word(i)).unwrap();
                assert!(ij.distance_up_to_phase(&ji) < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let e = build_one_way([0.1, 0.0, 0.0], &canonical_cnot_state()).unwrap();
        let text = e.to_json().to_string();
        let back = Ensemble::from_json(&text).unwrap();
        assert_eq!(back.len(), 16);
        for (a, b) in e.states().iter().zip(back.states()) {
            assert!(a.distance(b) < 1e-15);
        }
        let be = build_bidirectional([0.1, 0.0, 0.0], &canonical_cnot_state()).unwrap();
        let back = BidirectionalEnsemble::from_json(&be.to_json().to_string()).unwrap();
        assert!(back.state(3, 5).distance(be.state(3, 5)) < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let psi = PureState::basis(2, 0).unwrap();
        assert!(matches!(build_one_way([0.0; 3], &psi), Err(Error::Ensemble(_))));
        assert!(build_one_way([f64::NAN, 0.0, 0.0], &canonical_cnot_state()).is_err());
        let cut = Bipartition::alice_bob();
        assert!(Ensemble::new(vec![0.5], vec![canonical_cnot_state()], cut).is_err());
    }
}
