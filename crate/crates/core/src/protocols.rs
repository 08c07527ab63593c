//! Scripted two-party communication protocols and the
//! superposition-of-messages audit.
//!
//! A protocol lives on `n` qubits split between Alice and Bob. Alice's
//! message register starts in `|x⟩`, Bob's in `|y⟩`, the ancillas in a shared
//! resource state. Steps are local unitaries on one side or applications of
//! the interaction gate to one Alice qubit and one Bob qubit. At the end Bob's
//! output register should hold `x` and Alice's `y`.
//!
//! The audit replaces the basis messages by the uniform superposition
//! `Σ_{xy} |x⟩|x⟩_{A3} |y⟩|y⟩_{B3}` with copy registers on each side and
//! checks that the entanglement it gains is `n_a + n_b` plus the average of
//! the per-message changes.

use serde::{Deserialize, Serialize};

use crate::cli::{parse_complex_vector, parse_gate_value, parse_matrix_value};
use crate::error::{Error, Result};
use crate::qla::entropy::entanglement_entropy;
use crate::qla::gates;
use crate::qla::matrix::{c64, ComplexMatrix, ZERO};
use crate::qla::state::{apply_unchecked, scatter_bits, Bipartition, PureState, UNITARY_TOL};

/// Largest register the audit will simulate, copy registers included.
pub const MAX_QUBITS: usize = 12;
/// Fidelity every message pair must reach before an audit runs.
pub const PERFECT_FIDELITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registers {
    /// Qubits holding this party's message, first qubit most significant.
    #[serde(default)]
    pub message: Vec<usize>,
    #[serde(default)]
    pub ancilla: Vec<usize>,
    /// Qubits that must end up holding the other party's message.
    #[serde(default)]
    pub output: Vec<usize>,
}

impl Registers {
    fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.message.iter().chain(&self.ancilla).copied().collect();
        q.sort_unstable();
        q
    }
}

#[derive(Debug, Clone)]
pub enum Step {
    Local {
        side: Side,
        targets: Vec<usize>,
        gate: ComplexMatrix,
        label: String,
    },
    Interaction {
        alice: usize,
        bob: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Protocol {
    pub name: String,
    pub description: String,
    pub n_a: usize,
    pub n_b: usize,
    pub alice: Registers,
    pub bob: Registers,
    /// Shared state of the ancillas, Alice's listed first.
    pub resource: PureState,
    pub gate: ComplexMatrix,
    pub gate_label: String,
    pub steps: Vec<Step>,
    num_qubits: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolFile {
    name: String,
    #[serde(default)]
    description: String,
    n_a: usize,
    n_b: usize,
    alice: Registers,
    bob: Registers,
    #[serde(default)]
    resource: Option<ResourceFile>,
    gate: serde_json::Value,
    steps: Vec<StepFile>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum ResourceFile {
    /// `(|00⟩ + |11⟩)/√2` on each listed pair; other ancillas start in `|0⟩`.
    BellPairs(Vec<[usize; 2]>),
    Amplitudes(serde_json::Value),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum StepFile {
    Local {
        side: Side,
        targets: Vec<usize>,
        gate: serde_json::Value,
    },
    Interaction {
        alice: usize,
        bob: usize,
    },
}

const EMPTY: &str = include_str!("../protocols/empty.json");
const ONE_WAY_CNOT: &str = include_str!("../protocols/one_way_cnot.json");
const SWAP_SUPERDENSE: &str = include_str!("../protocols/swap_superdense.json");

/// Names accepted by [`Protocol::builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["empty", "one_way_cnot", "swap_superdense"];

impl Protocol {
    pub fn from_json(text: &str) -> Result<Protocol> {
        let file: ProtocolFile =
            serde_json::from_str(text).map_err(|e| Error::Protocol(format!("malformed protocol: {e}")))?;
        Protocol::from_file(file)
    }

    pub fn builtin(name: &str) -> Option<Protocol> {
        let text = match name {
            "empty" => EMPTY,
            "one_way_cnot" => ONE_WAY_CNOT,
            "swap_superdense" => SWAP_SUPERDENSE,
            _ => return None,
        };
        Some(Protocol::from_json(text).expect("shipped protocols are valid"))
    }

    fn from_file(f: ProtocolFile) -> Result<Protocol> {
        let all: Vec<usize> = [&f.alice.message, &f.alice.ancilla, &f.bob.message, &f.bob.ancilla]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        let num_qubits = all.len();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &q)| i != q) {
            return Err(Error::Protocol(format!(
                "message and ancilla registers must cover qubits 0..{num_qubits} exactly once, got {all:?}"
            )));
        }
        if f.alice.message.len() != f.n_a || f.bob.message.len() != f.n_b {
            return Err(Error::Protocol(format!(
                "message registers have {} and {} qubits but n_a = {}, n_b = {}",
                f.alice.message.len(),
                f.bob.message.len(),
                f.n_a,
                f.n_b
            )));
        }
        if f.bob.output.len() != f.n_a || f.alice.output.len() != f.n_b {
            return Err(Error::Protocol(
                "Bob's output must have n_a qubits and Alice's n_b qubits".into(),
            ));
        }
        let alice_q = f.alice.qubits();
        let bob_q = f.bob.qubits();
        if alice_q.is_empty() || bob_q.is_empty() {
            return Err(Error::Protocol("each party needs at least one qubit".into()));
        }
        for (reg, side, name) in [(&f.alice.output, &alice_q, "Alice"), (&f.bob.output, &bob_q, "Bob")] {
            if reg.iter().any(|q| !side.contains(q)) || has_duplicates(reg) {
                return Err(Error::Protocol(format!(
                    "{name}'s output must be distinct qubits on {name}'s side"
                )));
            }
        }
        if num_qubits + f.n_a + f.n_b > MAX_QUBITS {
            return Err(Error::Protocol(format!(
                "{} qubits plus {} copy qubits exceed the limit of {MAX_QUBITS}",
                num_qubits,
                f.n_a + f.n_b
            )));
        }

        let ancillas: Vec<usize> = f.alice.ancilla.iter().chain(&f.bob.ancilla).copied().collect();
        let resource = match f.resource {
            None => PureState::basis(ancillas.len(), 0)?,
            Some(ResourceFile::Amplitudes(v)) => PureState::new(parse_complex_vector(&v)?)
                .map_err(|e| Error::Protocol(format!("resource amplitudes: {e}")))?,
            Some(ResourceFile::BellPairs(pairs)) => bell_resource(&ancillas, &pairs)?,
        };
        if resource.num_qubits() != ancillas.len() {
            return Err(Error::Protocol(format!(
                "resource state has {} qubits for {} ancillas",
                resource.num_qubits(),
                ancillas.len()
            )));
        }

        let (gate, gate_label) = parse_gate_value(&f.gate).map_err(|e| e.in_stage("protocol gate"))?;
        let mut steps = Vec::with_capacity(f.steps.len());
        for (k, s) in f.steps.into_iter().enumerate() {
            let step = match s {
                StepFile::Local { side, targets, gate } => {
                    let own = if side == Side::Alice { &alice_q } else { &bob_q };
                    if targets.is_empty() || has_duplicates(&targets) || targets.iter().any(|q| !own.contains(q)) {
                        return Err(Error::Protocol(format!(
                            "step {k}: local targets {targets:?} are not distinct qubits on {side:?}'s side"
                        )));
                    }
                    let (g, label) = local_gate(&gate).map_err(|e| Error::Protocol(format!("step {k}: {e}")))?;
                    if g.rows() != 1 << targets.len() {
                        return Err(Error::Protocol(format!(
                            "step {k}: {}x{} gate on {} qubits",
                            g.rows(),
                            g.cols(),
                            targets.len()
                        )));
                    }
                    Step::Local {
                        side,
                        targets,
                        gate: g,
                        label,
                    }
                }
                StepFile::Interaction { alice, bob } => {
                    if !alice_q.contains(&alice) || !bob_q.contains(&bob) {
                        return Err(Error::Protocol(format!(
                            "step {k}: interaction needs one Alice qubit and one Bob qubit, got ({alice}, {bob})"
                        )));
                    }
                    Step::Interaction { alice, bob }
                }
            };
            steps.push(step);
        }

        Ok(Protocol {
            name: f.name,
            description: f.description,
            n_a: f.n_a,
            n_b: f.n_b,
            alice: f.alice,
            bob: f.bob,
            resource,
            gate,
            gate_label,
            steps,
            num_qubits,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of interaction steps.
    pub fn t(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Interaction { .. }))
            .count()
    }

    pub fn cut(&self) -> Bipartition {
        Bipartition::new(self.alice.qubits(), self.bob.qubits()).expect("validated registers")
    }

    /// `|x⟩|y⟩` on the message registers times the resource state.
    pub fn input_state(&self, x: usize, y: usize) -> Result<PureState> {
        self.check_message(x, y)?;
        let n = self.num_qubits;
        let ancillas: Vec<usize> = self.alice.ancilla.iter().chain(&self.bob.ancilla).copied().collect();
        let fixed = scatter_bits(x, &self.alice.message, n) | scatter_bits(y, &self.bob.message, n);
        let mut amps = vec![ZERO; 1 << n];
        for (k, a) in self.resource.amplitudes().iter().enumerate() {
            amps[fixed | scatter_bits(k, &ancillas, n)] = *a;
        }
        Ok(PureState::from_raw(n, amps))
    }

    fn check_message(&self, x: usize, y: usize) -> Result<()> {
        if x >> self.n_a != 0 || y >> self.n_b != 0 {
            return Err(Error::Protocol(format!(
                "messages x={x}, y={y} do not fit in {} and {} bits",
                self.n_a, self.n_b
            )));
        }
        Ok(())
    }

    /// Runs every step on `psi`, whose first `num_qubits()` qubits are the
    /// protocol's; any further qubits are left alone.
    pub fn execute(&self, psi: &PureState) -> Result<PureState> {
        if psi.num_qubits() < self.num_qubits {
            return Err(Error::Protocol(format!(
                "{}-qubit state for a {}-qubit protocol",
                psi.num_qubits(),
                self.num_qubits
            )));
        }
        let mut state = psi.clone();
        for step in &self.steps {
            state = match step {
                Step::Local { targets, gate, .. } => apply_unchecked(gate, &state, targets),
                Step::Interaction { alice, bob } => apply_unchecked(&self.gate, &state, &[*alice, *bob]),
            };
        }
        Ok(state)
    }
}

fn has_duplicates(q: &[usize]) -> bool {
    q.iter().enumerate().any(|(i, a)| q[i + 1..].contains(a))
}

fn local_gate(v: &serde_json::Value) -> Result<(ComplexMatrix, String)> {
    let (g, label) = match v {
        serde_json::Value::String(name) => {
            let g = gates::named(name).ok_or_else(|| Error::GateSpec(format!("unknown gate {name:?}")))?;
            (g, name.to_ascii_uppercase())
        }
        serde_json::Value::Object(map) if map.len() == 1 && map.contains_key("matrix") => {
            (parse_matrix_value(&map["matrix"])?, "matrix".to_string())
        }
        other => {
            return Err(Error::GateSpec(format!(
                "expected a gate name or {{\"matrix\": ...}}, got {other}"
            )))
        }
    };
    if !g.is_square() || !g.rows().is_power_of_two() || g.rows() < 2 {
        return Err(Error::GateSpec(format!(
            "{}x{} is not a qubit gate",
            g.rows(),
            g.cols()
        )));
    }
    g.ensure_unitary(UNITARY_TOL)?;
    Ok((g, label))
}

fn bell_resource(ancillas: &[usize], pairs: &[[usize; 2]]) -> Result<PureState> {
    let pos = |q: usize| {
        ancillas
            .iter()
            .position(|&a| a == q)
            .ok_or_else(|| Error::Protocol(format!("Bell pair qubit {q} is not an ancilla")))
    };
    let n = ancillas.len();
    let mut state = PureState::basis(n, 0)?;
    let mut used = Vec::new();
    let h = gates::hadamard();
    for &[a, b] in pairs {
        let (pa, pb) = (pos(a)?, pos(b)?);
        if pa == pb || used.contains(&pa) || used.contains(&pb) {
            return Err(Error::Protocol(format!("Bell pair ({a}, {b}) reuses a qubit")));
        }
        used.extend([pa, pb]);
        state = apply_unchecked(&h, &state, &[pa]);
        state = apply_unchecked(&gates::cnot(), &state, &[pa, pb]);
    }
    Ok(state)
}

/// Reads the bits of `register` with the first qubit most significant.
fn register_value(index: usize, register: &[usize], num_qubits: usize) -> usize {
    register
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((index >> (num_qubits - 1 - q)) & 1))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: PureState,
    /// Probability that Bob's output reads `x` and Alice's reads `y`.
    pub fidelity: f64,
    /// Entanglement change across the Alice|Bob cut.
    pub delta_e: f64,
}

pub fn run_protocol(p: &Protocol, x: usize, y: usize) -> Result<RunOutcome> {
    let input = p.input_state(x, y)?;
    let state = p.execute(&input)?;
    let n = p.num_qubits;
    let fidelity = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| register_value(*i, &p.bob.output, n) == x && register_value(*i, &p.alice.output, n) == y)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .min(1.0);
    let cut = p.cut();
    let delta_e = entanglement_entropy(&state, &cut)? - entanglement_entropy(&input, &cut)?;
    Ok(RunOutcome {
        state,
        fidelity,
        delta_e,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MessageRecord {
    pub x: usize,
    pub y: usize,
    pub fidelity: f64,
    pub delta_e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub protocol: String,
    pub n_a: usize,
    pub n_b: usize,
    pub t: usize,
    pub table: Vec<MessageRecord>,
    pub mean_delta_e: f64,
    pub entanglement_in: f64,
    pub entanglement_out: f64,
    /// Entanglement gained by the superposed run.
    pub superposition_delta_e: f64,
    /// `|ΔE − (n_a + n_b) − mean ΔE_xy|`
    pub identity_residual: f64,
    /// `(n_a + n_b) / t`, absent when `t = 0`.
    pub rate: Option<f64>,
    /// `ΔE / t`, absent when `t = 0`.
    pub delta_e_per_use: Option<f64>,
}

/// Every message pair, in order `x` major, `y` minor.
pub fn message_table(p: &Protocol) -> Result<Vec<MessageRecord>> {
    let mut table = Vec::with_capacity(1 << (p.n_a + p.n_b));
    for x in 0..1usize << p.n_a {
        for y in 0..1usize << p.n_b {
            let r = run_protocol(p, x, y)?;
            table.push(MessageRecord {
                x,
                y,
                fidelity: r.fidelity,
                delta_e: r.delta_e,
            });
        }
    }
    Ok(table)
}

/// Copy registers appended after the protocol's qubits: Alice's then Bob's.
fn copy_registers(p: &Protocol) -> (Vec<usize>, Vec<usize>) {
    let n = p.num_qubits;
    ((n..n + p.n_a).collect(), (n + p.n_a..n + p.n_a + p.n_b).collect())
}

/// `2^{−(n_a+n_b)/2} Σ_{xy} |x⟩|x⟩_{A3} |y⟩|y⟩_{B3} ⊗ resource` on the
/// enlarged register.
pub fn superposition_input(p: &Protocol) -> Result<PureState> {
    let (a3, b3) = copy_registers(p);
    let total = p.num_qubits + p.n_a + p.n_b;
    let weight = c64(((1usize << (p.n_a + p.n_b)) as f64).sqrt().recip(), 0.0);
    let mut amps = vec![ZERO; 1 << total];
    for x in 0..1usize << p.n_a {
        for y in 0..1usize << p.n_b {
            let base = p.input_state(x, y)?;
            let copies = scatter_bits(x, &a3, total) | scatter_bits(y, &b3, total);
            let shift = total - p.num_qubits;
            for (i, a) in base.amplitudes().iter().enumerate() {
                if *a != ZERO {
                    amps[(i << shift) | copies] += a * weight;
                }
            }
        }
    }
    PureState::new(amps)
}

/// Alice's side with her copy register, against Bob's with his.
pub fn audit_cut(p: &Protocol) -> Bipartition {
    let (a3, b3) = copy_registers(p);
    let mut alice = p.alice.qubits();
    alice.extend(a3);
    let mut bob = p.bob.qubits();
    bob.extend(b3);
    Bipartition::new(alice, bob).expect("copy registers extend disjoint sides")
}

/// Runs the protocol coherently on superposed messages and checks that the
/// entanglement gained equals `n_a + n_b` plus the mean per-message change.
/// Refuses protocols that are not error-free.
pub fn superposition_audit(p: &Protocol) -> Result<AuditReport> {
    let table = message_table(p)?;
    if let Some(worst) = table
        .iter()
        .filter(|r| (1.0 - r.fidelity).abs() > PERFECT_FIDELITY_TOL)
        .min_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
    {
        return Err(Error::ImperfectProtocol {
            worst: worst.fidelity,
            x: worst.x,
            y: worst.y,
            table: table.iter().map(|r| (r.x, r.y, r.fidelity)).collect(),
        });
    }
    let mean_delta_e = table.iter().map(|r| r.delta_e).sum::<f64>() / table.len() as f64;

    let input = superposition_input(p)?;
    let output = p.execute(&input)?;
    let cut = audit_cut(p);
    let entanglement_in = entanglement_entropy(&input, &cut)?;
    let entanglement_out = entanglement_entropy(&output, &cut)?;
    let delta = entanglement_out - entanglement_in;
    let bits = (p.n_a + p.n_b) as f64;
    let t = p.t();
    Ok(AuditReport {
        protocol: p.name.clone(),
        n_a: p.n_a,
        n_b: p.n_b,
        t,
        identity_residual: (delta - bits - mean_delta_e).abs(),
        table,
        mean_delta_e,
        entanglement_in,
        entanglement_out,
        superposition_delta_e: delta,
        rate: (t > 0).then(|| bits / t as f64),
        delta_e_per_use: (t > 0).then(|| delta / t as f64),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub rate: Option<f64>,
    pub capability_sum: f64,
    /// `(n_a + n_b)/t ≤ E_U + E_U⁻ + slack`; vacuous when `t = 0`.
    pub holds: bool,
}

pub fn bound_check(report: &AuditReport, e_u: f64, e_u_minus: f64, slack: f64) -> BoundCheck {
    let capability_sum = e_u + e_u_minus;
    BoundCheck {
        rate: report.rate,
        capability_sum,
        holds: report.rate.is_none_or(|r| r <= capability_sum + slack),
    }
}
