//! Gate specifications, the analysis pipeline and canonical JSON output.
//!
//! A gate spec is a JSON object with exactly one key:
//!
//! ```json
//! {"name": "CNOT"}
//! {"canonical": [0.7853981634, 0, 0]}
//! {"matrix": [[[1,0],[0,0],[0,0],[0,0]], ...]}
//! ```
//!
//! Matrix entries are `[re, im]` pairs or plain reals; numbers may also be
//! given as decimal strings. Reports are emitted with sorted keys and every
//! float written as a string with 12 significant digits, so equal inputs
//! and seeds give byte-identical files.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::canonical::{conjugation_check, decompose, in_weyl_chamber, u_d, CanonicalForm, RECONSTRUCTION_TOL};
use crate::ensembles::{
    bidirectional_for_gate, from_canonical_frame, gain_bidirectional, gain_one_way, one_way_for_gate, twirl_check,
    BidirectionalEnsemble, BidirectionalGainReport, Ensemble, GainReport, ALICE, BOB,
};
use crate::entcap::{symmetry_check, OptimizerConfig, SymmetryReport};
use crate::error::{Error, Result};
use crate::protocols::{bound_check, superposition_audit, AuditReport, BoundCheck, Protocol, BUILTIN_NAMES};
use crate::qla::gates;
use crate::qla::matrix::{c64, ComplexMatrix};
use crate::qla::state::{PureState, UNITARY_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Names accepted by the `name` variant.
pub const GATE_NAMES: [&str; 5] = ["CNOT", "CZ", "SWAP", "ISWAP", "IDENTITY"];

#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Named(String),
    Matrix(ComplexMatrix),
    Canonical([f64; 3]),
}

impl GateSpec {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            GateSpec::Named(name) => gates::named(name).expect("validated gate name"),
            GateSpec::Matrix(m) => m.clone(),
            GateSpec::Canonical(a) => u_d(*a),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GateSpec::Named(name) => name.clone(),
            GateSpec::Matrix(_) => "matrix".into(),
            GateSpec::Canonical(a) => format!("canonical({}, {}, {})", a[0], a[1], a[2]),
        }
    }

    /// JSON that parses back to the same gate; numbers are written in
    /// shortest round-trip form.
    pub fn echo(&self) -> Value {
        let exact = |x: f64| Value::String(format!("{x:e}"));
        match self {
            GateSpec::Named(name) => json!({ "name": name }),
            GateSpec::Canonical(a) => json!({ "canonical": a.iter().map(|&x| exact(x)).collect::<Vec<_>>() }),
            GateSpec::Matrix(m) => {
                let rows: Vec<Value> = (0..m.rows())
                    .map(|i| {
                        Value::Array(
                            m.row(i)
                                .iter()
                                .map(|z| Value::Array(vec![exact(z.re), exact(z.im)]))
                                .collect(),
                        )
                    })
                    .collect();
                json!({ "matrix": rows })
            }
        }
    }
}

pub fn parse_gate(text: &str) -> Result<GateSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::GateSpec(format!("malformed JSON: {e}")))?;
    parse_gate_spec(&v)
}

pub fn parse_gate_spec(v: &Value) -> Result<GateSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::GateSpec("gate spec must be a JSON object".into()))?;
    if obj.len() != 1 {
        return Err(Error::GateSpec(format!(
            "gate spec needs exactly one of \"name\", \"matrix\", \"canonical\"; got {} keys",
            obj.len()
        )));
    }
    let (key, value) = obj.iter().next().expect("one key");
    match key.as_str() {
        "name" => {
            let name = value
                .as_str()
                .ok_or_else(|| Error::GateSpec("\"name\" must be a string".into()))?
                .to_ascii_uppercase();
            if !GATE_NAMES.contains(&name.as_str()) {
                return Err(Error::GateSpec(format!(
                    "unknown gate {name:?}; expected one of {GATE_NAMES:?}"
                )));
            }
            Ok(GateSpec::Named(name))
        }
        "matrix" => {
            let m = parse_matrix_value(value)?;
            if m.rows() != 4 {
                return Err(Error::GateSpec(format!(
                    "gate matrix must be 4x4, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            m.ensure_unitary(UNITARY_TOL)?;
            Ok(GateSpec::Matrix(m))
        }
        "canonical" => {
            let items = value
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::GateSpec("\"canonical\" must be an array of three angles".into()))?;
            let mut a = [0.0; 3];
            for (slot, item) in a.iter_mut().zip(items) {
                *slot = parse_number(item)?;
            }
            Ok(GateSpec::Canonical(a))
        }
        other => Err(Error::GateSpec(format!("unknown gate spec key {other:?}"))),
    }
}

/// Matrix and label for a gate spec value.
pub(crate) fn parse_gate_value(v: &Value) -> Result<(ComplexMatrix, String)> {
    let spec = parse_gate_spec(v)?;
    Ok((spec.matrix(), spec.label()))
}

fn parse_number(v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::GateSpec(format!("malformed number {v}")))?;
    if !x.is_finite() {
        return Err(Error::GateSpec(format!("non-finite number {v}")));
    }
    Ok(x)
}

fn parse_complex(v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(c64(parse_number(&pair[0])?, parse_number(&pair[1])?)),
        Value::Array(_) => Err(Error::GateSpec(format!("complex entry must be [re, im], got {v}"))),
        _ => Ok(c64(parse_number(v)?, 0.0)),
    }
}

pub(crate) fn parse_complex_vector(v: &Value) -> Result<Vec<Complex64>> {
    v.as_array()
        .ok_or_else(|| Error::GateSpec("expected an array of complex entries".into()))?
        .iter()
        .map(parse_complex)
        .collect()
}

/// Square matrix from nested rows of complex entries.
pub(crate) fn parse_matrix_value(v: &Value) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::GateSpec("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        let entries = parse_complex_vector(row)?;
        if entries.len() != n {
            return Err(Error::GateSpec(format!(
                "matrix is not square: row of {} in {n} rows",
                entries.len()
            )));
        }
        data.extend(entries);
    }
    if n == 0 {
        return Err(Error::GateSpec("empty matrix".into()));
    }
    ComplexMatrix::new(n, n, data)
}

/// State given as an array of complex amplitudes.
pub fn parse_state(text: &str) -> Result<PureState> {
    let v: Value = serde_json::from_str(text)?;
    let v = v.get("amplitudes").unwrap_or(&v);
    PureState::new(parse_complex_vector(v)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// For comparisons against optimizer values.
    pub capability: f64,
    pub witness: f64,
    pub reconstruction: f64,
    pub twirl: f64,
    pub audit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            capability: 2e-3,
            witness: 1e-6,
            reconstruction: RECONSTRUCTION_TOL,
            twirl: 1e-12,
            audit: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisConfig {
    pub optimizer: OptimizerConfig,
    pub tolerances: Tolerances,
    /// Four-qubit `Ψ` in the gate's own frame for the ensembles; by default
    /// the conjugate witness of the capability optimum is used.
    pub state: Option<PureState>,
    pub protocols: Vec<Protocol>,
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalSection {
    pub alphas: [f64; 3],
    pub residual: f64,
    pub global_phase: [f64; 2],
    pub in_chamber: bool,
    pub conjugation_residual: f64,
    pub convention: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapabilitySection {
    pub e_u: f64,
    pub e_u_minus: f64,
    pub gap: f64,
    pub increase_converged: bool,
    pub decrease_converged: bool,
    pub restarts: usize,
    pub witness_delta_e: f64,
    pub witness_residual: f64,
    pub layout: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct BidirectionalSection {
    #[serde(flatten)]
    pub gains: BidirectionalGainReport,
    pub conjecture_gap: f64,
    pub conjecture_gap_label: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSection {
    pub report: AuditReport,
    pub bound: BoundCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub gate: Value,
    pub canonical: CanonicalSection,
    pub capability: CapabilitySection,
    pub one_way: GainReport,
    pub bidirectional: BidirectionalSection,
    pub twirl_residual: f64,
    pub audits: Vec<AuditSection>,
    pub two_e_u_upper_bound: f64,
    pub ensemble_state: &'static str,
    pub protocol_coverage: &'static str,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const CHAMBER_CONVENTION: &str = "pi/4 >= alpha1 >= alpha2 >= |alpha3|, alpha3 >= 0 on the alpha1 = pi/4 face";
pub const DECREASE_LAYOUT: &str =
    "increase and decrease both optimized over 4 qubits: one ancilla per side, gate on qubits 1 and 2";
pub const CONJECTURE_LABEL: &str = "conjecture-dependent";
pub const PROTOCOL_COVERAGE: &str =
    "error-free protocols are shipped for CNOT and SWAP only; other gates are not audited";

pub fn canonical_section(cf: &CanonicalForm, u: &ComplexMatrix) -> CanonicalSection {
    CanonicalSection {
        alphas: cf.alphas,
        residual: cf.residual(u),
        global_phase: [cf.global_phase.re, cf.global_phase.im],
        in_chamber: in_weyl_chamber(cf.alphas, 1e-9),
        conjugation_residual: conjugation_check(cf.alphas).max(),
        convention: CHAMBER_CONVENTION,
    }
}

pub fn capability_section(s: &SymmetryReport) -> CapabilitySection {
    CapabilitySection {
        e_u: s.increase.value,
        e_u_minus: s.decrease.value,
        gap: s.gap,
        increase_converged: s.increase.converged,
        decrease_converged: s.decrease.converged,
        restarts: s.increase.restarts_used,
        witness_delta_e: s.witness_delta,
        witness_residual: s.witness_residual,
        layout: DECREASE_LAYOUT,
    }
}

/// Ensembles in the gate's own frame. With no user state, `Ψ` is the
/// conjugate witness (canonical frame) mapped into the gate's frame.
pub fn ensembles_for(
    u: &ComplexMatrix,
    cf: &CanonicalForm,
    sym: &SymmetryReport,
    state: Option<&PureState>,
) -> Result<(Ensemble, BidirectionalEnsemble)> {
    let own;
    let psi = match state {
        Some(psi) => psi,
        None => {
            own = from_canonical_frame(cf, &sym.witness_state)?;
            &own
        }
    };
    Ok((one_way_for_gate(u, psi)?.0, bidirectional_for_gate(u, psi)?.0))
}

/// Full pipeline: decomposition, capability, ensemble gains, twirl and
/// audits of the shipped protocols that use this gate.
pub fn analyze(spec: &GateSpec, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let started = std::time::Instant::now();
    let tol = &config.tolerances;
    let u = spec.matrix();

    let cf = decompose(&u).map_err(|e| e.in_stage("canonical"))?;
    let canonical = canonical_section(&cf, &u);

    let sym = symmetry_check(&u, &config.optimizer).map_err(|e| e.in_stage("entcap"))?;
    let capability = capability_section(&sym);
    let e_u = capability.e_u;

    let (one, two) = ensembles_for(&u, &cf, &sym, config.state.as_ref()).map_err(|e| e.in_stage("ensembles"))?;
    let one_way = gain_one_way(&u, &one).map_err(|e| e.in_stage("ensembles"))?;
    let gains = gain_bidirectional(&u, &two).map_err(|e| e.in_stage("ensembles"))?;
    let bidirectional = BidirectionalSection {
        conjecture_gap: gains.total_after - gains.total_before,
        conjecture_gap_label: CONJECTURE_LABEL,
        gains,
    };

    let psi = &one.states()[0];
    let twirl_residual = twirl_check(&psi.reduced(&BOB)?)
        .and_then(|b| Ok(b.max(twirl_check(&psi.reduced(&ALICE)?)?)))
        .map_err(|e| e.in_stage("ensembles"))?;

    let mut protocols: Vec<Protocol> = BUILTIN_NAMES
        .iter()
        .filter_map(|n| Protocol::builtin(n))
        .filter(|p| p.t() > 0 && p.gate.distance(&u) < 1e-12)
        .collect();
    protocols.extend(config.protocols.iter().cloned());
    let mut audits = Vec::new();
    for p in &protocols {
        let report = superposition_audit(p).map_err(|e| e.in_stage("protocols"))?;
        let bound = bound_check(&report, sym.increase.value, sym.decrease.value, 1e-3);
        audits.push(AuditSection { report, bound });
    }

    let mut checks = vec![
        Check::at_most("canonical.reconstruction", canonical.residual, tol.reconstruction),
        Check {
            name: "canonical.in_chamber".into(),
            value: canonical.alphas[0],
            tolerance: 1e-9,
            pass: canonical.in_chamber,
        },
        Check::at_most("canonical.conjugation", canonical.conjugation_residual, 1e-12),
        Check::at_most("entcap.symmetry_gap", capability.gap, tol.capability),
        Check::at_most("entcap.conjugate_witness", capability.witness_residual, tol.witness),
        Check::at_most("ensembles.twirl", twirl_residual, tol.twirl),
    ];
    if config.state.is_none() {
        checks.push(Check::at_most(
            "ensembles.one_way_gain_vs_e_u",
            (one_way.gain - e_u).abs(),
            tol.capability,
        ));
        checks.push(Check::at_most(
            "ensembles.bidirectional_gain_vs_2e_u",
            (bidirectional.gains.total_gain - 2.0 * e_u).abs(),
            2.0 * tol.capability,
        ));
    }
    checks.push(Check::at_most(
        "ensembles.relation_chain",
        (one_way.gain - bidirectional.gains.total_gain)
            .max(bidirectional.gains.total_gain - 2.0 * e_u - tol.capability)
            .max(0.0),
        0.0,
    ));
    for a in &audits {
        checks.push(Check::at_most(
            &format!("protocols.{}.identity", a.report.protocol),
            a.report.identity_residual,
            tol.audit,
        ));
        checks.push(Check {
            name: format!("protocols.{}.rate_bound", a.report.protocol),
            value: a.bound.rate.unwrap_or(0.0),
            tolerance: a.bound.capability_sum + 1e-3,
            pass: a.bound.holds,
        });
    }

    Ok(AnalysisReport {
        gate: spec.echo(),
        canonical,
        capability,
        one_way,
        bidirectional,
        twirl_residual,
        audits,
        two_e_u_upper_bound: 2.0 * e_u,
        ensemble_state: if config.state.is_some() {
            "user supplied"
        } else {
            "conjugate witness of the capability optimum"
        },
        protocol_coverage: PROTOCOL_COVERAGE,
        checks,
        seed: config.optimizer.seed,
        version: VERSION,
        wall_clock_seconds: config.timing.then(|| started.elapsed().as_secs_f64()),
    })
}

/// 12 significant digits; negative zero is written as zero.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Rewrites every non-integer number as a fixed-precision string. Object
/// keys come out sorted because `serde_json::Map` is ordered.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format_float(n.as_f64().expect("f64 number"))),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonicalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = canonicalize(serde_json::to_value(value)?);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

/// Writes canonical JSON to `path`, or stdout when `path` is `None`.
pub fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = to_canonical_json(value)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Exit status for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Stage { source, .. } => exit_code(source),
        Error::GateSpec(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::Protocol(_)
        | Error::NotUnitary { .. }
        | Error::Dimension(_)
        | Error::NonFinite { .. }
        | Error::InvalidState(_)
        | Error::Qubits(_) => 2,
        _ => 1,
    }
}
