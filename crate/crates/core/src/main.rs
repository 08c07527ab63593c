use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use entcomm::canonical::{conjugation_check, decompose, in_weyl_chamber, RECONSTRUCTION_TOL};
use entcomm::cli::{
    analyze, canonical_section, capability_section, emit, ensembles_for, exit_code, parse_gate, parse_state,
    AnalysisConfig, Check, GateSpec, Tolerances, CONJECTURE_LABEL, VERSION,
};
use entcomm::ensembles::{gain_bidirectional, gain_one_way};
use entcomm::entcap::{capability, symmetry_check, Direction, OptimizerConfig};
use entcomm::protocols::{bound_check, superposition_audit, Protocol, BUILTIN_NAMES};
use entcomm::{Error, Result};

#[derive(Parser)]
#[command(
    name = "entcomm",
    version,
    about = "Entanglement capability and communication of two-qubit gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical nonlocal form and local factors of a gate
    Decompose {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Entanglement capability E_U, maximal decrease E_U⁻ and their gap
    Entcap {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
        direction: DirectionArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Holevo gains of the one-way and bidirectional Pauli ensembles
    Gain {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// JSON file with the 4-qubit state Ψ (amplitudes as [re, im]), in the gate's frame
        #[arg(long)]
        state: Option<PathBuf>,
        /// Also write the one-way ensemble to this file
        #[arg(long)]
        ensemble_out: Option<PathBuf>,
        /// Also write the bidirectional ensemble to this file
        #[arg(long)]
        bidirectional_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Superposition-of-messages audit of a protocol
    Audit {
        /// Protocol file, or one of: empty, one_way_cnot, swap_superdense
        #[arg(long)]
        protocol: String,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Full pipeline over every module
    Analyze {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// JSON file with the 4-qubit state Ψ for the ensembles, in the gate's frame
        #[arg(long)]
        state: Option<PathBuf>,
        /// Extra protocol to audit (file or built-in name)
        #[arg(long)]
        protocol: Vec<String>,
        /// Tolerance for comparisons against optimizer values
        #[arg(long, default_value_t = 2e-3)]
        check_tol: f64,
        /// Include wall-clock time (breaks byte-identical output)
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct GateArgs {
    /// Gate spec JSON, e.g. '{"name":"CNOT"}'
    #[arg(long, conflicts_with = "gate_file", required_unless_present = "gate_file")]
    gate: Option<String>,
    /// File containing a gate spec
    #[arg(long)]
    gate_file: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Gradient-norm tolerance of the optimizer
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Increase,
    Decrease,
    Both,
}

impl GateArgs {
    fn load(&self) -> Result<GateSpec> {
        match (&self.gate, &self.gate_file) {
            (Some(text), _) => parse_gate(text),
            (None, Some(path)) => parse_gate(&std::fs::read_to_string(path)?),
            (None, None) => Err(Error::GateSpec("no gate given".into())),
        }
    }
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            grad_tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

fn load_protocol(arg: &str) -> Result<Protocol> {
    if let Some(p) = Protocol::builtin(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Protocol(format!(
            "{arg:?} is neither a file nor a built-in protocol ({})",
            BUILTIN_NAMES.join(", ")
        )));
    }
    Protocol::from_json(&std::fs::read_to_string(path)?)
}

fn load_state(path: &Option<PathBuf>) -> Result<Option<entcomm::qla::PureState>> {
    path.as_ref()
        .map(|p| parse_state(&std::fs::read_to_string(p)?))
        .transpose()
}

/// Emits the report and returns whether every check passed.
fn finish(report: &serde_json::Value, checks: &[Check], out: &OutArgs) -> Result<bool> {
    emit(report, out.json.as_deref())?;
    Ok(checks.iter().all(|c| c.pass))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Decompose { gate, out } => {
            let spec = gate.load()?;
            let u = spec.matrix();
            let cf = decompose(&u)?;
            let section = canonical_section(&cf, &u);
            let pair = |m: &entcomm::qla::ComplexMatrix| {
                (0..2)
                    .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            };
            let checks = [
                Check {
                    name: "canonical.reconstruction".into(),
                    value: section.residual,
                    tolerance: RECONSTRUCTION_TOL,
                    pass: section.residual < RECONSTRUCTION_TOL,
                },
                Check {
                    name: "canonical.in_chamber".into(),
                    value: cf.alphas[0],
                    tolerance: 1e-9,
                    pass: in_weyl_chamber(cf.alphas, 1e-9),
                },
                Check {
                    name: "canonical.conjugation".into(),
                    value: conjugation_check(cf.alphas).max(),
                    tolerance: 1e-12,
                    pass: conjugation_check(cf.alphas).max() < 1e-12,
                },
            ];
            let report = json!({
                "gate": spec.echo(),
                "canonical": section,
                "locals": {
                    "before_a": pair(&cf.before_a),
                    "before_b": pair(&cf.before_b),
                    "after_a": pair(&cf.after_a),
                    "after_b": pair(&cf.after_b),
                },
                "checks": checks,
                "version": VERSION,
            });
            finish(&report, &checks, &out)
        }
        Command::Entcap {
            gate,
            opt,
            direction,
            out,
        } => {
            let spec = gate.load()?;
            let u = spec.matrix();
            let config = opt.config();
            let result = |r: &entcomm::entcap::CapabilityResult| {
                json!({
                    "value": r.value,
                    "direction": r.direction,
                    "converged": r.converged,
                    "grad_norm": r.grad_norm,
                    "best_restart": r.best_restart,
                    "restarts_used": r.restarts_used,
                    "iterations": r.iterations,
                    "argmax_state": entcomm_pairs(&r.argmax_state),
                })
            };
            let (report, checks) = match direction {
                DirectionArg::Both => {
                    let sym = symmetry_check(&u, &config)?;
                    let section = capability_section(&sym);
                    let checks = vec![
                        Check {
                            name: "entcap.symmetry_gap".into(),
                            value: sym.gap,
                            tolerance: 2e-3,
                            pass: sym.gap < 2e-3,
                        },
                        Check {
                            name: "entcap.conjugate_witness".into(),
                            value: sym.witness_residual,
                            tolerance: 1e-6,
                            pass: sym.witness_residual < 1e-6,
                        },
                    ];
                    let report = json!({
                        "gate": spec.echo(),
                        "alphas": sym.alphas,
                        "capability": section,
                        "increase": result(&sym.increase),
                        "decrease": result(&sym.decrease),
                        "checks": checks,
                        "seed": config.seed,
                        "version": VERSION,
                    });
                    (report, checks)
                }
                DirectionArg::Increase | DirectionArg::Decrease => {
                    let d = if matches!(direction, DirectionArg::Increase) {
                        Direction::Increase
                    } else {
                        Direction::Decrease
                    };
                    let r = capability(&u, d, &config)?;
                    let checks = vec![Check {
                        name: "entcap.nonnegative".into(),
                        value: r.value,
                        tolerance: -1e-9,
                        pass: r.value >= -1e-9,
                    }];
                    let report = json!({
                        "gate": spec.echo(),
                        "result": result(&r),
                        "checks": checks,
                        "seed": config.seed,
                        "version": VERSION,
                    });
                    (report, checks)
                }
            };
            finish(&report, &checks, &out)
        }
        Command::Gain {
            gate,
            opt,
            state,
            ensemble_out,
            bidirectional_out,
            out,
        } => {
            let spec = gate.load()?;
            let u = spec.matrix();
            let config = opt.config();
            let user_state = load_state(&state)?;
            let cf = decompose(&u)?;
            let sym = symmetry_check(&u, &config)?;
            let (one, two) = ensembles_for(&u, &cf, &sym, user_state.as_ref())?;
            if let Some(p) = ensemble_out {
                write_ensemble(&one.to_json(), &p)?;
            }
            if let Some(p) = bidirectional_out {
                write_ensemble(&two.to_json(), &p)?;
            }
            let one_way = gain_one_way(&u, &one)?;
            let bi = gain_bidirectional(&u, &two)?;
            let e_u = sym.increase.value;
            let mut checks = vec![Check {
                name: "ensembles.relation_chain".into(),
                value: (one_way.gain - bi.total_gain)
                    .max(bi.total_gain - 2.0 * e_u - 2e-3)
                    .max(0.0),
                tolerance: 0.0,
                pass: one_way.gain <= bi.total_gain + 1e-9 && bi.total_gain <= 2.0 * e_u + 2e-3,
            }];
            if user_state.is_none() {
                checks.push(Check {
                    name: "ensembles.one_way_gain_vs_e_u".into(),
                    value: (one_way.gain - e_u).abs(),
                    tolerance: 2e-3,
                    pass: (one_way.gain - e_u).abs() < 2e-3,
                });
            }
            let report = json!({
                "gate": spec.echo(),
                "alphas": cf.alphas,
                "e_u": e_u,
                "one_way": one_way,
                "bidirectional": bi,
                "conjecture_gap": bi.total_after - bi.total_before,
                "conjecture_gap_label": CONJECTURE_LABEL,
                "two_e_u_upper_bound": 2.0 * e_u,
                "checks": checks,
                "seed": config.seed,
                "version": VERSION,
            });
            finish(&report, &checks, &out)
        }
        Command::Audit { protocol, opt, out } => {
            let p = load_protocol(&protocol)?;
            let report = superposition_audit(&p)?;
            let sym = symmetry_check(&p.gate, &opt.config())?;
            let bound = bound_check(&report, sym.increase.value, sym.decrease.value, 1e-3);
            let checks = vec![
                Check {
                    name: "protocols.identity".into(),
                    value: report.identity_residual,
                    tolerance: 1e-9,
                    pass: report.identity_residual < 1e-9,
                },
                Check {
                    name: "protocols.rate_bound".into(),
                    value: bound.rate.unwrap_or(0.0),
                    tolerance: bound.capability_sum + 1e-3,
                    pass: bound.holds,
                },
            ];
            let json = json!({
                "protocol": p.name,
                "gate": p.gate_label,
                "audit": report,
                "e_u": sym.increase.value,
                "e_u_minus": sym.decrease.value,
                "bound": bound,
                "checks": checks,
                "seed": opt.seed,
                "version": VERSION,
            });
            finish(&json, &checks, &out)
        }
        Command::Analyze {
            gate,
            opt,
            state,
            protocol,
            check_tol,
            timing,
            out,
        } => {
            let spec = gate.load()?;
            let config = AnalysisConfig {
                optimizer: opt.config(),
                tolerances: Tolerances {
                    capability: check_tol,
                    ..Tolerances::default()
                },
                state: load_state(&state)?,
                protocols: protocol.iter().map(|p| load_protocol(p)).collect::<Result<_>>()?,
                timing,
            };
            let report = analyze(&spec, &config)?;
            emit(&report, out.json.as_deref())?;
            Ok(report.passed())
        }
    }
}

fn entcomm_pairs(s: &entcomm::qla::PureState) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::ImperfectProtocol { table, .. } = &e {
                for (x, y, f) in table {
                    eprintln!("  x={x:b} y={y:b} fidelity={f:.12}");
                }
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

/// Ensemble files keep full-precision numbers so they load back exactly.
fn write_ensemble(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
