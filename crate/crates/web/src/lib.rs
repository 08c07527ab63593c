//! Browser bindings. Every function returns a JSON string with plain numbers.

use entcomm::canonical::{decompose as decompose_gate, u_d};
use entcomm::cli::{canonical_section, ensembles_for, parse_gate};
use entcomm::ensembles::{gain_bidirectional, gain_one_way};
use entcomm::entcap::{symmetry_check, OptimizerConfig, SymmetryReport};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn config(restarts: u32, seed: u32) -> OptimizerConfig {
    OptimizerConfig {
        restarts: restarts.max(1) as usize,
        seed: seed as u64,
        ..OptimizerConfig::default()
    }
}

fn capability_json(s: &SymmetryReport) -> serde_json::Value {
    json!({
        "alphas": s.alphas,
        "e_u": s.increase.value,
        "e_u_minus": s.decrease.value,
        "gap": s.gap,
        "witness_delta_e": s.witness_delta,
        "witness_residual": s.witness_residual,
    })
}

/// Canonical parameters of a gate given as `{"name": ...}`, `{"matrix": ...}`
/// or `{"canonical": [a1, a2, a3]}`.
#[wasm_bindgen]
pub fn decompose(spec_json: &str) -> Result<String, String> {
    let spec = parse_gate(spec_json).map_err(|e| e.to_string())?;
    let u = spec.matrix();
    let cf = decompose_gate(&u).map_err(|e| e.to_string())?;
    let section = canonical_section(&cf, &u);
    serde_json::to_string(&json!({ "gate": spec.label(), "canonical": section })).map_err(|e| e.to_string())
}

/// Entangling capability of `U_d(a1, a2, a3)` in both directions.
#[wasm_bindgen]
pub fn capability(a1: f64, a2: f64, a3: f64, restarts: u32, seed: u32) -> Result<String, String> {
    let s = symmetry_check(&u_d([a1, a2, a3]), &config(restarts, seed)).map_err(|e| e.to_string())?;
    serde_json::to_string(&capability_json(&s)).map_err(|e| e.to_string())
}

/// Holevo gains of the one-way and two-way ensembles built from the
/// capability-achieving input.
#[wasm_bindgen]
pub fn ensemble_gains(a1: f64, a2: f64, a3: f64, restarts: u32, seed: u32) -> Result<String, String> {
    let run = || -> entcomm::Result<serde_json::Value> {
        let u = u_d([a1, a2, a3]);
        let cf = decompose_gate(&u)?;
        let s = symmetry_check(&u, &config(restarts, seed))?;
        let (one, two) = ensembles_for(&u, &cf, &s, None)?;
        let g1 = gain_one_way(&u, &one)?;
        let g2 = gain_bidirectional(&u, &two)?;
        Ok(json!({
            "capability": capability_json(&s),
            "one_way": { "chi_before": g1.chi_before, "chi_after": g1.chi_after, "gain": g1.gain },
            "bidirectional": {
                "forward": g2.forward.gain,
                "backward": g2.backward.gain,
                "total": g2.total_gain,
            },
        }))
    };
    let v = run().map_err(|e| e.to_string())?;
    serde_json::to_string(&v).map_err(|e| e.to_string())
}
