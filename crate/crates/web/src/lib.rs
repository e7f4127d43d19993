//! Browser bindings for the hslab demo page. Every export returns a JSON
//! string; the `*_json` functions hold the logic and run natively in tests.

use hslab::group::Group;
use hslab::measure::{indistinguishability_sweep, tv_distance, weak_sample_distribution};
use hslab::rep::{irreps, plancherel, Irrep};
use hslab::report::{blocks_json, clusters_json, format_eigenvalue};
use hslab::shift::{block_sweep, closed_form_rank, gamma1_blocks, gamma2, sweep_spectrum, Form, Variant};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest group the page accepts.
pub const ORDER_LIMIT: usize = 120;
/// Most copies the page accepts.
pub const COPIES_LIMIT: usize = 3;
/// Most sweep trials per call.
pub const TRIALS_LIMIT: usize = 2000;

fn load(group: &str) -> Result<(Group, Vec<Irrep>), String> {
    let g = Group::parse(group.trim()).map_err(|e| e.to_string())?;
    if g.order() > ORDER_LIMIT {
        return Err(format!("order {} exceeds the demo limit {ORDER_LIMIT}", g.order()));
    }
    let reps = irreps(&g).map_err(|e| e.to_string())?;
    Ok((g, reps))
}

fn to_string(v: serde_json::Value) -> Result<String, String> {
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

/// Per-block eigenvalues of the averaged k-copy state plus its rank.
pub fn block_spectrum_json(group: &str, k: usize) -> Result<String, String> {
    if k == 0 || k > COPIES_LIMIT {
        return Err(format!("k must be between 1 and {COPIES_LIMIT}"));
    }
    let (g, reps) = load(group)?;
    let sweep = block_sweep(&g, &reps, k, Variant::Averaged).map_err(|e| e.to_string())?;
    let report = sweep_spectrum(&g, k, &sweep);
    to_string(json!({
        "group": g.descriptor().to_string(),
        "k": k,
        "rank": report.rank,
        "closed_form_rank": closed_form_rank(&g, &reps, k),
        "max": format_eigenvalue(report.max),
        "spectrum": clusters_json(&report),
        "blocks": blocks_json(&reps, &sweep),
    }))
}

/// Irrep label distribution under weak Fourier sampling for the mixed state
/// and for one fixed shift, next to the exact Plancherel measure.
pub fn weak_sample_json(group: &str, shift: usize) -> Result<String, String> {
    let (g, reps) = load(group)?;
    if shift >= g.order() {
        return Err(format!("shift {shift} is outside 0..{}", g.order()));
    }
    let plan = plancherel(&g, &reps);
    let target: Vec<f64> = plan
        .iter()
        .map(|p| *p.probability.numer() as f64 / *p.probability.denom() as f64)
        .collect();
    let mixed = gamma2(&g, &reps, 1, Form::Blocks).map_err(|e| e.to_string())?;
    let fixed = gamma1_blocks(&g, &reps, shift, 1).map_err(|e| e.to_string())?;
    let mixed = weak_sample_distribution(&mixed, &reps).map_err(|e| e.to_string())?;
    let fixed = weak_sample_distribution(&fixed, &reps).map_err(|e| e.to_string())?;
    let tv_mixed = tv_distance(&mixed.probabilities, &target).map_err(|e| e.to_string())?.tv;
    let tv_fixed = tv_distance(&fixed.probabilities, &target).map_err(|e| e.to_string())?.tv;
    to_string(json!({
        "group": g.descriptor().to_string(),
        "shift": shift,
        "labels": mixed.labels,
        "plancherel": target,
        "plancherel_exact": plan.iter().map(|p| p.probability.to_string()).collect::<Vec<_>>(),
        "mixed": mixed.probabilities,
        "fixed": fixed.probabilities,
        "tv_mixed": tv_mixed,
        "tv_fixed": tv_fixed,
    }))
}

/// Single-register total variation between a fixed-shift and the mixed state
/// over random POVMs.
pub fn sweep_json(group: &str, trials: usize, seed: u32) -> Result<String, String> {
    if trials == 0 || trials > TRIALS_LIMIT {
        return Err(format!("trials must be between 1 and {TRIALS_LIMIT}"));
    }
    let (g, reps) = load(group)?;
    let report = indistinguishability_sweep(&g, &reps, trials, u64::from(seed)).map_err(|e| e.to_string())?;
    to_string(json!({
        "summary": report.summary,
        "tv": report.rows.iter().map(|r| r.tv).collect::<Vec<_>>(),
        "d_rho": report.rows.iter().map(|r| r.d_rho).collect::<Vec<_>>(),
    }))
}

#[wasm_bindgen]
pub fn block_spectrum(group: &str, k: usize) -> Result<String, JsValue> {
    block_spectrum_json(group, k).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn weak_sample(group: &str, shift: usize) -> Result<String, JsValue> {
    weak_sample_json(group, shift).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep(group: &str, trials: usize, seed: u32) -> Result<String, JsValue> {
    sweep_json(group, trials, seed).map_err(|e| JsValue::from_str(&e))
}
