//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes a scenario document as JSON text and returns text the
//! page can drop straight into the DOM. The `*_text` functions hold the logic
//! and are callable from native code and tests.

use fear_core::casestudies::{GOLDEN, GRIDLOCK_SCENE, MDR_SCENE};
use fear_core::feasibility::{feasible_hypervolume, ActionPartition};
use fear_core::io::{export_matrix, load_scenario, ExportOptions, LoadedScenario};
use fear_core::planner::{candidate_grid, evaluate_candidates, select_action, AggregateKind, AggregationPolicy};
use fear_core::render::{render_feasibility, render_plan, render_trajectories};
use fear_core::{fear_matrix, resolve_trajectories};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Candidate grid used by the planner view.
pub const PLAN_MAGNITUDES: usize = 12;
pub const PLAN_DIRECTIONS: usize = 16;

fn load(text: &str) -> Result<LoadedScenario, String> {
    load_scenario(text).map_err(|e| e.to_string())
}

fn agent(loaded: &LoadedScenario, id: usize) -> Result<usize, String> {
    let k = loaded.scenario.agent_count();
    if id == 0 || id > k {
        return Err(format!("agent id {id} out of range 1..={k}"));
    }
    Ok(id - 1)
}

/// Bundled scenes as a JSON array of `{id, title, text}`.
pub fn presets_json() -> String {
    let mut list: Vec<_> = GOLDEN
        .iter()
        .map(|g| json!({ "id": format!("case_{}", g.id), "title": g.title, "text": g.text }))
        .collect();
    list.push(json!({ "id": "mdr_scene", "title": "Three agents under the social-force baseline", "text": MDR_SCENE }));
    list.push(json!({ "id": "gridlock", "title": "Eight agents around a crossing", "text": GRIDLOCK_SCENE }));
    serde_json::Value::Array(list).to_string()
}

/// FeAR matrix as CSV, with the hypervolume audit appended, plus the
/// trajectory picture.
pub fn compute_text(scenario: &str) -> Result<String, String> {
    let loaded = load(scenario)?;
    let s = &loaded.scenario;
    let mdr = loaded.mdr.compute(s).map_err(|e| e.to_string())?;
    let m = fear_matrix(s, &loaded.joint, &mdr).map_err(|e| e.to_string())?;
    let resolved = resolve_trajectories(s, &loaded.joint, None).map_err(|e| e.to_string())?;
    Ok(json!({
        "csv": export_matrix(&m, ExportOptions { raw: false, audit: true }),
        "matrix": m.values,
        "svg": render_trajectories(s, &resolved),
    })
    .to_string())
}

/// Feasible subsets of one agent's action space, 1-based id.
pub fn feasibility_text(scenario: &str, agent_id: usize) -> Result<String, String> {
    let loaded = load(scenario)?;
    let j = agent(&loaded, agent_id)?;
    let grid = feasible_hypervolume(&loaded.scenario, &loaded.joint, j).map_err(|e| e.to_string())?;
    Ok(json!({
        "hypervolume": grid.hypervolume,
        "feasible": grid.feasible_count(),
        "svg": render_feasibility(&grid),
    })
    .to_string())
}

/// Planner heatmap and selection for one ego agent.
pub fn plan_text(scenario: &str, ego_id: usize, aggregate: &str) -> Result<String, String> {
    let loaded = load(scenario)?;
    let ego = agent(&loaded, ego_id)?;
    let kind: AggregateKind = aggregate.parse().map_err(|e: fear_core::FearError| e.to_string())?;
    let s = &loaded.scenario;
    let mdr = loaded.mdr.compute(s).map_err(|e| e.to_string())?;
    let candidates = candidate_grid(s.a_max, PLAN_MAGNITUDES, PLAN_DIRECTIONS).map_err(|e| e.to_string())?;
    let evals = evaluate_candidates(s, &loaded.joint, &mdr, ego, &candidates).map_err(|e| e.to_string())?;
    let partition = ActionPartition {
        a_max: s.a_max,
        magnitude_bins: PLAN_MAGNITUDES,
        direction_bins: PLAN_DIRECTIONS,
    };
    let sel = select_action(&evals, AggregationPolicy::new(kind)).ok();
    let selected = sel.as_ref().map(|sel| {
        let e = &evals[sel.index];
        json!({
            "a": sel.action.magnitude,
            "theta": sel.action.direction,
            "score": kind.scalar(&e.aggregates),
            "fear": e.fear,
        })
    });
    Ok(json!({
        "selected": selected,
        "svg": render_plan(&evals, partition, kind, sel.as_ref()),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn presets() -> String {
    presets_json()
}

#[wasm_bindgen]
pub fn compute(scenario: &str) -> Result<String, JsValue> {
    compute_text(scenario).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn feasibility(scenario: &str, agent_id: usize) -> Result<String, JsValue> {
    feasibility_text(scenario, agent_id).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn plan(scenario: &str, ego_id: usize, aggregate: &str) -> Result<String, JsValue> {
    plan_text(scenario, ego_id, aggregate).map_err(|e| JsValue::from_str(&e))
}
