use fear_wasm::{compute_text, feasibility_text, plan_text, presets_json, PLAN_DIRECTIONS, PLAN_MAGNITUDES};
use serde_json::Value;

fn preset(id: &str) -> String {
    let list: Value = serde_json::from_str(&presets_json()).unwrap();
    list.as_array()
        .unwrap()
        .iter()
        .find(|p| p["id"] == id)
        .unwrap_or_else(|| panic!("no preset {id}"))["text"]
        .as_str()
        .unwrap()
        .to_owned()
}

#[test]
fn presets_cover_every_bundled_scene() {
    let list: Value = serde_json::from_str(&presets_json()).unwrap();
    assert_eq!(list.as_array().unwrap().len(), 14);
}

#[test]
fn compute_returns_matrix_and_picture() {
    let out: Value = serde_json::from_str(&compute_text(&preset("case_a")).unwrap()).unwrap();
    let m = out["matrix"].as_array().unwrap();
    assert_eq!(m.len(), 2);
    assert!(m[0][1].as_f64().unwrap() < 0.0);
    assert!(out["csv"].as_str().unwrap().starts_with("actor\\affected,1,2"));
    assert!(out["svg"].as_str().unwrap().starts_with("<svg"));
}

#[test]
fn feasibility_draws_every_subset() {
    let out: Value = serde_json::from_str(&feasibility_text(&preset("gridlock"), 3).unwrap()).unwrap();
    let svg = out["svg"].as_str().unwrap();
    let sectors = svg.matches("class=\"feasible\"").count() + svg.matches("class=\"infeasible\"").count();
    assert_eq!(sectors, 8 * 16);
    assert_eq!(out["feasible"].as_u64().unwrap() as usize, svg.matches("class=\"feasible\"").count());
}

#[test]
fn plan_selects_a_candidate() {
    let out: Value = serde_json::from_str(&plan_text(&preset("gridlock"), 3, "mean").unwrap()).unwrap();
    assert!(out["selected"]["a"].is_number());
    assert_eq!(out["selected"]["fear"][2], Value::Null);
    let svg = out["svg"].as_str().unwrap();
    assert_eq!(svg.matches("class=\"cell\"").count(), PLAN_MAGNITUDES * PLAN_DIRECTIONS);
}

#[test]
fn errors_come_back_as_messages() {
    assert!(compute_text("{").unwrap_err().contains("line 1"));
    assert!(feasibility_text(&preset("case_a"), 5).unwrap_err().contains("out of range"));
    assert!(plan_text(&preset("case_a"), 1, "median").unwrap_err().contains("median"));
}
