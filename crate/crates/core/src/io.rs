//! Scenario documents (JSON) and CSV export of results.
//!
//! A document bundles the initial state, the factual joint action, the
//! discretisation parameters and the move-de-rigueur policy:
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "agents": [
//!     {"id": 1, "x": 0, "y": 0, "vx": 2, "vy": 0, "box_side": 1,
//!      "action": {"a": 1.0, "theta": 0.0}}
//!   ],
//!   "obstacles": [[[5, -1], [6, -1], [6, 1], [5, 1]]],
//!   "params": {"T": 4, "N_t": 20, "a_max": 4, "N_m": 16, "N_d": 32},
//!   "mdr": {"policy": "zero"}
//! }
//! ```
//!
//! Angles are radians. Unknown fields are rejected.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FearError;
use crate::fear::FearMatrix;
use crate::geom::{ConvexPolygon, Vec2};
use crate::kinematics::{Action, AgentInit, TimeGrid};
use crate::mdr::MdrSpec;
use crate::planner::CandidateEvaluation;
use crate::scenario::{ContextMode, JointAction, Scenario, DEFAULT_EPSILON};

pub const SCHEMA_VERSION: &str = "1";

/// Sanity limits that keep every accepted document cheap and finite to run.
pub mod limits {
    pub const MAX_AGENTS: usize = 64;
    pub const MAX_COORDINATE: f64 = 1e6;
    pub const MAX_SPEED: f64 = 1e4;
    pub const MAX_BOX_SIDE: f64 = 1e4;
    pub const MAX_HORIZON: f64 = 1e4;
    pub const MAX_A_MAX: f64 = 1e4;
    pub const MAX_INTERVALS: usize = 1000;
    pub const MAX_MAGNITUDE_BINS: usize = 256;
    pub const MAX_DIRECTION_BINS: usize = 512;
    pub const MAX_OBSTACLE_VERTICES: usize = 256;
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported schema_version {0:?} (expected \"1\")")]
    SchemaVersion(String),

    #[error("duplicate agent id {0}")]
    DuplicateId(u64),

    #[error("agent ids must be contiguous from 1; missing id {0}")]
    MissingId(u64),

    #[error("agent {id}: {source}")]
    Agent { id: u64, source: FearError },

    #[error("obstacle {index}: {source}")]
    Obstacle { index: usize, source: FearError },

    #[error("{0}")]
    Invalid(#[from] FearError),

    #[error("{field} = {value} exceeds the limit {limit}")]
    Limit {
        field: &'static str,
        value: f64,
        limit: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    pub box_side: f64,
    #[serde(default)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N_t", default = "default_intervals")]
    pub intervals: usize,
    pub a_max: f64,
    #[serde(rename = "N_m", default = "default_magnitude_bins")]
    pub magnitude_bins: usize,
    #[serde(rename = "N_d", default = "default_direction_bins")]
    pub direction_bins: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_refinement: Option<bool>,
    #[serde(default)]
    pub context_mode: ContextMode,
}

fn default_intervals() -> usize {
    crate::kinematics::DEFAULT_INTERVALS
}
fn default_magnitude_bins() -> usize {
    crate::scenario::DEFAULT_MAGNITUDE_BINS
}
fn default_direction_bins() -> usize {
    crate::scenario::DEFAULT_DIRECTION_BINS
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub agents: Vec<AgentRecord>,
    #[serde(default)]
    pub obstacles: Vec<Vec<[f64; 2]>>,
    pub params: Params,
    #[serde(default)]
    pub mdr: MdrSpec,
}

/// Everything a document describes, validated.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub joint: JointAction,
    pub mdr: MdrSpec,
    pub description: Option<String>,
}

fn limit(field: &'static str, value: f64, max: f64) -> Result<(), DocumentError> {
    if !(value.abs() <= max) {
        Err(DocumentError::Limit {
            field,
            value,
            limit: max,
        })
    } else {
        Ok(())
    }
}

pub fn parse_document(text: &str) -> Result<ScenarioDocument, DocumentError> {
    serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scenario(text: &str) -> Result<LoadedScenario, DocumentError> {
    from_document(parse_document(text)?)
}

pub fn from_document(doc: ScenarioDocument) -> Result<LoadedScenario, DocumentError> {
    use limits::*;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::SchemaVersion(doc.schema_version));
    }
    let p = &doc.params;
    limit("agents", doc.agents.len() as f64, MAX_AGENTS as f64)?;
    limit("T", p.horizon, MAX_HORIZON)?;
    limit("a_max", p.a_max, MAX_A_MAX)?;
    limit("N_t", p.intervals as f64, MAX_INTERVALS as f64)?;
    limit("N_m", p.magnitude_bins as f64, MAX_MAGNITUDE_BINS as f64)?;
    limit("N_d", p.direction_bins as f64, MAX_DIRECTION_BINS as f64)?;

    let mut records: Vec<&AgentRecord> = doc.agents.iter().collect();
    records.sort_by_key(|r| r.id);
    for pair in records.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(DocumentError::DuplicateId(pair[0].id));
        }
    }
    for (n, r) in records.iter().enumerate() {
        let expected = n as u64 + 1;
        if r.id != expected {
            return Err(DocumentError::MissingId(expected));
        }
    }

    let mut agents = Vec::with_capacity(records.len());
    let mut actions = Vec::with_capacity(records.len());
    for r in &records {
        let wrap = |source: FearError| DocumentError::Agent { id: r.id, source };
        let bounded = |field, v, max| {
            limit(field, v, max).map_err(|e| match e {
                DocumentError::Limit { field, value, limit } => wrap(crate::error::invalid(
                    field,
                    format!("{value} exceeds the limit {limit}"),
                )),
                other => other,
            })
        };
        bounded("x", r.x, MAX_COORDINATE)?;
        bounded("y", r.y, MAX_COORDINATE)?;
        bounded("vx", r.vx, MAX_SPEED)?;
        bounded("vy", r.vy, MAX_SPEED)?;
        bounded("box_side", r.box_side, MAX_BOX_SIDE)?;
        agents.push(AgentInit::new(Vec2::new(r.x, r.y), Vec2::new(r.vx, r.vy), r.box_side).map_err(wrap)?);
        r.action.validate().map_err(wrap)?;
        actions.push(r.action);
    }

    let mut obstacles = Vec::with_capacity(doc.obstacles.len());
    for (index, verts) in doc.obstacles.iter().enumerate() {
        let wrap = |source: FearError| DocumentError::Obstacle { index, source };
        if verts.len() > MAX_OBSTACLE_VERTICES {
            return Err(wrap(crate::error::invalid("obstacle", "too many vertices")));
        }
        let pts = verts
            .iter()
            .map(|&[x, y]| {
                limit("obstacle vertex", x, MAX_COORDINATE)?;
                limit("obstacle vertex", y, MAX_COORDINATE)?;
                Ok(Vec2::new(x, y))
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        obstacles.push(ConvexPolygon::from_convex_vertices(&pts).map_err(wrap)?);
    }

    let grid = TimeGrid::new(p.horizon, p.intervals)?;
    let scenario = Scenario::new(agents, obstacles, grid, p.a_max)?
        .with_partition(p.magnitude_bins, p.direction_bins)?
        .with_epsilon(p.epsilon)?
        .with_arc_refinement(p.arc_refinement)
        .with_context_mode(p.context_mode);

    let joint = JointAction::new(actions);
    for (i, a) in joint.iter().enumerate() {
        if a.magnitude > scenario.a_max * (1.0 + 1e-12) {
            return Err(DocumentError::Agent {
                id: i as u64 + 1,
                source: FearError::ActionOutOfBounds {
                    agent: i,
                    magnitude: a.magnitude,
                    a_max: scenario.a_max,
                },
            });
        }
    }

    if let MdrSpec::SocialForce(cfg) = &doc.mdr {
        cfg.validate()?;
        let k = scenario.agent_count();
        let bad_len = |n: usize| n != 0 && n != k;
        if bad_len(cfg.desired_velocity.len()) || bad_len(cfg.lanes.len()) {
            return Err(crate::error::invalid("social_force", format!("per-agent lists must have {k} entries")).into());
        }
        for v in &cfg.desired_velocity {
            limit("desired_velocity", v.x, MAX_SPEED)?;
            limit("desired_velocity", v.y, MAX_SPEED)?;
        }
    }

    Ok(LoadedScenario {
        scenario,
        joint,
        mdr: doc.mdr,
        description: doc.description,
    })
}

pub fn to_document(loaded: &LoadedScenario) -> ScenarioDocument {
    let s = &loaded.scenario;
    ScenarioDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        description: loaded.description.clone(),
        agents: s
            .agents
            .iter()
            .zip(loaded.joint.iter())
            .enumerate()
            .map(|(i, (a, &action))| AgentRecord {
                id: i as u64 + 1,
                x: a.position.x,
                y: a.position.y,
                vx: a.velocity.x,
                vy: a.velocity.y,
                box_side: a.box_side,
                action,
            })
            .collect(),
        obstacles: s
            .obstacles
            .iter()
            .map(|o| o.vertices().iter().map(|v| [v.x, v.y]).collect())
            .collect(),
        params: Params {
            horizon: s.grid.horizon(),
            intervals: s.grid.intervals(),
            a_max: s.a_max,
            magnitude_bins: s.magnitude_bins,
            direction_bins: s.direction_bins,
            epsilon: s.epsilon,
            arc_refinement: s.arc_refinement,
            context_mode: s.context_mode,
        },
        mdr: loaded.mdr.clone(),
    }
}

pub fn save_scenario(loaded: &LoadedScenario) -> String {
    let mut text = serde_json::to_string_pretty(&to_document(loaded)).expect("document serialises");
    text.push('\n');
    text
}

/// Fixed 6-decimal formatting without negative zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn matrix_block(out: &mut String, label: &str, rows: &[Vec<f64>]) {
    let k = rows.len();
    out.push_str(label);
    out.push_str("\\affected");
    for j in 1..=k {
        let _ = write!(out, ",{j}");
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for &v in row {
            let _ = write!(out, ",{}", fmt6(v));
        }
        out.push('\n');
    }
}

/// Optional blocks appended after the matrix, each preceded by a blank line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    pub raw: bool,
    pub audit: bool,
}

/// Matrix CSV. The first block is always the clipped matrix.
pub fn export_matrix(matrix: &FearMatrix, options: ExportOptions) -> String {
    let mut out = String::new();
    matrix_block(&mut out, "actor", &matrix.values);
    if options.raw {
        out.push('\n');
        matrix_block(&mut out, "raw", &matrix.raw);
    }
    if options.audit {
        let h = &matrix.hypervolumes;
        let k = matrix.size();
        out.push('\n');
        out.push_str("agent,V_actual,V_others_mdr\n");
        for i in 0..k {
            let _ = writeln!(out, "{},{},{}", i + 1, fmt6(h.actual[i]), fmt6(h.others_mdr[i]));
        }
        out.push('\n');
        out.push_str("V_actor_mdr\\affected");
        for j in 1..=k {
            let _ = write!(out, ",{j}");
        }
        out.push('\n');
        for (i, row) in h.actor_mdr.iter().enumerate() {
            let _ = write!(out, "{}", i + 1);
            for v in row {
                match v {
                    Some(v) => {
                        let _ = write!(out, ",{}", fmt6(*v));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Reads back the first block of an exported matrix.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>, DocumentError> {
    let bad = |line: usize, message: String| DocumentError::Parse {
        line,
        column: 1,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty matrix csv".into()))?;
    let k = header.split(',').count().saturating_sub(1);
    if k == 0 {
        return Err(bad(1, "header has no agent columns".into()));
    }
    let mut rows = Vec::with_capacity(k);
    for (n, line) in lines {
        if line.trim().is_empty() {
            break;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != k + 1 {
            return Err(bad(n + 1, format!("expected {} cells, found {}", k + 1, cells.len())));
        }
        let row = cells[1..]
            .iter()
            .map(|c| c.trim().parse::<f64>().map_err(|e| bad(n + 1, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != k {
        return Err(bad(k + 1, format!("expected {k} rows, found {}", rows.len())));
    }
    Ok(rows)
}

/// Candidate table with columns `a, theta, fear_1..k, collides, mean, min, max, count_net`.
pub fn export_candidates(evals: &[CandidateEvaluation]) -> String {
    let k = evals.first().map_or(0, |e| e.fear.len());
    let mut out = String::from("a,theta");
    for j in 1..=k {
        let _ = write!(out, ",fear_{j}");
    }
    out.push_str(",collides,mean,min,max,count_net\n");
    for e in evals {
        let _ = write!(out, "{},{}", fmt6(e.candidate.magnitude), fmt6(e.candidate.direction));
        for v in &e.fear {
            match v {
                Some(v) => {
                    let _ = write!(out, ",{}", fmt6(*v));
                }
                None => out.push(','),
            }
        }
        let a = &e.aggregates;
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            e.ego_collides,
            fmt6(a.mean),
            fmt6(a.min),
            fmt6(a.max),
            a.count_net()
        );
    }
    out
}
