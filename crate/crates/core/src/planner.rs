//! Responsibility-aware action selection for one ego agent.
//!
//! Every candidate action of the ego is scored by its FeAR row against the
//! other agents' predicted actions, then the candidates are ranked by an
//! aggregate of that row. Colliding candidates are excluded by default.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collision::resolve_unchecked;
use crate::error::{invalid, FearError, Result};
use crate::feasibility::FeasibilityEngine;
use crate::fear::{intervene, pair_ratio};
use crate::kinematics::Action;
use crate::par::map_range;
use crate::scenario::{JointAction, Scenario};

/// Magnitude below which a FeAR value counts as neither assertive nor courteous.
pub const SIGN_TOLERANCE: f64 = 1e-9;

/// Subset-centre actions, magnitude-major.
pub fn candidate_grid(a_max: f64, n_mag: usize, n_dir: usize) -> Result<Vec<Action>> {
    if !(a_max.is_finite() && a_max > 0.0) {
        return Err(invalid("a_max", "must be positive and finite"));
    }
    if n_mag == 0 || n_dir == 0 {
        return Err(invalid("candidate grid", "needs at least one magnitude and one direction"));
    }
    let da = a_max / n_mag as f64;
    let dt = 2.0 * PI / n_dir as f64;
    Ok((0..n_mag)
        .flat_map(|m| {
            (0..n_dir).map(move |d| Action {
                magnitude: (m as f64 + 0.5) * da,
                direction: -PI + (d as f64 + 0.5) * dt,
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count_assertive: usize,
    pub count_courteous: usize,
}

impl Aggregates {
    /// Aggregates over a FeAR row; an empty row aggregates to zeros.
    pub fn of(row: &[f64]) -> Self {
        if row.is_empty() {
            return Self {
                mean: 0.0,
                min: 0.0,
                max: 0.0,
                count_assertive: 0,
                count_courteous: 0,
            };
        }
        Self {
            mean: row.iter().sum::<f64>() / row.len() as f64,
            min: row.iter().copied().fold(f64::INFINITY, f64::min),
            max: row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count_assertive: row.iter().filter(|&&v| v > SIGN_TOLERANCE).count(),
            count_courteous: row.iter().filter(|&&v| v < -SIGN_TOLERANCE).count(),
        }
    }

    pub fn count_net(&self) -> i64 {
        self.count_assertive as i64 - self.count_courteous as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation {
    pub candidate: Action,
    /// FeAR of the ego on each agent; `None` at the ego's own index.
    pub fear: Vec<Option<f64>>,
    pub ego_collides: bool,
    pub aggregates: Aggregates,
}

impl CandidateEvaluation {
    /// The row without the ego entry.
    pub fn fear_row(&self) -> Vec<f64> {
        self.fear.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateKind {
    Mean,
    Max,
    Min,
    CountNet,
}

impl AggregateKind {
    pub fn scalar(self, a: &Aggregates) -> f64 {
        match self {
            AggregateKind::Mean => a.mean,
            AggregateKind::Max => a.max,
            AggregateKind::Min => a.min,
            AggregateKind::CountNet => a.count_net() as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AggregateKind::Mean => "mean",
            AggregateKind::Max => "max",
            AggregateKind::Min => "min",
            AggregateKind::CountNet => "count",
        }
    }
}

impl fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregateKind {
    type Err = FearError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(AggregateKind::Mean),
            "max" => Ok(AggregateKind::Max),
            "min" => Ok(AggregateKind::Min),
            "count" | "count_net" => Ok(AggregateKind::CountNet),
            other => Err(invalid("aggregate", format!("unknown aggregate {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationPolicy {
    pub kind: AggregateKind,
    pub collision_mask: bool,
}

impl AggregationPolicy {
    pub fn new(kind: AggregateKind) -> Self {
        Self {
            kind,
            collision_mask: true,
        }
    }
}

/// Scores every candidate. The hypervolumes of the other agents with the ego
/// following its move de rigueur are shared by all candidates.
pub fn evaluate_candidates(
    scenario: &Scenario,
    predicted: &JointAction,
    mdr: &JointAction,
    ego: usize,
    grid: &[Action],
) -> Result<Vec<CandidateEvaluation>> {
    scenario.validate()?;
    scenario.check_agent(ego)?;
    scenario.check_joint(mdr)?;
    // The ego entry of the prediction is never used.
    let predicted = intervene(predicted, ego, mdr[ego]);
    scenario.check_joint(&predicted)?;
    for c in grid {
        c.validate()?;
        if c.magnitude > scenario.a_max * (1.0 + 1e-12) {
            return Err(FearError::ActionOutOfBounds {
                agent: ego,
                magnitude: c.magnitude,
                a_max: scenario.a_max,
            });
        }
    }

    let engine = FeasibilityEngine::new(scenario);
    let k = scenario.agent_count();
    let v_mdr: Vec<f64> = map_range(k, |j| {
        if j == ego {
            0.0
        } else {
            engine.grid_unchecked(&predicted, j).hypervolume
        }
    });
    let eps = scenario.epsilon;

    Ok(map_range(grid.len(), |n| {
        let candidate = grid[n];
        let joint = intervene(&predicted, ego, candidate);
        let fear: Vec<Option<f64>> = (0..k)
            .map(|j| {
                (j != ego).then(|| {
                    let v = engine.grid_unchecked(&joint, j).hypervolume;
                    pair_ratio(v_mdr[j], v, eps).clamp(-1.0, 1.0)
                })
            })
            .collect();
        let row: Vec<f64> = fear.iter().flatten().copied().collect();
        CandidateEvaluation {
            candidate,
            ego_collides: resolve_unchecked(scenario, &joint, None).collided[ego],
            aggregates: Aggregates::of(&row),
            fear,
        }
    }))
}

/// Selected candidate plus both rankings (indices into the evaluation list,
/// best first).
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: Action,
    pub index: usize,
    /// Ranking of collision-free candidates when masking, otherwise of all.
    pub ranking: Vec<usize>,
    pub unmasked_ranking: Vec<usize>,
}

fn rank_order(evals: &[CandidateEvaluation], kind: AggregateKind, a: usize, b: usize) -> Ordering {
    let (ea, eb) = (&evals[a], &evals[b]);
    kind.scalar(&ea.aggregates)
        .total_cmp(&kind.scalar(&eb.aggregates))
        .then(ea.candidate.magnitude.total_cmp(&eb.candidate.magnitude))
        .then(ea.candidate.direction.abs().total_cmp(&eb.candidate.direction.abs()))
        .then(a.cmp(&b))
}

/// Argmin of the policy scalar. Ties go to the lower magnitude, then the
/// direction closest to zero, then the earlier grid entry.
pub fn select_action(evals: &[CandidateEvaluation], policy: AggregationPolicy) -> Result<Selection> {
    if evals.is_empty() {
        return Err(FearError::NoCandidates);
    }
    let mut unmasked: Vec<usize> = (0..evals.len()).collect();
    unmasked.sort_by(|&a, &b| rank_order(evals, policy.kind, a, b));
    let ranking: Vec<usize> = if policy.collision_mask {
        unmasked.iter().copied().filter(|&i| !evals[i].ego_collides).collect()
    } else {
        unmasked.clone()
    };
    match ranking.first() {
        Some(&index) => Ok(Selection {
            action: evals[index].candidate,
            index,
            ranking,
            unmasked_ranking: unmasked,
        }),
        None => Err(FearError::NoCollisionFreeCandidate {
            best: Box::new(evals[unmasked[0]].clone()),
        }),
    }
}
