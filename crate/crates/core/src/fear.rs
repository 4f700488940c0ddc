//! The FeAR matrix.
//!
//! Off-diagonal entry `(i, j)` compares agent `j`'s feasible hypervolume when
//! actor `i` follows its move de rigueur against the actual joint action:
//!
//! ```text
//! FeAR[i][j] = Z((V_j(A_i <- mu_i) - V_j(A)) / (V_j(A_i <- mu_i) + eps))
//! ```
//!
//! The diagonal is the feasible action space remaining for agent `i` relative
//! to everybody else following their moves de rigueur:
//!
//! ```text
//! FeAR[i][i] = Z(V_i(A) / (V_i(A_!i <- mu_!i) + eps))
//! ```
//!
//! `Z` clips to `[-1, 1]`. Positive off-diagonal values are assertive,
//! negative ones courteous.

use std::collections::HashMap;

use crate::error::{FearError, Result};
use crate::feasibility::FeasibilityEngine;
use crate::kinematics::Action;
use crate::par::map_range;
use crate::scenario::{ContextMode, JointAction, Scenario};

/// Copy of `joint` with agent `i`'s action replaced.
pub fn intervene(joint: &JointAction, i: usize, replacement: Action) -> JointAction {
    let mut out = joint.clone();
    out.0[i] = replacement;
    out
}

/// Copy of `joint` where every agent except `keep` takes its move de rigueur.
pub fn intervene_all_but(joint: &JointAction, mdr: &JointAction, keep: usize) -> JointAction {
    mdr.iter()
        .enumerate()
        .map(|(i, &m)| if i == keep { joint[i] } else { m })
        .collect()
}

/// Clip to `[-1, 1]`.
pub fn clip_z(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(FearError::NotANumber);
    }
    Ok(if x >= 1.0 {
        1.0
    } else if x <= -1.0 {
        -1.0
    } else {
        x
    })
}

pub(crate) fn pair_ratio(v_mdr: f64, v_actual: f64, epsilon: f64) -> f64 {
    (v_mdr - v_actual) / (v_mdr + epsilon)
}

pub(crate) fn self_ratio(v_actual: f64, v_others_mdr: f64, epsilon: f64) -> f64 {
    v_actual / (v_others_mdr + epsilon)
}

fn clip(x: f64) -> f64 {
    clip_z(x).expect("hypervolume ratios are finite")
}

fn check_inputs(scenario: &Scenario, joint: &JointAction, mdr: &JointAction) -> Result<()> {
    scenario.validate()?;
    scenario.check_joint(joint)?;
    scenario.check_joint(mdr)
}

/// FeAR of actor `i` on affected agent `j != i`.
pub fn fear_pair(
    scenario: &Scenario,
    joint: &JointAction,
    mdr: &JointAction,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_inputs(scenario, joint, mdr)?;
    scenario.check_agent(i)?;
    scenario.check_agent(j)?;
    if i == j {
        return Err(FearError::SameAgent(i));
    }
    let engine = FeasibilityEngine::new(scenario);
    let v_actual = engine.grid_unchecked(joint, j).hypervolume;
    let v_mdr = engine.grid_unchecked(&intervene(joint, i, mdr[i]), j).hypervolume;
    Ok(clip(pair_ratio(v_mdr, v_actual, scenario.epsilon)))
}

/// Feasible action space remaining for agent `i`.
pub fn fear_self(scenario: &Scenario, joint: &JointAction, mdr: &JointAction, i: usize) -> Result<f64> {
    check_inputs(scenario, joint, mdr)?;
    scenario.check_agent(i)?;
    let engine = FeasibilityEngine::new(scenario);
    let v_actual = engine.grid_unchecked(joint, i).hypervolume;
    let v_others = engine
        .grid_unchecked(&intervene_all_but(joint, mdr, i), i)
        .hypervolume;
    Ok(clip(self_ratio(v_actual, v_others, scenario.epsilon)))
}

/// Hypervolumes behind every matrix entry.
#[derive(Debug, Clone, PartialEq)]
pub struct HypervolumeAudit {
    /// `V_j(A)` per affected agent.
    pub actual: Vec<f64>,
    /// `V_j(A_i <- mu_i)` at `[i][j]`; `None` on the diagonal.
    pub actor_mdr: Vec<Vec<Option<f64>>>,
    /// `V_i(A_!i <- mu_!i)` per agent.
    pub others_mdr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FearMatrix {
    /// Clipped values, row = actor, column = affected.
    pub values: Vec<Vec<f64>>,
    /// Unclipped ratios.
    pub raw: Vec<Vec<f64>>,
    pub joint: JointAction,
    pub mdr: JointAction,
    pub hypervolumes: HypervolumeAudit,
}

impl FearMatrix {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, actor: usize, affected: usize) -> f64 {
        self.values[actor][affected]
    }
}

/// Key identifying one feasibility computation: the affected agent and the
/// joint action that shapes its context, with the affected agent's own entry
/// blanked when it cannot influence the result.
#[derive(Clone, PartialEq, Eq, Hash)]
struct ContextKey {
    affected: usize,
    actions: Vec<(u64, u64)>,
}

fn context_key(scenario: &Scenario, joint: &JointAction, affected: usize) -> ContextKey {
    let blank = scenario.context_mode == ContextMode::GhostAffected;
    ContextKey {
        affected,
        actions: joint
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if blank && i == affected {
                    (0, 0)
                } else {
                    (a.magnitude.to_bits(), a.direction.to_bits())
                }
            })
            .collect(),
    }
}

/// Memo of hypervolumes over distinct (affected, context) pairs.
pub(crate) struct HypervolumeTable {
    keys: HashMap<ContextKey, usize>,
    requests: Vec<(usize, JointAction)>,
    values: Vec<f64>,
}

impl HypervolumeTable {
    pub(crate) fn new() -> Self {
        Self {
            keys: HashMap::new(),
            requests: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Registers a request and returns its slot.
    pub(crate) fn request(&mut self, scenario: &Scenario, joint: JointAction, affected: usize) -> usize {
        let key = context_key(scenario, &joint, affected);
        let next = self.requests.len();
        *self.keys.entry(key).or_insert_with(|| {
            self.requests.push((affected, joint));
            next
        })
    }

    pub(crate) fn evaluate(&mut self, engine: &FeasibilityEngine<'_>) {
        let start = self.values.len();
        let pending = &self.requests[start..];
        let fresh = map_range(pending.len(), |n| {
            let (j, ref joint) = pending[n];
            engine.grid_unchecked(joint, j).hypervolume
        });
        self.values.extend(fresh);
    }

    pub(crate) fn value(&self, slot: usize) -> f64 {
        self.values[slot]
    }
}

/// All `k²` entries. Each distinct (affected, context) hypervolume is
/// computed once and shared across actors.
pub fn fear_matrix(scenario: &Scenario, joint: &JointAction, mdr: &JointAction) -> Result<FearMatrix> {
    check_inputs(scenario, joint, mdr)?;
    let engine = FeasibilityEngine::new(scenario);
    fear_matrix_with(&engine, joint, mdr)
}

pub(crate) fn fear_matrix_with(
    engine: &FeasibilityEngine<'_>,
    joint: &JointAction,
    mdr: &JointAction,
) -> Result<FearMatrix> {
    let scenario = engine.scenario();
    let k = scenario.agent_count();
    let mut table = HypervolumeTable::new();

    let actual: Vec<usize> = (0..k)
        .map(|j| table.request(scenario, joint.clone(), j))
        .collect();
    let others: Vec<usize> = (0..k)
        .map(|i| table.request(scenario, intervene_all_but(joint, mdr, i), i))
        .collect();
    let actor: Vec<Vec<Option<usize>>> = (0..k)
        .map(|i| {
            let intervened = intervene(joint, i, mdr[i]);
            (0..k)
                .map(|j| (i != j).then(|| table.request(scenario, intervened.clone(), j)))
                .collect()
        })
        .collect();
    table.evaluate(engine);

    let eps = scenario.epsilon;
    let mut raw = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            raw[i][j] = if i == j {
                self_ratio(table.value(actual[i]), table.value(others[i]), eps)
            } else {
                let v_mdr = table.value(actor[i][j].expect("off-diagonal slot"));
                pair_ratio(v_mdr, table.value(actual[j]), eps)
            };
        }
    }
    let values = raw
        .iter()
        .map(|row| row.iter().map(|&x| clip(x)).collect())
        .collect();

    Ok(FearMatrix {
        values,
        raw,
        joint: joint.clone(),
        mdr: mdr.clone(),
        hypervolumes: HypervolumeAudit {
            actual: actual.iter().map(|&s| table.value(s)).collect(),
            actor_mdr: actor
                .iter()
                .map(|row| row.iter().map(|s| s.map(|s| table.value(s))).collect())
                .collect(),
            others_mdr: others.iter().map(|&s| table.value(s)).collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::kinematics::{AgentInit, TimeGrid};

    #[test]
    fn clip_matches_piecewise_definition() {
        assert_eq!(clip_z(1.5).unwrap(), 1.0);
        assert_eq!(clip_z(1.0).unwrap(), 1.0);
        assert_eq!(clip_z(-2.0).unwrap(), -1.0);
        assert_eq!(clip_z(-1.0).unwrap(), -1.0);
        assert_eq!(clip_z(0.3).unwrap(), 0.3);
        assert_eq!(clip_z(f64::NAN), Err(FearError::NotANumber));
    }

    #[test]
    fn intervene_replaces_one_entry() {
        let a = Action::new(1.0, 0.5).unwrap();
        let b = Action::new(2.0, -0.5).unwrap();
        let joint = JointAction::new(vec![a, a, a]);
        assert_eq!(intervene(&joint, 1, joint[1]), joint);
        let twice = intervene(&intervene(&joint, 2, b), 2, Action::ZERO);
        assert_eq!(twice[2], Action::ZERO);
        let once = intervene(&joint, 0, b);
        assert_eq!(once[0], b);
        assert_eq!(&once.0[1..], &joint.0[1..]);
        assert_eq!(joint[0], a);
    }

    fn lone_agent() -> Scenario {
        let a = AgentInit::new(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0).unwrap();
        Scenario::new(vec![a], vec![], TimeGrid::new(3.0, 10).unwrap(), 2.0)
            .unwrap()
            .with_partition(4, 8)
            .unwrap()
    }

    #[test]
    fn single_agent_matrix_is_one() {
        let s = lone_agent();
        let joint = JointAction::new(vec![Action::new(1.0, 1.0).unwrap()]);
        let mdr = JointAction::new(vec![Action::ZERO]);
        let m = fear_matrix(&s, &joint, &mdr).unwrap();
        assert_eq!(m.size(), 1);
        assert!((m.get(0, 0) - 1.0).abs() < 1e-6);
        assert!(m.get(0, 0) <= 1.0);
    }

    #[test]
    fn pair_requires_distinct_agents() {
        let s = lone_agent();
        let j = JointAction::new(vec![Action::ZERO]);
        assert!(matches!(fear_pair(&s, &j, &j, 0, 0), Err(FearError::SameAgent(0))));
    }

    #[test]
    fn entry_functions_agree_with_matrix() {
        let a = AgentInit::new(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0).unwrap();
        let b = AgentInit::new(Vec2::new(3.0, 0.0), Vec2::new(1.0, 0.0), 1.0).unwrap();
        let s = Scenario::new(vec![a, b], vec![], TimeGrid::new(3.0, 10).unwrap(), 2.0)
            .unwrap()
            .with_partition(6, 16)
            .unwrap();
        let joint = JointAction::new(vec![Action::new(1.5, 0.0).unwrap(), Action::new(0.5, 3.0).unwrap()]);
        let mdr = JointAction::new(vec![Action::ZERO; 2]);
        let m = fear_matrix(&s, &joint, &mdr).unwrap();
        assert_eq!(m.get(0, 1), fear_pair(&s, &joint, &mdr, 0, 1).unwrap());
        assert_eq!(m.get(1, 0), fear_pair(&s, &joint, &mdr, 1, 0).unwrap());
        assert_eq!(m.get(0, 0), fear_self(&s, &joint, &mdr, 0).unwrap());
        assert_eq!(m.get(1, 1), fear_self(&s, &joint, &mdr, 1).unwrap());
        // Follower accelerating into the leader is assertive.
        assert!(m.get(0, 1) > 0.0);
    }
}
