//! Sequential per-interval collision resolution.
//!
//! Intervals are processed in order. Within one interval every active agent's
//! trajectory hull is tested against every other participating agent's hull
//! and against the obstacles; all colliding agents are then frozen at once at
//! their last collision-free boundary. Frozen agents stay in the scene as
//! static boxes.

use crate::error::Result;
use crate::geom::{polygons_intersect, square, ConvexPolygon, Vec2};
use crate::kinematics::{nominal_trajectory, trajectory_hull};
use crate::scenario::{JointAction, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTrajectories {
    /// Per agent, poses at the `N_t + 1` interval boundaries.
    pub poses: Vec<Vec<Vec2>>,
    /// Collision flag χ per agent.
    pub collided: Vec<bool>,
    /// 1-based interval in which the agent collided and froze.
    pub freeze_interval: Vec<Option<usize>>,
    /// Per agent, realised hull for each of the `N_t` intervals.
    pub interval_hulls: Vec<Vec<ConvexPolygon>>,
    /// Agent excluded from collision checks, if any.
    pub ghost: Option<usize>,
}

impl ResolvedTrajectories {
    pub fn agent_count(&self) -> usize {
        self.poses.len()
    }

    pub fn intervals(&self) -> usize {
        self.interval_hulls.first().map_or(0, Vec::len)
    }

    pub fn final_pose(&self, agent: usize) -> Vec2 {
        *self.poses[agent].last().expect("at least one boundary")
    }
}

pub fn resolve_trajectories(
    scenario: &Scenario,
    joint: &JointAction,
    ghost: Option<usize>,
) -> Result<ResolvedTrajectories> {
    scenario.check_joint(joint)?;
    if let Some(g) = ghost {
        scenario.check_agent(g)?;
    }
    Ok(resolve_unchecked(scenario, joint, ghost))
}

pub(crate) fn resolve_unchecked(
    scenario: &Scenario,
    joint: &JointAction,
    ghost: Option<usize>,
) -> ResolvedTrajectories {
    let k = scenario.agents.len();
    let n = scenario.grid.intervals();
    let nominal: Vec<Vec<Vec2>> = scenario
        .agents
        .iter()
        .zip(joint.iter())
        .map(|(init, &a)| nominal_trajectory(init, a, &scenario.grid))
        .collect();

    let mut poses: Vec<Vec<Vec2>> = nominal
        .iter()
        .map(|traj| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(traj[0]);
            v
        })
        .collect();
    let mut freeze_interval: Vec<Option<usize>> = vec![None; k];
    let mut interval_hulls: Vec<Vec<ConvexPolygon>> = vec![Vec::with_capacity(n); k];
    let participates = |i: usize| ghost != Some(i);

    let mut candidate: Vec<ConvexPolygon> = Vec::with_capacity(k);
    let mut colliding = vec![false; k];
    for t in 1..=n {
        candidate.clear();
        for i in 0..k {
            let side = scenario.agents[i].box_side;
            let hull = if freeze_interval[i].is_some() {
                square(poses[i][t - 1], side)
            } else {
                trajectory_hull(nominal[i][t - 1], nominal[i][t], side)
            };
            candidate.push(hull);
        }

        for i in 0..k {
            colliding[i] = participates(i)
                && freeze_interval[i].is_none()
                && (scenario
                    .obstacles
                    .iter()
                    .any(|o| polygons_intersect(&candidate[i], o))
                    || (0..k).any(|j| {
                        j != i && participates(j) && polygons_intersect(&candidate[i], &candidate[j])
                    }));
        }

        for i in 0..k {
            let side = scenario.agents[i].box_side;
            if colliding[i] {
                freeze_interval[i] = Some(t);
            }
            if freeze_interval[i].is_some() {
                let p = poses[i][t - 1];
                poses[i].push(p);
                interval_hulls[i].push(square(p, side));
            } else {
                poses[i].push(nominal[i][t]);
                interval_hulls[i].push(std::mem::replace(&mut candidate[i], square(Vec2::ZERO, 1.0)));
            }
        }
    }

    ResolvedTrajectories {
        poses,
        collided: freeze_interval.iter().map(Option::is_some).collect(),
        freeze_interval,
        interval_hulls,
        ghost,
    }
}

/// χ_i: whether agent `i` collides under `joint` with everybody participating.
pub fn agent_collides(scenario: &Scenario, joint: &JointAction, i: usize) -> Result<bool> {
    scenario.check_agent(i)?;
    Ok(resolve_trajectories(scenario, joint, None)?.collided[i])
}
