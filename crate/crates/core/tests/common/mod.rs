#![allow(dead_code)]

use std::f64::consts::PI;

use fear_core::collision::ResolvedTrajectories;
use fear_core::feasibility::{subset_corner_actions, ActionPartition, ActionSubset};
use fear_core::geom::{convex_hull, polygons_intersect};
use fear_core::kinematics::nominal_position;
use fear_core::{trajectory_hull, Action, AgentInit, JointAction, Scenario, TimeGrid, Vec2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_action(rng: &mut impl Rng, a_max: f64) -> Action {
    Action::new(rng.gen_range(0.0..=a_max), rng.gen_range(-PI..=PI)).expect("sampled inside bounds")
}

pub fn random_joint(rng: &mut impl Rng, k: usize, a_max: f64) -> JointAction {
    JointAction::new((0..k).map(|_| random_action(rng, a_max)).collect())
}

/// Shape of the random scenes.
#[derive(Debug, Clone, Copy)]
pub struct SceneSpec {
    pub max_agents: usize,
    pub magnitude_bins: usize,
    pub direction_bins: usize,
    pub intervals: usize,
    pub horizon: f64,
    pub a_max: f64,
    /// Half-width of the square the agents start in.
    pub spread: f64,
    pub obstacle_chance: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            max_agents: 4,
            magnitude_bins: 8,
            direction_bins: 16,
            intervals: 10,
            horizon: 4.0,
            a_max: 2.0,
            spread: 5.0,
            obstacle_chance: 0.3,
        }
    }
}

/// Agents in a square with random speeds and headings, plus an optional
/// rectangular obstacle that may or may not overlap anyone.
pub fn random_scene(rng: &mut impl Rng, spec: SceneSpec) -> Scenario {
    let k = rng.gen_range(1..=spec.max_agents);
    let agents = (0..k)
        .map(|_| {
            let p = Vec2::new(
                rng.gen_range(-spec.spread..=spec.spread),
                rng.gen_range(-spec.spread..=spec.spread),
            );
            let v = Vec2::from_polar(rng.gen_range(0.0..=2.5), rng.gen_range(-PI..=PI));
            AgentInit::new(p, v, rng.gen_range(0.5..=1.5)).unwrap()
        })
        .collect();
    let mut obstacles = Vec::new();
    if rng.gen_bool(spec.obstacle_chance) {
        let c = Vec2::new(rng.gen_range(-8.0..=8.0), rng.gen_range(-8.0..=8.0));
        let (w, h) = (rng.gen_range(0.5..=4.0), rng.gen_range(0.5..=4.0));
        obstacles.push(rect(c.x - w, c.y - h, c.x + w, c.y + h));
    }
    Scenario::new(agents, obstacles, TimeGrid::new(spec.horizon, spec.intervals).unwrap(), spec.a_max)
        .unwrap()
        .with_partition(spec.magnitude_bins, spec.direction_bins)
        .unwrap()
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> fear_core::ConvexPolygon {
    convex_hull(&[Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)]).unwrap()
}

/// Whether one concrete action of agent `j` stays clear of everything in
/// `context` in every interval.
pub fn action_clear(scenario: &Scenario, context: &ResolvedTrajectories, j: usize, action: Action) -> bool {
    let init = &scenario.agents[j];
    let grid = &scenario.grid;
    (1..=grid.intervals()).all(|t| {
        let hull = trajectory_hull(
            nominal_position(init, action, grid.boundary(t - 1)),
            nominal_position(init, action, grid.boundary(t)),
            init.box_side,
        );
        !scenario.obstacles.iter().any(|o| polygons_intersect(&hull, o))
            && !(0..scenario.agent_count())
                .filter(|&i| i != j)
                .any(|i| polygons_intersect(&hull, &context.interval_hulls[i][t - 1]))
    })
}

/// `n × n` actions spread evenly over a subset, edges included.
pub fn dense_actions(partition: &ActionPartition, subset: ActionSubset, n: usize) -> Vec<Action> {
    let (a0, a1) = partition.magnitude_range(subset);
    let (t0, t1) = partition.direction_range(subset);
    let lerp = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    (0..n)
        .flat_map(|i| {
            (0..n).map(move |k| Action {
                magnitude: lerp(a0, a1, i),
                direction: lerp(t0, t1, k),
            })
        })
        .collect()
}

/// Whether `action` lies outside the polygon spanned by the subset's corner
/// actions in Cartesian acceleration space, i.e. in the outer-arc bulge.
pub fn in_arc_bulge(partition: &ActionPartition, subset: ActionSubset, arc: bool, action: Action) -> bool {
    let corners: Vec<Vec2> = subset_corner_actions(partition, subset, arc)
        .iter()
        .map(Action::cartesian)
        .collect();
    !convex_hull(&corners).unwrap().contains(action.cartesian())
}
