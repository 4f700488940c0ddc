//! Feasible action space of one affected agent.
//!
//! The polar action space `[0, a_max] × [-π, π]` is tiled by `N_m × N_d`
//! annular-sector subsets. A subset is feasible only if the convex hull of the
//! trajectory hulls produced by its corner actions stays clear of every
//! obstacle and of every other agent's realised hull, interval by interval.
//! The feasible hypervolume is the number of feasible subsets times the
//! subset area `δ_a · δ_θ`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::collision::{resolve_unchecked, ResolvedTrajectories};
use crate::error::{FearError, Result};
use crate::geom::{convex_hull, polygons_intersect, square_corners, Aabb, ConvexPolygon, Vec2};
use crate::kinematics::{position_with_accel, Action, AgentInit, TimeGrid};
use crate::par::map_range;
use crate::scenario::{ContextMode, JointAction, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionPartition {
    pub a_max: f64,
    pub magnitude_bins: usize,
    pub direction_bins: usize,
}

impl ActionPartition {
    pub fn of(scenario: &Scenario) -> Self {
        Self {
            a_max: scenario.a_max,
            magnitude_bins: scenario.magnitude_bins,
            direction_bins: scenario.direction_bins,
        }
    }

    pub fn delta_a(&self) -> f64 {
        self.a_max / self.magnitude_bins as f64
    }

    pub fn delta_theta(&self) -> f64 {
        2.0 * PI / self.direction_bins as f64
    }

    pub fn subset_volume(&self) -> f64 {
        self.delta_a() * self.delta_theta()
    }

    pub fn len(&self) -> usize {
        self.magnitude_bins * self.direction_bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Subsets in row-major order (magnitude rows, direction columns).
    pub fn subsets(&self) -> impl Iterator<Item = ActionSubset> + '_ {
        (0..self.len()).map(move |i| self.subset(i))
    }

    pub fn subset(&self, flat: usize) -> ActionSubset {
        ActionSubset {
            m: flat / self.direction_bins,
            d: flat % self.direction_bins,
        }
    }

    pub fn flat_index(&self, s: ActionSubset) -> usize {
        s.m * self.direction_bins + s.d
    }

    /// `[(m)δ_a, (m+1)δ_a]` for the 0-based row `m`.
    pub fn magnitude_range(&self, s: ActionSubset) -> (f64, f64) {
        let lo = s.m as f64 * self.delta_a();
        let hi = if s.m + 1 == self.magnitude_bins {
            self.a_max
        } else {
            (s.m + 1) as f64 * self.delta_a()
        };
        (lo, hi)
    }

    /// `[-π + d δ_θ, -π + (d+1) δ_θ]` for the 0-based column `d`.
    pub fn direction_range(&self, s: ActionSubset) -> (f64, f64) {
        let lo = -PI + s.d as f64 * self.delta_theta();
        let hi = if s.d + 1 == self.direction_bins {
            PI
        } else {
            -PI + (s.d + 1) as f64 * self.delta_theta()
        };
        (lo, hi)
    }
}

/// One cell of the partition, 0-based: row `m` (magnitude), column `d` (direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionSubset {
    pub m: usize,
    pub d: usize,
}

/// φ marks and 𝒱 for one affected agent in one context.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityGrid {
    pub affected: usize,
    pub partition: ActionPartition,
    /// Row-major `N_m × N_d` feasibility marks.
    pub marks: Vec<bool>,
    pub hypervolume: f64,
}

impl FeasibilityGrid {
    pub fn is_feasible(&self, s: ActionSubset) -> bool {
        self.marks[self.partition.flat_index(s)]
    }

    pub fn feasible_count(&self) -> usize {
        self.marks.iter().filter(|&&m| m).count()
    }

    fn from_marks(affected: usize, partition: ActionPartition, marks: Vec<bool>) -> Self {
        let count = marks.iter().filter(|&&m| m).count();
        Self {
            affected,
            partition,
            hypervolume: count as f64 * partition.subset_volume(),
            marks,
        }
    }
}

/// The four corner actions of a subset, plus the outer-arc midpoint when
/// `arc_refinement` is set.
pub fn subset_corner_actions(
    partition: &ActionPartition,
    subset: ActionSubset,
    arc_refinement: bool,
) -> Vec<Action> {
    let (a_lo, a_hi) = partition.magnitude_range(subset);
    let (t_lo, t_hi) = partition.direction_range(subset);
    let mut out = vec![
        Action {
            magnitude: a_lo,
            direction: t_lo,
        },
        Action {
            magnitude: a_hi,
            direction: t_lo,
        },
        Action {
            magnitude: a_lo,
            direction: t_hi,
        },
        Action {
            magnitude: a_hi,
            direction: t_hi,
        },
    ];
    if arc_refinement {
        out.push(Action {
            magnitude: a_hi,
            direction: 0.5 * (t_lo + t_hi),
        });
    }
    out
}

/// Per-interval action-subset hulls for every subset of one agent. These
/// depend only on the agent's initial state, so they are shared by every
/// context the agent is scored in.
#[derive(Debug, Clone)]
pub struct SubsetHulls {
    /// `[subset][interval]`.
    hulls: Vec<Vec<ConvexPolygon>>,
}

impl SubsetHulls {
    pub fn build(init: &AgentInit, grid: &TimeGrid, partition: &ActionPartition, arc: bool) -> Self {
        let hulls = map_range(partition.len(), |flat| {
            subset_interval_hulls(init, grid, partition, partition.subset(flat), arc)
        });
        Self { hulls }
    }

    pub fn for_subset(&self, flat: usize) -> &[ConvexPolygon] {
        &self.hulls[flat]
    }
}

fn subset_interval_hulls(
    init: &AgentInit,
    grid: &TimeGrid,
    partition: &ActionPartition,
    subset: ActionSubset,
    arc: bool,
) -> Vec<ConvexPolygon> {
    let corners = subset_corner_actions(partition, subset, arc);
    let accels: Vec<Vec2> = corners.iter().map(Action::cartesian).collect();
    let n = grid.intervals();
    let mut centres_prev: Vec<Vec2> = accels
        .iter()
        .map(|&a| position_with_accel(init, a, 0.0))
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut pts: Vec<Vec2> = Vec::with_capacity(8 * accels.len());
    for t in 1..=n {
        let time = grid.boundary(t);
        let centres: Vec<Vec2> = accels
            .iter()
            .map(|&a| position_with_accel(init, a, time))
            .collect();
        pts.clear();
        for &c in centres_prev.iter().chain(centres.iter()) {
            pts.extend_from_slice(&square_corners(c, init.box_side));
        }
        out.push(convex_hull(&pts).expect("finite subset corners"));
        centres_prev = centres;
    }
    out
}

/// Everything agent `j` must avoid, per interval.
struct ContextHulls<'a> {
    obstacles: &'a [ConvexPolygon],
    /// `[interval]` → other agents' realised hulls in that interval.
    agents: Vec<Vec<&'a ConvexPolygon>>,
    bounds: Vec<Aabb>,
}

impl<'a> ContextHulls<'a> {
    fn new(scenario: &'a Scenario, ctx: &'a ResolvedTrajectories, j: usize) -> Self {
        let n = ctx.intervals();
        let obstacle_bounds = scenario
            .obstacles
            .iter()
            .fold(Aabb::empty(), |acc, o| acc.union(o.aabb()));
        let mut agents = Vec::with_capacity(n);
        let mut bounds = Vec::with_capacity(n);
        for t in 0..n {
            let hs: Vec<&ConvexPolygon> = (0..ctx.agent_count())
                .filter(|&i| i != j)
                .map(|i| &ctx.interval_hulls[i][t])
                .collect();
            bounds.push(hs.iter().fold(obstacle_bounds, |acc, h| acc.union(h.aabb())));
            agents.push(hs);
        }
        Self {
            obstacles: &scenario.obstacles,
            agents,
            bounds,
        }
    }

    fn interval_hits(&self, t: usize, hull: &ConvexPolygon) -> bool {
        if !self.bounds[t].overlaps(hull.aabb()) {
            return false;
        }
        self.obstacles.iter().any(|o| polygons_intersect(hull, o))
            || self.agents[t].iter().any(|h| polygons_intersect(hull, h))
    }

    /// Short-circuits on the first colliding interval.
    fn clear(&self, interval_hulls: &[ConvexPolygon]) -> bool {
        !interval_hulls
            .iter()
            .enumerate()
            .any(|(t, h)| self.interval_hits(t, h))
    }
}

/// Whether every action in `subset` keeps agent `j` collision-free against
/// `context`, which must have been resolved for `j` (ghost `j`, or no ghost
/// under [`ContextMode::IncludeAffected`]).
pub fn subset_feasible(
    scenario: &Scenario,
    context: &ResolvedTrajectories,
    j: usize,
    subset: ActionSubset,
) -> Result<bool> {
    scenario.check_agent(j)?;
    let expected_ghost = match scenario.context_mode {
        ContextMode::GhostAffected => Some(j),
        ContextMode::IncludeAffected => None,
    };
    if context.ghost != expected_ghost || context.agent_count() != scenario.agent_count() {
        return Err(FearError::ContextMismatch {
            expected: j,
            found: context.ghost,
        });
    }
    let partition = ActionPartition::of(scenario);
    if subset.m >= partition.magnitude_bins || subset.d >= partition.direction_bins {
        return Err(crate::error::invalid("subset", format!("{subset:?} outside the partition")));
    }
    let hulls = subset_interval_hulls(
        &scenario.agents[j],
        &scenario.grid,
        &partition,
        subset,
        scenario.arc_refinement_enabled(),
    );
    Ok(ContextHulls::new(scenario, context, j).clear(&hulls))
}

/// Resolves the context agent `j` is scored against.
pub fn affected_context(scenario: &Scenario, joint: &JointAction, j: usize) -> Result<ResolvedTrajectories> {
    scenario.check_joint(joint)?;
    scenario.check_agent(j)?;
    Ok(context_unchecked(scenario, joint, j))
}

fn context_unchecked(scenario: &Scenario, joint: &JointAction, j: usize) -> ResolvedTrajectories {
    match scenario.context_mode {
        ContextMode::GhostAffected => resolve_unchecked(scenario, joint, Some(j)),
        ContextMode::IncludeAffected => resolve_unchecked(scenario, joint, None),
    }
}

/// 𝒱_j(S, A): feasible hypervolume of agent `j` under `joint`. Agent `j`'s own
/// entry in `joint` does not influence the result in the default context mode.
pub fn feasible_hypervolume(scenario: &Scenario, joint: &JointAction, j: usize) -> Result<FeasibilityGrid> {
    FeasibilityEngine::new(scenario).grid(joint, j)
}

/// Caches subset hulls per agent so repeated grids only pay for the context.
pub struct FeasibilityEngine<'s> {
    scenario: &'s Scenario,
    partition: ActionPartition,
    arc: bool,
    hulls: Vec<OnceLock<SubsetHulls>>,
}

impl<'s> FeasibilityEngine<'s> {
    pub fn new(scenario: &'s Scenario) -> Self {
        Self {
            scenario,
            partition: ActionPartition::of(scenario),
            arc: scenario.arc_refinement_enabled(),
            hulls: (0..scenario.agent_count()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn scenario(&self) -> &'s Scenario {
        self.scenario
    }

    pub fn partition(&self) -> &ActionPartition {
        &self.partition
    }

    pub fn subset_hulls(&self, j: usize) -> &SubsetHulls {
        self.hulls[j].get_or_init(|| {
            SubsetHulls::build(
                &self.scenario.agents[j],
                &self.scenario.grid,
                &self.partition,
                self.arc,
            )
        })
    }

    pub fn grid(&self, joint: &JointAction, j: usize) -> Result<FeasibilityGrid> {
        self.scenario.check_joint(joint)?;
        self.scenario.check_agent(j)?;
        Ok(self.grid_unchecked(joint, j))
    }

    pub(crate) fn grid_unchecked(&self, joint: &JointAction, j: usize) -> FeasibilityGrid {
        let context = context_unchecked(self.scenario, joint, j);
        self.grid_in_context(&context, j)
    }

    pub fn grid_in_context(&self, context: &ResolvedTrajectories, j: usize) -> FeasibilityGrid {
        let hulls = self.subset_hulls(j);
        let ctx = ContextHulls::new(self.scenario, context, j);
        let marks = map_range(self.partition.len(), |flat| ctx.clear(hulls.for_subset(flat)));
        FeasibilityGrid::from_marks(j, self.partition, marks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::bounding_box;
    use crate::kinematics::nominal_trajectory;

    fn single(a_max: f64) -> Scenario {
        let agent = AgentInit::new(Vec2::ZERO, Vec2::new(1.0, 0.5), 1.0).unwrap();
        Scenario::new(vec![agent], vec![], TimeGrid::new(4.0, 10).unwrap(), a_max)
            .unwrap()
            .with_partition(8, 16)
            .unwrap()
    }

    #[test]
    fn corner_actions_of_first_subset() {
        let p = ActionPartition {
            a_max: 2.0,
            magnitude_bins: 1,
            direction_bins: 4,
        };
        let c = subset_corner_actions(&p, ActionSubset { m: 0, d: 0 }, false);
        let dt = p.delta_theta();
        let expect = [(0.0, -PI), (2.0, -PI), (0.0, -PI + dt), (2.0, -PI + dt)];
        assert_eq!(c.len(), 4);
        for (a, (m, d)) in c.iter().zip(expect) {
            assert!((a.magnitude - m).abs() < 1e-12 && (a.direction - d).abs() < 1e-12);
        }
        let c5 = subset_corner_actions(&p, ActionSubset { m: 0, d: 0 }, true);
        assert_eq!(c5.len(), 5);
        assert_eq!(c5[4].magnitude, 2.0);
        assert!((c5[4].direction - (-PI + dt / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_magnitude_corners_share_a_trajectory() {
        let p = ActionPartition {
            a_max: 2.0,
            magnitude_bins: 4,
            direction_bins: 8,
        };
        let grid = TimeGrid::new(3.0, 6).unwrap();
        let init = AgentInit::new(Vec2::new(1.0, 2.0), Vec2::new(0.5, -0.3), 1.0).unwrap();
        let c = subset_corner_actions(&p, ActionSubset { m: 0, d: 3 }, false);
        assert_eq!(nominal_trajectory(&init, c[0], &grid), nominal_trajectory(&init, c[2], &grid));
    }

    #[test]
    fn subsets_tile_the_action_space() {
        let p = ActionPartition {
            a_max: 3.7,
            magnitude_bins: 7,
            direction_bins: 13,
        };
        let total: f64 = p.subsets().map(|_| p.subset_volume()).sum();
        assert!((total - 3.7 * 2.0 * PI).abs() / (3.7 * 2.0 * PI) < 1e-9);
        let last = p.subset(p.len() - 1);
        assert_eq!(p.magnitude_range(last).1, 3.7);
        assert_eq!(p.direction_range(last).1, PI);
    }

    #[test]
    fn empty_scene_is_fully_feasible() {
        let s = single(4.0);
        let g = feasible_hypervolume(&s, &JointAction::new(vec![Action::ZERO]), 0).unwrap();
        assert!(g.marks.iter().all(|&m| m));
        assert!((g.hypervolume - 4.0 * 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn walled_in_agent_has_nothing() {
        // Four walls touching the unit box on every side.
        let walls = vec![
            ConvexPolygon::from_convex_vertices(&[
                Vec2::new(0.5, -2.0),
                Vec2::new(1.5, -2.0),
                Vec2::new(1.5, 2.0),
                Vec2::new(0.5, 2.0),
            ])
            .unwrap(),
            ConvexPolygon::from_convex_vertices(&[
                Vec2::new(-1.5, -2.0),
                Vec2::new(-0.5, -2.0),
                Vec2::new(-0.5, 2.0),
                Vec2::new(-1.5, 2.0),
            ])
            .unwrap(),
            bounding_box(Vec2::new(0.0, 1.0), 1.0).unwrap(),
            bounding_box(Vec2::new(0.0, -1.0), 1.0).unwrap(),
        ];
        let agent = AgentInit::new(Vec2::ZERO, Vec2::ZERO, 1.0).unwrap();
        let s = Scenario::new(vec![agent], walls, TimeGrid::new(2.0, 5).unwrap(), 2.0)
            .unwrap()
            .with_partition(4, 8)
            .unwrap();
        let g = feasible_hypervolume(&s, &JointAction::new(vec![Action::ZERO]), 0).unwrap();
        assert_eq!(g.feasible_count(), 0);
        assert_eq!(g.hypervolume, 0.0);
    }

    #[test]
    fn subset_feasible_requires_matching_ghost() {
        let a = AgentInit::new(Vec2::ZERO, Vec2::ZERO, 1.0).unwrap();
        let b = AgentInit::new(Vec2::new(5.0, 0.0), Vec2::ZERO, 1.0).unwrap();
        let s = Scenario::new(vec![a, b], vec![], TimeGrid::new(2.0, 5).unwrap(), 2.0).unwrap();
        let joint = JointAction::new(vec![Action::ZERO; 2]);
        let ctx = affected_context(&s, &joint, 1).unwrap();
        let sub = ActionSubset { m: 0, d: 0 };
        assert!(subset_feasible(&s, &ctx, 1, sub).is_ok());
        assert!(matches!(
            subset_feasible(&s, &ctx, 0, sub),
            Err(FearError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn engine_matches_per_subset_path() {
        let a = AgentInit::new(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0).unwrap();
        let b = AgentInit::new(Vec2::new(4.0, 0.5), Vec2::new(-1.0, 0.0), 1.0).unwrap();
        let s = Scenario::new(vec![a, b], vec![], TimeGrid::new(3.0, 10).unwrap(), 2.0)
            .unwrap()
            .with_partition(4, 16)
            .unwrap();
        let joint = JointAction::new(vec![Action::ZERO, Action::new(1.0, 2.0).unwrap()]);
        let g = feasible_hypervolume(&s, &joint, 0).unwrap();
        let ctx = affected_context(&s, &joint, 0).unwrap();
        let p = ActionPartition::of(&s);
        for sub in p.subsets() {
            assert_eq!(g.is_feasible(sub), subset_feasible(&s, &ctx, 0, sub).unwrap());
        }
        assert!(g.feasible_count() > 0 && g.feasible_count() < p.len());
    }
}
