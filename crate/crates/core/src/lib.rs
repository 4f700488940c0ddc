//! Feasible Action-space Reduction (FeAR): a metric of causal responsibility
//! between agents in continuous 2D spatial interactions.
//!
//! Agents are point masses with square, axis-aligned bounding boxes that pick
//! a constant polar acceleration for a time window. [`collision`] resolves the
//! joint motion with freeze-on-collision semantics, [`feasibility`] measures
//! the hypervolume of an agent's collision-free actions, and [`fear`] compares
//! those hypervolumes under counterfactual interventions where an actor
//! follows its move de rigueur ([`mdr`]). [`planner`] turns the metric into a
//! responsibility-aware action selector.

pub mod casestudies;
pub mod collision;
pub mod error;
pub mod feasibility;
pub mod fear;
pub mod geom;
pub mod io;
pub mod kinematics;
pub mod mdr;
mod par;
pub mod planner;
pub mod render;
pub mod scenario;

pub use collision::{agent_collides, resolve_trajectories, ResolvedTrajectories};
pub use error::{FearError, Result};
pub use feasibility::{feasible_hypervolume, ActionPartition, ActionSubset, FeasibilityEngine, FeasibilityGrid};
pub use fear::{clip_z, fear_matrix, fear_pair, fear_self, intervene, FearMatrix};
pub use geom::{bounding_box, convex_hull, polygons_intersect, ConvexPolygon, Vec2};
pub use kinematics::{nominal_position, nominal_trajectory, trajectory_hull, Action, AgentInit, TimeGrid};
pub use scenario::{ContextMode, JointAction, Scenario};
pub use mdr::{social_force_mdr, zero_mdr, LaneSpec, MdrSpec, SocialForceConfig};
pub use planner::{
    candidate_grid, evaluate_candidates, select_action, AggregateKind, AggregationPolicy, CandidateEvaluation,
    Selection,
};
