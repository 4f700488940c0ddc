//! The world state and the discretisation parameters shared by every computation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FearError, Result};
use crate::geom::ConvexPolygon;
use crate::kinematics::{Action, AgentInit, TimeGrid};

pub const DEFAULT_MAGNITUDE_BINS: usize = 16;
pub const DEFAULT_DIRECTION_BINS: usize = 32;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// How the other agents' trajectories are resolved when scoring agent `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// Resolve everyone except `j`; `j` neither causes nor suffers collisions.
    #[default]
    GhostAffected,
    /// Resolve everyone including `j`'s factual action, then drop `j`'s hulls.
    IncludeAffected,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub agents: Vec<AgentInit>,
    pub obstacles: Vec<ConvexPolygon>,
    pub grid: TimeGrid,
    pub a_max: f64,
    pub magnitude_bins: usize,
    pub direction_bins: usize,
    pub epsilon: f64,
    /// `None` selects automatically: on when the direction bin exceeds π/16.
    pub arc_refinement: Option<bool>,
    pub context_mode: ContextMode,
}

impl Scenario {
    pub fn new(
        agents: Vec<AgentInit>,
        obstacles: Vec<ConvexPolygon>,
        grid: TimeGrid,
        a_max: f64,
    ) -> Result<Self> {
        let s = Self {
            agents,
            obstacles,
            grid,
            a_max,
            magnitude_bins: DEFAULT_MAGNITUDE_BINS,
            direction_bins: DEFAULT_DIRECTION_BINS,
            epsilon: DEFAULT_EPSILON,
            arc_refinement: None,
            context_mode: ContextMode::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_partition(mut self, magnitude_bins: usize, direction_bins: usize) -> Result<Self> {
        self.magnitude_bins = magnitude_bins;
        self.direction_bins = direction_bins;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_arc_refinement(mut self, on: Option<bool>) -> Self {
        self.arc_refinement = on;
        self
    }

    pub fn with_context_mode(mut self, mode: ContextMode) -> Self {
        self.context_mode = mode;
        self
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn arc_refinement_enabled(&self) -> bool {
        self.arc_refinement
            .unwrap_or(2.0 * PI / self.direction_bins as f64 > PI / 16.0 + 1e-12)
    }

    pub fn check_agent(&self, index: usize) -> Result<()> {
        if index < self.agents.len() {
            Ok(())
        } else {
            Err(FearError::AgentIndex {
                index,
                count: self.agents.len(),
            })
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(invalid("agents", "at least one agent is required"));
        }
        if !(self.a_max > 0.0) || !self.a_max.is_finite() {
            return Err(invalid("a_max", format!("must be positive, got {}", self.a_max)));
        }
        if self.magnitude_bins < 1 {
            return Err(invalid("N_m", "must be at least 1"));
        }
        if self.direction_bins < 2 {
            return Err(invalid("N_d", "must be at least 2"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Checks a joint action against the agent count and `a_max`.
    pub fn check_joint(&self, joint: &JointAction) -> Result<()> {
        if joint.len() != self.agents.len() {
            return Err(FearError::JointActionLength {
                expected: self.agents.len(),
                actual: joint.len(),
            });
        }
        for (i, a) in joint.iter().enumerate() {
            a.validate()?;
            if a.magnitude > self.a_max * (1.0 + 1e-12) {
                return Err(FearError::ActionOutOfBounds {
                    agent: i,
                    magnitude: a.magnitude,
                    a_max: self.a_max,
                });
            }
        }
        Ok(())
    }
}

/// One action per agent, indexed like [`Scenario::agents`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointAction(pub Vec<Action>);

impl JointAction {
    pub fn new(actions: Vec<Action>) -> Self {
        Self(actions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Action> {
        self.0.get(i)
    }
}

impl std::ops::Index<usize> for JointAction {
    type Output = Action;
    fn index(&self, i: usize) -> &Action {
        &self.0[i]
    }
}

impl FromIterator<Action> for JointAction {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
