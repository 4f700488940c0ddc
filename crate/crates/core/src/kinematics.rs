//! Constant-acceleration kinematics over a discretised time window.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FearError, Result};
use crate::geom::{convex_hull, square_corners, ConvexPolygon, Vec2};

/// Initial state of one agent: pose, velocity and square bounding-box side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentInit {
    pub position: Vec2,
    pub velocity: Vec2,
    pub box_side: f64,
}

impl AgentInit {
    pub fn new(position: Vec2, velocity: Vec2, box_side: f64) -> Result<Self> {
        if !position.is_finite() || !velocity.is_finite() {
            return Err(FearError::NonFinite("agent state"));
        }
        if !(box_side > 0.0) || !box_side.is_finite() {
            return Err(invalid("box_side", format!("must be positive, got {box_side}")));
        }
        Ok(Self {
            position,
            velocity,
            box_side,
        })
    }
}

/// Polar acceleration held constant over the window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    /// m/s², non-negative.
    #[serde(rename = "a")]
    pub magnitude: f64,
    /// Radians in [-π, π].
    #[serde(rename = "theta")]
    pub direction: f64,
}

impl Action {
    pub const ZERO: Action = Action {
        magnitude: 0.0,
        direction: 0.0,
    };

    pub fn new(magnitude: f64, direction: f64) -> Result<Self> {
        let a = Self {
            magnitude,
            direction,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.magnitude.is_finite() || !self.direction.is_finite() {
            return Err(FearError::NonFinite("action"));
        }
        if self.magnitude < 0.0 {
            return Err(invalid("action.a", format!("negative magnitude {}", self.magnitude)));
        }
        if !(-PI..=PI).contains(&self.direction) {
            return Err(invalid(
                "action.theta",
                format!("{} rad is outside [-pi, pi] (angles are radians)", self.direction),
            ));
        }
        Ok(())
    }

    /// Cartesian acceleration vector.
    pub fn cartesian(&self) -> Vec2 {
        Vec2::from_polar(self.magnitude, self.direction)
    }
}

/// Uniform partition of `[0, horizon]` into `intervals` pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    intervals: usize,
}

pub const DEFAULT_INTERVALS: usize = 20;

impl TimeGrid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid("T", format!("horizon must be positive, got {horizon}")));
        }
        if intervals == 0 {
            return Err(invalid("N_t", "at least one interval is required"));
        }
        Ok(Self { horizon, intervals })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    /// Time of boundary `k` in `0..=intervals`; the last one is exactly `T`.
    pub fn boundary(&self, k: usize) -> f64 {
        if k == self.intervals {
            self.horizon
        } else {
            k as f64 * self.horizon / self.intervals as f64
        }
    }

    /// Checked position lookup inside the window.
    pub fn position(&self, init: &AgentInit, action: Action, t: f64) -> Result<Vec2> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(FearError::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(nominal_position(init, action, t))
    }
}

/// `p0 + v0 t + ½ a t²`, ignoring collisions.
pub fn nominal_position(init: &AgentInit, action: Action, t: f64) -> Vec2 {
    position_with_accel(init, action.cartesian(), t)
}

pub(crate) fn position_with_accel(init: &AgentInit, accel: Vec2, t: f64) -> Vec2 {
    init.position + init.velocity * t + accel * (0.5 * t * t)
}

/// Positions at every interval boundary `0, δt, …, T`.
pub fn nominal_trajectory(init: &AgentInit, action: Action, grid: &TimeGrid) -> Vec<Vec2> {
    let accel = action.cartesian();
    (0..=grid.intervals())
        .map(|k| position_with_accel(init, accel, grid.boundary(k)))
        .collect()
}

/// Convex hull of the two axis-aligned boxes at the interval endpoints.
pub fn trajectory_hull(pose_start: Vec2, pose_end: Vec2, box_side: f64) -> ConvexPolygon {
    let a = square_corners(pose_start, box_side);
    let b = square_corners(pose_end, box_side);
    let pts = [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]];
    convex_hull(&pts).expect("eight finite corners")
}
