//! Moves de rigueur: the expected action of each agent given only the initial
//! state. Two policies are provided, the zero-acceleration default and a
//! social-force policy with optional lane attraction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FearError, Result};
use crate::geom::Vec2;
use crate::kinematics::{Action, AgentInit};
use crate::scenario::{JointAction, Scenario};

/// Distance assigned to an agent's separation from itself.
const SELF_DISTANCE: f64 = 1e-5;

/// Lane centre line `y(x) = c0 + c1 x + c2 x² + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneSpec {
    pub coefficients: Vec<f64>,
}

impl LaneSpec {
    pub fn horizontal(y: f64) -> Self {
        Self { coefficients: vec![y] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(invalid("lane", "needs at least one coefficient"));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(FearError::NonFinite("lane coefficients"));
        }
        Ok(())
    }

    pub fn y_at(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, &c)| acc * x + n as f64 * c)
    }
}

fn default_k() -> f64 {
    2.0
}
fn default_threshold_distance() -> f64 {
    6.0
}
fn default_buffer() -> f64 {
    1.0
}
fn default_threshold_a() -> f64 {
    2.0
}
fn default_k_v() -> f64 {
    0.5
}
fn default_time_per_step() -> f64 {
    1.0
}
fn default_threshold_velocity() -> f64 {
    5.0
}
fn default_k_lane() -> f64 {
    1.0
}
fn default_lane_kp() -> f64 {
    3.0
}
fn default_lane_kd() -> f64 {
    3.5
}

/// Parameters of the social-force policy.
///
/// `desired_velocity` and `lanes` are per agent; an empty list means "use the
/// initial velocity" and "no lanes" respectively. `lane_kp` and `lane_kd` are
/// the gains of the lane-keeping controller; the defaults are close to
/// critically damped and settle a displaced agent within about 4 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialForceConfig {
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_threshold_distance")]
    pub threshold_distance: f64,
    #[serde(default = "default_buffer")]
    pub buffer: f64,
    #[serde(default = "default_threshold_a")]
    pub threshold_a: f64,
    #[serde(default = "default_k_v")]
    pub k_v: f64,
    #[serde(default)]
    pub restore_factor: f64,
    #[serde(default = "default_time_per_step")]
    pub time_per_step: f64,
    #[serde(default = "default_threshold_velocity")]
    pub threshold_velocity: f64,
    #[serde(default)]
    pub desired_velocity: Vec<Vec2>,
    #[serde(default)]
    pub lanes: Vec<Option<LaneSpec>>,
    #[serde(default = "default_k_lane")]
    pub k_lane: f64,
    #[serde(default = "default_lane_kp")]
    pub lane_kp: f64,
    #[serde(default = "default_lane_kd")]
    pub lane_kd: f64,
}

impl Default for SocialForceConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            threshold_distance: default_threshold_distance(),
            buffer: default_buffer(),
            threshold_a: default_threshold_a(),
            k_v: default_k_v(),
            restore_factor: 0.0,
            time_per_step: default_time_per_step(),
            threshold_velocity: default_threshold_velocity(),
            desired_velocity: Vec::new(),
            lanes: Vec::new(),
            k_lane: default_k_lane(),
            lane_kp: default_lane_kp(),
            lane_kd: default_lane_kd(),
        }
    }
}

impl SocialForceConfig {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.k,
            self.threshold_distance,
            self.buffer,
            self.threshold_a,
            self.k_v,
            self.restore_factor,
            self.time_per_step,
            self.threshold_velocity,
            self.k_lane,
            self.lane_kp,
            self.lane_kd,
        ];
        if scalars.iter().any(|v| !v.is_finite()) {
            return Err(FearError::NonFinite("social force config"));
        }
        if self.buffer < 0.0 {
            return Err(invalid("buffer", "must be non-negative"));
        }
        if self.threshold_distance <= self.buffer {
            return Err(invalid("threshold_distance", "must exceed buffer"));
        }
        if self.threshold_a <= 0.0 {
            return Err(invalid("threshold_a", "must be positive"));
        }
        if self.time_per_step <= 0.0 {
            return Err(invalid("time_per_step", "must be positive"));
        }
        if self.threshold_velocity < 0.0 {
            return Err(invalid("threshold_velocity", "must be non-negative"));
        }
        if self.k_lane < 0.0 {
            return Err(invalid("k_lane", "must be non-negative"));
        }
        if self.desired_velocity.iter().any(|v| !v.is_finite()) {
            return Err(FearError::NonFinite("desired_velocity"));
        }
        for lane in self.lanes.iter().flatten() {
            lane.validate()?;
        }
        Ok(())
    }

    fn check_lengths(&self, k: usize) -> Result<()> {
        if !self.desired_velocity.is_empty() && self.desired_velocity.len() != k {
            return Err(invalid(
                "desired_velocity",
                format!("has {} entries for {k} agents", self.desired_velocity.len()),
            ));
        }
        if !self.lanes.is_empty() && self.lanes.len() != k {
            return Err(invalid("lanes", format!("has {} entries for {k} agents", self.lanes.len())));
        }
        Ok(())
    }
}

/// Which policy produces the moves de rigueur.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "social_force")]
pub enum MdrSpec {
    #[default]
    Zero,
    SocialForce(SocialForceConfig),
}

impl MdrSpec {
    pub fn compute(&self, scenario: &Scenario) -> Result<JointAction> {
        match self {
            MdrSpec::Zero => Ok(zero_mdr(scenario)),
            MdrSpec::SocialForce(config) => social_force_mdr(scenario, config),
        }
    }
}

/// Magnitude and `atan2` angle; the zero vector maps to `(0, 0)`.
pub fn vector_to_mag_angle(v: Vec2) -> (f64, f64) {
    let m = v.norm();
    if m == 0.0 {
        (0.0, 0.0)
    } else {
        (m, v.y.atan2(v.x))
    }
}

/// Net social acceleration per agent and the clamped pairwise distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialForce {
    pub accelerations: Vec<Vec2>,
    pub distances: Vec<Vec<f64>>,
}

/// Pairwise contribution to agent `i` from agent `j`, before summation.
fn pair_acceleration(pi: Vec2, pj: Vec2, distance: f64, config: &SocialForceConfig) -> Vec2 {
    let delta = pi - pj;
    let separation = delta.norm();
    if distance > config.threshold_distance || separation == 0.0 {
        return Vec2::ZERO;
    }
    let gap = distance - config.buffer;
    // The separation is divided by the buffer-clamped distance, so overlapping
    // agents get a shortened "unit" vector, as in the reference algorithm.
    let magnitude = config.k * (separation / distance) / (gap * gap);
    let a = if magnitude.is_finite() {
        magnitude.clamp(0.0, config.threshold_a)
    } else {
        config.threshold_a
    };
    delta * (a / separation)
}

pub fn social_force_acceleration(positions: &[Vec2], config: &SocialForceConfig) -> SocialForce {
    let k = positions.len();
    let mut distances = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            distances[i][j] = if i == j {
                SELF_DISTANCE
            } else {
                (positions[i] - positions[j]).norm().max(config.buffer)
            };
        }
    }
    let accelerations = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .fold(Vec2::ZERO, |acc, j| {
                    acc + pair_acceleration(positions[i], positions[j], distances[i][j], config)
                })
        })
        .collect();
    SocialForce { accelerations, distances }
}

/// Every agent keeps its current velocity.
pub fn zero_mdr(scenario: &Scenario) -> JointAction {
    JointAction::new(vec![Action::ZERO; scenario.agent_count()])
}

/// Lane-keeping pull: a PD law on the offset to the lane along its normal.
pub fn accelerate_to_lane(init: &AgentInit, lane: &LaneSpec, config: &SocialForceConfig) -> Action {
    let x = init.position.x;
    let slope = lane.slope_at(x);
    let scale = (1.0 + slope * slope).sqrt();
    let normal = Vec2::new(-slope / scale, 1.0 / scale);
    let offset = (lane.y_at(x) - init.position.y) / scale;
    let lateral_velocity = init.velocity.dot(normal);
    let pull = normal * (config.lane_kp * offset - config.lane_kd * lateral_velocity);
    let (a, theta) = vector_to_mag_angle(pull);
    Action {
        magnitude: a.min(config.threshold_a),
        direction: theta,
    }
}

/// Social-force accelerations, desired-velocity tracking, a speed clamp from
/// the nearest neighbour, lane attraction, and a final clip to `a_max`.
pub fn social_force_mdr(scenario: &Scenario, config: &SocialForceConfig) -> Result<JointAction> {
    config.validate()?;
    let k = scenario.agent_count();
    config.check_lengths(k)?;
    let agents = &scenario.agents;
    let tps = config.time_per_step;

    let positions: Vec<Vec2> = agents.iter().map(|a| a.position).collect();
    let social = social_force_acceleration(&positions, config);

    let actions = (0..k)
        .map(|i| {
            let v0 = agents[i].velocity;
            let desired = config.desired_velocity.get(i).copied().unwrap_or(v0);
            let a_social = social.accelerations[i];
            let dv = v0 - a_social * tps;
            let a = a_social + dv * config.restore_factor + (desired - v0) * config.k_v;
            let v = v0 + a * tps;

            let min_distance = (0..k)
                .filter(|&j| j != i)
                .map(|j| social.distances[i][j])
                .fold(f64::INFINITY, f64::min);
            let v_max = ((min_distance / 2.0 - config.buffer / 2.0) / tps).min(config.threshold_velocity);
            let (speed, heading) = vector_to_mag_angle(v);
            let v = Vec2::from_polar(speed.clamp(0.0, v_max.max(0.0)), heading);
            let mut a = (v - v0) * (1.0 / tps);

            if let Some(Some(lane)) = config.lanes.get(i) {
                let pull = accelerate_to_lane(&agents[i], lane, config).cartesian();
                a = (a + pull * config.k_lane) * (1.0 / (1.0 + config.k_lane));
            }

            let (m, theta) = vector_to_mag_angle(a);
            if !m.is_finite() {
                return Err(FearError::NonFinite("social force action"));
            }
            Ok(Action {
                magnitude: m.min(scenario.a_max),
                direction: theta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointAction::new(actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::TimeGrid;
    use std::f64::consts::PI;

    fn scenario(agents: Vec<AgentInit>) -> Scenario {
        Scenario::new(agents, vec![], TimeGrid::new(5.0, 20).unwrap(), 4.0).unwrap()
    }

    fn agent(x: f64, y: f64, vx: f64, vy: f64) -> AgentInit {
        AgentInit::new(Vec2::new(x, y), Vec2::new(vx, vy), 1.0).unwrap()
    }

    #[test]
    fn mag_angle_conventions() {
        assert_eq!(vector_to_mag_angle(Vec2::ZERO), (0.0, 0.0));
        assert_eq!(vector_to_mag_angle(Vec2::new(3.0, 4.0)), (5.0, 4f64.atan2(3.0)));
        assert_eq!(vector_to_mag_angle(Vec2::new(-1.0, 0.0)), (1.0, PI));
    }

    #[test]
    fn lone_agent_feels_nothing() {
        let f = social_force_acceleration(&[Vec2::new(1.0, 2.0)], &SocialForceConfig::default());
        assert_eq!(f.accelerations, vec![Vec2::ZERO]);
    }

    #[test]
    fn pair_forces_are_opposite() {
        let cfg = SocialForceConfig::default();
        let f = social_force_acceleration(&[Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0)], &cfg);
        let (a, b) = (f.accelerations[0], f.accelerations[1]);
        assert!(a.x < 0.0 && b.x > 0.0);
        assert_eq!(a.x, -b.x);
        assert_eq!(a.y, 0.0);
        // k / (d - buffer)^2 = 2 / 4
        assert!((b.x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn beyond_threshold_is_zero() {
        let cfg = SocialForceConfig::default();
        let f = social_force_acceleration(&[Vec2::new(0.0, 0.0), Vec2::new(6.5, 0.0)], &cfg);
        assert_eq!(f.accelerations, vec![Vec2::ZERO, Vec2::ZERO]);
    }

    #[test]
    fn close_pairs_saturate_at_threshold() {
        let cfg = SocialForceConfig::default();
        let f = social_force_acceleration(&[Vec2::new(0.0, 0.0), Vec2::new(0.2, 0.0)], &cfg);
        assert_eq!(f.accelerations[1].x, cfg.threshold_a);
    }

    #[test]
    fn isolated_agent_at_desired_velocity_does_nothing() {
        let s = scenario(vec![agent(0.0, 0.0, 1.5, -0.5)]);
        let mdr = social_force_mdr(&s, &SocialForceConfig::default()).unwrap();
        assert_eq!(mdr[0].magnitude, 0.0);
    }

    #[test]
    fn desired_velocity_is_tracked() {
        let s = scenario(vec![agent(0.0, 0.0, 0.0, 0.0)]);
        let cfg = SocialForceConfig {
            desired_velocity: vec![Vec2::new(2.0, 0.0)],
            ..Default::default()
        };
        let mdr = social_force_mdr(&s, &cfg).unwrap();
        assert!((mdr[0].magnitude - 1.0).abs() < 1e-12);
        assert_eq!(mdr[0].direction, 0.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = scenario(vec![agent(0.0, 0.0, 0.0, 0.0)]);
        let cfg = SocialForceConfig {
            desired_velocity: vec![Vec2::ZERO; 2],
            ..Default::default()
        };
        assert!(social_force_mdr(&s, &cfg).is_err());
    }

    #[test]
    fn zero_policy_round_trips() {
        let s = scenario(vec![agent(0.0, 0.0, 0.0, 0.0); 3]);
        let z = zero_mdr(&s);
        assert_eq!(z.len(), 3);
        assert!(z.iter().all(|a| *a == Action::ZERO));
        let text = serde_json::to_string(&z).unwrap();
        assert_eq!(serde_json::from_str::<JointAction>(&text).unwrap(), z);
        let spec: MdrSpec = serde_json::from_str(r#"{"policy":"zero"}"#).unwrap();
        assert_eq!(spec, MdrSpec::Zero);
    }

    #[test]
    fn lane_pull_signs() {
        let cfg = SocialForceConfig::default();
        let on = accelerate_to_lane(&agent(3.0, 1.0, 2.0, 0.0), &LaneSpec::horizontal(1.0), &cfg);
        assert_eq!(on.magnitude, 0.0);
        let above = accelerate_to_lane(&agent(0.0, 2.0, 0.0, 0.0), &LaneSpec::horizontal(0.0), &cfg);
        assert!(above.magnitude > 0.0);
        assert!((above.direction + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lane_polynomial_evaluation() {
        let lane = LaneSpec { coefficients: vec![1.0, -2.0, 0.5] };
        assert_eq!(lane.y_at(2.0), 1.0 - 4.0 + 2.0);
        assert_eq!(lane.slope_at(2.0), -2.0 + 2.0);
    }
}
