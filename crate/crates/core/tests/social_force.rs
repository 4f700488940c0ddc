mod common;

use std::f64::consts::PI;

use common::rng;
use fear_core::mdr::{accelerate_to_lane, social_force_acceleration};
use fear_core::{
    social_force_mdr, AgentInit, LaneSpec, Scenario, SocialForceConfig, TimeGrid, Vec2,
};
use rand::Rng;

/// Closed-loop simulation of the lane controller with a fine Euler step.
/// Returns the final offset and the largest excursion past the lane, both as
/// fractions of the initial offset.
fn settle(lane: &LaneSpec, start: Vec2, velocity: Vec2, horizon: f64, cfg: &SocialForceConfig) -> (f64, f64) {
    let dt = 1e-3;
    let offset = |p: Vec2| lane.y_at(p.x) - p.y;
    let d0 = offset(start);
    let (mut p, mut v) = (start, velocity);
    let mut overshoot: f64 = 0.0;
    for _ in 0..(horizon / dt).round() as usize {
        let init = AgentInit::new(p, v, 1.0).unwrap();
        let a = accelerate_to_lane(&init, lane, cfg).cartesian();
        v = v + a * dt;
        p = p + v * dt;
        overshoot = overshoot.max(-offset(p) / d0);
    }
    ((offset(p) / d0).abs(), overshoot)
}

#[test]
fn lane_controller_settles_without_overshoot() {
    let cfg = SocialForceConfig::default();
    for d in [0.5, 1.0, 2.0, 3.0, 5.0, -1.0, -4.0] {
        let (rest, over) = settle(&LaneSpec::horizontal(0.0), Vec2::new(0.0, d), Vec2::ZERO, 4.0, &cfg);
        assert!(rest <= 0.05, "offset {d}: {:.1}% left after 4 s", 100.0 * rest);
        assert!(over <= 0.2, "offset {d}: overshoot {:.1}%", 100.0 * over);
    }
}

#[test]
fn lane_controller_tracks_a_gentle_slope_while_moving() {
    let cfg = SocialForceConfig::default();
    let lane = LaneSpec {
        coefficients: vec![1.0, 0.05],
    };
    let (rest, over) = settle(&lane, Vec2::new(0.0, 3.0), Vec2::new(1.0, 0.0), 4.0, &cfg);
    assert!(rest <= 0.05, "{:.1}% left", 100.0 * rest);
    assert!(over <= 0.2);
}

#[test]
fn equilateral_triangle_pushes_outward_equally() {
    let cfg = SocialForceConfig::default();
    for (side, angle) in [(3.0, 0.0), (4.0, 0.7), (2.5, -2.0)] {
        let c = Vec2::new(1.0, -2.0);
        let r = side / 3f64.sqrt();
        let pts: Vec<Vec2> = (0..3)
            .map(|k| c + Vec2::from_polar(r, angle + 2.0 * PI * k as f64 / 3.0))
            .collect();
        let gap: f64 = side - cfg.buffer;
        let pair = (cfg.k / (gap * gap)).min(cfg.threshold_a);
        let net = 2.0 * pair * (PI / 6.0).cos();
        let f = social_force_acceleration(&pts, &cfg);
        for (p, a) in pts.iter().zip(&f.accelerations) {
            let want = (*p - c) * (net / r);
            assert!((*a - want).norm() < 1e-9, "side {side}: {a:?} vs {want:?}");
        }
    }
}

#[test]
fn speed_clamp_bounds_the_first_step() {
    // Without lanes and with a generous a_max the clamp is the last word on
    // the velocity, so one step at that velocity must respect the budget.
    let mut r = rng(51);
    for _ in 0..200 {
        let k = r.gen_range(2..6);
        let agents: Vec<AgentInit> = (0..k)
            .map(|_| {
                AgentInit::new(
                    Vec2::new(r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0)),
                    Vec2::from_polar(r.gen_range(0.0..6.0), r.gen_range(-PI..PI)),
                    0.5,
                )
                .unwrap()
            })
            .collect();
        let s = Scenario::new(agents.clone(), vec![], TimeGrid::new(4.0, 10).unwrap(), 1e3).unwrap();
        let cfg = SocialForceConfig {
            time_per_step: r.gen_range(0.2..2.0),
            ..SocialForceConfig::default()
        };
        let mdr = social_force_mdr(&s, &cfg).unwrap();
        for (i, (init, action)) in agents.iter().zip(mdr.iter()).enumerate() {
            let min_d = agents
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| (o.position - init.position).norm().max(cfg.buffer))
                .fold(f64::INFINITY, f64::min);
            let budget = (min_d / 2.0 - cfg.buffer / 2.0).min(cfg.threshold_velocity * cfg.time_per_step);
            let v = init.velocity + action.cartesian() * cfg.time_per_step;
            let step = v.norm() * cfg.time_per_step;
            assert!(step <= budget.max(0.0) + 1e-9, "agent {i} moves {step} with budget {budget}");
        }
    }
}
