//! Standalone SVG output: scenes, resolved trajectories, polar feasibility
//! grids and planner heatmaps. Output is deterministic for identical input.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::collision::ResolvedTrajectories;
use crate::feasibility::{ActionPartition, FeasibilityGrid};
use crate::geom::{Aabb, Vec2};
use crate::planner::{AggregateKind, CandidateEvaluation, Selection};
use crate::scenario::Scenario;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const STYLE: &str = "\
.agent{fill-opacity:0.35;stroke-width:1.5}\
.arrow{stroke-width:2;marker-end:url(#head)}\
.obstacle{fill:#555;stroke:#222}\
.hull{fill-opacity:0.08;stroke-opacity:0.4;stroke-width:0.6}\
.feasible{fill:#7fc97f;stroke:#fff;stroke-width:0.5}\
.infeasible{fill:#d9d9d9;stroke:#fff;stroke-width:0.5}\
.cell{stroke:#fff;stroke-width:0.4}\
.collision{stroke:#c00;stroke-width:1.5}\
.selected{fill:#fff;stroke:#000;stroke-width:1.5}\
text{font-family:sans-serif;font-size:12px}";

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\
<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">\
<path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs><style>{STYLE}</style>\
<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n",
        w = num(width),
        h = num(height)
    );
}

/// World-to-canvas mapping with the y axis pointing up.
struct View {
    min: Vec2,
    scale: f64,
    height: f64,
    margin: f64,
}

impl View {
    fn fit(bounds: Aabb, size: f64) -> Self {
        let margin = 20.0;
        let w = (bounds.max.x - bounds.min.x).max(1e-6);
        let h = (bounds.max.y - bounds.min.y).max(1e-6);
        let scale = (size - 2.0 * margin) / w.max(h);
        Self {
            min: bounds.min,
            scale,
            height: h * scale + 2.0 * margin,
            margin,
        }
    }

    fn width_for(&self, bounds: &Aabb) -> f64 {
        (bounds.max.x - bounds.min.x).max(1e-6) * self.scale + 2.0 * self.margin
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            self.margin + (p.x - self.min.x) * self.scale,
            self.height - self.margin - (p.y - self.min.y) * self.scale,
        )
    }

    fn points(&self, pts: &[Vec2]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{},{}", num(x), num(y))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn scene_bounds(scenario: &Scenario, extra: &[Vec2]) -> Aabb {
    let mut pts: Vec<Vec2> = Vec::new();
    for a in &scenario.agents {
        let h = a.box_side / 2.0;
        pts.push(a.position - Vec2::new(h, h));
        pts.push(a.position + Vec2::new(h, h));
        pts.push(a.position + a.velocity);
    }
    for o in &scenario.obstacles {
        pts.extend_from_slice(o.vertices());
    }
    pts.extend_from_slice(extra);
    let b = Aabb::of(&pts);
    let pad = 0.5;
    Aabb {
        min: b.min - Vec2::new(pad, pad),
        max: b.max + Vec2::new(pad, pad),
    }
}

fn draw_obstacles(out: &mut String, view: &View, scenario: &Scenario) {
    for o in &scenario.obstacles {
        let _ = writeln!(out, "<polygon class=\"obstacle\" points=\"{}\"/>", view.points(o.vertices()));
    }
}

fn draw_agents(out: &mut String, view: &View, scenario: &Scenario, positions: &[Vec2]) {
    for (i, (a, &p)) in scenario.agents.iter().zip(positions).enumerate() {
        let h = a.box_side / 2.0;
        let (x, y) = view.map(p + Vec2::new(-h, h));
        let side = a.box_side * view.scale;
        let c = colour(i);
        let _ = writeln!(
            out,
            "<rect class=\"agent\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{c}\" stroke=\"{c}\"/>",
            num(x),
            num(y),
            num(side),
            num(side)
        );
        let (cx, cy) = view.map(p);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
            num(cx),
            num(cy),
            i + 1
        );
    }
}

fn draw_arrows(out: &mut String, view: &View, scenario: &Scenario) {
    for (i, a) in scenario.agents.iter().enumerate() {
        let (x1, y1) = view.map(a.position);
        let (x2, y2) = view.map(a.position + a.velocity);
        let c = colour(i);
        let _ = writeln!(
            out,
            "<line class=\"arrow\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{c}\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }
}

/// Agents as boxes with velocity arrows (one metre of arrow per m/s).
pub fn render_scene(scenario: &Scenario) -> String {
    let bounds = scene_bounds(scenario, &[]);
    let view = View::fit(bounds, 600.0);
    let mut out = String::new();
    header(&mut out, view.width_for(&bounds), view.height);
    draw_obstacles(&mut out, &view, scenario);
    let positions: Vec<Vec2> = scenario.agents.iter().map(|a| a.position).collect();
    draw_agents(&mut out, &view, scenario, &positions);
    draw_arrows(&mut out, &view, scenario);
    out.push_str("</svg>\n");
    out
}

/// Per-interval trajectory hulls, the final boxes, and collision markers.
pub fn render_trajectories(scenario: &Scenario, resolved: &ResolvedTrajectories) -> String {
    let extra: Vec<Vec2> = resolved
        .interval_hulls
        .iter()
        .flatten()
        .flat_map(|h| h.vertices().iter().copied())
        .collect();
    let bounds = scene_bounds(scenario, &extra);
    let view = View::fit(bounds, 600.0);
    let mut out = String::new();
    header(&mut out, view.width_for(&bounds), view.height);
    draw_obstacles(&mut out, &view, scenario);
    for (i, hulls) in resolved.interval_hulls.iter().enumerate() {
        let c = colour(i);
        for h in hulls {
            let _ = writeln!(
                out,
                "<polygon class=\"hull\" fill=\"{c}\" stroke=\"{c}\" points=\"{}\"/>",
                view.points(h.vertices())
            );
        }
    }
    let finals: Vec<Vec2> = (0..resolved.agent_count()).map(|i| resolved.final_pose(i)).collect();
    draw_agents(&mut out, &view, scenario, &finals);
    for (i, &hit) in resolved.collided.iter().enumerate() {
        if hit {
            let (x, y) = view.map(finals[i]);
            cross(&mut out, x, y, 6.0);
        }
    }
    out.push_str("</svg>\n");
    out
}

fn cross(out: &mut String, x: f64, y: f64, r: f64) {
    let _ = writeln!(
        out,
        "<path class=\"collision\" d=\"M{},{} L{},{} M{},{} L{},{}\"/>",
        num(x - r),
        num(y - r),
        num(x + r),
        num(y + r),
        num(x - r),
        num(y + r),
        num(x + r),
        num(y - r)
    );
}

/// Annular sector between radii `r0..r1` and angles `t0..t1` (math convention,
/// canvas y down) centred at `(cx, cy)`.
fn sector_path(cx: f64, cy: f64, r0: f64, r1: f64, t0: f64, t1: f64) -> String {
    let pt = |r: f64, t: f64| (cx + r * t.cos(), cy - r * t.sin());
    let large = if t1 - t0 > PI { 1 } else { 0 };
    let (ax, ay) = pt(r1, t0);
    let (bx, by) = pt(r1, t1);
    let (cx1, cy1) = pt(r0, t1);
    let (dx, dy) = pt(r0, t0);
    let mut d = format!(
        "M{},{} A{},{} 0 {large} 0 {},{} L{},{}",
        num(ax),
        num(ay),
        num(r1),
        num(r1),
        num(bx),
        num(by),
        num(cx1),
        num(cy1)
    );
    if r0 > 0.0 {
        let _ = write!(d, " A{},{} 0 {large} 1 {},{}", num(r0), num(r0), num(dx), num(dy));
    } else {
        let _ = write!(d, " L{},{}", num(dx), num(dy));
    }
    d.push_str(" Z");
    d
}

struct Polar {
    cx: f64,
    cy: f64,
    radius: f64,
}

impl Polar {
    fn new() -> Self {
        Self {
            cx: 220.0,
            cy: 220.0,
            radius: 190.0,
        }
    }

    fn axes(&self, out: &mut String, a_max: f64) {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">a_max = {} m/s²</text>",
            num(self.cx + self.radius - 60.0),
            num(self.cy + self.radius + 22.0),
            num(a_max)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">θ = 0</text>",
            num(self.cx + self.radius + 4.0),
            num(self.cy + 4.0)
        );
    }
}

/// One annular sector per action subset, class `feasible` or `infeasible`.
pub fn render_feasibility(grid: &FeasibilityGrid) -> String {
    let p = grid.partition;
    let polar = Polar::new();
    let mut out = String::new();
    header(&mut out, 2.0 * polar.cx, 2.0 * polar.cy + 20.0);
    let _ = writeln!(
        out,
        "<text x=\"10\" y=\"16\">agent {}: V = {} ({} of {} subsets)</text>",
        grid.affected + 1,
        num(grid.hypervolume),
        grid.feasible_count(),
        p.len()
    );
    for s in p.subsets() {
        let (a0, a1) = p.magnitude_range(s);
        let (t0, t1) = p.direction_range(s);
        let class = if grid.is_feasible(s) { "feasible" } else { "infeasible" };
        let r = |a: f64| a / p.a_max * polar.radius;
        let _ = writeln!(
            out,
            "<path class=\"{class}\" d=\"{}\"/>",
            sector_path(polar.cx, polar.cy, r(a0), r(a1), t0, t1)
        );
    }
    polar.axes(&mut out, p.a_max);
    out.push_str("</svg>\n");
    out
}

/// Diverging blue-white-red for values in `[-1, 1]`.
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Polar heatmap of the policy scalar over a magnitude-major candidate grid,
/// colliding candidates crossed out and the selection circled.
pub fn render_plan(
    evals: &[CandidateEvaluation],
    grid: ActionPartition,
    kind: AggregateKind,
    selection: Option<&Selection>,
) -> String {
    let polar = Polar::new();
    let mut out = String::new();
    header(&mut out, 2.0 * polar.cx, 2.0 * polar.cy + 20.0);
    let _ = writeln!(out, "<text x=\"10\" y=\"16\">{kind} FeAR per candidate</text>");
    let scale = match kind {
        AggregateKind::CountNet => evals.first().map_or(1.0, |e| (e.fear.len().max(2) - 1) as f64),
        _ => 1.0,
    };
    let r = |a: f64| a / grid.a_max * polar.radius;
    for (n, e) in evals.iter().enumerate().take(grid.len()) {
        let s = grid.subset(n);
        let (a0, a1) = grid.magnitude_range(s);
        let (t0, t1) = grid.direction_range(s);
        let value = kind.scalar(&e.aggregates);
        let _ = writeln!(
            out,
            "<path class=\"cell\" fill=\"{}\" d=\"{}\"><title>a={} theta={} {kind}={}</title></path>",
            diverging(value / scale),
            sector_path(polar.cx, polar.cy, r(a0), r(a1), t0, t1),
            num(e.candidate.magnitude),
            num(e.candidate.direction),
            num(value)
        );
    }
    let at = |e: &CandidateEvaluation| {
        let rr = r(e.candidate.magnitude);
        let t = e.candidate.direction;
        (polar.cx + rr * t.cos(), polar.cy - rr * t.sin())
    };
    for e in evals.iter().filter(|e| e.ego_collides) {
        let (x, y) = at(e);
        cross(&mut out, x, y, 3.0);
    }
    if let Some(sel) = selection {
        let (x, y) = at(&evals[sel.index]);
        let _ = writeln!(out, "<circle class=\"selected\" cx=\"{}\" cy=\"{}\" r=\"4\"/>", num(x), num(y));
    }
    polar.axes(&mut out, grid.a_max);
    out.push_str("</svg>\n");
    out
}
