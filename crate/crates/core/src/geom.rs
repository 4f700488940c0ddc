//! 2D convex geometry: points, convex hulls, and closed-set intersection tests.
//!
//! Every collision check in the crate reduces to [`polygons_intersect`] between
//! two [`ConvexPolygon`]s. Polygons may be degenerate (a single point or a
//! segment); the separating-axis test handles those as closed sets too.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FearError, Result};

/// Tolerance for collinearity and separation, in scene units.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    /// Unchecked constructor; callers working from validated data only.
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(FearError::NonFinite("Vec2"))
        }
    }

    pub fn from_polar(magnitude: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(magnitude * c, magnitude * s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box, used as a cheap reject before SAT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn of(points: &[Vec2]) -> Aabb {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Aabb { min, max }
    }

    /// Closed overlap with the separation tolerance applied.
    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x - o.max.x <= GEOM_EPS
            && o.min.x - self.max.x <= GEOM_EPS
            && self.min.y - o.max.y <= GEOM_EPS
            && o.min.y - self.max.y <= GEOM_EPS
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn empty() -> Aabb {
        Aabb {
            min: Vec2::new(f64::INFINITY, f64::INFINITY),
            max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Point,
    Segment,
    None,
}

/// Strictly convex polygon with counter-clockwise vertices.
///
/// One or two vertices encode a degenerate point or segment hull.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
    aabb: Aabb,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    pub fn degeneracy(&self) -> Degeneracy {
        match self.vertices.len() {
            1 => Degeneracy::Point,
            2 => Degeneracy::Segment,
            _ => Degeneracy::None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy() != Degeneracy::None
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            twice += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * twice
    }

    /// Closed point membership, with the separation tolerance.
    pub fn contains(&self, p: Vec2) -> bool {
        polygons_intersect(self, &point_polygon(p))
    }

    pub fn translated(&self, by: Vec2) -> ConvexPolygon {
        let vertices: Vec<Vec2> = self.vertices.iter().map(|&v| v + by).collect();
        let aabb = Aabb::of(&vertices);
        ConvexPolygon { vertices, aabb }
    }

    /// Hulls `points` and rejects inputs that were not already convex, i.e.
    /// any distinct input point lying strictly inside the hull.
    pub fn from_convex_vertices(points: &[Vec2]) -> Result<ConvexPolygon> {
        let hull = convex_hull(points)?;
        if hull.is_degenerate() {
            return Err(invalid("polygon", "fewer than 3 non-collinear vertices"));
        }
        let n = hull.vertices.len();
        for &p in points {
            let on_boundary = (0..n).any(|i| {
                let a = hull.vertices[i];
                let b = hull.vertices[(i + 1) % n];
                let len = (b - a).norm();
                len > 0.0 && ((b - a).cross(p - a) / len).abs() <= GEOM_EPS
            });
            if !on_boundary {
                return Err(invalid("polygon", "vertices are not in convex position"));
            }
        }
        Ok(hull)
    }
}

fn point_polygon(p: Vec2) -> ConvexPolygon {
    ConvexPolygon {
        vertices: vec![p],
        aabb: Aabb { min: p, max: p },
    }
}

/// Andrew's monotone chain. Output is counter-clockwise, starting at the
/// lowest-x (then lowest-y) vertex, with collinear vertices dropped.
pub fn convex_hull(points: &[Vec2]) -> Result<ConvexPolygon> {
    if points.is_empty() {
        return Err(FearError::EmptyPointSet);
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(FearError::NonFinite("convex_hull input"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() <= GEOM_EPS && (a.y - b.y).abs() <= GEOM_EPS);
    if pts.len() < 3 {
        return Ok(finish(pts));
    }

    // Pop while the turn o -> a -> p is not strictly left by more than the
    // tolerance, measured as the distance of p from line (o, a).
    fn keeps_left(o: Vec2, a: Vec2, p: Vec2) -> bool {
        let d = a - o;
        d.cross(p - o) > GEOM_EPS * d.norm()
    }

    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && !keeps_left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && !keeps_left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        // All collinear: keep the two extreme points.
        let first = pts[0];
        let last = pts[pts.len() - 1];
        return Ok(finish(vec![first, last]));
    }
    Ok(finish(hull))
}

fn finish(vertices: Vec<Vec2>) -> ConvexPolygon {
    let aabb = Aabb::of(&vertices);
    ConvexPolygon { vertices, aabb }
}

/// Axis-aligned square of side `side` centred on `center`.
pub fn bounding_box(center: Vec2, side: f64) -> Result<ConvexPolygon> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(invalid("side", format!("must be positive and finite, got {side}")));
    }
    if !center.is_finite() {
        return Err(FearError::NonFinite("bounding_box center"));
    }
    Ok(square(center, side))
}

pub(crate) fn square(center: Vec2, side: f64) -> ConvexPolygon {
    let h = 0.5 * side;
    finish(vec![
        Vec2::new(center.x - h, center.y - h),
        Vec2::new(center.x + h, center.y - h),
        Vec2::new(center.x + h, center.y + h),
        Vec2::new(center.x - h, center.y + h),
    ])
}

pub(crate) fn square_corners(center: Vec2, side: f64) -> [Vec2; 4] {
    let h = 0.5 * side;
    [
        Vec2::new(center.x - h, center.y - h),
        Vec2::new(center.x + h, center.y - h),
        Vec2::new(center.x + h, center.y + h),
        Vec2::new(center.x - h, center.y + h),
    ]
}

fn projection(vertices: &[Vec2], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vertices {
        let d = v.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

fn separated_on(axis: Vec2, p: &[Vec2], q: &[Vec2]) -> bool {
    let len = axis.norm();
    if len == 0.0 {
        return false;
    }
    let axis = axis * (1.0 / len);
    let (p_lo, p_hi) = projection(p, axis);
    let (q_lo, q_hi) = projection(q, axis);
    q_lo - p_hi > GEOM_EPS || p_lo - q_hi > GEOM_EPS
}

fn has_separating_edge(owner: &[Vec2], p: &[Vec2], q: &[Vec2]) -> bool {
    match owner.len() {
        0 | 1 => false,
        2 => {
            let d = owner[1] - owner[0];
            separated_on(d.perp(), p, q) || separated_on(d, p, q)
        }
        n => (0..n).any(|i| {
            let e = owner[(i + 1) % n] - owner[i];
            separated_on(e.perp(), p, q)
        }),
    }
}

/// True iff the two closed convex regions share at least one point.
/// Boundary contact counts as intersection.
pub fn polygons_intersect(p: &ConvexPolygon, q: &ConvexPolygon) -> bool {
    if !p.aabb.overlaps(&q.aabb) {
        return false;
    }
    let (pv, qv) = (&p.vertices[..], &q.vertices[..]);
    // The coordinate axes cover point-vs-point; AABB overlap already checked them.
    !(has_separating_edge(pv, pv, qv) || has_separating_edge(qv, pv, qv))
}
