//! Planar vectors, boundary primitives (segments, elliptic and parabolic arcs)
//! and ray intersection.
//!
//! Conic arcs are clipped by a polar-angle window about a chosen center. Every
//! primitive carries the side of the billiard domain so that `normal_at` can
//! return the inward normal.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::decimal;

/// Smallest admissible ray parameter for a new hit.
pub const T_MIN: f64 = 1e-9;

/// Threshold on the discriminant of the monic quadratic below which a
/// ray-conic contact is treated as tangency and discarded.
pub const TANGENCY_EPS: f64 = 1e-12;

const CLIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    #[serde(with = "decimal")]
    pub x: f64,
    #[serde(with = "decimal")]
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `a` from the +x axis.
    pub fn from_angle(a: f64) -> Self {
        Vec2::new(a.cos(), a.sin())
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

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, a: f64) -> Vec2 {
        let (s, c) = a.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

/// Specular reflection of `v` in the line with unit normal `n`.
pub fn reflect(v: Vec2, n: Vec2) -> Vec2 {
    v - n * (2.0 * v.dot(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    pub dir: Vec2,
}

impl Ray {
    /// `dir` is normalized here.
    pub fn new(origin: Vec2, dir: Vec2) -> Self {
        Ray {
            origin,
            dir: dir.normalized(),
        }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.origin + self.dir * t
    }
}

/// Polar-angle window about `center`: directions from `start` sweeping
/// counter-clockwise by `sweep` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularClip {
    pub center: Vec2,
    #[serde(with = "decimal")]
    pub start: f64,
    #[serde(with = "decimal")]
    pub sweep: f64,
}

impl AngularClip {
    pub fn new(center: Vec2, start: f64, sweep: f64) -> Self {
        AngularClip {
            center,
            start,
            sweep,
        }
    }

    /// Window between two points, counter-clockwise from `from` to `to`.
    pub fn between(center: Vec2, from: Vec2, to: Vec2) -> Self {
        let a0 = (from - center).angle();
        let a1 = (to - center).angle();
        AngularClip {
            center,
            start: a0,
            sweep: (a1 - a0).rem_euclid(TAU),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let a = (p - self.center).angle();
        let rel = (a - self.start).rem_euclid(TAU);
        rel <= self.sweep + CLIP_SLACK || rel >= TAU - CLIP_SLACK
    }

    pub fn angle_at(&self, u: f64) -> f64 {
        self.start + u * self.sweep
    }
}

/// Straight segment; the billiard domain lies to the left of `start -> end`
/// when `domain_left` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Vec2,
    pub end: Vec2,
    pub domain_left: bool,
}

/// Arc of the ellipse with foci `focus1`, `focus2` and semi-major axis
/// `semi_major` (the focal distance sum is twice that).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseArc {
    pub focus1: Vec2,
    pub focus2: Vec2,
    #[serde(with = "decimal")]
    pub semi_major: f64,
    pub clip: AngularClip,
    pub domain_inside: bool,
}

/// Arc of the parabola `|q| + <q, axis> = focal_param`, `q = p - focus`.
/// `axis` is the unit vector from the focus toward the directrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolaArc {
    pub focus: Vec2,
    pub axis: Vec2,
    #[serde(with = "decimal")]
    pub focal_param: f64,
    pub clip: AngularClip,
    pub domain_inside: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Segment(Segment),
    EllipseArc(EllipseArc),
    ParabolaArc(ParabolaArc),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec2,
    /// Unit normal facing the incoming ray.
    pub normal: Vec2,
}

impl EllipseArc {
    fn frame(&self) -> (Vec2, Vec2, f64, f64) {
        let c = (self.focus1 + self.focus2) * 0.5;
        let d = self.focus2 - self.focus1;
        let e = d.norm() * 0.5;
        let u = if e > 0.0 {
            d / (2.0 * e)
        } else {
            Vec2::new(1.0, 0.0)
        };
        let b = (self.semi_major * self.semi_major - e * e).sqrt();
        (c, u, self.semi_major, b)
    }

    fn quadratic(&self, ray: &Ray) -> (f64, f64, f64) {
        let (c, u, a, b) = self.frame();
        let q = ray.origin - c;
        let ox = q.dot(u);
        let oy = u.cross(q);
        let dx = ray.dir.dot(u);
        let dy = u.cross(ray.dir);
        let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
        (
            dx * dx * ia + dy * dy * ib,
            2.0 * (ox * dx * ia + oy * dy * ib),
            ox * ox * ia + oy * oy * ib - 1.0,
        )
    }

    /// Value of the implicit function; negative inside.
    pub fn implicit(&self, p: Vec2) -> f64 {
        p.dist(self.focus1) + p.dist(self.focus2) - 2.0 * self.semi_major
    }

    fn outward_normal(&self, p: Vec2) -> Vec2 {
        ((p - self.focus1).normalized() + (p - self.focus2).normalized()).normalized()
    }
}

impl ParabolaArc {
    fn quadratic(&self, ray: &Ray) -> (f64, f64, f64) {
        let q0 = ray.origin - self.focus;
        let al = ray.dir.dot(self.axis);
        let be = self.focal_param - q0.dot(self.axis);
        (
            1.0 - al * al,
            2.0 * (q0.dot(ray.dir) + al * be),
            q0.norm_sq() - be * be,
        )
    }

    /// Value of the implicit function; negative on the focus side.
    pub fn implicit(&self, p: Vec2) -> f64 {
        let q = p - self.focus;
        q.norm() + q.dot(self.axis) - self.focal_param
    }

    fn outward_normal(&self, p: Vec2) -> Vec2 {
        ((p - self.focus).normalized() + self.axis).normalized()
    }
}

/// Roots of `a t^2 + b t + c = 0`, ascending. Near-tangent contacts are
/// dropped.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-14 {
        if b.abs() < 1e-300 {
            return vec![];
        }
        return vec![-c / b];
    }
    let bm = b / a;
    let cm = c / a;
    let disc = bm * bm - 4.0 * cm;
    if disc <= TANGENCY_EPS {
        return vec![];
    }
    let sq = disc.sqrt();
    // Cancellation-free pair.
    let q = -0.5 * (bm + bm.signum() * sq);
    let (mut r1, mut r2) = if q != 0.0 {
        (q, cm / q)
    } else {
        (0.5 * sq, -0.5 * sq)
    };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    vec![r1, r2]
}

impl Primitive {
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        match self {
            Primitive::Segment(s) => (s.start, s.end),
            _ => (self.point_at(0.0), self.point_at(1.0)),
        }
    }

    /// Point at fraction `u` in [0,1] along the primitive (polar angle for
    /// conic arcs).
    pub fn point_at(&self, u: f64) -> Vec2 {
        match self {
            Primitive::Segment(s) => s.start + (s.end - s.start) * u,
            Primitive::EllipseArc(e) => radial_point(self, e.clip, u),
            Primitive::ParabolaArc(p) => radial_point(self, p.clip, u),
        }
    }

    /// Dense polyline approximation.
    pub fn polyline(&self, n: usize) -> Vec<Vec2> {
        match self {
            Primitive::Segment(s) => vec![s.start, s.end],
            _ => (0..=n)
                .map(|k| self.point_at(k as f64 / n as f64))
                .collect(),
        }
    }

    /// Unit normal at `p` pointing into the billiard domain.
    pub fn normal_at(&self, p: Vec2) -> Vec2 {
        match self {
            Primitive::Segment(s) => {
                let n = (s.end - s.start).normalized().perp();
                if s.domain_left {
                    n
                } else {
                    -n
                }
            }
            Primitive::EllipseArc(e) => {
                let n = e.outward_normal(p);
                if e.domain_inside {
                    -n
                } else {
                    n
                }
            }
            Primitive::ParabolaArc(q) => {
                let n = q.outward_normal(p);
                if q.domain_inside {
                    -n
                } else {
                    n
                }
            }
        }
    }

    /// Nearest admissible hit with `t > t_min`. When `departing` is set the
    /// ray starts on this primitive: segments are skipped and, for conics,
    /// the root closest to zero (the departure point) is excluded.
    pub fn intersect(&self, ray: &Ray, t_min: f64, departing: bool) -> Option<Hit> {
        let t = match self {
            Primitive::Segment(s) => {
                if departing {
                    return None;
                }
                segment_param(ray, s.start, s.end)?
            }
            Primitive::EllipseArc(e) => {
                let (a, b, c) = e.quadratic(ray);
                pick_root(quadratic_roots(a, b, c), t_min, departing, |t| {
                    e.clip.contains(ray.at(t))
                })?
            }
            Primitive::ParabolaArc(q) => {
                let (a, b, c) = q.quadratic(ray);
                let al = ray.dir.dot(q.axis);
                let be = q.focal_param - (ray.origin - q.focus).dot(q.axis);
                pick_root(quadratic_roots(a, b, c), t_min, departing, |t| {
                    be - t * al >= -1e-12 && q.clip.contains(ray.at(t))
                })?
            }
        };
        if t <= t_min {
            return None;
        }
        let point = ray.at(t);
        let mut normal = self.normal_at(point);
        if normal.dot(ray.dir) > 0.0 {
            normal = -normal;
        }
        Some(Hit { t, point, normal })
    }

    /// Distance from `p` to the primitive, via its dense polyline for arcs.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let pts = self.polyline(512);
        pts.windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, k: f64) -> Primitive {
        match *self {
            Primitive::Segment(s) => Primitive::Segment(Segment {
                start: s.start * k,
                end: s.end * k,
                ..s
            }),
            Primitive::EllipseArc(e) => Primitive::EllipseArc(EllipseArc {
                focus1: e.focus1 * k,
                focus2: e.focus2 * k,
                semi_major: e.semi_major * k,
                clip: AngularClip {
                    center: e.clip.center * k,
                    ..e.clip
                },
                ..e
            }),
            Primitive::ParabolaArc(q) => Primitive::ParabolaArc(ParabolaArc {
                focus: q.focus * k,
                focal_param: q.focal_param * k,
                clip: AngularClip {
                    center: q.clip.center * k,
                    ..q.clip
                },
                ..q
            }),
        }
    }

    /// Mirror image in the vertical axis x = 0. Orientation flips, so the
    /// domain side of segments flips too.
    pub fn mirrored_x(&self) -> Primitive {
        let m = |v: Vec2| Vec2::new(-v.x, v.y);
        let mc = |c: AngularClip| AngularClip {
            center: m(c.center),
            start: (PI - c.start - c.sweep).rem_euclid(TAU),
            sweep: c.sweep,
        };
        match *self {
            Primitive::Segment(s) => Primitive::Segment(Segment {
                start: m(s.start),
                end: m(s.end),
                domain_left: !s.domain_left,
            }),
            Primitive::EllipseArc(e) => Primitive::EllipseArc(EllipseArc {
                focus1: m(e.focus1),
                focus2: m(e.focus2),
                clip: mc(e.clip),
                ..e
            }),
            Primitive::ParabolaArc(q) => Primitive::ParabolaArc(ParabolaArc {
                focus: m(q.focus),
                axis: m(q.axis),
                clip: mc(q.clip),
                ..q
            }),
        }
    }
}

fn pick_root(
    mut roots: Vec<f64>,
    t_min: f64,
    departing: bool,
    valid: impl Fn(f64) -> bool,
) -> Option<f64> {
    if departing && !roots.is_empty() {
        let k = if roots.len() == 2 && roots[1].abs() < roots[0].abs() {
            1
        } else {
            0
        };
        roots.remove(k);
    }
    roots
        .into_iter()
        .filter(|&t| t > t_min && valid(t))
        .fold(None, |acc: Option<f64>, t| match acc {
            Some(a) if a <= t => Some(a),
            _ => Some(t),
        })
}

fn segment_param(ray: &Ray, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let den = ray.dir.cross(e);
    if den.abs() < 1e-15 {
        return None;
    }
    let w = a - ray.origin;
    let t = w.cross(e) / den;
    let s = w.cross(ray.dir) / den;
    if (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

/// Point of a conic arc in polar direction `clip.angle_at(u)` from the clip
/// center; the center must lie inside the conic.
fn radial_point(prim: &Primitive, clip: AngularClip, u: f64) -> Vec2 {
    let ray = Ray::new(clip.center, Vec2::from_angle(clip.angle_at(u)));
    let (a, b, c) = match prim {
        Primitive::EllipseArc(e) => e.quadratic(&ray),
        Primitive::ParabolaArc(q) => q.quadratic(&ray),
        Primitive::Segment(_) => unreachable!(),
    };
    let t = if a.abs() < 1e-14 {
        -c / b
    } else {
        let disc = (b * b - 4.0 * a * c).max(0.0);
        (-b + disc.sqrt()) / (2.0 * a)
    };
    ray.at(t)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let l2 = e.norm_sq();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let s = ((p - a).dot(e) / l2).clamp(0.0, 1.0);
    p.dist(a + e * s)
}

/// Proper or touching intersection of two closed segments.
pub fn segments_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2, clearance: f64) -> bool {
    let d = |p: Vec2, q0: Vec2, q1: Vec2| point_segment_distance(p, q0, q1);
    if d(a0, b0, b1) <= clearance
        || d(a1, b0, b1) <= clearance
        || d(b0, a0, a1) <= clearance
        || d(b1, a0, a1) <= clearance
    {
        return true;
    }
    let o1 = (a1 - a0).cross(b0 - a0);
    let o2 = (a1 - a0).cross(b1 - a0);
    let o3 = (b1 - b0).cross(a0 - b0);
    let o4 = (b1 - b0).cross(a1 - b0);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}
