//! Hollow (cavity) geometries: mushroom, amphora, modified amphora with
//! notches, and the hybrid retroreflecting hollow with mirrors.
//!
//! All hollows use the same frame. The opening is a segment of the line
//! y = 0 and the cavity lies in y > 0. Only the notches dip below that line.
//! The boundary is an ordered chain from the right end of the opening around
//! the cavity to the left end.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use crate::decimal;
use crate::error::{Error, Result};
use crate::geom2d::{
    reflect, segments_intersect, AngularClip, EllipseArc, ParabolaArc, Primitive, Ray, Segment,
    Vec2, T_MIN,
};

/// Largest imperfectness accepted by the constructors.
pub const H_CAP: f64 = 0.2;

/// Lower edge (incidence angle) of the band where retroreflecting intervals may sit.
pub const INTERVAL_FLOOR: f64 = 5.0 * PI / 14.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub left: Vec2,
    pub right: Vec2,
}

impl Opening {
    pub fn width(&self) -> f64 {
        self.left.dist(self.right)
    }

    /// Unit tangent, direction of increasing position.
    pub fn tangent(&self) -> Vec2 {
        (self.right - self.left).normalized()
    }

    /// Unit normal pointing into the hollow.
    pub fn inward(&self) -> Vec2 {
        self.tangent().perp()
    }

    pub fn center(&self) -> Vec2 {
        (self.left + self.right) * 0.5
    }

    pub fn point_at(&self, xi: f64) -> Vec2 {
        self.left + (self.right - self.left) * xi
    }

    pub fn xi_of(&self, p: Vec2) -> f64 {
        (p - self.left).dot(self.right - self.left) / (self.right - self.left).norm_sq()
    }

    /// Entering velocity for incidence angle `phi` (measured from the inward
    /// normal, positive toward increasing position).
    pub fn entry_dir(&self, phi: f64) -> Vec2 {
        self.inward() * phi.cos() + self.tangent() * phi.sin()
    }

    /// Exit angle of an outgoing velocity. With this sign choice a reversed
    /// velocity keeps the entry angle and the specular image flips it.
    pub fn exit_angle(&self, v: Vec2) -> f64 {
        (-v.dot(self.tangent())).atan2(-v.dot(self.inward()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hollow {
    pub label: String,
    #[serde(with = "decimal")]
    pub imperfectness: f64,
    pub opening: Opening,
    /// Chain from `opening.right` around the cavity to `opening.left`.
    pub boundary: Vec<Primitive>,
    /// Free-standing two-sided mirrors.
    #[serde(default)]
    pub obstacles: Vec<Primitive>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MushroomParams {
    pub h: f64,
    /// Major axis of the cap.
    pub b11: f64,
}

impl MushroomParams {
    pub fn new(h: f64) -> Self {
        MushroomParams { h, b11: 1.0 }
    }

    pub fn stipe_width(&self) -> f64 {
        2.0 * self.h * self.b11
    }

    pub fn stipe_height(&self) -> f64 {
        self.h * self.stipe_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmphoraParams {
    pub h: f64,
    /// Overall scale; the neck width is `2 h scale`.
    pub scale: f64,
    /// Notch angle at the gap edge.
    pub angle_f: f64,
    /// Notch angle at the outer end.
    pub angle_b: f64,
}

impl AmphoraParams {
    pub fn new(h: f64) -> Self {
        AmphoraParams {
            h,
            scale: 1.0,
            angle_f: FRAC_PI_4,
            angle_b: PI / 6.0,
        }
    }

    pub fn neck_width(&self) -> f64 {
        2.0 * self.h * self.scale
    }

    pub fn notch_length(&self) -> f64 {
        self.h.powf(1.25)
    }

    pub fn flap_length(&self) -> f64 {
        self.h * self.h
    }
}

/// Interval of incidence angles, radians, inside (5pi/14, pi/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    pub amphora: AmphoraParams,
    pub intervals: Vec<AngleInterval>,
    pub mirrors: bool,
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h < H_CAP) {
        return Err(Error::invalid(format!(
            "imperfectness h must lie in (0, {H_CAP}), got {h}"
        )));
    }
    Ok(())
}

fn seg(a: Vec2, b: Vec2) -> Primitive {
    Primitive::Segment(Segment {
        start: a,
        end: b,
        domain_left: true,
    })
}

/// Reverse traversal direction of a chain element.
fn reversed(p: Primitive) -> Primitive {
    match p {
        Primitive::Segment(s) => Primitive::Segment(Segment {
            start: s.end,
            end: s.start,
            domain_left: !s.domain_left,
        }),
        other => other,
    }
}

/// Close a right-side chain (bottom to top, ending on the symmetry axis) by
/// mirroring it onto the left side.
fn mirror_close(right: Vec<Primitive>) -> Vec<Primitive> {
    let mut chain = right.clone();
    chain.extend(right.iter().rev().map(|p| reversed(p.mirrored_x())));
    chain
}

/// Polar window on the right side between angles `phi_lo <= phi_hi`
/// measured from the symmetry axis, traversed from the lower point upward.
fn right_clip(center: Vec2, phi_lo: f64, phi_hi: f64) -> AngularClip {
    AngularClip::new(center, FRAC_PI_2 - phi_hi, phi_hi - phi_lo)
}

/// Right-side parabola with focus at the origin and directrix x = d.
fn focal_parabola(d: f64, phi_lo: f64, phi_hi: f64) -> Primitive {
    Primitive::ParabolaArc(ParabolaArc {
        focus: Vec2::ZERO,
        axis: Vec2::new(1.0, 0.0),
        focal_param: d,
        clip: right_clip(Vec2::ZERO, phi_lo, phi_hi),
        domain_inside: true,
    })
}

fn polar(r: f64, phi: f64) -> Vec2 {
    Vec2::new(r * phi.sin(), r * phi.cos())
}

pub fn make_mushroom(p: MushroomParams) -> Result<Hollow> {
    check_h(p.h)?;
    if !(p.b11 > 0.0) {
        return Err(Error::invalid("cap axis must be positive"));
    }
    let a = p.b11 / 2.0;
    let c = p.stipe_width() / 2.0;
    let y0 = p.stipe_height();
    let cap = Primitive::EllipseArc(EllipseArc {
        focus1: Vec2::new(c, y0),
        focus2: Vec2::new(-c, y0),
        semi_major: a,
        clip: AngularClip::new(Vec2::new(0.0, y0), 0.0, PI),
        domain_inside: true,
    });
    let boundary = vec![
        seg(Vec2::new(c, 0.0), Vec2::new(c, y0)),
        seg(Vec2::new(c, y0), Vec2::new(a, y0)),
        cap,
        seg(Vec2::new(-a, y0), Vec2::new(-c, y0)),
        seg(Vec2::new(-c, y0), Vec2::new(-c, 0.0)),
    ];
    Ok(Hollow {
        label: "mushroom".into(),
        imperfectness: p.h,
        opening: Opening {
            left: Vec2::new(-c, 0.0),
            right: Vec2::new(c, 0.0),
        },
        boundary,
        obstacles: vec![],
    })
}

/// Shallow trapezoid over the unit opening: almost every particle is
/// reflected once by the flat bottom at height `depth`.
pub fn make_flat_mirror(depth: f64) -> Result<Hollow> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::invalid(format!(
            "mirror depth must be positive, got {depth}"
        )));
    }
    let (r, l) = (Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0));
    let (tr, tl) = (
        Vec2::new(0.5 + depth, depth),
        Vec2::new(-0.5 - depth, depth),
    );
    Ok(Hollow {
        label: "flat_mirror".into(),
        imperfectness: 0.0,
        opening: Opening { left: l, right: r },
        boundary: vec![seg(r, tr), seg(tr, tl), seg(tl, l)],
        obstacles: vec![],
    })
}

/// Right-angled groove over the unit opening. Two-impact paths are reversed.
pub fn make_v_groove() -> Result<Hollow> {
    let (r, l, apex) = (
        Vec2::new(0.5, 0.0),
        Vec2::new(-0.5, 0.0),
        Vec2::new(0.0, 0.5),
    );
    Ok(Hollow {
        label: "v_groove".into(),
        imperfectness: 0.0,
        opening: Opening { left: l, right: r },
        boundary: vec![seg(r, apex), seg(apex, l)],
        obstacles: vec![],
    })
}

/// Amphora on the unit parabolas x = +-(1 - y^2)/2 with the gap [-h, h] and
/// right-angled flaps of length h^2 folded below the opening line.
pub fn make_amphora(p: AmphoraParams) -> Result<Hollow> {
    check_h(p.h)?;
    let h = p.h;
    let f = Vec2::new(h, 0.0);
    let a = f + Vec2::new(1.0, -1.0) * (p.flap_length() / SQRT_2);
    let b = Vec2::new(h + SQRT_2 * p.flap_length(), 0.0);
    let right = vec![
        seg(f, a),
        seg(a, b),
        seg(b, Vec2::new(0.5, 0.0)),
        focal_parabola(1.0, 0.0, FRAC_PI_2),
    ];
    finish_amphora("amphora", p, right)
}

struct Notch {
    f: Vec2,
    c: Vec2,
    b: Vec2,
}

fn notch(p: &AmphoraParams) -> Result<Notch> {
    let f = Vec2::new(p.h, 0.0);
    let l = p.notch_length();
    let b = Vec2::new(p.h + l, 0.0);
    let apex = PI - p.angle_f - p.angle_b;
    if !(p.angle_f > 0.0 && p.angle_b > 0.0 && apex > 0.0) {
        return Err(Error::invalid(
            "notch angles must be positive with sum below pi",
        ));
    }
    let lf = l * p.angle_b.sin() / apex.sin();
    if lf < p.flap_length() {
        return Err(Error::invalid("notch wall shorter than the flap"));
    }
    let c = f + Vec2::new(p.angle_f.cos(), -p.angle_f.sin()) * lf;
    Ok(Notch { f, c, b })
}

/// Upper ellipse of the modified amphora on the right side: foci at the
/// origin and a notch center, through the point of polar angle pi/4 on the
/// unit parabola.
fn upper_ellipse(p: &AmphoraParams, n: &Notch) -> Primitive {
    let mid = (n.f + n.b) * 0.5;
    // A particle reflected by the far notch wall at angle b leaves at 2b + e
    // from the horizontal and so stays on its side only when b < pi/4.
    let second = if p.angle_b < FRAC_PI_4 {
        mid
    } else {
        Vec2::new(-mid.x, mid.y)
    };
    let p45 = Vec2::new(SQRT_2 - 1.0, SQRT_2 - 1.0);
    let semi = 0.5 * (p45.norm() + p45.dist(second));
    Primitive::EllipseArc(EllipseArc {
        focus1: Vec2::ZERO,
        focus2: second,
        semi_major: semi,
        clip: right_clip(Vec2::ZERO, 0.0, FRAC_PI_4),
        domain_inside: true,
    })
}

fn finish_amphora(label: &str, p: AmphoraParams, right: Vec<Primitive>) -> Result<Hollow> {
    let h = p.h;
    let hollow = Hollow {
        label: label.into(),
        imperfectness: h,
        opening: Opening {
            left: Vec2::new(-h, 0.0),
            right: Vec2::new(h, 0.0),
        },
        boundary: mirror_close(right),
        obstacles: vec![],
    };
    Ok(if p.scale != 1.0 {
        hollow.scaled(p.scale)
    } else {
        hollow
    })
}

/// Amphora with triangular notches below each gap edge and elliptic upper
/// arcs, so that shallow entries return after at most four impacts.
pub fn make_modified_amphora(p: AmphoraParams) -> Result<Hollow> {
    check_h(p.h)?;
    let n = notch(&p)?;
    let right = vec![
        seg(n.f, n.c),
        seg(n.c, n.b),
        seg(n.b, Vec2::new(0.5, 0.0)),
        focal_parabola(1.0, FRAC_PI_4, FRAC_PI_2),
        upper_ellipse(&p, &n),
    ];
    finish_amphora("modified_amphora", p, right)
}

fn validate_intervals(iv: &[AngleInterval]) -> Result<()> {
    let mut prev = INTERVAL_FLOOR;
    for (k, j) in iv.iter().enumerate() {
        if !(j.lo > prev && j.hi > j.lo && j.hi < FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "interval {k} = [{}, {}] must be increasing, disjoint and inside (5pi/14, pi/2)",
                j.lo, j.hi
            )));
        }
        prev = j.hi;
    }
    Ok(())
}

/// Radius of the ellipse with foci (+-h, 0) and semi-major `a` in polar
/// direction `phi` from the axis.
fn gap_ellipse_radius(h: f64, a: f64, phi: f64) -> f64 {
    let b2 = a * a - h * h;
    1.0 / (phi.sin().powi(2) / (a * a) + phi.cos().powi(2) / b2).sqrt()
}

/// Right-side junction points between parabolic and elliptic pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junction {
    pub point: Vec2,
    /// Index of the adjacent elliptic piece in the right chain.
    pub ellipse_index: usize,
}

fn hybrid_right_chain(p: &HybridParams) -> Result<(Vec<Primitive>, Vec<Junction>)> {
    let a = &p.amphora;
    let h = a.h;
    let n = notch(a)?;
    // Built from the top down, then reversed into chain order.
    let mut pieces = vec![upper_ellipse(a, &n)];
    let mut junctions = vec![];
    let mut d = 1.0;
    let mut phi = FRAC_PI_4;
    for j in &p.intervals {
        pieces.push(focal_parabola(d, phi, j.lo));
        let g0 = polar(d / (1.0 + j.lo.sin()), j.lo);
        let semi = 0.5 * (g0.dist(Vec2::new(-h, 0.0)) + g0.dist(Vec2::new(h, 0.0)));
        pieces.push(Primitive::EllipseArc(EllipseArc {
            focus1: Vec2::new(-h, 0.0),
            focus2: Vec2::new(h, 0.0),
            semi_major: semi,
            clip: right_clip(Vec2::ZERO, j.lo, j.hi),
            domain_inside: true,
        }));
        let g1 = polar(gap_ellipse_radius(h, semi, j.hi), j.hi);
        junctions.push((g0, pieces.len() - 1));
        junctions.push((g1, pieces.len() - 1));
        d = g1.norm() * (1.0 + j.hi.sin());
        phi = j.hi;
    }
    pieces.push(focal_parabola(d, phi, FRAC_PI_2));
    let base_end = Vec2::new(d / 2.0, 0.0);
    if base_end.x <= n.b.x + 1e-9 {
        return Err(Error::invalid(
            "intervals pull the wall inside the notch; use fewer or narrower intervals",
        ));
    }
    let count = pieces.len();
    let mut right = vec![seg(n.f, n.c), seg(n.c, n.b), seg(n.b, base_end)];
    right.extend(pieces.into_iter().rev());
    let junctions = junctions
        .into_iter()
        .map(|(pt, k)| Junction {
            point: pt,
            ellipse_index: 3 + count - 1 - k,
        })
        .collect();
    Ok((right, junctions))
}

/// Hybrid hollow: the modified amphora whose lower parabola alternates with
/// ellipses focused at the opening ends over the given incidence intervals.
/// With no intervals it coincides with the modified amphora.
pub fn make_hybrid(p: HybridParams) -> Result<Hollow> {
    check_h(p.amphora.h)?;
    validate_intervals(&p.intervals)?;
    let (right, junctions) = hybrid_right_chain(&p)?;
    let upper = right.len() - 1;
    let mut hollow = finish_amphora(
        "hybrid",
        AmphoraParams {
            scale: 1.0,
            ..p.amphora
        },
        right,
    )?;
    if p.mirrors {
        hollow.obstacles = place_mirrors(&hollow, &junctions, upper, p.amphora.h)?;
    }
    Ok(if p.amphora.scale != 1.0 {
        hollow.scaled(p.amphora.scale)
    } else {
        hollow
    })
}

/// Design ray of a junction: a horizontal ray from the opposite parabola
/// reflected by the elliptic piece at the junction. Returns the departure
/// point and direction, on side `side`.
pub fn junction_design_ray(hollow: &Hollow, j: &Junction, side: f64) -> (Vec2, Vec2) {
    let g = Vec2::new(side * j.point.x, j.point.y);
    let prim = if side > 0.0 {
        hollow.boundary[j.ellipse_index]
    } else {
        hollow.boundary[j.ellipse_index].mirrored_x()
    };
    let n = prim.normal_at(g);
    (g, reflect(Vec2::new(side, 0.0), n))
}

/// Two mirrors per junction and side. The first (length h^{5/4}) sits on the
/// design ray and sends it to the second (length h^{9/8}), which lies inside
/// the upper elliptic arc and aims at the opening center. Candidate spots
/// along each design ray are tried in turn; a pair is kept only if every
/// design ray placed so far still lands within h^{17/16} of the center and
/// the boundary stays simple.
fn place_mirrors(
    hollow: &Hollow,
    junctions: &[Junction],
    upper: usize,
    h: f64,
) -> Result<Vec<Primitive>> {
    let l1 = h.powf(1.25);
    let l2 = h.powf(1.125);
    let tol = h.powf(17.0 / 16.0);
    let slots = junctions.len() as f64;
    let mut work = hollow.clone();
    let mut placed: Vec<(Vec2, Vec2)> = vec![];
    for (k, j) in junctions.iter().enumerate() {
        let target_phi = PI / 7.0 + (k as f64 + 0.5) / slots * (FRAC_PI_4 - PI / 7.0);
        let (g, d1) = junction_design_ray(hollow, j, 1.0);
        if d1.y >= 0.0 {
            return Err(Error::numeric("junction design ray does not descend"));
        }
        let floor = hollow
            .boundary
            .iter()
            .filter_map(|p| p.intersect(&Ray { origin: g, dir: d1 }, T_MIN, false))
            .map(|hit| hit.t)
            .fold(f64::INFINITY, f64::min);
        let aim = Vec2::new(target_phi.sin(), target_phi.cos());
        let hit = hollow.boundary[upper]
            .intersect(&Ray::new(Vec2::ZERO, aim), T_MIN, false)
            .ok_or_else(|| Error::numeric("mirror target missed the upper arc"))?;
        let m2 = hit.point - aim * l2;
        let mut accepted = false;
        for frac in [0.85, 0.7, 0.55, 0.4, 0.25, 0.15] {
            let m1 = g + d1 * (floor * frac);
            if m1.y < l1 {
                continue;
            }
            let u = (m2 - m1).normalized();
            let n1 = (u - d1).normalized();
            let n2 = ((-m2).normalized() - u).normalized();
            let pair = [
                seg(m1 - n1.perp() * (l1 / 2.0), m1 + n1.perp() * (l1 / 2.0)),
                seg(m2 - n2.perp() * (l2 / 2.0), m2 + n2.perp() * (l2 / 2.0)),
            ];
            let mut trial = work.clone();
            trial.obstacles.extend(pair.iter().copied());
            trial.obstacles.extend(pair.iter().map(|p| p.mirrored_x()));
            let mut rays = placed.clone();
            rays.push((g, d1));
            let lands = rays.iter().all(|&(g, d)| {
                [1.0, -1.0].iter().all(|&side| {
                    let (o, _) = crate::trace::trace_from(
                        &trial,
                        Vec2::new(side * g.x, g.y),
                        Vec2::new(side * d.x, d.y),
                        16,
                    );
                    o.exit
                        .map_or(false, |e| (e.xi - 0.5).abs() * trial.opening.width() <= tol)
                })
            });
            if lands && audit(&trial).simple {
                work = trial;
                placed.push((g, d1));
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::numeric(format!(
                "no clear mirror placement for junction {k}; use fewer or more widely spaced intervals, or disable mirrors"
            )));
        }
    }
    Ok(work.obstacles)
}

/// Right-side junctions of a hybrid hollow (for inspection and tests).
pub fn hybrid_junctions(p: &HybridParams) -> Result<Vec<Junction>> {
    validate_intervals(&p.intervals)?;
    Ok(hybrid_right_chain(p)?.1)
}

impl Hollow {
    pub fn primitives(&self) -> impl Iterator<Item = &Primitive> {
        self.boundary.iter().chain(self.obstacles.iter())
    }

    pub fn scaled(&self, k: f64) -> Hollow {
        Hollow {
            label: self.label.clone(),
            imperfectness: self.imperfectness,
            opening: Opening {
                left: self.opening.left * k,
                right: self.opening.right * k,
            },
            boundary: self.boundary.iter().map(|p| p.scaled(k)).collect(),
            obstacles: self.obstacles.iter().map(|p| p.scaled(k)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Hollow> {
        let h: Hollow = serde_json::from_str(s)?;
        if h.boundary.is_empty() {
            return Err(Error::invalid("hollow has no boundary primitives"));
        }
        Ok(h)
    }

    /// Closed polygon approximating the cavity (boundary chain plus opening).
    pub fn outline(&self, per_arc: usize) -> Vec<Vec2> {
        let mut pts = vec![self.opening.right];
        let mut cur = self.opening.right;
        for p in &self.boundary {
            let mut line = p.polyline(per_arc);
            if line.last().unwrap().dist(cur) < line[0].dist(cur) {
                line.reverse();
            }
            pts.extend(line.into_iter().skip(1));
            cur = *pts.last().unwrap();
        }
        pts
    }

    pub fn audit(&self) -> AuditReport {
        audit(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub closed: bool,
    pub simple: bool,
    /// Largest gap between consecutive chain elements.
    pub max_gap: f64,
    /// Whole boundary on the inner side of the opening line.
    pub within_half_plane: bool,
    /// Whole boundary inside some triangle built on the opening.
    pub within_triangle: bool,
    pub issues: Vec<String>,
}

impl AuditReport {
    pub fn is_valid(&self) -> bool {
        self.closed && self.simple
    }
}

const CLOSURE_TOL: f64 = 1e-12;
const CLEARANCE: f64 = 1e-10;

pub fn audit(hollow: &Hollow) -> AuditReport {
    let mut issues = vec![];
    let mut max_gap: f64 = 0.0;
    let mut cur = hollow.opening.right;
    let mut oriented: Vec<(Vec2, Vec2)> = vec![];
    for (k, p) in hollow.boundary.iter().enumerate() {
        let (a, b) = p.endpoints();
        let (ga, gb) = (a.dist(cur), b.dist(cur));
        let (gap, next) = if ga <= gb { (ga, b) } else { (gb, a) };
        if gap > CLOSURE_TOL {
            issues.push(format!("gap {gap:.3e} before element {k}"));
        }
        max_gap = max_gap.max(gap);
        oriented.push((cur, next));
        cur = next;
    }
    let tail = cur.dist(hollow.opening.left);
    if tail > CLOSURE_TOL {
        issues.push(format!("chain ends {tail:.3e} away from the opening"));
    }
    max_gap = max_gap.max(tail);
    let closed = max_gap <= CLOSURE_TOL;

    // Pairwise crossings between dense polylines; neighbours may share only
    // their common endpoint.
    let mut items: Vec<Vec<Vec2>> = hollow.boundary.iter().map(|p| p.polyline(64)).collect();
    let nb = items.len();
    items.push(vec![hollow.opening.left, hollow.opening.right]);
    items.extend(hollow.obstacles.iter().map(|p| p.polyline(64)));
    let n = items.len();
    let adjacent = |i: usize, j: usize| -> bool {
        let ring = nb + 1;
        i < ring && j < ring && ((i + 1) % ring == j || (j + 1) % ring == i)
    };
    let mut simple = true;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            let adj = adjacent(i, j);
            let (pi, pj) = (&items[i], &items[j]);
            for (si, wi) in pi.windows(2).enumerate() {
                for (sj, wj) in pj.windows(2).enumerate() {
                    if adj {
                        // Skip the pieces meeting at the shared endpoint.
                        let end_i = si == 0 || si + 2 == pi.len();
                        let end_j = sj == 0 || sj + 2 == pj.len();
                        if end_i && end_j {
                            continue;
                        }
                    }
                    if segments_intersect(wi[0], wi[1], wj[0], wj[1], CLEARANCE) {
                        simple = false;
                        issues.push(format!("elements {i} and {j} intersect"));
                        break 'outer;
                    }
                }
            }
        }
    }

    let pts: Vec<Vec2> = hollow.primitives().flat_map(|p| p.polyline(64)).collect();
    let o = &hollow.opening;
    let inward = o.inward();
    let within_half_plane = pts.iter().all(|&p| (p - o.left).dot(inward) >= -1e-12);
    let t = o.tangent();
    let angle_from = |base: Vec2, dir: Vec2, p: Vec2| -> f64 {
        let q = p - base;
        q.dot(inward).atan2(q.dot(dir))
    };
    let max_l = pts
        .iter()
        .map(|&p| angle_from(o.left, t, p))
        .fold(0.0, f64::max);
    let max_r = pts
        .iter()
        .map(|&p| angle_from(o.right, -t, p))
        .fold(0.0, f64::max);
    let within_triangle = within_half_plane && max_l + max_r < PI;
    if !within_half_plane {
        issues.push("boundary crosses below the opening line".into());
    }
    if !within_triangle {
        issues.push("no triangle on the opening contains the boundary".into());
    }
    AuditReport {
        closed,
        simple,
        max_gap,
        within_half_plane,
        within_triangle,
        issues,
    }
}

/// Winding number of `p` about the closed outline.
pub fn winding(outline: &[Vec2], p: Vec2) -> i32 {
    let mut w = 0;
    let n = outline.len();
    for k in 0..n {
        let a = outline[k];
        let b = outline[(k + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
            w -= 1;
        }
    }
    w
}
