//! Billiard tracing inside a hollow: entry (angle, position) to exit, impact
//! logs, impact-count censuses and a pseudotrajectory validator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geom2d::{point_segment_distance, reflect, Ray, Vec2, T_MIN};
use crate::hollow::{winding, Hollow};

/// Hits this close to an endpoint of a primitive are corner hits.
pub const CORNER_TOL: f64 = 1e-9;

/// Exits this close to grazing are not assigned an angle.
pub const GRAZING_TOL: f64 = 1e-9;

pub const DEFAULT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    /// Incidence angle in (-pi/2, pi/2).
    pub phi: f64,
    /// Position on the opening, in [0, 1].
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    Exited,
    CapExceeded,
    /// Corner hit or grazing exit.
    Singular,
    /// No further hit and no exit: the particle leaked out of the cavity.
    Escaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exit {
    pub phi: f64,
    pub xi: f64,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub impacts: usize,
    pub exit: Option<Exit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impact {
    /// Path length travelled at unit speed.
    pub t: f64,
    pub point: Vec2,
    /// Velocity after the impact.
    pub velocity: Vec2,
    /// Index into `boundary` followed by `obstacles`.
    pub primitive: usize,
}

fn check_entry(e: &Entry) -> Result<()> {
    if !(e.phi.abs() < FRAC_PI_2) || !(0.0..=1.0).contains(&e.xi) {
        return Err(Error::invalid(format!(
            "entry (phi={}, xi={}) outside (-pi/2,pi/2) x [0,1]",
            e.phi, e.xi
        )));
    }
    Ok(())
}

pub fn trace(hollow: &Hollow, entry: Entry, cap: usize) -> Result<Outcome> {
    check_entry(&entry)?;
    Ok(run(hollow, entry, cap, None))
}

pub fn trace_path(hollow: &Hollow, entry: Entry, cap: usize) -> Result<(Outcome, Vec<Impact>)> {
    check_entry(&entry)?;
    let mut log = vec![];
    let out = run(hollow, entry, cap, Some(&mut log));
    Ok((out, log))
}

/// Trace a particle starting anywhere in the cavity.
pub fn trace_from(hollow: &Hollow, origin: Vec2, dir: Vec2, cap: usize) -> (Outcome, Vec<Impact>) {
    let mut log = vec![];
    let out = walk(hollow, Ray::new(origin, dir), None, cap, Some(&mut log));
    (out, log)
}

fn run(hollow: &Hollow, entry: Entry, cap: usize, log: Option<&mut Vec<Impact>>) -> Outcome {
    let o = &hollow.opening;
    let ray = Ray::new(o.point_at(entry.xi), o.entry_dir(entry.phi));
    walk(hollow, ray, Some(usize::MAX), cap, log)
}

/// `from` marks the primitive the ray leaves; `usize::MAX` is the opening.
fn walk(
    hollow: &Hollow,
    mut ray: Ray,
    mut from: Option<usize>,
    cap: usize,
    mut log: Option<&mut Vec<Impact>>,
) -> Outcome {
    let o = hollow.opening;
    let inward = o.inward();
    let prims: Vec<_> = hollow.primitives().copied().collect();
    let mut impacts = 0;
    let mut time = 0.0;
    loop {
        let mut best: Option<(usize, crate::geom2d::Hit)> = None;
        for (i, p) in prims.iter().enumerate() {
            if let Some(hit) = p.intersect(&ray, T_MIN, from == Some(i)) {
                if best.map_or(true, |(_, b)| hit.t < b.t) {
                    best = Some((i, hit));
                }
            }
        }
        if ray.dir.dot(inward) < 0.0 && from != Some(usize::MAX) {
            if let Some(t) = crossing(&ray, o.left, o.right) {
                if t > T_MIN && best.map_or(true, |(_, b)| t < b.t) {
                    let p = ray.at(t);
                    if p.dist(o.left) < CORNER_TOL || p.dist(o.right) < CORNER_TOL {
                        return Outcome {
                            status: Status::Singular,
                            impacts,
                            exit: None,
                        };
                    }
                    let phi = o.exit_angle(ray.dir);
                    if phi.abs() > FRAC_PI_2 - GRAZING_TOL {
                        return Outcome {
                            status: Status::Singular,
                            impacts,
                            exit: None,
                        };
                    }
                    let exit = Exit {
                        phi,
                        xi: o.xi_of(p),
                        velocity: ray.dir,
                    };
                    return Outcome {
                        status: Status::Exited,
                        impacts,
                        exit: Some(exit),
                    };
                }
            }
        }
        let Some((i, hit)) = best else {
            return Outcome {
                status: Status::Escaped,
                impacts,
                exit: None,
            };
        };
        let (a, b) = prims[i].endpoints();
        if hit.point.dist(a) < CORNER_TOL || hit.point.dist(b) < CORNER_TOL {
            return Outcome {
                status: Status::Singular,
                impacts,
                exit: None,
            };
        }
        if impacts == cap {
            return Outcome {
                status: Status::CapExceeded,
                impacts,
                exit: None,
            };
        }
        impacts += 1;
        time += hit.t;
        let dir = reflect(ray.dir, hit.normal).normalized();
        if let Some(l) = log.as_deref_mut() {
            l.push(Impact {
                t: time,
                point: hit.point,
                velocity: dir,
                primitive: i,
            });
        }
        ray = Ray {
            origin: hit.point,
            dir,
        };
        from = Some(i);
    }
}

fn crossing(ray: &Ray, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let den = ray.dir.cross(e);
    if den.abs() < 1e-15 {
        return None;
    }
    let w = a - ray.origin;
    let s = w.cross(ray.dir) / den;
    if (0.0..=1.0).contains(&s) {
        Some(w.cross(e) / den)
    } else {
        None
    }
}

/// Entry drawn from the invariant measure: position uniform, angle with
/// density cos(phi)/2.
pub fn sample_entry<R: Rng>(rng: &mut R) -> Entry {
    let xi: f64 = rng.gen();
    let u: f64 = rng.gen();
    Entry {
        phi: (2.0 * u - 1.0).asin(),
        xi,
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    /// Impact count -> number of exited traces.
    pub histogram: BTreeMap<usize, u64>,
    pub statuses: BTreeMap<String, u64>,
    pub sampled: u64,
    pub considered: u64,
}

impl Census {
    pub fn max_impacts(&self) -> Option<usize> {
        self.histogram.keys().next_back().copied()
    }
}

/// Impact-count census over `n` entries from the invariant measure, keeping
/// those accepted by `filter`.
pub fn census(
    hollow: &Hollow,
    n: u64,
    seed: u64,
    cap: usize,
    filter: impl Fn(&Entry) -> bool + Sync,
) -> Census {
    let outcomes: Vec<Option<Outcome>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = sample_entry(&mut sample_rng(seed, i));
            filter(&e).then(|| run(hollow, e, cap, None))
        })
        .collect();
    let mut c = Census {
        histogram: BTreeMap::new(),
        statuses: BTreeMap::new(),
        sampled: n,
        considered: 0,
    };
    for o in outcomes.into_iter().flatten() {
        c.considered += 1;
        *c.statuses.entry(format!("{:?}", o.status)).or_default() += 1;
        if o.status == Status::Exited {
            *c.histogram.entry(o.impacts).or_default() += 1;
        }
    }
    c
}

pub fn write_impacts_csv<W: Write>(w: W, impacts: &[Impact]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "x", "y", "vx", "vy", "primitive"])?;
    for i in impacts {
        out.write_record([
            format!("{:?}", i.t),
            format!("{:?}", i.point.x),
            format!("{:?}", i.point.y),
            format!("{:?}", i.velocity.x),
            format!("{:?}", i.velocity.y),
            i.primitive.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Region occupied by matter; a pseudotrajectory must stay out of its interior.
pub trait Body {
    /// True when `p` is in the interior, more than `tol` from the boundary.
    fn in_interior(&self, p: Vec2, tol: f64) -> bool;
}

/// The material around a hollow: the inner side of the opening line minus
/// the cavity.
pub struct HollowBody {
    outline: Vec<Vec2>,
    left: Vec2,
    inward: Vec2,
}

impl HollowBody {
    pub fn new(h: &Hollow) -> Self {
        HollowBody {
            outline: h.outline(2048),
            left: h.opening.left,
            inward: h.opening.inward(),
        }
    }
}

impl Body for HollowBody {
    fn in_interior(&self, p: Vec2, tol: f64) -> bool {
        if (p - self.left).dot(self.inward) <= tol || winding(&self.outline, p) != 0 {
            return false;
        }
        let n = self.outline.len();
        (0..n).all(|k| point_segment_distance(p, self.outline[k], self.outline[(k + 1) % n]) > tol)
    }
}

pub struct DiscBody {
    pub center: Vec2,
    pub radius: f64,
}

impl Body for DiscBody {
    fn in_interior(&self, p: Vec2, tol: f64) -> bool {
        p.dist(self.center) < self.radius - tol
    }
}

/// Sampled motion between impacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightSample {
    pub t: f64,
    pub pos: Vec2,
    pub vel: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactRecord {
    pub t: f64,
    /// Unit normal of the body at the impact point.
    pub normal: Vec2,
    pub v_before: Vec2,
    pub v_after: Vec2,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pseudotrajectory {
    /// Sorted by time.
    pub samples: Vec<FlightSample>,
    /// Sorted by time.
    pub impacts: Vec<ImpactRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoReport {
    pub valid: bool,
    pub penetrations: usize,
    pub max_impact_residual: f64,
    pub max_velocity_drift: f64,
    pub reasons: Vec<String>,
}

/// Check the four pseudotrajectory conditions with tolerance `delta`: no
/// entry into the body, finitely many ordered impacts, reflection at each
/// impact up to `delta`, and velocity within `delta` of the post-impact
/// value between impacts.
pub fn validate_pseudotrajectory(
    traj: &Pseudotrajectory,
    body: &dyn Body,
    delta: f64,
    tol: f64,
) -> PseudoReport {
    let mut reasons = vec![];
    let penetrations = traj
        .samples
        .iter()
        .filter(|s| body.in_interior(s.pos, tol))
        .count();
    if penetrations > 0 {
        reasons.push(format!("{penetrations} samples inside the body"));
    }
    let ordered = traj.impacts.windows(2).all(|w| w[0].t < w[1].t)
        && traj.impacts.iter().all(|i| i.t.is_finite());
    if !ordered {
        reasons.push("impact times are not finite and strictly increasing".into());
    }
    let mut max_res: f64 = 0.0;
    for i in &traj.impacts {
        let r = (i.v_after - reflect(i.v_before, i.normal)).norm();
        max_res = max_res.max(r);
    }
    if max_res > delta {
        reasons.push(format!("impact residual {max_res:.3e} exceeds {delta:.3e}"));
    }
    let mut max_drift: f64 = 0.0;
    let start_v = traj.samples.first().map(|s| s.vel);
    for s in &traj.samples {
        let k = traj.impacts.partition_point(|i| i.t <= s.t);
        let reference = if k == 0 {
            start_v
        } else {
            Some(traj.impacts[k - 1].v_after)
        };
        if let Some(v) = reference {
            max_drift = max_drift.max((s.vel - v).norm());
        }
    }
    if max_drift > delta {
        reasons.push(format!(
            "velocity drift {max_drift:.3e} exceeds {delta:.3e}"
        ));
    }
    PseudoReport {
        valid: reasons.is_empty(),
        penetrations,
        max_impact_residual: max_res,
        max_velocity_drift: max_drift,
        reasons,
    }
}

/// Exact billiard motion as a sampled pseudotrajectory (unit speed).
pub fn billiard_pseudotrajectory(
    hollow: &Hollow,
    entry: Entry,
    cap: usize,
    per_leg: usize,
) -> Result<Pseudotrajectory> {
    let (_, impacts) = trace_path(hollow, entry, cap)?;
    let o = &hollow.opening;
    let mut pos = o.point_at(entry.xi);
    let mut vel = o.entry_dir(entry.phi);
    let mut t0 = 0.0;
    let mut traj = Pseudotrajectory::default();
    let prims: Vec<_> = hollow.primitives().copied().collect();
    for imp in &impacts {
        for k in 0..per_leg {
            let s = k as f64 / per_leg as f64;
            let t = t0 + s * (imp.t - t0);
            traj.samples.push(FlightSample {
                t,
                pos: pos + vel * (t - t0),
                vel,
            });
        }
        let n = prims[imp.primitive].normal_at(imp.point);
        traj.impacts.push(ImpactRecord {
            t: imp.t,
            normal: n,
            v_before: vel,
            v_after: imp.velocity,
        });
        pos = imp.point;
        vel = imp.velocity;
        t0 = imp.t;
    }
    traj.samples.push(FlightSample { t: t0, pos, vel });
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hollow::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn amphora_focal_entry_returns_to_center() {
        let a = make_amphora(AmphoraParams::new(0.1)).unwrap();
        for phi in [-1.2, -0.7, -0.3, 0.2, 0.9, 1.3] {
            let o = trace(&a, Entry { phi, xi: 0.5 }, DEFAULT_CAP).unwrap();
            assert_eq!(o.status, Status::Exited);
            assert_eq!(o.impacts, 2, "phi={phi}");
            let e = o.exit.unwrap();
            assert!((e.xi - 0.5).abs() < 1e-12, "phi={phi} xi={}", e.xi);
        }
    }

    #[test]
    fn involution_on_mushroom() {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        let e = Entry { phi: 0.4, xi: 0.3 };
        let o = trace(&m, e, DEFAULT_CAP).unwrap();
        let x = o.exit.unwrap();
        let back = trace(
            &m,
            Entry {
                phi: x.phi,
                xi: x.xi,
            },
            DEFAULT_CAP,
        )
        .unwrap()
        .exit
        .unwrap();
        assert!((back.phi - e.phi).abs() < 1e-9 && (back.xi - e.xi).abs() < 1e-9);
    }

    #[test]
    fn invalid_entries_are_rejected() {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        assert!(trace(
            &m,
            Entry {
                phi: PI / 2.0,
                xi: 0.5
            },
            8
        )
        .is_err());
        assert!(trace(&m, Entry { phi: 0.1, xi: 1.5 }, 8).is_err());
    }

    #[test]
    fn cap_is_reported() {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        let o = trace(&m, Entry { phi: 0.4, xi: 0.3 }, 0).unwrap();
        assert_eq!(o.status, Status::CapExceeded);
    }

    #[test]
    fn shallow_entries_in_modified_amphora_need_few_impacts() {
        let m = make_modified_amphora(AmphoraParams::new(0.05)).unwrap();
        let c = census(&m, 20_000, 11, 64, |e| e.phi.abs() > 5.0 * PI / 14.0);
        assert!(c.max_impacts().unwrap() <= 4, "{c:?}");
    }

    #[test]
    fn exact_trajectory_is_a_pseudotrajectory() {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        let traj = billiard_pseudotrajectory(&m, Entry { phi: 0.3, xi: 0.6 }, 64, 20).unwrap();
        let r = validate_pseudotrajectory(&traj, &HollowBody::new(&m), 1e-12, 1e-6);
        assert!(r.valid, "{r:?}");
    }

    #[test]
    fn penetration_is_detected() {
        let d = DiscBody {
            center: Vec2::ZERO,
            radius: 1.0,
        };
        let traj = Pseudotrajectory {
            samples: vec![FlightSample {
                t: 0.0,
                pos: Vec2::new(0.5, 0.0),
                vel: Vec2::new(1.0, 0.0),
            }],
            impacts: vec![],
        };
        assert!(!validate_pseudotrajectory(&traj, &d, 0.1, 1e-9).valid);
    }

    #[test]
    fn impact_csv_has_header() {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        let (_, imp) = trace_path(&m, Entry { phi: 0.3, xi: 0.6 }, 64).unwrap();
        let mut buf = vec![];
        write_impacts_csv(&mut buf, &imp).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,x,y,vx,vy,primitive\n"));
        assert_eq!(s.lines().count(), imp.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn exits_are_unit_speed_and_in_range(phi in -1.5f64..1.5, xi in 0.0f64..1.0) {
            let m = make_modified_amphora(AmphoraParams::new(0.08)).unwrap();
            let o = trace(&m, Entry { phi, xi }, 4096).unwrap();
            if let Some(x) = o.exit {
                prop_assert!((x.velocity.norm() - 1.0).abs() < 1e-12);
                prop_assert!(x.phi.abs() < FRAC_PI_2 && (0.0..=1.0).contains(&x.xi));
            }
        }
    }
}
