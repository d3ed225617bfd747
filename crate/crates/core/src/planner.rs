//! Steering a rough disc along a broken line.
//!
//! The disc's surface is a fraction ε of hybrid cavities whose retro bands
//! sit just below grazing incidence; the rest is smooth. While λ grows like
//! e^τ the support start x₀(λ) sweeps toward π/2 and passes the bands one by
//! one. Band j is placed so that it leaves the support when the disc reaches
//! vertex j (natural parameter T_j, disc parameter T_j/ε) and its width is
//! chosen so the accumulated heading change equals the turn at that vertex.
//! Only right turns in [−π/4, 0] are available, so other turns are first
//! rewritten as chains of right turns.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    integrate, integrate_until, DiscParams, DiscState, DynOptions, Sample, Stop, Trajectory,
};
use crate::error::{Error, Result};
use crate::geom2d::{point_segment_distance, segments_intersect, Vec2};
use crate::resistance::{ln_sin, HybridLaw, RetroBand, ScatterLaw};

const TURN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokenLine {
    pub vertices: Vec<Vec2>,
}

impl BrokenLine {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let b = BrokenLine { vertices };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::invalid("a broken line needs at least two vertices"));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vertices must be finite"));
        }
        for (k, w) in self.vertices.windows(2).enumerate() {
            if w[0].dist(w[1]) == 0.0 {
                return Err(Error::invalid(format!("segment {k} has zero length")));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.vertices.windows(2).map(|w| w[0].dist(w[1])).collect()
    }

    pub fn length(&self) -> f64 {
        self.lengths().iter().sum()
    }

    pub fn directions(&self) -> Vec<Vec2> {
        self.vertices
            .windows(2)
            .map(|w| (w[1] - w[0]).normalized())
            .collect()
    }

    /// Signed turn at each interior vertex, in (−π, π]; negative is clockwise.
    pub fn turns(&self) -> Vec<f64> {
        self.directions()
            .windows(2)
            .map(|d| d[0].cross(d[1]).atan2(d[0].dot(d[1])))
            .collect()
    }

    /// Whether two non-adjacent segments meet.
    pub fn self_intersects(&self) -> bool {
        let v = &self.vertices;
        let n = self.segments();
        (0..n)
            .any(|i| ((i + 2)..n).any(|j| segments_intersect(v[i], v[i + 1], v[j], v[j + 1], 0.0)))
    }
}

pub fn admissible(turn: f64) -> bool {
    (-FRAC_PI_4 - TURN_SLACK..=TURN_SLACK).contains(&turn)
}

/// Rewrites every turn outside [−π/4, 0] as k equal right turns summing to it
/// modulo 2π, joined by auxiliary segments of a common length (an eighth of
/// the shorter incident segment). The chain is backed off along the incoming
/// segment so that it ends on the outgoing line.
pub fn preprocess(curve: &BrokenLine) -> Result<BrokenLine> {
    curve.validate()?;
    let v = &curve.vertices;
    let dirs = curve.directions();
    let lens = curve.lengths();
    let turns = curve.turns();
    let mut out = vec![v[0]];
    // distance already consumed at the start of each segment
    let mut used_start = vec![0.0; lens.len()];
    for (k, &t) in turns.iter().enumerate() {
        let corner = v[k + 1];
        if admissible(t) {
            out.push(corner);
            continue;
        }
        if t.abs() >= PI - TURN_SLACK {
            return Err(Error::invalid(format!(
                "vertex {} reverses direction; split the curve there",
                k + 1
            )));
        }
        let signed = if t > 0.0 { t - 2.0 * PI } else { t };
        let count = ((signed.abs() / FRAC_PI_4) - TURN_SLACK).ceil().max(1.0) as usize;
        let step = signed / count as f64;
        let (din, dout) = (dirs[k], dirs[k + 1]);
        let aux = lens[k].min(lens[k + 1]) / 8.0;
        let chain: Vec<Vec2> = (1..count).map(|i| din.rotate(i as f64 * step)).collect();
        let sum = chain.iter().fold(Vec2::ZERO, |a, &d| a + d);
        let back = aux * sum.cross(dout) / din.cross(dout);
        let mut p = corner - din * back;
        let ahead_room = lens[k] - used_start[k];
        if !(back < ahead_room) {
            return Err(Error::invalid(format!(
                "turn at vertex {} needs more room on the incoming segment",
                k + 1
            )));
        }
        out.push(p);
        for d in &chain {
            p += *d * aux;
            out.push(p);
        }
        let along = (p - corner).dot(dout);
        if !(along < lens[k + 1]) {
            return Err(Error::invalid(format!(
                "turn at vertex {} needs more room on the outgoing segment",
                k + 1
            )));
        }
        used_start[k + 1] = along.max(0.0);
        // the chain ends on the outgoing line; snap rounding off it
        let last = out.len() - 1;
        out[last] = corner + dout * along;
    }
    out.push(*v.last().unwrap());
    let b = BrokenLine::new(out)?;
    if let Some(k) = b.turns().iter().position(|&t| !admissible(t)) {
        return Err(Error::numeric(format!(
            "rewritten curve still has an inadmissible turn at vertex {}",
            k + 1
        )));
    }
    Ok(b)
}

/// Heading change accumulated on the way to a switch value, as a function
/// of q = (λ sin u_j)² ∈ [0, 1]: φ[1 − √(1−q)(1 + q/2)].
pub fn theta_closed_form(q: f64, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1], got {q}")));
    }
    Ok(phi * (1.0 - (1.0 - q).sqrt() * (1.0 + 0.5 * q)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub epsilon: f64,
    pub curve: BrokenLine,
    /// Natural parameter at each vertex, starting at `naturals[0]` = T₀.
    pub naturals: Vec<f64>,
    /// Turn at each interior vertex (vertex k + 1).
    pub targets: Vec<f64>,
    /// Turn parameters actually used for the bands.
    pub turns: Vec<f64>,
}

impl PlanSpec {
    /// Band of interior vertex `k` + 1, if its turn is nonzero.
    pub fn band(&self, k: usize) -> Option<RetroBand> {
        let phi = self.turns[k].abs();
        if phi == 0.0 {
            return None;
        }
        let t = self.naturals[k + 1] / self.epsilon;
        Some(RetroBand {
            ln_outer: -t,
            ln_log_ratio: phi.ln() - t - self.epsilon.ln(),
        })
    }

    pub fn law(&self) -> ScatterLaw {
        let bands = (0..self.turns.len()).filter_map(|k| self.band(k)).collect();
        ScatterLaw::Hybrid(HybridLaw {
            bands,
            weight: self.epsilon,
        })
    }

    /// Band bounds in incidence angle; narrow bands collapse in f64.
    pub fn x_bands(&self) -> Vec<(f64, f64)> {
        (0..self.turns.len())
            .filter_map(|k| self.band(k))
            .map(|b| b.x_bounds())
            .collect()
    }

    /// ln λ at which interior vertex `k` + 1 is reached: where its band
    /// starts to leave the support, e^{T/ε} up to the sine of a tiny angle.
    pub fn switch_ln_lambda(&self, k: usize) -> f64 {
        -ln_sin(-self.naturals[k + 1] / self.epsilon)
    }

    pub fn start_state(&self) -> DiscState {
        let d = (self.curve.vertices[1] - self.curve.vertices[0]).normalized();
        DiscState {
            position: self.curve.vertices[0] / self.epsilon,
            speed: 1.0,
            heading: d.y.atan2(d.x),
            ln_lambda: self.naturals[0] / self.epsilon,
            tau: self.naturals[0] / self.epsilon,
        }
    }

    pub fn tau_end(&self) -> f64 {
        self.naturals.last().unwrap() / self.epsilon
    }
}

/// Band layout for an admissible curve; the natural parameter starts at `t0`.
pub fn synthesize(curve: &BrokenLine, epsilon: f64, t0: f64) -> Result<PlanSpec> {
    curve.validate()?;
    // ε is also the cavity fraction of the law
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "scale parameter must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::invalid(format!(
            "initial natural parameter must be positive, got {t0}"
        )));
    }
    let targets = curve.turns();
    if let Some(k) = targets.iter().position(|&t| !admissible(t)) {
        return Err(Error::invalid(format!(
            "turn {:.6} at vertex {} is outside [-pi/4, 0]; preprocess the curve first",
            targets[k],
            k + 1
        )));
    }
    let targets: Vec<f64> = targets
        .into_iter()
        .map(|t| t.clamp(-FRAC_PI_4, 0.0))
        .collect();
    let mut naturals = vec![t0];
    for l in curve.lengths() {
        naturals.push(naturals.last().unwrap() + l);
    }
    let plan = PlanSpec {
        epsilon,
        curve: curve.clone(),
        naturals,
        turns: targets.clone(),
        targets,
    };
    plan.law().validate().map_err(|e| match e {
        Error::Invalid(m) => Error::invalid(format!("{m}; reduce the scale parameter")),
        other => other,
    })?;
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Relative moment of inertia of the disc.
    pub kappa: f64,
    /// Initial natural parameter over ε; λ(0) = e^{this}.
    pub start_over_epsilon: f64,
    /// Tolerance on each calibrated heading increment.
    pub calibration_tol: f64,
    pub rtol: f64,
    pub max_step: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            kappa: 0.5,
            start_over_epsilon: 3.0,
            calibration_tol: 1e-4,
            rtol: 1e-10,
            max_step: 0.5,
        }
    }
}

impl PlanOptions {
    fn dyn_options(&self) -> DynOptions {
        DynOptions {
            rtol: self.rtol,
            atol: self.rtol * 1e-2,
            max_step: self.max_step,
            ..DynOptions::default()
        }
    }

    fn params(&self) -> DiscParams {
        DiscParams::unit_rate(self.kappa)
    }
}

/// Restart state for the next window. The motion does not depend on the
/// speed scale, and e^{-τ} underflows for long runs, so speed restarts at 1.
fn state_of(s: &Sample) -> DiscState {
    DiscState {
        position: s.position,
        speed: 1.0,
        heading: s.heading,
        ln_lambda: s.ln_lambda,
        tau: s.tau,
    }
}

fn run_window(
    plan: &PlanSpec,
    from: &DiscState,
    k: usize,
    opts: &PlanOptions,
) -> Result<Trajectory> {
    let value = plan.switch_ln_lambda(k);
    let tau_max = from.tau + 2.0 * (value - from.ln_lambda).max(0.0) + 50.0;
    integrate_until(
        from,
        &plan.law(),
        &opts.params(),
        Stop::LnLambda { value, tau_max },
        &opts.dyn_options(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub plan: PlanSpec,
    /// Window runs spent on each turn.
    pub evaluations: Vec<usize>,
}

/// Chooses each turn parameter, in order, so the heading change between
/// consecutive switch values matches the target turn.
pub fn calibrate(plan: &PlanSpec, opts: &PlanOptions) -> Result<Calibration> {
    let mut plan = plan.clone();
    let mut state = plan.start_state();
    let mut evaluations = Vec::new();
    for k in 0..plan.targets.len() {
        let target = plan.targets[k];
        let mut evals = 0;
        let mut eval = |plan: &mut PlanSpec, a: f64| -> Result<(f64, DiscState)> {
            plan.turns[k] = -a;
            evals += 1;
            let tr = run_window(plan, &state, k, opts)?;
            let end = tr.last();
            Ok((end.heading - state.heading - target, state_of(end)))
        };
        if target == 0.0 {
            let (_, s) = eval(&mut plan, 0.0)?;
            state = s;
            evaluations.push(evals);
            continue;
        }
        // g(a) = increment − target decreases with a = |φ|
        let (mut a_lo, mut a_hi) = (0.0, 1.25 * target.abs());
        let (mut g_lo, mut end) = eval(&mut plan, a_lo)?;
        let (mut g_hi, mut end_hi) = eval(&mut plan, a_hi)?;
        while g_hi > 0.0 {
            if a_hi > 8.0 * PI {
                return Err(Error::numeric(format!(
                    "turn at vertex {} cannot reach {target:.6}: bracket exhausted at |phi| = {a_hi:.3}",
                    k + 1
                )));
            }
            a_lo = a_hi;
            g_lo = g_hi;
            end = end_hi;
            a_hi *= 2.0;
            (g_hi, end_hi) = eval(&mut plan, a_hi)?;
        }
        if g_lo < 0.0 {
            return Err(Error::numeric(format!(
                "turn at vertex {} overshoots with no band",
                k + 1
            )));
        }
        // Illinois iteration on the bracket
        let mut best = if g_lo.abs() < g_hi.abs() {
            (a_lo, g_lo, end)
        } else {
            (a_hi, g_hi, end_hi)
        };
        let mut side = 0i8;
        for _ in 0..80 {
            if best.1.abs() < opts.calibration_tol {
                break;
            }
            let mut a = (a_lo * g_hi - a_hi * g_lo) / (g_hi - g_lo);
            if !(a > a_lo && a < a_hi) {
                a = 0.5 * (a_lo + a_hi);
            }
            let (g, s) = eval(&mut plan, a)?;
            if g.abs() < best.1.abs() {
                best = (a, g, s);
            }
            if g > 0.0 {
                a_lo = a;
                g_lo = g;
                if side == 1 {
                    g_hi *= 0.5;
                }
                side = 1;
            } else {
                a_hi = a;
                g_hi = g;
                if side == -1 {
                    g_lo *= 0.5;
                }
                side = -1;
            }
        }
        if best.1.abs() >= opts.calibration_tol {
            return Err(Error::numeric(format!(
                "calibration of the turn at vertex {} stalled with residual {:.3e}",
                k + 1,
                best.1
            )));
        }
        plan.turns[k] = -best.0;
        state = best.2;
        evaluations.push(evals);
    }
    Ok(Calibration { plan, evaluations })
}

/// Symmetric Hausdorff distance between polylines (single points allowed).
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(
            "Hausdorff distance needs two nonempty polylines",
        ));
    }
    Ok(directed(a, b).max(directed(b, a)))
}

fn piece_distance(p: Vec2, poly: &[Vec2], k: usize) -> f64 {
    if poly.len() == 1 {
        p.dist(poly[0])
    } else {
        point_segment_distance(p, poly[k], poly[k + 1])
    }
}

/// Distance to a polyline and the index of the nearest piece.
fn nearest(p: Vec2, poly: &[Vec2]) -> (f64, usize) {
    let n = poly.len().saturating_sub(1).max(1);
    (0..n)
        .map(|k| (piece_distance(p, poly, k), k))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

/// max over a of the distance to b. Along a segment of a the distance to b
/// is 1-Lipschitz, and the distance to any single piece of b is convex, so
/// both bound it from above on a sub-segment; sub-segments are split until
/// no bound exceeds the best value found.
fn directed(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut best: f64 = a.iter().map(|&p| nearest(p, b).0).fold(0.0, f64::max);
    for w in a.windows(2) {
        let (p, q) = (w[0], w[1]);
        let len = p.dist(q);
        let tol = 1e-12 * (1.0 + len);
        let at = |s: f64| p + (q - p) * s;
        let (d0, i0) = nearest(p, b);
        let (d1, i1) = nearest(q, b);
        let mut stack = vec![(0.0, 1.0, d0, d1, i0, i1)];
        while let Some((s0, s1, d0, d1, i0, i1)) = stack.pop() {
            let (x, y) = (at(s0), at(s1));
            let lipschitz = 0.5 * (d0 + d1 + (s1 - s0) * len);
            let convex = [i0, i1]
                .iter()
                .map(|&k| piece_distance(x, b, k).max(piece_distance(y, b, k)))
                .fold(f64::INFINITY, f64::min);
            if lipschitz.min(convex) <= best + tol {
                continue;
            }
            let sm = 0.5 * (s0 + s1);
            let (dm, im) = nearest(at(sm), b);
            best = best.max(dm);
            stack.push((s0, sm, d0, dm, i0, im));
            stack.push((sm, s1, dm, d1, im, i1));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub epsilon: f64,
    /// Segment count of the rewritten curve.
    pub segments: usize,
    /// (m + 1) √ε.
    pub bound: f64,
    pub hausdorff_target: f64,
    pub hausdorff_rewritten: f64,
    pub within_bound: bool,
    pub target_self_intersects: bool,
    pub targets: Vec<f64>,
    pub turns: Vec<f64>,
    /// Disc parameter τ at each switch value.
    pub switches: Vec<f64>,
    /// Heading change between consecutive switches minus the target turn.
    pub turn_errors: Vec<f64>,
    /// Largest gap between the simulated heading and the closed form over
    /// each window.
    pub closed_form_deviation: Vec<f64>,
    pub evaluations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub report: ApproximationReport,
    pub plan: PlanSpec,
    pub trajectory: Trajectory,
    /// Trajectory scaled by ε, comparable with the target.
    pub path: Vec<Vec2>,
}

/// Linear interpolation of (τ, heading) where ln λ first reaches `w`.
fn crossing(samples: &[Sample], w: f64) -> Option<(f64, f64)> {
    let k = samples.iter().position(|s| s.ln_lambda >= w)?;
    if k == 0 {
        return Some((samples[0].tau, samples[0].heading));
    }
    let (a, b) = (&samples[k - 1], &samples[k]);
    let f = (w - a.ln_lambda) / (b.ln_lambda - a.ln_lambda);
    Some((
        a.tau + f * (b.tau - a.tau),
        a.heading + f * (b.heading - a.heading),
    ))
}

/// Rewrite, lay out, calibrate, simulate and measure.
pub fn approximate(curve: &BrokenLine, epsilon: f64, opts: &PlanOptions) -> Result<Approximation> {
    let rewritten = preprocess(curve)?;
    let plan = synthesize(&rewritten, epsilon, opts.start_over_epsilon * epsilon)?;
    let cal = calibrate(&plan, opts)?;
    let plan = cal.plan;
    let start = plan.start_state();
    let trajectory = integrate(
        &start,
        &plan.law(),
        &opts.params(),
        plan.tau_end(),
        &opts.dyn_options(),
    )?;
    let path: Vec<Vec2> = trajectory
        .samples
        .iter()
        .map(|s| s.position * epsilon)
        .collect();
    let s = &trajectory.samples;
    let mut switches = Vec::new();
    let mut turn_errors = Vec::new();
    let mut deviation = Vec::new();
    let (mut prev_tau, mut prev_heading) = (start.tau, start.heading);
    for k in 0..plan.targets.len() {
        let w = plan.switch_ln_lambda(k);
        let (tau, heading) = crossing(s, w)
            .ok_or_else(|| Error::numeric(format!("run ended before vertex {}", k + 1)))?;
        switches.push(tau);
        turn_errors.push(heading - prev_heading - plan.targets[k]);
        let mut dev: f64 = 0.0;
        for x in s.iter().filter(|x| x.tau >= prev_tau && x.tau <= tau) {
            let q = (2.0 * (x.ln_lambda - w)).exp().min(1.0);
            let predicted = prev_heading + theta_closed_form(q, plan.turns[k])?;
            dev = dev.max((x.heading - predicted).abs());
        }
        deviation.push(dev);
        prev_tau = tau;
        prev_heading = heading;
    }
    let m = rewritten.segments();
    let bound = (m as f64 + 1.0) * epsilon.sqrt();
    let hausdorff_target = hausdorff(&path, &curve.vertices)?;
    let report = ApproximationReport {
        epsilon,
        segments: m,
        bound,
        hausdorff_target,
        hausdorff_rewritten: hausdorff(&path, &rewritten.vertices)?,
        within_bound: hausdorff_target <= bound,
        target_self_intersects: curve.self_intersects(),
        targets: plan.targets.clone(),
        turns: plan.turns.clone(),
        switches,
        turn_errors,
        closed_form_deviation: deviation,
        evaluations: cal.evaluations,
    };
    Ok(Approximation {
        report,
        plan,
        trajectory,
        path,
    })
}

/// Target, rewritten curve and achieved path.
pub fn overlay_svg(curve: &BrokenLine, approx: &Approximation) -> String {
    let pts: Vec<Vec2> = curve.vertices.iter().chain(&approx.path).copied().collect();
    let mut svg = crate::svg::Svg::fit(600.0, 600.0, &pts);
    svg.polyline(&curve.vertices, "#999999", 3.0);
    svg.polyline(&approx.plan.curve.vertices, "#4a7bd0", 1.5);
    svg.polyline(&approx.path, "#c0392b", 1.0);
    let r = &approx.report;
    svg.text(
        8.0,
        16.0,
        &format!(
            "eps={} hausdorff={:.5} bound={:.5}",
            r.epsilon, r.hausdorff_target, r.bound
        ),
    );
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pts: &[(f64, f64)]) -> BrokenLine {
        BrokenLine::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let phi = -FRAC_PI_4;
        assert_eq!(theta_closed_form(0.0, phi).unwrap(), 0.0);
        assert_eq!(theta_closed_form(1.0, phi).unwrap(), phi);
        let v = theta_closed_form(0.5, phi).unwrap();
        assert!((v - phi * (1.0 - 1.25 / 2f64.sqrt())).abs() < 1e-14);
        assert!(theta_closed_form(1.5, phi).is_err());
        let mut prev = 0.0;
        for k in 1..=100 {
            let v = theta_closed_form(k as f64 / 100.0, phi).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn admissible_curve_is_unchanged() {
        let c = line(&[(0.0, 0.0), (1.0, 0.0), (1.5, -0.3), (2.0, -0.8)]);
        assert_eq!(preprocess(&c).unwrap(), c);
    }

    #[test]
    fn left_turns_become_right_chains() {
        let d = FRAC_PI_4;
        let c = line(&[(0.0, 0.0), (1.0, 0.0), (1.0 + d.cos(), d.sin())]);
        let p = preprocess(&c).unwrap();
        assert_eq!(p.turns().len(), 7);
        assert!(p.turns().iter().all(|t| (t + FRAC_PI_4).abs() < 1e-12));
        let q = preprocess(&line(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])).unwrap();
        assert_eq!(q.turns().len(), 6);
        assert!(preprocess(&line(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.0)])).is_err());
    }

    #[test]
    fn right_angle_chamfer() {
        let c = line(&[(0.0, 0.0), (1.0, 0.0), (1.0, -1.0)]);
        let p = preprocess(&c).unwrap();
        assert_eq!(p.segments(), 3);
        assert!((hausdorff(&p.vertices, &c.vertices).unwrap() - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn band_layout() {
        let c = line(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0 + FRAC_PI_4.cos(), -FRAC_PI_4.sin()),
        ]);
        // natural parameter starting at 0 would put the first vertex at T = 1
        let mut plan = synthesize(&c, 0.1, 0.3).unwrap();
        plan.naturals = vec![0.0, 1.0, 2.0];
        let b = plan.band(0).unwrap();
        let (lo, _) = b.x_bounds();
        assert!((lo - (std::f64::consts::FRAC_PI_2 - (-10.0f64).exp())).abs() < 1e-15);
        let inner = (1.0 + FRAC_PI_4 * (-10.0f64).exp()) / 0.1;
        assert!((b.ln_inner() + inner).abs() < 1e-12);
        let straight = synthesize(&line(&[(0.0, 0.0), (2.0, 0.0)]), 0.1, 0.3).unwrap();
        assert_eq!(
            straight.law(),
            ScatterLaw::Hybrid(HybridLaw {
                bands: vec![],
                weight: 0.1
            })
        );
        assert!(synthesize(&line(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]), 0.1, 0.3).is_err());
    }

    #[test]
    fn bands_shrink_with_epsilon() {
        let c = line(&[(0.0, 0.0), (1.0, 0.0), (2.0, -0.5), (3.0, -1.5)]);
        let a = synthesize(&c, 0.2, 0.6).unwrap();
        let b = synthesize(&c, 0.1, 0.3).unwrap();
        for k in 0..2 {
            let (x, y) = (a.band(k).unwrap(), b.band(k).unwrap());
            assert!(y.ln_outer < x.ln_outer && y.ln_inner() < x.ln_inner());
        }
    }

    #[test]
    fn hausdorff_basics() {
        let a = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let b = [Vec2::new(0.0, 0.3), Vec2::new(1.0, 0.3)];
        assert!((hausdorff(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        assert!(hausdorff(&a, &[]).is_err());
    }

    #[test]
    fn hausdorff_matches_brute_force() {
        let arc: Vec<Vec2> = (0..=400)
            .map(|k| Vec2::from_angle(PI * k as f64 / 400.0))
            .collect();
        let poly = [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.2, 1.1),
            Vec2::new(-1.0, 0.1),
        ];
        let fast = hausdorff(&poly, &arc).unwrap();
        let dense = |p: &[Vec2], n: usize| -> Vec<Vec2> {
            let mut out = Vec::new();
            for w in p.windows(2) {
                for k in 0..n {
                    out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
                }
            }
            out.push(*p.last().unwrap());
            out
        };
        let (pa, pb) = (dense(&poly, 5000), dense(&arc, 25));
        let brute = |x: &[Vec2], y: &[Vec2]| {
            x.iter()
                .map(|p| y.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let slow = brute(&pa, &pb).max(brute(&pb, &pa));
        assert!((fast - slow).abs() < 1e-4, "{fast} {slow}");
    }

    #[test]
    fn straight_segment_is_exact() {
        let c = line(&[(0.0, 0.0), (1.0, 0.5)]);
        let a = approximate(&c, 0.05, &PlanOptions::default()).unwrap();
        assert!(a.report.hausdorff_target < 1e-8, "{:?}", a.report);
    }

    #[test]
    fn single_turn_calibrates() {
        let c = line(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0 + FRAC_PI_4.cos(), -FRAC_PI_4.sin()),
        ]);
        let a = approximate(&c, 0.05, &PlanOptions::default()).unwrap();
        let r = &a.report;
        assert!(r.turn_errors[0].abs() < 2e-4, "{r:?}");
        assert!((r.turns[0] / r.targets[0] - 1.0).abs() < 0.2, "{r:?}");
        assert!(r.within_bound, "{r:?}");
    }
}
