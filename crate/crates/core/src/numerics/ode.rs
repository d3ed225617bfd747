//! Dormand–Prince 5(4) with dense output and event location.
//!
//! Events are located on the cubic Hermite interpolant by bisection, then the
//! integrator re-steps exactly to the event so the state there carries the
//! full step accuracy. A non-terminal event restarts the integration at the
//! event point, which is what right-hand sides with kinks need.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h0: 1e-3,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

pub struct Event<'a> {
    pub g: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    pub terminal: bool,
}

impl<'a> Event<'a> {
    pub fn new(terminal: bool, g: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        Event {
            g: Box::new(g),
            terminal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeEnd {
    pub s: f64,
    pub y: Vec<f64>,
    /// Index of the terminal event that stopped the run, if any.
    pub event: Option<usize>,
    pub steps: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Step {
    y: Vec<f64>,
    f: Vec<f64>,
    err: f64,
}

fn try_step<F>(
    rhs: &mut F,
    s: f64,
    y: &[f64],
    f0: &[f64],
    h: f64,
    opts: &OdeOptions,
) -> Result<Step>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = vec![f0.to_vec()];
    let mut tmp = vec![0.0; n];
    for i in 1..7 {
        for j in 0..n {
            let mut acc = 0.0;
            for (m, km) in k.iter().enumerate() {
                acc += A[i][m] * km[j];
            }
            tmp[j] = y[j] + h * acc;
        }
        let mut ki = vec![0.0; n];
        rhs(s + C[i] * h, &tmp, &mut ki)?;
        if ki.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite derivative at s = {}",
                s + C[i] * h
            )));
        }
        k.push(ki);
    }
    // stage 7 is evaluated at the fifth-order solution (FSAL)
    let ynew = tmp;
    let mut err = 0.0f64;
    for j in 0..n {
        let mut e = 0.0;
        for (m, km) in k.iter().enumerate() {
            e += E[m] * km[j];
        }
        let sc = opts.atol + opts.rtol * y[j].abs().max(ynew[j].abs());
        err = err.max((h * e / sc).abs());
    }
    Ok(Step {
        y: ynew,
        f: k.pop().unwrap(),
        err,
    })
}

/// Locates the root of an event on genuine re-steps from `s0` (Illinois
/// method), returning the first state known to lie past the crossing.
#[allow(clippy::too_many_arguments)]
fn refine_event<F>(
    rhs: &mut F,
    ev: &Event,
    s0: f64,
    y0: &[f64],
    f0: &[f64],
    g0: f64,
    s1: f64,
    full: &Step,
    guess: f64,
    opts: &OdeOptions,
) -> Result<(f64, Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let (mut a, mut ga) = (s0, g0);
    let (mut b, mut gb) = (s1, (ev.g)(s1, &full.y));
    let mut best = (s1, full.y.clone(), full.f.clone());
    let mut x = guess;
    let mut side = 0i8;
    for _ in 0..60 {
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let st = try_step(rhs, s0, y0, f0, x - s0, opts)?;
        let gx = (ev.g)(x, &st.y);
        if gx.signum() == g0.signum() && gx != 0.0 {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            best = (x, st.y, st.f);
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if gx == 0.0 || b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        x = (a * gb - b * ga) / (gb - ga);
    }
    Ok(best)
}

fn hermite(
    s0: f64,
    y0: &[f64],
    f0: &[f64],
    s1: f64,
    y1: &[f64],
    f1: &[f64],
    s: f64,
    out: &mut [f64],
) {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    for j in 0..out.len() {
        out[j] = h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j];
    }
}

/// Integrates `y' = rhs(s, y)` from `s0` to `s_end` (or a terminal event).
///
/// `observer` sees every accepted point, including event points. An error
/// from `rhs` during a trial step counts as a rejection; it is propagated
/// only once the step size has shrunk to `min_step`.
pub fn solve<F, O>(
    mut rhs: F,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &OdeOptions,
    events: &[Event],
    mut observer: O,
) -> Result<OdeEnd>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(f64, &[f64], Option<usize>),
{
    if !(s_end > s0) {
        return Err(Error::invalid("integration interval must be increasing"));
    }
    let n = y0.len();
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    rhs(s, &y, &mut f)?;
    observer(s, &y, None);
    let mut h = opts.h0.min(opts.max_step).min(s_end - s0);
    let mut steps = 0;
    let mut rejected = 0;
    let mut gv: Vec<f64> = events.iter().map(|e| (e.g)(s, &y)).collect();
    let mut muted: Vec<bool> = gv.iter().map(|g| *g == 0.0).collect();
    let mut buf = vec![0.0; n];
    loop {
        if steps >= opts.max_steps {
            return Err(Error::numeric(format!(
                "step limit {} reached at s = {s}",
                opts.max_steps
            )));
        }
        let last = s + h >= s_end;
        if last {
            h = s_end - s;
        }
        let st = match try_step(&mut rhs, s, &y, &f, h, opts) {
            Ok(st) if st.err <= 1.0 => st,
            Ok(st) => {
                rejected += 1;
                h *= (0.9 * st.err.powf(-0.2)).clamp(0.1, 0.9);
                if h < opts.min_step {
                    return Err(Error::numeric(format!("step size underflow at s = {s}")));
                }
                continue;
            }
            Err(e) => {
                rejected += 1;
                h *= 0.25;
                if h < opts.min_step {
                    return Err(e);
                }
                continue;
            }
        };
        steps += 1;
        let s1 = if last { s_end } else { s + h };
        // earliest sign change among events
        let mut hit: Option<(usize, f64)> = None;
        for (i, ev) in events.iter().enumerate() {
            let g1 = (ev.g)(s1, &st.y);
            let g0 = gv[i];
            if muted[i] || g0 == 0.0 || g0.signum() == g1.signum() {
                continue;
            }
            let (mut lo, mut hi) = (s, s1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                hermite(s, &y, &f, s1, &st.y, &st.f, mid, &mut buf);
                if (ev.g)(mid, &buf).signum() == g0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if hit.map_or(true, |(_, t)| hi < t) {
                hit = Some((i, hi));
            }
        }
        if let Some((i, guess)) = hit {
            let (se, ye, fe) =
                refine_event(&mut rhs, &events[i], s, &y, &f, gv[i], s1, &st, guess, opts)?;
            s = se;
            y = ye;
            f = fe;
            observer(s, &y, Some(i));
            if events[i].terminal {
                return Ok(OdeEnd {
                    s,
                    y,
                    event: Some(i),
                    steps,
                    rejected,
                });
            }
            // events crossed between the step start and the restart state fire
            // here too; terminal ones first
            let crossed: Vec<usize> = (0..events.len())
                .filter(|&k| {
                    k != i
                        && !muted[k]
                        && gv[k] != 0.0
                        && (events[k].g)(s, &y).signum() != gv[k].signum()
                })
                .collect();
            if let Some(&k) = crossed.iter().find(|&&k| events[k].terminal) {
                observer(s, &y, Some(k));
                return Ok(OdeEnd {
                    s,
                    y,
                    event: Some(k),
                    steps,
                    rejected,
                });
            }
            for &k in &crossed {
                observer(s, &y, Some(k));
            }
            // restart: fresh derivative, fired events are muted until they move away
            rhs(s, &y, &mut f)?;
            for (k, ev) in events.iter().enumerate() {
                gv[k] = (ev.g)(s, &y);
                muted[k] = k == i || crossed.contains(&k) || gv[k] == 0.0;
            }
            h = h.max(opts.min_step * 4.0);
            continue;
        }
        s = s1;
        y = st.y;
        f = st.f;
        observer(s, &y, None);
        for (k, ev) in events.iter().enumerate() {
            let g = (ev.g)(s, &y);
            let leaving = g.signum() == gv[k].signum() && g.abs() > gv[k].abs();
            if muted[k] && (leaving || (gv[k] == 0.0 && g != 0.0)) {
                muted[k] = false;
            }
            gv[k] = g;
        }
        if last {
            return Ok(OdeEnd {
                s,
                y,
                event: None,
                steps,
                rejected,
            });
        }
        let fac = if st.err == 0.0 {
            5.0
        } else {
            (0.9 * st.err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * fac).min(opts.max_step);
    }
}
