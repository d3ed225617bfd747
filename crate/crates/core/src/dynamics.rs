//! Planar motion of a rotating rough disc in a rarefied medium.
//!
//! The natural parameter τ advances the centre at the constant rate
//! 3M/(8ρr) per unit τ. In τ the heading obeys θ' = −R_T, the relative
//! angular velocity λ' = βR_I − λR_L and the speed V' = V R_L, where R_L < 0
//! is the drag. λ and V are carried through their logarithms because λ grows
//! like e^τ. Physical time is carried as z = t V / rate, which satisfies
//! z' = 1 + z R_L and stays bounded; then ln t = ln z + ln rate − ln V.
//!
//! Integration runs in the arc length of the (τ, θ) graph, so the steep but
//! integrable heading rate before a narrow band leaves the support does not
//! stall the step size. Each band edge is a kink of the right-hand side and
//! is located as an event.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom2d::Vec2;
use crate::numerics::ode::{self, Event, OdeOptions};
use crate::resistance::{log_resistances, ScatterLaw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscParams {
    pub mass: f64,
    pub radius: f64,
    /// Density of the medium.
    pub density: f64,
    /// Moment of inertia over M r², in (0, 1].
    pub kappa: f64,
}

impl DiscParams {
    /// Parameters for which the centre moves one unit per unit τ.
    pub fn unit_rate(kappa: f64) -> Self {
        DiscParams {
            mass: 8.0 / 3.0,
            radius: 1.0,
            density: 1.0,
            kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.mass) && ok(self.radius) && ok(self.density)) {
            return Err(Error::invalid(
                "mass, radius and medium density must be positive",
            ));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::invalid(format!(
                "relative moment of inertia must lie in (0, 1], got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.kappa
    }

    /// dS/dτ = 3M/(8ρr).
    pub fn path_rate(&self) -> f64 {
        3.0 * self.mass / (8.0 * self.density * self.radius)
    }
}

/// Initial condition. λ is given through `ln_lambda` so that e^{800} is
/// representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscState {
    pub position: Vec2,
    pub speed: f64,
    pub heading: f64,
    pub ln_lambda: f64,
    pub tau: f64,
}

impl DiscState {
    pub fn validate(&self) -> Result<()> {
        if !(self.position.is_finite() && self.heading.is_finite() && self.tau.is_finite()) {
            return Err(Error::invalid("initial state must be finite"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::invalid(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.ln_lambda > 0.0 && self.ln_lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "relative angular velocity must exceed 1 (ln lambda = {})",
                self.ln_lambda
            )));
        }
        Ok(())
    }
}

/// Right-hand side in τ: (dθ/dτ, dlnλ/dτ, dlnV/dτ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub heading: f64,
    pub ln_lambda: f64,
    pub ln_speed: f64,
}

pub fn rhs(law: &ScatterLaw, params: &DiscParams, ln_lambda: f64) -> Result<Rates> {
    let r = log_resistances(law, ln_lambda)?;
    Ok(Rates {
        heading: -r.t,
        ln_lambda: params.beta() * r.i_over_lambda - r.l,
        ln_speed: r.l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step in the integration variable; bounds the polyline error
    /// of the sampled path.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for DynOptions {
    fn default() -> Self {
        DynOptions {
            rtol: 1e-9,
            atol: 1e-11,
            max_step: 0.05,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub position: Vec2,
    pub heading: f64,
    pub ln_lambda: f64,
    pub ln_speed: f64,
    /// ln of the physical time since the start (−∞ at the start).
    pub ln_time: f64,
}

impl Sample {
    pub fn speed(&self) -> f64 {
        self.ln_speed.exp()
    }
    pub fn lambda(&self) -> f64 {
        self.ln_lambda.exp()
    }
    pub fn time(&self) -> f64 {
        self.ln_time.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Kinks passed, as (index into [`ScatterLaw::kinks`], state there).
    pub kinks: Vec<(usize, Sample)>,
    pub steps: usize,
}

/// Where a run ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Tau(f64),
    /// When ln λ first reaches the value, or at τ = `tau_max` if sooner.
    LnLambda {
        value: f64,
        tau_max: f64,
    },
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }

    pub fn path(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.position).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "tau",
            "t",
            "x",
            "y",
            "V",
            "theta",
            "lambda",
            "ln_lambda",
            "ln_V",
            "ln_t",
        ])?;
        for s in &self.samples {
            out.write_record([
                format!("{:?}", s.tau),
                format!("{:?}", s.time()),
                format!("{:?}", s.position.x),
                format!("{:?}", s.position.y),
                format!("{:?}", s.speed()),
                format!("{:?}", s.heading),
                format!("{:?}", s.lambda()),
                format!("{:?}", s.ln_lambda),
                format!("{:?}", s.ln_speed),
                format!("{:?}", s.ln_time),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

// state layout
const TAU: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const TH: usize = 3;
const W: usize = 4;
const NU: usize = 5;
const Z: usize = 6;
const FIRST_KINK: usize = 3;

/// Integrates from `start` until τ = `tau_end`.
pub fn integrate(
    start: &DiscState,
    law: &ScatterLaw,
    params: &DiscParams,
    tau_end: f64,
    opts: &DynOptions,
) -> Result<Trajectory> {
    integrate_until(start, law, params, Stop::Tau(tau_end), opts)
}

pub fn integrate_until(
    start: &DiscState,
    law: &ScatterLaw,
    params: &DiscParams,
    stop: Stop,
    opts: &DynOptions,
) -> Result<Trajectory> {
    start.validate()?;
    params.validate()?;
    law.validate()?;
    let (tau_end, w_stop) = match stop {
        Stop::Tau(t) => (t, f64::INFINITY),
        Stop::LnLambda { value, tau_max } => (tau_max, value),
    };
    if !(tau_end > start.tau) {
        return Err(Error::invalid("end of the run must come after its start"));
    }
    let rate = params.path_rate();
    let f = |_: f64, y: &[f64], d: &mut [f64]| -> Result<()> {
        let r = rhs(law, params, y[W])?;
        let g = (1.0 + r.heading * r.heading).sqrt();
        d[TAU] = 1.0 / g;
        d[X] = rate * y[TH].cos() / g;
        d[Y] = rate * y[TH].sin() / g;
        d[TH] = r.heading / g;
        d[W] = r.ln_lambda / g;
        d[NU] = r.ln_speed / g;
        d[Z] = (1.0 + y[Z] * r.ln_speed) / g;
        Ok(())
    };
    let mut events = vec![
        Event::new(true, move |_, y: &[f64]| y[TAU] - tau_end),
        Event::new(true, |_, y: &[f64]| y[W]),
        Event::new(true, move |_, y: &[f64]| {
            if w_stop.is_finite() {
                y[W] - w_stop
            } else {
                -1.0
            }
        }),
    ];
    for k in law.kinks() {
        events.push(Event::new(false, move |_, y: &[f64]| y[W] - k));
    }
    let y0 = [
        start.tau,
        start.position.x,
        start.position.y,
        start.heading,
        start.ln_lambda,
        0.0,
        0.0,
    ];
    // speed is carried relative to its start so step control ignores its scale
    let nu0 = start.speed.ln();
    let ln_rate = rate.ln();
    let mut samples: Vec<Sample> = Vec::new();
    let mut kinks = Vec::new();
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h0: opts.max_step.min(1e-3),
        max_step: opts.max_step,
        min_step: 1e-13,
        max_steps: opts.max_steps,
    };
    let end = ode::solve(f, 0.0, &y0, f64::MAX, &ode_opts, &events, |_, y, ev| {
        samples.push(Sample {
            tau: y[TAU],
            position: Vec2::new(y[X], y[Y]),
            heading: y[TH],
            ln_lambda: y[W],
            ln_speed: nu0 + y[NU],
            ln_time: y[Z].ln() + ln_rate - nu0 - y[NU],
        });
        if let Some(k) = ev.filter(|&k| k >= FIRST_KINK) {
            kinks.push((k - FIRST_KINK, *samples.last().unwrap()));
        }
    })?;
    match end.event {
        Some(0) => {
            // land exactly on the requested end
            if let Some(s) = samples.last_mut() {
                s.tau = tau_end;
            }
            Ok(Trajectory {
                samples,
                kinks,
                steps: end.steps,
            })
        }
        Some(2) => Ok(Trajectory {
            samples,
            kinks,
            steps: end.steps,
        }),
        Some(1) => Err(Error::numeric(format!(
            "relative angular velocity fell to 1 at tau = {}",
            end.y[TAU]
        ))),
        _ => Err(Error::numeric(
            "integration stopped before the end of the run",
        )),
    }
}
