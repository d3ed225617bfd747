//! Resistance of a rotating rough disc.
//!
//! A scattering law is a measure on the square of (incidence, exit) angles.
//! The three resistance components are its integrals against the pointwise
//! coefficients. Everything except the empirical law is integrated in the
//! variable ζ = arccos(λ cos x), in which the integrands are bounded and
//! smooth. Integrands below are written per unit ζ and, where they grow
//! with λ, divided by λ so they stay finite as λ → ∞.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hollow::INTERVAL_FLOOR;
use crate::measure::EmpiricalMeasure;
use crate::numerics::quad::{self, QuadOptions};

/// Pointwise coefficients (transversal, longitudinal, moment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub t: f64,
    pub l: f64,
    pub i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resistances {
    pub t: f64,
    pub l: f64,
    pub i: f64,
}

impl Resistances {
    /// Dimensional factor (8/3) r ρ V² turning the components into force and moment.
    pub fn scale(radius: f64, density: f64, speed: f64) -> f64 {
        8.0 / 3.0 * radius * density * speed * speed
    }
}

/// Resistances in the form the log-variable dynamics need. `t` may be huge,
/// `i_over_lambda` is R_I / λ which stays bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogResistances {
    pub t: f64,
    pub l: f64,
    pub i_over_lambda: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!(
            "relative angular velocity must exceed 1, got {lambda}"
        )));
    }
    Ok(())
}

/// Smallest incidence angle seen by the rotating disc.
pub fn support_start(lambda: f64) -> f64 {
    (1.0 / lambda).acos()
}

/// ζ(x) = arcsin √(1 − λ² cos² x) on the support.
pub fn zeta(x: f64, lambda: f64) -> f64 {
    let c = lambda * x.cos();
    (1.0 - c * c).max(0.0).sqrt().asin()
}

/// Pointwise coefficients; all zero below the support start.
///
/// At the support start itself the coefficients are singular (integrably)
/// and the result is not finite.
pub fn coeffs(x: f64, y: f64, lambda: f64) -> Result<Coefficients> {
    check_lambda(lambda)?;
    let lim = FRAC_PI_2 + 1e-12;
    if !(x.abs() <= lim && y.abs() <= lim) {
        return Err(Error::invalid(format!(
            "angles must lie in [-pi/2, pi/2], got ({x}, {y})"
        )));
    }
    if x < support_start(lambda) {
        return Ok(Coefficients {
            t: 0.0,
            l: 0.0,
            i: 0.0,
        });
    }
    let z = zeta(x, lambda);
    let (sz, cz) = z.sin_cos();
    let sx = x.sin();
    let a = lambda.powi(3) * sx.powi(3) + 3.0 * lambda * sx * sz * sz;
    let b = 3.0 * lambda * lambda * sx * sx * sz + sz.powi(3);
    let (sh, ch) = ((x - y) / 2.0).sin_cos();
    Ok(Coefficients {
        t: 3.0 * ch / sz * (a * cz * ch - b * sz * sh),
        l: -3.0 * ch / sz * (a * cz * sh + b * sz * ch),
        i: -1.5 * a / sz * (sx + y.sin()),
    })
}

/// Integrands per unit ζ against ½ cos x dx, with ρ = 1/λ.
/// `t` and `i` are divided by λ, `l` is not.
mod integrand {
    use super::Coefficients;

    fn parts(zeta: f64, rho: f64) -> (f64, f64, f64) {
        let (s, k) = zeta.sin_cos();
        let big_s = (1.0 - k * k * rho * rho).max(0.0).sqrt();
        (k, s, big_s)
    }

    pub fn retro(zeta: f64, rho: f64) -> Coefficients {
        let (k, s, sx) = parts(zeta, rho);
        let r2 = rho * rho;
        Coefficients {
            t: 1.5 * k * k * (sx * sx + 3.0 * s * s * r2),
            l: -1.5 * k * s * s / sx * (3.0 * sx * sx + s * s * r2),
            i: -1.5 * k * (sx.powi(3) + 3.0 * sx * s * s * r2),
        }
    }

    pub fn specular(zeta: f64, rho: f64) -> Coefficients {
        let (k, s, sx) = parts(zeta, rho);
        let r2 = rho * rho;
        let a = sx.powi(3) + 3.0 * sx * s * s * r2;
        let b = 3.0 * sx * sx * s + s.powi(3) * r2;
        Coefficients {
            t: 1.5 * k * k * r2 / sx * (a * k * k - b * s * sx),
            l: -1.5 * k.powi(3) * a - 1.5 * k.powi(3) * b * s * r2 / sx,
            i: 0.0,
        }
    }

    /// Retro minus specular; the transversal part is the brace form.
    pub fn difference(zeta: f64, rho: f64) -> Coefficients {
        let (k, s, sx) = parts(zeta, rho);
        let r = retro(zeta, rho);
        let p = specular(zeta, rho);
        let s2 = s * s * rho * rho;
        Coefficients {
            t: 1.5 * k * k * (sx.powi(4) + 6.0 * s2 * sx * sx + s2 * s2),
            l: r.l - p.l,
            i: r.i,
        }
    }
}

/// Quadrature used for the smooth ζ integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Adaptive,
    GaussLegendre(usize),
}

fn integrate3(f: impl Fn(f64) -> Coefficients, a: f64, b: f64, rule: Rule) -> Result<Coefficients> {
    match rule {
        Rule::Adaptive => {
            let o = QuadOptions::default();
            Ok(Coefficients {
                t: quad::integrate(|z| f(z).t, a, b, o)?.value,
                l: quad::integrate(|z| f(z).l, a, b, o)?.value,
                i: quad::integrate(|z| f(z).i, a, b, o)?.value,
            })
        }
        Rule::GaussLegendre(n) => {
            let g = quad::gauss_legendre(n);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            let mut acc = Coefficients {
                t: 0.0,
                l: 0.0,
                i: 0.0,
            };
            for (x, w) in g.0.iter().zip(&g.1) {
                let v = f(c + h * x);
                acc.t += w * v.t;
                acc.l += w * v.l;
                acc.i += w * v.i;
            }
            Ok(Coefficients {
                t: acc.t * h,
                l: acc.l * h,
                i: acc.i * h,
            })
        }
    }
}

/// A retro band x ∈ [π/2 − u_outer, π/2 − u_inner] near grazing incidence,
/// stored through logarithms so that bands of width e^{-800} survive:
/// `ln_outer` = ln u_outer and `ln_log_ratio` = ln ln(u_outer / u_inner).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetroBand {
    pub ln_outer: f64,
    pub ln_log_ratio: f64,
}

impl RetroBand {
    pub fn from_x(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && hi < FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "band [{lo}, {hi}] must satisfy lo < hi < pi/2"
            )));
        }
        let (uo, ui) = (FRAC_PI_2 - lo, FRAC_PI_2 - hi);
        Ok(RetroBand {
            ln_outer: uo.ln(),
            ln_log_ratio: (uo.ln() - ui.ln()).ln(),
        })
    }

    pub fn log_ratio(&self) -> f64 {
        self.ln_log_ratio.exp()
    }

    pub fn ln_inner(&self) -> f64 {
        self.ln_outer - self.log_ratio()
    }

    /// Bounds in x. Very narrow bands collapse to a point in f64.
    pub fn x_bounds(&self) -> (f64, f64) {
        (
            FRAC_PI_2 - self.ln_outer.exp(),
            FRAC_PI_2 - self.ln_inner().exp(),
        )
    }

    /// ln λ at which the support start reaches the lower and upper band edge.
    /// A band narrower than [`EDGE_CUTOFF`] drops out slightly early; see
    /// [`band_contribution`].
    pub fn kinks(&self) -> (f64, f64) {
        let enter = -ln_sin(self.ln_outer);
        if self.log_ratio() < EDGE_CUTOFF {
            let k = enter - EDGE_CUTOFF;
            return (k, k);
        }
        (enter, -ln_sin(self.ln_inner()))
    }
}

/// Distance in ln λ from its exit at which a narrow band stops acting.
pub const EDGE_CUTOFF: f64 = 1e-10;

/// ln sin u from ln u.
pub fn ln_sin(ln_u: f64) -> f64 {
    if ln_u < -20.0 {
        ln_u
    } else {
        ln_u.exp().sin().ln()
    }
}

/// ζ as a function of a = −ln(λ cos x) ≥ 0.
fn zeta_of_a(a: f64) -> f64 {
    (2.0 * a).exp_m1().sqrt().atan()
}

fn combine(w: f64, v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (w + v.abs().ln()).exp()
    }
}

/// Retro-minus-specular contribution of one band at λ = e^w, in the
/// components of [`LogResistances`].
pub fn band_contribution(band: &RetroBand, w: f64, rule: Rule) -> Result<LogResistances> {
    let rho = (-w).exp();
    let a_in = -(w + ln_sin(band.ln_outer));
    let narrow_exact = band.ln_outer < -20.0;
    // the width may underflow even as a logarithm's exponent, so branch on ln Δa
    let ln_da = if narrow_exact {
        band.ln_log_ratio
    } else {
        (ln_sin(band.ln_outer) - ln_sin(band.ln_inner())).ln()
    };
    let da = ln_da.exp();
    if !(ln_da > f64::NEG_INFINITY) || a_in + da <= 0.0 {
        return Ok(LogResistances {
            t: 0.0,
            l: 0.0,
            i_over_lambda: 0.0,
        });
    }
    // A narrow band close to the support edge drives the heading rate like
    // a^{-1/2}, which no step control resolves once a nears the resolution
    // of w. Its last stretch is dropped; the heading lost is about
    // 2 R_T √a at the cutoff.
    if da < EDGE_CUTOFF && a_in < EDGE_CUTOFF {
        return Ok(LogResistances {
            t: 0.0,
            l: 0.0,
            i_over_lambda: 0.0,
        });
    }
    if a_in > 0.0 && ln_da < (1e-6 * a_in).ln() {
        // midpoint rule in a; dζ/da = 1/√(e^{2a} − 1)
        let amid = a_in + 0.5 * da;
        let ln_dz = ln_da - 0.5 * (2.0 * amid).exp_m1().ln();
        let f = integrand::difference(zeta_of_a(amid), rho);
        let dz = ln_dz.exp();
        return Ok(LogResistances {
            t: combine(w + ln_dz, f.t),
            l: f.l * dz,
            i_over_lambda: f.i * dz,
        });
    }
    let (lo, hi) = (a_in.max(0.0), a_in + da);
    if !(hi > lo) {
        return Ok(LogResistances {
            t: 0.0,
            l: 0.0,
            i_over_lambda: 0.0,
        });
    }
    let (za, zb) = (zeta_of_a(lo), zeta_of_a(hi));
    let v = integrate3(|z| integrand::difference(z, rho), za, zb, rule)?;
    Ok(LogResistances {
        t: combine(w, v.t),
        l: v.l,
        i_over_lambda: v.i,
    })
}

/// Weighted hybrid law: `weight` × (retro on the bands, specular elsewhere)
/// + (1 − weight) × specular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridLaw {
    pub bands: Vec<RetroBand>,
    pub weight: f64,
}

impl HybridLaw {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::invalid(format!(
                "hybrid weight must lie in [0, 1], got {}",
                self.weight
            )));
        }
        let ceiling = (FRAC_PI_2 - INTERVAL_FLOOR).ln();
        for (k, b) in self.bands.iter().enumerate() {
            if !(b.ln_outer.is_finite() && b.ln_log_ratio.is_finite()) {
                return Err(Error::invalid(format!("band {k} is not finite")));
            }
            if b.ln_outer >= ceiling {
                return Err(Error::invalid(format!(
                    "band {k} starts below the admissible incidence 5pi/14"
                )));
            }
            if let Some(next) = self.bands.get(k + 1) {
                if !(next.ln_outer < b.ln_inner()) {
                    return Err(Error::invalid(format!(
                        "bands {k} and {} overlap or are out of order",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Band bounds in x (for display; narrow bands collapse).
    pub fn x_bands(&self) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| b.x_bounds()).collect()
    }

    /// Whether x lies in a band (resolved in u = π/2 − x).
    pub fn contains(&self, x: f64) -> bool {
        let u = FRAC_PI_2 - x;
        if u <= 0.0 {
            return false;
        }
        let lu = u.ln();
        self.bands
            .iter()
            .any(|b| lu <= b.ln_outer && lu >= b.ln_inner())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScatterLaw {
    Specular,
    Retro,
    Hybrid(HybridLaw),
    Empirical(EmpiricalMeasure),
}

impl ScatterLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScatterLaw::Hybrid(h) => h.validate(),
            ScatterLaw::Empirical(m) => m.validate(),
            _ => Ok(()),
        }
    }

    /// ln λ values where the resistances have kinks.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            ScatterLaw::Hybrid(h) => h
                .bands
                .iter()
                .flat_map(|b| {
                    let (p, q) = b.kinks();
                    [p, q]
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

fn specular_l(rho: f64, rule: Rule) -> Result<f64> {
    let f = |z: f64| integrand::specular(z, rho).l;
    match rule {
        Rule::Adaptive => Ok(quad::integrate(f, 0.0, FRAC_PI_2, QuadOptions::default())?.value),
        Rule::GaussLegendre(n) => Ok(quad::gauss_legendre_integrate(
            f,
            0.0,
            FRAC_PI_2,
            &quad::gauss_legendre(n),
        )),
    }
}

/// Resistances at λ = e^w without forming λ. The transversal component of
/// the specular background is its exact value 0.
pub fn log_resistances(law: &ScatterLaw, w: f64) -> Result<LogResistances> {
    log_resistances_with(law, w, Rule::Adaptive)
}

pub fn log_resistances_with(law: &ScatterLaw, w: f64, rule: Rule) -> Result<LogResistances> {
    if !(w > 0.0) {
        return Err(Error::numeric(format!(
            "relative angular velocity left (1, inf): ln lambda = {w}"
        )));
    }
    let rho = (-w).exp();
    match law {
        ScatterLaw::Specular => Ok(LogResistances {
            t: 0.0,
            l: specular_l(rho, rule)?,
            i_over_lambda: 0.0,
        }),
        ScatterLaw::Retro => {
            let v = integrate3(|z| integrand::retro(z, rho), 0.0, FRAC_PI_2, rule)?;
            Ok(LogResistances {
                t: combine(w, v.t),
                l: v.l,
                i_over_lambda: v.i,
            })
        }
        ScatterLaw::Hybrid(h) => {
            let mut acc = LogResistances {
                t: 0.0,
                l: specular_l(rho, rule)?,
                i_over_lambda: 0.0,
            };
            for b in &h.bands {
                let c = band_contribution(b, w, rule)?;
                acc.t += h.weight * c.t;
                acc.l += h.weight * c.l;
                acc.i_over_lambda += h.weight * c.i_over_lambda;
            }
            Ok(acc)
        }
        ScatterLaw::Empirical(m) => {
            let lambda = w.exp();
            let r = empirical(m, lambda)?;
            Ok(LogResistances {
                t: r.t,
                l: r.l,
                i_over_lambda: r.i / lambda,
            })
        }
    }
}

/// R_T, R_L, R_I of a law at λ.
pub fn resistances(law: &ScatterLaw, lambda: f64) -> Result<Resistances> {
    resistances_with(law, lambda, Rule::Adaptive)
}

pub fn resistances_with(law: &ScatterLaw, lambda: f64, rule: Rule) -> Result<Resistances> {
    check_lambda(lambda)?;
    let rho = 1.0 / lambda;
    match law {
        ScatterLaw::Specular => {
            let v = integrate3(|z| integrand::specular(z, rho), 0.0, FRAC_PI_2, rule)?;
            Ok(Resistances {
                t: lambda * v.t,
                l: v.l,
                i: 0.0,
            })
        }
        ScatterLaw::Empirical(m) => empirical(m, lambda),
        _ => {
            let r = log_resistances_with(law, lambda.ln(), rule)?;
            Ok(Resistances {
                t: r.t,
                l: r.l,
                i: r.i_over_lambda * lambda,
            })
        }
    }
}

/// Integral over [lo, hi] ∩ support of a function with an inverse square
/// root singularity at the support start, via x = x₀ + s².
fn support_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, x0: f64) -> Result<f64> {
    let o = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_panels: 2000,
    };
    let lo = lo.max(x0);
    if hi <= lo {
        return Ok(0.0);
    }
    if lo - x0 < 1e-3 {
        let (sa, sb) = ((lo - x0).sqrt(), (hi - x0).sqrt());
        Ok(quad::integrate(|s| 2.0 * s * f(x0 + s * s), sa, sb, o)?.value)
    } else {
        Ok(quad::integrate(&f, lo, hi, o)?.value)
    }
}

/// Σ_j m_j c(x, y_j) for exit-angle moments m0 = Σ m_j, mc = Σ m_j cos y_j,
/// ms = Σ m_j sin y_j. The coefficients are linear in (1, cos y, sin y).
fn coeff_moments(x: f64, lambda: f64, m0: f64, mc: f64, ms: f64) -> Coefficients {
    let z = zeta(x, lambda);
    let (sz, cz) = z.sin_cos();
    let (sx, cx) = x.sin_cos();
    let a = lambda.powi(3) * sx.powi(3) + 3.0 * lambda * sx * sz * sz;
    let b = 3.0 * lambda * lambda * sx * sx * sz + sz.powi(3);
    // Σ m cos²((x−y)/2) and Σ m sin((x−y)/2) cos((x−y)/2)
    let cc = 0.5 * (m0 + cx * mc + sx * ms);
    let sc = 0.5 * (sx * mc - cx * ms);
    Coefficients {
        t: 3.0 / sz * (a * cz * cc - b * sz * sc),
        l: -3.0 / sz * (a * cz * sc + b * sz * cc),
        i: -1.5 * a / sz * (sx * m0 + ms),
    }
}

/// Resistances of an empirical histogram. Within an incidence bin the mass
/// is spread in proportion to cos x; the exit angle sits at the bin centre.
pub fn empirical(m: &EmpiricalMeasure, lambda: f64) -> Result<Resistances> {
    check_lambda(lambda)?;
    if m.total == 0 {
        return Err(Error::invalid("empirical measure is empty"));
    }
    let x0 = support_start(lambda);
    let k = m.bins;
    let width = std::f64::consts::PI / k as f64;
    let edge = |i: usize| -FRAC_PI_2 + i as f64 * width;
    let mut acc = Resistances {
        t: 0.0,
        l: 0.0,
        i: 0.0,
    };
    for i in 0..k {
        let (xa, xb) = (edge(i), edge(i + 1).min(FRAC_PI_2));
        if xb <= x0 {
            continue;
        }
        let (mut m0, mut mc, mut ms) = (0.0, 0.0, 0.0);
        for j in 0..k {
            let c = m.count(i, j) as f64;
            let y = edge(j) + 0.5 * width;
            m0 += c;
            mc += c * y.cos();
            ms += c * y.sin();
        }
        if m0 == 0.0 {
            continue;
        }
        let p = 1.0 / m.total as f64 / (xb.sin() - xa.sin());
        let at = |x: f64| coeff_moments(x.min(FRAC_PI_2), lambda, m0, mc, ms);
        acc.t += p * support_integral(|x| at(x).t * x.cos(), xa, xb, x0)?;
        acc.l += p * support_integral(|x| at(x).l * x.cos(), xa, xb, x0)?;
        acc.i += p * support_integral(|x| at(x).i * x.cos(), xa, xb, x0)?;
    }
    Ok(acc)
}

/// R_T of "retro on the x-intervals, specular elsewhere" evaluated two
/// ways: from the pointwise coefficients in x, and from the brace form in ζ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransversalForms {
    pub x_form: f64,
    pub zeta_form: f64,
}

pub fn r_t_hybrid(intervals: &[(f64, f64)], lambda: f64) -> Result<TransversalForms> {
    check_lambda(lambda)?;
    let x0 = support_start(lambda);
    let mut xf = 0.0;
    let mut zf = 0.0;
    for &(lo, hi) in intervals {
        if !(lo <= hi && lo >= 0.0 && hi <= FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "interval [{lo}, {hi}] must lie in [0, pi/2]"
            )));
        }
        let diff = |x: f64| {
            let d = coeffs(x, x, lambda).map(|c| c.t).unwrap_or(0.0)
                - coeffs(x, -x, lambda).map(|c| c.t).unwrap_or(0.0);
            d * x.cos()
        };
        xf += 0.5 * support_integral(diff, lo, hi, x0)?;
        let (a, b) = (lo.max(x0), hi);
        if b > a {
            let za = if lo <= x0 {
                0.0
            } else {
                (lambda * a.cos()).min(1.0).acos()
            };
            let zb = (lambda * b.cos()).min(1.0).acos();
            zf += r_t_zeta_interval(za, zb, lambda)?;
        }
    }
    Ok(TransversalForms {
        x_form: xf,
        zeta_form: zf,
    })
}

/// The brace {(λ² − cos²ζ)² + 6 sin²ζ (λ² − cos²ζ) + sin⁴ζ}.
pub fn brace(zeta: f64, lambda: f64) -> f64 {
    let (s, c) = zeta.sin_cos();
    let d = lambda * lambda - c * c;
    d * d + 6.0 * s * s * d + s.powi(4)
}

/// ∫ 3/(2λ³) {…} cos²ζ dζ over [za, zb].
pub fn r_t_zeta_interval(za: f64, zb: f64, lambda: f64) -> Result<f64> {
    let o = QuadOptions::default();
    let l3 = lambda.powi(3);
    Ok(quad::integrate(|z| 1.5 / l3 * brace(z, lambda) * z.cos().powi(2), za, zb, o)?.value)
}
