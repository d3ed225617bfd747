//! Scattering measures: sampling the invariant entry measure, histograms of
//! (entry angle, exit angle) pairs, symmetry and marginal checks, and the
//! retroreflection and quasi-elastic statistics of particular hollows.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hollow::Hollow;
use crate::resistance::{HybridLaw, ScatterLaw};
use crate::trace::{sample_entry, sample_rng, trace_path, Entry, Outcome, Status};

pub const DEFAULT_BINS: usize = 90;

/// Inverse CDF of the angular part of the invariant measure.
pub fn angle_from_uniform(u: f64) -> f64 {
    (2.0 * u - 1.0).clamp(-1.0, 1.0).asin()
}

/// CDF of the angular part, (sin φ + 1)/2.
pub fn angle_cdf(phi: f64) -> f64 {
    0.5 * (phi.sin() + 1.0)
}

/// `n` entries from the invariant measure, sample `i` drawn from its own
/// generator so any subset can be regenerated.
pub fn sample_mu(n: u64, seed: u64) -> Vec<Entry> {
    (0..n)
        .map(|i| sample_entry(&mut sample_rng(seed, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureMeta {
    pub source: String,
    pub h: f64,
    pub seed: u64,
    pub n: u64,
    pub cap: usize,
}

/// Histogram of (entry angle, exit angle) over exited traces. Row `i` is
/// the entry bin, column `j` the exit bin; bins are uniform on [-π/2, π/2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub bins: usize,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Traces that did not exit (cap, corner, leak).
    pub excluded: u64,
    pub meta: MeasureMeta,
}

/// Bin index of an angle in [-π/2, π/2] on a uniform grid.
pub fn bin_of(angle: f64, bins: usize) -> usize {
    let k = ((angle + FRAC_PI_2) / PI * bins as f64).floor();
    (k.max(0.0) as usize).min(bins - 1)
}

impl EmpiricalMeasure {
    pub fn new(bins: usize, meta: MeasureMeta) -> Self {
        EmpiricalMeasure {
            bins,
            counts: vec![0; bins * bins],
            total: 0,
            excluded: 0,
            meta,
        }
    }

    pub fn add(&mut self, phi: f64, phi_out: f64) {
        let (i, j) = (bin_of(phi, self.bins), bin_of(phi_out, self.bins));
        self.counts[i * self.bins + j] += 1;
        self.total += 1;
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins + j]
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || self.counts.len() != self.bins * self.bins {
            return Err(Error::invalid(
                "histogram shape does not match its bin count",
            ));
        }
        if self.counts.iter().sum::<u64>() != self.total {
            return Err(Error::invalid("histogram counts do not sum to its total"));
        }
        Ok(())
    }

    pub fn binned(&self) -> BinnedMeasure {
        BinnedMeasure {
            bins: self.bins,
            mass: self.counts.iter().map(|&c| c as f64).collect(),
            total: self.total as f64,
        }
    }

    /// Fraction of the mass within `halfwidth` bins of the diagonal y = x.
    pub fn diagonal_fraction(&self, halfwidth: usize) -> f64 {
        self.binned().band_fraction(halfwidth, false)
    }

    /// Fraction of the mass within `halfwidth` bins of the antidiagonal y = −x.
    pub fn antidiagonal_fraction(&self, halfwidth: usize) -> f64 {
        self.binned().band_fraction(halfwidth, true)
    }

    /// Nonzero cells as `i,j,count` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "count"])?;
        for i in 0..self.bins {
            for j in 0..self.bins {
                let c = self.count(i, j);
                if c > 0 {
                    out.write_record([i.to_string(), j.to_string(), c.to_string()])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R, bins: usize, meta: MeasureMeta) -> Result<Self> {
        let mut m = EmpiricalMeasure::new(bins, meta);
        let mut rd = csv::Reader::from_reader(r);
        for rec in rd.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<u64> {
                rec.get(k)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::invalid(format!("bad histogram row {:?}", rec)))
            };
            let (i, j, c) = (parse(0)? as usize, parse(1)? as usize, parse(2)?);
            if i >= bins || j >= bins {
                return Err(Error::invalid(format!(
                    "histogram cell ({i}, {j}) outside {bins} bins"
                )));
            }
            m.counts[i * bins + j] += c;
            m.total += c;
        }
        Ok(m)
    }
}

/// A histogram with real masses, shared by empirical and analytic laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedMeasure {
    pub bins: usize,
    pub mass: Vec<f64>,
    pub total: f64,
}

impl BinnedMeasure {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.bins + j]
    }

    fn band_fraction(&self, halfwidth: usize, anti: bool) -> f64 {
        let k = self.bins;
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if anti { k - 1 - i } else { i };
                if j.abs_diff(target) <= halfwidth {
                    s += self.at(i, j);
                }
            }
        }
        s / self.total
    }

    /// Entry-angle marginal, normalized.
    pub fn first_marginal(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|i| (0..self.bins).map(|j| self.at(i, j)).sum::<f64>() / self.total)
            .collect()
    }
}

/// Exact bin masses of an idealized law.
pub fn analytic_histogram(law: &ScatterLaw, bins: usize) -> Result<BinnedMeasure> {
    let w = PI / bins as f64;
    let edge = |i: usize| -FRAC_PI_2 + i as f64 * w;
    let mut mass = vec![0.0; bins * bins];
    let hybrid = match law {
        ScatterLaw::Specular => HybridLaw {
            bands: vec![],
            weight: 0.0,
        },
        ScatterLaw::Retro => HybridLaw {
            bands: vec![],
            weight: 1.0,
        },
        ScatterLaw::Hybrid(h) => h.clone(),
        ScatterLaw::Empirical(m) => return Ok(m.binned()),
    };
    let all_retro = matches!(law, ScatterLaw::Retro);
    let bands = hybrid.x_bands();
    for i in 0..bins {
        let (a, b) = (edge(i), edge(i + 1).min(FRAC_PI_2));
        let full = 0.5 * (b.sin() - a.sin());
        let retro = if all_retro {
            full
        } else {
            // retro on J ∪ −J, weighted
            let mut r = 0.0;
            for &(lo, hi) in &bands {
                for (p, q) in [(lo, hi), (-hi, -lo)] {
                    let (p, q) = (p.max(a), q.min(b));
                    if q > p {
                        r += 0.5 * (q.sin() - p.sin());
                    }
                }
            }
            hybrid.weight * r
        };
        mass[i * bins + i] += retro;
        mass[i * bins + (bins - 1 - i)] += full - retro;
    }
    Ok(BinnedMeasure {
        bins,
        mass,
        total: 1.0,
    })
}

/// Tolerances of the membership check: either fixed, or `sigmas` binomial
/// standard deviations for a sample of the histogram's size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpsilonTolerance {
    Fixed { symmetry: f64, marginal: f64 },
    Binomial { sigmas: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpsilonReport {
    /// max |m(i,j) − m(j,i)| / total.
    pub symmetry_defect: f64,
    pub symmetry_bound: f64,
    /// sup over bin edges of |F_n(φ) − (sin φ + 1)/2|.
    pub marginal_defect: f64,
    pub marginal_bound: f64,
    pub symmetric: bool,
    pub marginal_ok: bool,
    pub pass: bool,
}

/// Checks the involution symmetry and the entry marginal of a histogram.
///
/// The binomial symmetry bound uses the largest pair count m(i,j) + m(j,i):
/// given the pair count, m(i,j) − m(j,i) has standard deviation √(pair count)
/// under symmetry. The marginal bound uses the largest standard deviation of
/// an empirical CDF value, 1/(2√n).
pub fn check_upsilon(m: &BinnedMeasure, tol: UpsilonTolerance) -> UpsilonReport {
    let k = m.bins;
    let mut defect: f64 = 0.0;
    let mut max_pair: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (m.at(i, j), m.at(j, i));
            defect = defect.max((a - b).abs());
            max_pair = max_pair.max(a + b);
        }
    }
    let symmetry_defect = defect / m.total;
    let marginal = m.first_marginal();
    let mut cdf = 0.0;
    let mut marginal_defect: f64 = 0.0;
    for (i, p) in marginal.iter().enumerate() {
        cdf += p;
        let edge = (-FRAC_PI_2 + (i + 1) as f64 * PI / k as f64).min(FRAC_PI_2);
        marginal_defect = marginal_defect.max((cdf - angle_cdf(edge)).abs());
    }
    let (symmetry_bound, marginal_bound) = match tol {
        UpsilonTolerance::Fixed { symmetry, marginal } => (symmetry, marginal),
        UpsilonTolerance::Binomial { sigmas } => (
            sigmas * max_pair.sqrt() / m.total,
            sigmas * 0.5 / m.total.sqrt(),
        ),
    };
    let symmetric = symmetry_defect <= symmetry_bound;
    let marginal_ok = marginal_defect <= marginal_bound;
    UpsilonReport {
        symmetry_defect,
        symmetry_bound,
        marginal_defect,
        marginal_bound,
        symmetric,
        marginal_ok,
        pass: symmetric && marginal_ok,
    }
}

/// One traced sample with the data the statistics need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattered {
    pub entry: Entry,
    pub outcome: Outcome,
    /// Some impact lay below the opening line (flaps, notches).
    pub below_opening: bool,
}

/// Traces `n` invariant-measure samples in parallel; results are in sample order.
pub fn scatter(hollow: &Hollow, n: u64, seed: u64, cap: usize) -> Result<Vec<Scattered>> {
    let audit = hollow.audit();
    if !audit.is_valid() {
        return Err(Error::invalid(format!(
            "hollow '{}' failed its audit: {:?}",
            hollow.label, audit.issues
        )));
    }
    let (o, inward) = (hollow.opening.left, hollow.opening.inward());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let entry = sample_entry(&mut sample_rng(seed, i));
            let (outcome, path) = trace_path(hollow, entry, cap)?;
            let below_opening = path.iter().any(|p| (p.point - o).dot(inward) < 0.0);
            Ok(Scattered {
                entry,
                outcome,
                below_opening,
            })
        })
        .collect()
}

/// Histogram of (φ, φ⁺) over `n` sampled entries.
pub fn estimate_eta(
    hollow: &Hollow,
    n: u64,
    cap: usize,
    seed: u64,
    bins: usize,
) -> Result<EmpiricalMeasure> {
    if n < 1000 {
        return Err(Error::invalid(format!(
            "at least 1000 samples are needed, got {n}"
        )));
    }
    if bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    let samples = scatter(hollow, n, seed, cap)?;
    Ok(histogram(hollow, &samples, n, cap, seed, bins))
}

pub fn histogram(
    hollow: &Hollow,
    samples: &[Scattered],
    n: u64,
    cap: usize,
    seed: u64,
    bins: usize,
) -> EmpiricalMeasure {
    let meta = MeasureMeta {
        source: hollow.label.clone(),
        h: hollow.imperfectness,
        seed,
        n,
        cap,
    };
    let mut m = EmpiricalMeasure::new(bins, meta);
    for s in samples {
        match (s.outcome.status, s.outcome.exit) {
            (Status::Exited, Some(x)) => m.add(s.entry.phi, x.phi),
            _ => m.excluded += 1,
        }
    }
    m
}

/// Monte Carlo estimate of the measure of a set of entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetEstimate {
    pub sigma: f64,
    pub sampled: u64,
    pub exited: u64,
    pub hits: u64,
    /// hits / sampled.
    pub fraction: f64,
    pub std_error: f64,
    /// Fraction under the position test as literally printed (uncentred).
    pub literal_fraction: f64,
    /// Traces with exactly two impacts.
    pub two_impact: u64,
    /// Traces with an impact below the opening line.
    pub below_opening: u64,
}

fn estimate(
    hollow: &Hollow,
    samples: &[Scattered],
    sigma: f64,
    need_two: bool,
    pred: impl Fn(f64, f64, crate::Vec2, crate::Vec2) -> (bool, bool),
) -> SetEstimate {
    let (t, nu) = (hollow.opening.tangent(), hollow.opening.inward());
    let local = |v: crate::Vec2| crate::Vec2::new(v.dot(t), v.dot(nu));
    let mut e = SetEstimate {
        sigma,
        sampled: samples.len() as u64,
        exited: 0,
        hits: 0,
        fraction: 0.0,
        std_error: 0.0,
        literal_fraction: 0.0,
        two_impact: 0,
        below_opening: 0,
    };
    let mut literal = 0u64;
    for s in samples {
        e.below_opening += s.below_opening as u64;
        let Some(x) = s
            .outcome
            .exit
            .filter(|_| s.outcome.status == Status::Exited)
        else {
            continue;
        };
        e.exited += 1;
        e.two_impact += (s.outcome.impacts == 2) as u64;
        if need_two && s.outcome.impacts != 2 {
            continue;
        }
        let v_in = local(hollow.opening.entry_dir(s.entry.phi));
        let v_out = local(x.velocity);
        let (centred, lit) = pred(s.entry.xi - 0.5, x.xi - 0.5, v_in, v_out);
        e.hits += centred as u64;
        literal += lit as u64;
    }
    let n = e.sampled.max(1) as f64;
    e.fraction = e.hits as f64 / n;
    e.std_error = (e.fraction * (1.0 - e.fraction) / n).sqrt();
    e.literal_fraction = literal as f64 / n;
    e
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::invalid(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    Ok(())
}

/// Fraction of entries returned near the mirror-image point with reversed
/// velocity: |s⁺ + s⁻| ≤ σ and |v⁺ + v⁻| ≤ σ, positions in opening widths
/// from the centre.
pub fn retro_fraction(hollow: &Hollow, samples: &[Scattered], sigma: f64) -> Result<SetEstimate> {
    check_sigma(sigma)?;
    Ok(estimate(
        hollow,
        samples,
        sigma,
        false,
        |s_in, s_out, v_in, v_out| {
            let vel = (v_out + v_in).norm() <= sigma;
            (
                vel && (s_out + s_in).abs() <= sigma,
                vel && (s_out - s_in).abs() <= sigma,
            )
        },
    ))
}

/// Fraction of entries returned after two impacts near the same point with
/// the mirrored velocity: |s⁺ − s⁻| ≤ σ and |v⁺ − Rv⁻| ≤ σ, where R flips
/// the component normal to the opening.
pub fn quasielastic_fraction(
    hollow: &Hollow,
    samples: &[Scattered],
    sigma: f64,
) -> Result<SetEstimate> {
    check_sigma(sigma)?;
    Ok(estimate(
        hollow,
        samples,
        sigma,
        true,
        |s_in, s_out, v_in, v_out| {
            let mirrored = crate::Vec2::new(v_in.x, -v_in.y);
            let vel = (v_out - mirrored).norm() <= sigma;
            (
                vel && (s_out - s_in).abs() <= sigma,
                vel && (s_out + s_in).abs() <= sigma,
            )
        },
    ))
}

pub fn verify_retroreflector(
    hollow: &Hollow,
    sigma: f64,
    n: u64,
    seed: u64,
    cap: usize,
) -> Result<SetEstimate> {
    check_sigma(sigma)?;
    retro_fraction(hollow, &scatter(hollow, n, seed, cap)?, sigma)
}

pub fn verify_quasielastic(
    hollow: &Hollow,
    sigma: f64,
    n: u64,
    seed: u64,
    cap: usize,
) -> Result<SetEstimate> {
    check_sigma(sigma)?;
    quasielastic_fraction(hollow, &scatter(hollow, n, seed, cap)?, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hollow::{make_flat_mirror, make_v_groove};
    use crate::resistance::RetroBand;

    #[test]
    fn inverse_cdf() {
        assert_eq!(angle_from_uniform(0.5), 0.0);
        assert!((angle_from_uniform(1.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_from_uniform(0.75) - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_angles_follow_the_cdf() {
        let n = 20_000u64;
        let mut phis: Vec<f64> = sample_mu(n, 7).iter().map(|e| e.phi).collect();
        phis.sort_by(f64::total_cmp);
        let ks = phis
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let f = angle_cdf(p);
                (f - k as f64 / n as f64)
                    .abs()
                    .max(((k + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 1.63 / (n as f64).sqrt(), "{ks}");
        assert_eq!(sample_mu(10, 3), sample_mu(10, 3));
    }

    #[test]
    fn bins() {
        assert_eq!(bin_of(-FRAC_PI_2, 90), 0);
        assert_eq!(bin_of(FRAC_PI_2, 90), 89);
        assert_eq!(bin_of(0.0, 90), 45);
    }

    #[test]
    fn analytic_laws() {
        let s = analytic_histogram(&ScatterLaw::Specular, 90).unwrap();
        let r = check_upsilon(
            &s,
            UpsilonTolerance::Fixed {
                symmetry: 1e-15,
                marginal: 1e-14,
            },
        );
        assert!(r.pass, "{r:?}");
        assert!((s.band_fraction(0, true) - 1.0).abs() < 1e-14);
        let band = RetroBand::from_x(1.2, 1.4).unwrap();
        let h = ScatterLaw::Hybrid(HybridLaw {
            bands: vec![band],
            weight: 0.4,
        });
        let hm = analytic_histogram(&h, 90).unwrap();
        assert!((hm.mass.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(
            check_upsilon(
                &hm,
                UpsilonTolerance::Fixed {
                    symmetry: 1e-15,
                    marginal: 1e-14
                }
            )
            .pass
        );
        let retro_mass = 0.4 * (1.4f64.sin() - 1.2f64.sin());
        assert!((hm.band_fraction(0, false) - retro_mass).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_histogram_fails() {
        let meta = MeasureMeta {
            source: "hand".into(),
            h: 0.0,
            seed: 0,
            n: 0,
            cap: 0,
        };
        let mut m = EmpiricalMeasure::new(4, meta);
        for _ in 0..100 {
            m.add(-1.0, 1.0);
        }
        let r = check_upsilon(&m.binned(), UpsilonTolerance::Binomial { sigmas: 3.0 });
        assert!(!r.symmetric && (r.symmetry_defect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_mirror_is_specular() {
        let h = make_flat_mirror(0.01).unwrap();
        let m = estimate_eta(&h, 20_000, 64, 1, DEFAULT_BINS).unwrap();
        assert!(
            m.antidiagonal_fraction(1) > 0.97,
            "{}",
            m.antidiagonal_fraction(1)
        );
        let r = retro_fraction(&h, &scatter(&h, 5000, 2, 64).unwrap(), 0.1).unwrap();
        assert!(r.fraction < 0.05, "{r:?}");
    }

    #[test]
    fn v_groove_two_impacts_are_retro() {
        let h = make_v_groove().unwrap();
        let samples = scatter(&h, 5000, 3, 64).unwrap();
        let mut two = 0;
        for s in &samples {
            if s.outcome.impacts == 2 {
                two += 1;
                assert!((s.outcome.exit.unwrap().phi - s.entry.phi).abs() < 1e-12);
            }
        }
        assert!(two > 1000);
    }

    #[test]
    fn csv_round_trip() {
        let h = make_flat_mirror(0.05).unwrap();
        let m = estimate_eta(&h, 2000, 64, 9, 30).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = EmpiricalMeasure::read_csv(&buf[..], 30, m.meta.clone()).unwrap();
        assert_eq!(back.counts, m.counts);
        assert!(estimate_eta(&h, 10, 64, 9, 30).is_err());
    }
}
