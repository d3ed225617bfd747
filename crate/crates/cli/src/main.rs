mod config;
mod manifest;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roughdisc::dynamics::{integrate, DiscParams, DiscState, DynOptions};
use roughdisc::hollow::INTERVAL_FLOOR;
use roughdisc::measure::{
    analytic_histogram, check_upsilon, histogram, quasielastic_fraction, retro_fraction, scatter,
    EmpiricalMeasure, MeasureMeta, UpsilonTolerance, DEFAULT_BINS,
};
use roughdisc::planner::{approximate, overlay_svg, BrokenLine, PlanOptions};
use roughdisc::resistance::{resistances, HybridLaw, RetroBand, ScatterLaw};
use roughdisc::svg::{heatmap, hollow_picture, Svg};
use roughdisc::trace::{census, trace_path, write_impacts_csv, Entry, DEFAULT_CAP};
use roughdisc::{
    make_amphora, make_flat_mirror, make_hybrid, make_modified_amphora, make_mushroom,
    make_v_groove, AmphoraParams, AngleInterval, Error, Hollow, HybridParams, MushroomParams,
    Result, Vec2,
};
use serde::{Deserialize, Serialize};

use manifest::Outputs;

#[derive(Parser)]
#[command(
    name = "roughdisc",
    version,
    about = "Cavity billiards, scattering laws and rough-disc dynamics"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace one particle through a hollow.
    Trace(TraceArgs),
    /// Estimate the scattering law of a hollow, or bin an analytic one.
    Measure(MeasureArgs),
    /// Resistance components of a scattering law over λ.
    Resist(ResistArgs),
    /// Integrate the motion of a rough disc.
    Simulate(SimulateArgs),
    /// Steer a disc along a broken line.
    Plan(PlanArgs),
    /// Check a hollow's geometry and, optionally, its impact counts.
    AuditHollow(AuditArgs),
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum HollowKind {
    Mushroom,
    Amphora,
    ModifiedAmphora,
    Hybrid,
    FlatMirror,
    VGroove,
}

#[derive(Args, Serialize)]
struct HollowArgs {
    #[arg(long, value_enum, default_value = "mushroom")]
    hollow: HollowKind,
    /// Imperfectness parameter.
    #[arg(long = "h", default_value_t = 0.05, allow_hyphen_values = true)]
    h: f64,
    /// Hollow geometry as JSON; overrides --hollow.
    #[arg(long)]
    hollow_file: Option<PathBuf>,
    /// Retroreflecting incidence interval "lo,hi" of a hybrid hollow; repeatable.
    #[arg(long, value_parser = parse_pair)]
    interval: Vec<(f64, f64)>,
    /// Hybrid hollow without its mirrors.
    #[arg(long)]
    no_mirrors: bool,
    /// Depth of the flat mirror hollow.
    #[arg(long, default_value_t = 0.5)]
    depth: f64,
}

impl HollowArgs {
    fn build(&self) -> Result<Hollow> {
        if let Some(path) = &self.hollow_file {
            return Hollow::from_json(&read(path)?);
        }
        match self.hollow {
            HollowKind::Mushroom => make_mushroom(MushroomParams::new(self.h)),
            HollowKind::Amphora => make_amphora(AmphoraParams::new(self.h)),
            HollowKind::ModifiedAmphora => make_modified_amphora(AmphoraParams::new(self.h)),
            HollowKind::Hybrid => make_hybrid(HybridParams {
                amphora: AmphoraParams::new(self.h),
                intervals: self
                    .interval
                    .iter()
                    .map(|&(lo, hi)| AngleInterval { lo, hi })
                    .collect(),
                mirrors: !self.no_mirrors,
            }),
            HollowKind::FlatMirror => make_flat_mirror(self.depth),
            HollowKind::VGroove => make_v_groove(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn require_audit(h: &Hollow) -> Result<()> {
    let a = h.audit();
    if !a.is_valid() {
        return Err(Error::invalid(format!(
            "hollow '{}' failed its audit: {:?}",
            h.label, a.issues
        )));
    }
    Ok(())
}

#[derive(Args, Serialize)]
struct TraceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    hollow: HollowArgs,
    /// Incidence angle from the inward normal.
    #[arg(long, allow_hyphen_values = true)]
    phi: f64,
    /// Entry position on the opening, 0 at the left end.
    #[arg(long)]
    xi: f64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_trace(a: &TraceArgs) -> Result<()> {
    let hollow = a.hollow.build()?;
    require_audit(&hollow)?;
    let entry = Entry {
        phi: a.phi,
        xi: a.xi,
    };
    let (outcome, impacts) = trace_path(&hollow, entry, a.cap)?;
    let mut out = Outputs::create(&a.out)?;
    let mut csv = Vec::new();
    write_impacts_csv(&mut csv, &impacts)?;
    out.write("impacts.csv", &csv)?;
    let start = hollow.opening.point_at(a.xi);
    let reach = 0.3 * hollow.opening.width().max(0.1);
    let mut path = vec![start - hollow.opening.entry_dir(a.phi) * reach, start];
    path.extend(impacts.iter().map(|i| i.point));
    if let Some(x) = outcome.exit {
        let p = hollow.opening.point_at(x.xi);
        path.push(p);
        path.push(p + x.velocity * reach);
    }
    out.write(
        "path.svg",
        hollow_picture(&hollow, &[path], 500.0).as_bytes(),
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        hollow: &'a str,
        h: f64,
        entry: Entry,
        outcome: roughdisc::trace::Outcome,
    }
    out.json(
        "summary.json",
        &Summary {
            hollow: &hollow.label,
            h: hollow.imperfectness,
            entry,
            outcome,
        },
    )?;
    out.finish("trace", a)?;
    println!("{:?} after {} impacts", outcome.status, outcome.impacts);
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum AnalyticLaw {
    Specular,
    Retro,
}

#[derive(Args, Serialize)]
struct MeasureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    hollow: HollowArgs,
    /// Bin an analytic law instead of sampling a hollow.
    #[arg(long, value_enum)]
    law: Option<AnalyticLaw>,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Seed of the sampler; mandatory.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 256)]
    cap: usize,
    /// Tolerance of the retro and quasi-elastic set tests.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Width of the binomial tolerance of the symmetry and marginal checks.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_measure(a: &MeasureArgs) -> Result<()> {
    if a.bins == 0 {
        return Err(Error::invalid("bins must be positive"));
    }
    let mut out = Outputs::create(&a.out)?;
    let tol = UpsilonTolerance::Binomial { sigmas: a.sigmas };
    if let Some(law) = a.law {
        let l = match law {
            AnalyticLaw::Specular => ScatterLaw::Specular,
            AnalyticLaw::Retro => ScatterLaw::Retro,
        };
        let m = analytic_histogram(&l, a.bins)?;
        let mut csv = String::from("i,j,mass\n");
        for i in 0..m.bins {
            for j in 0..m.bins {
                if m.at(i, j) > 0.0 {
                    csv.push_str(&format!("{i},{j},{:?}\n", m.at(i, j)));
                }
            }
        }
        out.write("measure.csv", csv.as_bytes())?;
        out.write(
            "heatmap.svg",
            heatmap(&m, 450.0, &format!("{law:?} law")).as_bytes(),
        )?;
        let report =
            serde_json::json!({ "law": law, "bins": a.bins, "upsilon": check_upsilon(&m, tol) });
        out.json("report.json", &report)?;
        out.finish("measure", a)?;
        return Ok(());
    }
    let seed = a
        .seed
        .ok_or_else(|| Error::invalid("--seed is mandatory when sampling"))?;
    if a.n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let hollow = a.hollow.build()?;
    let samples = scatter(&hollow, a.n, seed, a.cap)?;
    let m = histogram(&hollow, &samples, a.n, a.cap, seed, a.bins);
    let mut csv = Vec::new();
    m.write_csv(&mut csv)?;
    out.write("measure.csv", &csv)?;
    let binned = m.binned();
    let title = format!("{} h={} n={}", hollow.label, hollow.imperfectness, a.n);
    out.write("heatmap.svg", heatmap(&binned, 450.0, &title).as_bytes())?;
    let upsilon = check_upsilon(&binned, tol);
    let report = serde_json::json!({
        "hollow": hollow.label,
        "h": hollow.imperfectness,
        "n": a.n,
        "seed": seed,
        "exited": m.total,
        "excluded": m.excluded,
        "diagonal_fraction": m.diagonal_fraction(1),
        "antidiagonal_fraction": m.antidiagonal_fraction(1),
        "upsilon": upsilon,
        "retro": retro_fraction(&hollow, &samples, a.sigma)?,
        "quasielastic": quasielastic_fraction(&hollow, &samples, a.sigma)?,
    });
    out.json("report.json", &report)?;
    out.finish("measure", a)?;
    println!(
        "exited {} of {}; diagonal {:.4}; symmetric {}; marginal {}",
        m.total, a.n, report["diagonal_fraction"], upsilon.symmetric, upsilon.marginal_ok
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum LawKind {
    Specular,
    Retro,
    Hybrid,
    Empirical,
}

#[derive(Args, Serialize)]
struct LawArgs {
    #[arg(long, value_enum, default_value = "specular")]
    law: LawKind,
    /// Retro band "lo,hi" in incidence angle for the hybrid law; repeatable.
    #[arg(long, value_parser = parse_pair)]
    band: Vec<(f64, f64)>,
    /// Cavity fraction of the hybrid law.
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// Histogram written by `measure`, for the empirical law.
    #[arg(long)]
    measure_csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    measure_bins: usize,
}

impl LawArgs {
    fn build(&self) -> Result<ScatterLaw> {
        let law = match self.law {
            LawKind::Specular => ScatterLaw::Specular,
            LawKind::Retro => ScatterLaw::Retro,
            LawKind::Hybrid => {
                let bands = self
                    .band
                    .iter()
                    .map(|&(lo, hi)| RetroBand::from_x(lo, hi))
                    .collect::<Result<Vec<_>>>()?;
                ScatterLaw::Hybrid(HybridLaw {
                    bands,
                    weight: self.weight,
                })
            }
            LawKind::Empirical => {
                let path = self
                    .measure_csv
                    .as_ref()
                    .ok_or_else(|| Error::invalid("--measure-csv is required"))?;
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
                let meta = MeasureMeta {
                    source: path.display().to_string(),
                    h: 0.0,
                    seed: 0,
                    n: 0,
                    cap: 0,
                };
                ScatterLaw::Empirical(EmpiricalMeasure::read_csv(file, self.measure_bins, meta)?)
            }
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Args, Serialize)]
struct ResistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    law: LawArgs,
    /// Relative angular velocity; repeatable.
    #[arg(long, default_values_t = [1.1, 1.5, 2.0, 5.0, 10.0])]
    lambda: Vec<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_resist(a: &ResistArgs) -> Result<()> {
    let law = a.law.build()?;
    let mut out = Outputs::create(&a.out)?;
    let mut csv = String::from("lambda,R_T,R_L,R_I\n");
    let mut rows = Vec::new();
    for &l in &a.lambda {
        let r = resistances(&law, l)?;
        csv.push_str(&format!("{l:?},{:?},{:?},{:?}\n", r.t, r.l, r.i));
        rows.push(serde_json::json!({ "lambda": l, "t": r.t, "l": r.l, "i": r.i }));
    }
    out.write("resistances.csv", csv.as_bytes())?;
    out.json(
        "report.json",
        &serde_json::json!({ "law": a.law.law, "rows": rows }),
    )?;
    out.finish("resist", a)?;
    print!("{csv}");
    Ok(())
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 8.0 / 3.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Density of the medium.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Moment of inertia over M r².
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    heading: f64,
    /// Initial relative angular velocity; must exceed 1.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y: f64,
    #[arg(long, default_value_t = 10.0)]
    tau_end: f64,
    #[arg(long, default_value_t = 1e-9)]
    rtol: f64,
    #[arg(long, default_value_t = 0.05)]
    max_step: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let law = a.law.build()?;
    if !(a.lambda > 1.0) {
        return Err(Error::invalid(format!(
            "initial relative angular velocity must exceed 1, got {}",
            a.lambda
        )));
    }
    let params = DiscParams {
        mass: a.mass,
        radius: a.radius,
        density: a.density,
        kappa: a.kappa,
    };
    let start = DiscState {
        position: Vec2::new(a.x, a.y),
        speed: a.speed,
        heading: a.heading,
        ln_lambda: a.lambda.ln(),
        tau: 0.0,
    };
    let opts = DynOptions {
        rtol: a.rtol,
        atol: a.rtol * 1e-2,
        max_step: a.max_step,
        ..DynOptions::default()
    };
    let tr = integrate(&start, &law, &params, a.tau_end, &opts)?;
    let mut out = Outputs::create(&a.out)?;
    let mut csv = Vec::new();
    tr.write_csv(&mut csv)?;
    out.write("trajectory.csv", &csv)?;
    let path = tr.path();
    let mut svg = Svg::fit(500.0, 500.0, &path);
    svg.polyline(&path, "#c0392b", 1.2);
    svg.circle(path[0], 3.0, "black");
    out.write("trajectory.svg", svg.finish().as_bytes())?;
    let end = *tr.last();
    let summary = serde_json::json!({
        "steps": tr.steps,
        "samples": tr.samples.len(),
        "kinks": tr.kinks.len(),
        "net_turn": end.heading - a.heading,
        "end": end,
    });
    out.json("summary.json", &summary)?;
    out.finish("simulate", a)?;
    println!(
        "net turn {:.6} rad, final ln lambda {:.6}",
        end.heading - a.heading,
        end.ln_lambda
    );
    Ok(())
}

#[derive(Args, Serialize)]
struct PlanArgs {
    /// Target as JSON: a list of [x, y] pairs or {"vertices": [{"x":..,"y":..}, ..]}.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Target vertex "x,y"; repeatable, used when --curve is absent.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    vertex: Vec<(f64, f64)>,
    /// Scale parameter; the achievable distance bound is (m+1)√ε.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    /// Initial ln λ.
    #[arg(long, default_value_t = 3.0)]
    start_over_epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    calibration_tol: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CurveFile {
    Pairs(Vec<[f64; 2]>),
    Line(BrokenLine),
}

fn cmd_plan(a: &PlanArgs) -> Result<()> {
    let vertices = match &a.curve {
        Some(p) => match serde_json::from_str::<CurveFile>(&read(p)?)? {
            CurveFile::Pairs(v) => v.iter().map(|&[x, y]| Vec2::new(x, y)).collect(),
            CurveFile::Line(l) => l.vertices,
        },
        None => a.vertex.iter().map(|&(x, y)| Vec2::new(x, y)).collect(),
    };
    let curve = BrokenLine::new(vertices)?;
    let opts = PlanOptions {
        kappa: a.kappa,
        start_over_epsilon: a.start_over_epsilon,
        calibration_tol: a.calibration_tol,
        ..PlanOptions::default()
    };
    let approx = approximate(&curve, a.epsilon, &opts)?;
    let mut out = Outputs::create(&a.out)?;
    #[derive(Serialize)]
    struct Report<'a> {
        report: &'a roughdisc::planner::ApproximationReport,
        plan: &'a roughdisc::planner::PlanSpec,
    }
    out.json(
        "report.json",
        &Report {
            report: &approx.report,
            plan: &approx.plan,
        },
    )?;
    out.write("overlay.svg", overlay_svg(&curve, &approx).as_bytes())?;
    let mut csv = Vec::new();
    approx.trajectory.write_csv(&mut csv)?;
    out.write("trajectory.csv", &csv)?;
    let mut path = String::from("x,y\n");
    for p in &approx.path {
        path.push_str(&format!("{:?},{:?}\n", p.x, p.y));
    }
    out.write("path.csv", path.as_bytes())?;
    out.finish("plan", a)?;
    let r = &approx.report;
    println!(
        "hausdorff {:.6} (bound {:.6}) over {} segments",
        r.hausdorff_target, r.bound, r.segments
    );
    Ok(())
}

#[derive(Args, Serialize)]
struct AuditArgs {
    #[command(flatten)]
    #[serde(flatten)]
    hollow: HollowArgs,
    /// Samples for an impact-count census; 0 skips it.
    #[arg(long, default_value_t = 0)]
    n: u64,
    /// Seed of the census; mandatory when n > 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Census only entries at more than 5π/14 from the normal.
    #[arg(long)]
    shallow: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_audit(a: &AuditArgs) -> Result<()> {
    let hollow = a.hollow.build()?;
    let audit = hollow.audit();
    let mut out = Outputs::create(&a.out)?;
    out.write("hollow.json", hollow.to_json()?.as_bytes())?;
    out.write(
        "outline.svg",
        hollow_picture(&hollow, &[], 500.0).as_bytes(),
    )?;
    let census = if a.n > 0 && audit.is_valid() {
        let seed = a
            .seed
            .ok_or_else(|| Error::invalid("--seed is mandatory when n > 0"))?;
        let shallow = a.shallow;
        Some(census(&hollow, a.n, seed, a.cap, move |e| {
            !shallow || e.phi.abs() > INTERVAL_FLOOR
        }))
    } else {
        None
    };
    let max_impacts = census.as_ref().and_then(|c| c.max_impacts());
    let report = serde_json::json!({
        "hollow": hollow.label,
        "h": hollow.imperfectness,
        "audit": audit,
        "census": census,
        "max_impacts": max_impacts,
        "shallow_limit": if a.shallow { Some(PI / 2.0 - INTERVAL_FLOOR) } else { None },
    });
    out.json("audit.json", &report)?;
    out.finish("audit-hollow", a)?;
    if !audit.is_valid() {
        return Err(Error::invalid(format!(
            "hollow '{}' failed its audit: {:?}",
            hollow.label, audit.issues
        )));
    }
    println!(
        "hollow '{}' passes its audit; max impacts {:?}",
        hollow.label, max_impacts
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Trace(a) => cmd_trace(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Resist(a) => cmd_resist(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::AuditHollow(a) => cmd_audit(a),
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
