use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughdisc"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn trace_writes_outputs_and_manifest() {
    let dir = scratch("trace");
    let o = run(&[
        "trace",
        "--hollow",
        "amphora",
        "--h",
        "0.05",
        "--phi",
        "0.3",
        "--xi",
        "0.5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir);
    let files: Vec<&str> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["file"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["impacts.csv", "path.svg", "summary.json"]);
    assert_eq!(m["command"], "trace");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["outcome"]["impacts"], 2);
}

#[test]
fn measure_is_reproducible() {
    let (a, b) = (scratch("measure-a"), scratch("measure-b"));
    for d in [&a, &b] {
        let o = run(&[
            "measure",
            "--hollow",
            "mushroom",
            "--n",
            "5000",
            "--seed",
            "9",
            "--bins",
            "20",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["measure.csv", "heatmap.svg", "report.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sampling_needs_a_seed() {
    let o = run(&[
        "measure",
        "--hollow",
        "mushroom",
        "--n",
        "5000",
        "--out",
        scratch("noseed").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_input_is_a_validation_failure() {
    let dir = scratch("bad");
    let d = dir.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "trace", "--h", "-1", "--phi", "0.1", "--xi", "0.5", "--out", d
        ])),
        2
    );
    assert_eq!(code(&run(&["simulate", "--lambda", "0.9", "--out", d])), 2);
    assert_eq!(code(&run(&["resist", "--law", "teapot", "--out", d])), 2);
    assert_eq!(
        code(&run(&[
            "plan", "--vertex", "0,0", "--vertex", "1,0", "--vertex", "0,0", "--out", d
        ])),
        2
    );
}

#[test]
fn resist_reports_every_lambda() {
    let dir = scratch("resist");
    let o = run(&["resist", "--law", "retro", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("resistances.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn simulate_and_plan_run() {
    let dir = scratch("simulate");
    let o = run(&[
        "simulate",
        "--law",
        "retro",
        "--tau-end",
        "0.1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("trajectory.csv").exists() && dir.join("manifest.json").exists());

    let dir = scratch("plan");
    let o = run(&[
        "plan",
        "--vertex",
        "0,0",
        "--vertex",
        "1,0",
        "--vertex",
        "1,-1",
        "--epsilon",
        "0.01",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["report"]["within_bound"], true);
}

#[test]
fn config_file_supplies_flags() {
    let dir = scratch("config");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    fs::write(&cfg, r#"{"hollow": "v-groove", "phi": 0.2, "xi": 0.4}"#).unwrap();
    let out = dir.join("out");
    let o = run(&[
        "trace",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&out)["config"]["hollow"], "v-groove");
}

#[test]
fn audit_hollow_reports() {
    let dir = scratch("audit");
    let o = run(&[
        "audit-hollow",
        "--hollow",
        "modified-amphora",
        "--h",
        "0.05",
        "--n",
        "2000",
        "--seed",
        "1",
        "--shallow",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["hollow.json", "outline.svg", "audit.json", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}
