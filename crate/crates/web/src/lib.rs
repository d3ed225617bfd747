//! Browser bindings. Every export returns a JSON string, either the result
//! or `{"error": ...}`, so the page needs no exception handling and the
//! functions run unchanged in native tests.

use roughdisc::measure::{check_upsilon, estimate_eta, UpsilonTolerance};
use roughdisc::planner::{approximate, overlay_svg, BrokenLine, PlanOptions};
use roughdisc::svg::{heatmap, hollow_picture};
use roughdisc::trace::{trace_path, Entry};
use roughdisc::{
    make_amphora, make_flat_mirror, make_modified_amphora, make_mushroom, make_v_groove,
    AmphoraParams, Hollow, MushroomParams, Result, Vec2,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const PICTURE: f64 = 420.0;
/// Largest sample count the page may request.
pub const MAX_SAMPLES: u64 = 200_000;

fn build(kind: &str, h: f64) -> Result<Hollow> {
    match kind {
        "mushroom" => make_mushroom(MushroomParams::new(h)),
        "amphora" => make_amphora(AmphoraParams::new(h)),
        "modified-amphora" => make_modified_amphora(AmphoraParams::new(h)),
        "flat-mirror" => make_flat_mirror(0.5),
        "v-groove" => make_v_groove(),
        other => Err(roughdisc::Error::invalid(format!(
            "unknown hollow '{other}'"
        ))),
    }
}

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// One particle through a hollow: outcome and a picture of its path.
#[wasm_bindgen]
pub fn trace_hollow(kind: &str, h: f64, phi: f64, xi: f64) -> String {
    respond((|| {
        let hollow = build(kind, h)?;
        let (outcome, impacts) = trace_path(&hollow, Entry { phi, xi }, 256)?;
        let start = hollow.opening.point_at(xi);
        let reach = 0.3 * hollow.opening.width().max(0.1);
        let mut path = vec![start - hollow.opening.entry_dir(phi) * reach, start];
        path.extend(impacts.iter().map(|i| i.point));
        if let Some(x) = outcome.exit {
            let p = hollow.opening.point_at(x.xi);
            path.extend([p, p + x.velocity * reach]);
        }
        Ok(json!({ "outcome": outcome, "svg": hollow_picture(&hollow, &[path], PICTURE) }))
    })())
}

/// Histogram of (entry, exit) angles from `n` seeded samples.
#[wasm_bindgen]
pub fn scattering_heatmap(kind: &str, h: f64, n: u32, seed: u32, bins: u32) -> String {
    respond((|| {
        let n = u64::from(n);
        if n > MAX_SAMPLES || bins == 0 || bins > 180 {
            return Err(roughdisc::Error::invalid(format!(
                "need n <= {MAX_SAMPLES} and 0 < bins <= 180"
            )));
        }
        let hollow = build(kind, h)?;
        let m = estimate_eta(&hollow, n, 256, u64::from(seed), bins as usize)?;
        let b = m.binned();
        let title = format!("{} h={h} n={n}", hollow.label);
        Ok(json!({
            "exited": m.total,
            "excluded": m.excluded,
            "diagonal_fraction": m.diagonal_fraction(1),
            "antidiagonal_fraction": m.antidiagonal_fraction(1),
            "upsilon": check_upsilon(&b, UpsilonTolerance::Binomial { sigmas: 3.0 }),
            "svg": heatmap(&b, PICTURE, &title),
        }))
    })())
}

/// Steers a disc along the broken line given as a JSON list of [x, y].
#[wasm_bindgen]
pub fn plan_curve(vertices: &str, epsilon: f64) -> String {
    respond((|| {
        let pts: Vec<[f64; 2]> = serde_json::from_str(vertices)?;
        let curve = BrokenLine::new(pts.iter().map(|&[x, y]| Vec2::new(x, y)).collect())?;
        let a = approximate(&curve, epsilon, &PlanOptions::default())?;
        Ok(json!({ "report": a.report, "svg": overlay_svg(&curve, &a) }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&trace_hollow("teapot", 0.05, 0.1, 0.5)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("teapot"));
    }
}
