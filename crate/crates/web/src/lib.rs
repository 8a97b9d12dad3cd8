//! Browser bindings for desk-scale demos of the measure catalog.
//!
//! Every exported function takes plain scalars plus a measure token and
//! returns a JSON string, so the page needs no generated TypeScript glue
//! beyond the wasm-bindgen loader. Failures come back as `{"error": "..."}`
//! rather than thrown exceptions; the caller checks for the key.
//!
//! Three operations:
//!
//! * [`project_dual`]: Euclidean projection onto a concave measure's dual
//!   region, with the region outline sampled for canvas drawing.
//! * [`train_demo`]: generate a small 2-D Gaussian task, run the matching
//!   solver (SPADE for concave tokens, STAMP for pseudo-linear ones), and
//!   return the scatter, the learned boundary, the metric trace, and the
//!   exhaustive-search reference value.
//! * [`measure_surface`]: the measure evaluated over a (TPR, TNR) grid for
//!   a heatmap.

use wasm_bindgen::prelude::*;

use ndopt_core::concave::{ConcaveKind, ConcaveMeasure};
use ndopt_core::data::{synth_gaussian, Sample, SynthConfig};
use ndopt_core::eval::metric_at;
use ndopt_core::measure::{MeasureKind, MeasureSpec};
use ndopt_core::oracle::grid_model_search;
use ndopt_core::spade::{spade_run, SpadeConfig};
use ndopt_core::stamp::{stamp_run, StampConfig};

/// Display cap for the G-mean dual region, which is otherwise unbounded.
/// Matches the regularised radius √(1/ε) at ε ≈ 0.11.
const GMEAN_VIEW_CAP: f64 = 3.0;

const DEMO_N: usize = 600;
const DEMO_P: f64 = 0.15;

fn err_json(msg: String) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn parse_kind(token: &str) -> Result<MeasureKind, String> {
    token.parse::<MeasureKind>().map_err(|e| e.to_string())
}

/// Outline of the dual region as one or two polyline pieces. `closed` tells
/// the canvas whether to fill (Min's region is a bare segment).
fn region_outline(measure: &ConcaveMeasure) -> (Vec<[f64; 2]>, bool) {
    const STEPS: usize = 64;
    let mut pts = Vec::new();
    match measure.kind {
        ConcaveKind::Min => {
            pts.push([1.0, 0.0]);
            pts.push([0.0, 1.0]);
            (pts, false)
        }
        ConcaveKind::HMean => {
            // Inner curve (s², (√2−s)²) from (2,0) to (0,2), then the
            // radius-2 arc back.
            let s2 = std::f64::consts::SQRT_2;
            for i in 0..=STEPS {
                let s = s2 * (1.0 - i as f64 / STEPS as f64);
                pts.push([s * s, (s2 - s) * (s2 - s)]);
            }
            for i in 1..=STEPS {
                let ang = std::f64::consts::FRAC_PI_2 * (1.0 - i as f64 / STEPS as f64);
                pts.push([2.0 * ang.cos(), 2.0 * ang.sin()]);
            }
            (pts, true)
        }
        ConcaveKind::QMean => {
            let r = 0.5f64.sqrt();
            for i in 0..=STEPS {
                let ang = std::f64::consts::FRAC_PI_2 * i as f64 / STEPS as f64;
                pts.push([r * ang.cos(), r * ang.sin()]);
            }
            pts.push([0.0, 0.0]);
            (pts, true)
        }
        ConcaveKind::GMean => {
            // αβ = 1/4 between its intersections with the viewing circle,
            // then the arc back. α² solves u² − C²u + 1/16 = 0.
            let c = measure.dual_radius_cap;
            let disc = (c.powi(4) - 0.25).sqrt();
            let a_min = ((c * c - disc) / 2.0).sqrt();
            let a_max = ((c * c + disc) / 2.0).sqrt();
            let ratio = a_max / a_min;
            for i in 0..=STEPS {
                let a = a_min * ratio.powf(i as f64 / STEPS as f64);
                pts.push([a, 0.25 / a]);
            }
            let ang_lo = (0.25 / a_max).atan2(a_max);
            let ang_hi = (0.25 / a_min).atan2(a_min);
            for i in 1..=STEPS {
                let ang = ang_lo + (ang_hi - ang_lo) * i as f64 / STEPS as f64;
                pts.push([c * ang.cos(), c * ang.sin()]);
            }
            (pts, true)
        }
    }
}

fn project_dual_impl(token: &str, alpha: f64, beta: f64) -> Result<serde_json::Value, String> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err("alpha and beta must be finite".into());
    }
    let kind = match parse_kind(token)? {
        MeasureKind::Concave(k) => k,
        other => {
            return Err(format!(
                "{other} has no dual region; pick min, hmean, qmean, or gmean"
            ))
        }
    };
    let measure = ConcaveMeasure::with_cap(kind, GMEAN_VIEW_CAP);
    let p = measure.project_dual((alpha, beta));
    let (outline, closed) = region_outline(&measure);
    Ok(serde_json::json!({
        "measure": token,
        "input": [alpha, beta],
        "input_feasible": measure.is_feasible(alpha, beta, 1e-9),
        "projected": [p.alpha, p.beta],
        "norm": p.norm(),
        "conjugate": measure.conjugate_value(p.alpha, p.beta),
        "cap": measure.dual_radius_cap,
        "boundary": outline,
        "closed": closed,
    }))
}

/// Projects `(alpha, beta)` onto the dual region of a concave measure and
/// returns the region outline alongside the projected point.
#[wasm_bindgen]
pub fn project_dual(measure: &str, alpha: f64, beta: f64) -> String {
    match project_dual_impl(measure, alpha, beta) {
        Ok(v) => v.to_string(),
        Err(e) => err_json(e),
    }
}

fn coord(s: &Sample, idx: u32) -> f64 {
    s.features
        .iter()
        .find(|&&(i, _)| i == idx)
        .map_or(0.0, |&(_, v)| v)
}

fn train_demo_impl(
    token: &str,
    seed: u32,
    separation: f64,
    passes: u32,
) -> Result<serde_json::Value, String> {
    if !(separation.is_finite() && (0.1..=6.0).contains(&separation)) {
        return Err("separation must lie in [0.1, 6.0]".into());
    }
    let passes = passes.clamp(1, 40) as usize;
    let kind = parse_kind(token)?;
    let data = synth_gaussian(&SynthConfig {
        n: DEMO_N,
        p: DEMO_P,
        separation,
        seed: seed as u64,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let n_pos = data.iter().filter(|s| s.label > 0).count();
    let p_hat = n_pos as f64 / data.len() as f64;
    let theta = (1.0 - p_hat) / p_hat;
    let spec = MeasureSpec::build(kind, theta, 1.0).map_err(|e| e.to_string())?;

    let (solver, model, trace) = match kind {
        MeasureKind::Concave(k) => {
            let cfg = SpadeConfig { seed: seed as u64, passes, ..SpadeConfig::default() };
            let run = spade_run(&data, &[], k, &cfg).map_err(|e| e.to_string())?;
            ("spade", run.model, run.trace)
        }
        MeasureKind::PseudoLinear(k) => {
            let cfg = StampConfig {
                seed: seed as u64,
                passes,
                step_scale: 4.0,
                ..StampConfig::default()
            };
            let run = stamp_run(&data, &[], k, &cfg).map_err(|e| e.to_string())?;
            ("stamp", run.model, run.trace)
        }
    };
    let final_metric = metric_at(&model, 0.0, &data, &spec).map_err(|e| e.to_string())?;
    let oracle = grid_model_search(&data, std::slice::from_ref(&spec), 180)
        .map_err(|e| e.to_string())?[0]
        .value;

    let points: Vec<serde_json::Value> = data
        .iter()
        .map(|s| serde_json::json!([coord(s, 0), coord(s, 1), s.label]))
        .collect();
    // Decision rule w·x = 0 restricted to the plot plane: the third feature
    // is the constant bias coordinate, so it folds into the line offset.
    let bias_coord = coord(&data[0], 2);
    let line = [
        model.w.first().copied().unwrap_or(0.0),
        model.w.get(1).copied().unwrap_or(0.0),
        model.w.get(2).copied().unwrap_or(0.0) * bias_coord,
    ];
    let curve: Vec<serde_json::Value> = trace
        .iter()
        .map(|r| serde_json::json!([r.t, r.train_metric]))
        .collect();
    Ok(serde_json::json!({
        "solver": solver,
        "measure": token,
        "n": data.len(),
        "p_hat": p_hat,
        "points": points,
        "line": line,
        "trace": curve,
        "final_metric": final_metric,
        "oracle": oracle,
        "gap": oracle - final_metric,
    }))
}

/// Trains on a fresh 2-D Gaussian task (600 samples, 15% positives) and
/// returns everything the page needs to draw the run. `passes` is clamped
/// to [1, 40] to keep the browser responsive.
#[wasm_bindgen]
pub fn train_demo(measure: &str, seed: u32, separation: f64, passes: u32) -> String {
    match train_demo_impl(measure, seed, separation, passes) {
        Ok(v) => v.to_string(),
        Err(e) => err_json(e),
    }
}

fn measure_surface_impl(token: &str, theta: f64, grid: u32) -> Result<serde_json::Value, String> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err("theta must be positive".into());
    }
    let grid = grid.clamp(2, 201) as usize;
    let kind = parse_kind(token)?;
    let spec = MeasureSpec::build(kind, theta, 1.0).map_err(|e| e.to_string())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut rows = Vec::with_capacity(grid);
    for i in 0..grid {
        let p = i as f64 / (grid - 1) as f64;
        let mut row = Vec::with_capacity(grid);
        for j in 0..grid {
            let n = j as f64 / (grid - 1) as f64;
            match spec.value(ndopt_core::eval::RatePair { p, n }) {
                Ok(v) => {
                    lo = lo.min(v);
                    hi = hi.max(v);
                    row.push(serde_json::json!(v));
                }
                Err(_) => row.push(serde_json::Value::Null),
            }
        }
        rows.push(serde_json::Value::Array(row));
    }
    Ok(serde_json::json!({
        "measure": token,
        "grid": grid,
        "theta": theta,
        "values": rows,
        "min": lo,
        "max": hi,
    }))
}

/// Samples the measure over a `grid`×`grid` lattice of (TPR, TNR) pairs.
/// `values[i][j]` holds the value at TPR = i/(grid−1), TNR = j/(grid−1);
/// concave tokens ignore `theta`.
#[wasm_bindgen]
pub fn measure_surface(measure: &str, theta: f64, grid: u32) -> String {
    match measure_surface_impl(measure, theta, grid) {
        Ok(v) => v.to_string(),
        Err(e) => err_json(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).expect("binding output must be valid JSON")
    }

    #[test]
    fn projection_lands_on_the_region_for_every_concave_token() {
        for tok in ["min", "hmean", "qmean", "gmean"] {
            let v = parse(&project_dual(tok, 2.3, -0.7));
            assert!(v.get("error").is_none(), "{tok}: {v}");
            let p = &v["projected"];
            let (a, b) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
            let kind = match parse_kind(tok).unwrap() {
                MeasureKind::Concave(k) => k,
                _ => unreachable!(),
            };
            let m = ConcaveMeasure::with_cap(kind, GMEAN_VIEW_CAP);
            assert!(m.is_feasible(a, b, 1e-6), "{tok}: ({a}, {b}) off-region");
            assert_eq!(v["input_feasible"], serde_json::json!(false), "{tok}");
            assert!(v["boundary"].as_array().unwrap().len() >= 2);
        }
    }

    #[test]
    fn feasible_inputs_project_to_themselves() {
        let v = parse(&project_dual("qmean", 0.3, 0.3));
        assert_eq!(v["input_feasible"], serde_json::json!(true));
        let p = &v["projected"];
        assert!((p[0].as_f64().unwrap() - 0.3).abs() < 1e-12);
        assert!((p[1].as_f64().unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn errors_come_back_as_json() {
        for bad in [
            project_dual("fbeta:1", 0.5, 0.5),
            project_dual("nope", 0.5, 0.5),
            project_dual("min", f64::NAN, 0.5),
            train_demo("nope", 0, 2.0, 4),
            train_demo("min", 0, 99.0, 4),
            measure_surface("min", -1.0, 21),
            measure_surface("gl:1", 19.0, 21),
        ] {
            let v = parse(&bad);
            assert!(v.get("error").is_some(), "{v}");
        }
    }

    #[test]
    fn train_demo_is_deterministic_and_chases_the_reference() {
        for tok in ["qmean", "fbeta:1"] {
            let a = train_demo(tok, 7, 2.5, 6);
            let b = train_demo(tok, 7, 2.5, 6);
            assert_eq!(a, b, "{tok}: repeated call diverged");
            let v = parse(&a);
            assert!(v.get("error").is_none(), "{tok}: {v}");
            assert_eq!(v["n"].as_u64(), Some(DEMO_N as u64));
            assert_eq!(v["points"].as_array().unwrap().len(), DEMO_N);
            let fin = v["final_metric"].as_f64().unwrap();
            let oracle = v["oracle"].as_f64().unwrap();
            // The reference sweeps 180 directions with free thresholds, so
            // it dominates any trained linear rule up to grid resolution.
            assert!(oracle >= fin - 0.02, "{tok}: oracle {oracle} < final {fin}");
            assert!(fin > 0.3, "{tok}: degenerate run, metric {fin}");
            let expected = match tok {
                "qmean" => "spade",
                _ => "stamp",
            };
            assert_eq!(v["solver"].as_str(), Some(expected));
        }
    }

    #[test]
    fn surface_has_expected_shape_and_corners() {
        let v = parse(&measure_surface("fbeta:1", 19.0, 21));
        let rows = v["values"].as_array().unwrap();
        assert_eq!(rows.len(), 21);
        assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 21));
        // F1 is 0 when TPR = 0 and 1 at the perfect corner.
        assert_eq!(rows[0][0].as_f64(), Some(0.0));
        assert!((rows[20][20].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v["min"].as_f64(), Some(0.0));
        assert!((v["max"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
