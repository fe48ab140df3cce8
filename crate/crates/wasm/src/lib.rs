//! Browser bindings: decompose a matrix, compare cost curves, explore CSD
//! digits. Each export wraps a plain function returning JSON text so the
//! same code runs in native tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use lcc::decompose::csd_quantize;
use lcc::harness::{run_sweep, ExperimentSpec, Grid};
use lcc::serial::{dag_to_dot, dag_to_json, parse_matrix};
use lcc::{decompose, total_cost, Algorithm, CostModel, DecomposeConfig, Schedule};

fn db(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn parse_dmax(s: &str) -> Result<Option<usize>, String> {
    match s.trim() {
        "" | "inf" => Ok(None),
        v => v.parse().map(Some).map_err(|_| format!("bad depth limit '{v}'")),
    }
}

/// Decomposes `matrix` (rows on lines, or a JSON array) and returns the
/// graph, its DOT text, the cost report and the per-step trajectory.
pub fn decompose_json(matrix: &str, algorithm: &str, target_db: f64, dmax: &str, schedule: &str) -> Result<String, String> {
    let t = parse_matrix(matrix).map_err(|e| e.to_string())?;
    let algorithm: Algorithm = algorithm.parse().map_err(|e: lcc::LccError| e.to_string())?;
    let mut cfg = DecomposeConfig::new(algorithm, target_db);
    cfg.delta_mu_max = parse_dmax(dmax)?;
    if !schedule.trim().is_empty() {
        cfg.schedule = schedule.parse::<Schedule>().map_err(|e| e.to_string())?;
    }
    if algorithm == Algorithm::Sliced {
        cfg.slice_width = cfg.slice_width.min(t.cols());
    }
    let res = decompose(&t, &cfg).map_err(|e| e.to_string())?;
    let model = CostModel::default();
    let report = total_cost(&res.dag, &model);
    let trajectory = (0..res.log.len())
        .map(|i| {
            let snap = res.snapshot(i).map_err(|e| e.to_string())?;
            let c = total_cost(&snap, &model);
            Ok(json!({
                "vertices": snap.len(),
                "n_add": c.n_add,
                "cost_total": c.total,
                "sqnr_db": db(res.log[i].sqnr_db),
            }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    let doc = json!({
        "sqnr_db": db(res.sqnr_db),
        "stop": format!("{:?}", res.stop),
        "n_add": report.n_add,
        "n_delay": report.n_delay,
        "n_inv": report.n_inv,
        "cost_total": report.total,
        "depth": report.depths.max_depth(),
        "dag": serde_json::from_str::<Value>(&dag_to_json(&res.dag)).map_err(|e| e.to_string())?,
        "dot": dag_to_dot(&res.dag),
        "trajectory": trajectory,
    });
    Ok(doc.to_string())
}

/// Mean SQNR against adders-only and total cost for fs, fp and ma at
/// `dmax` in {0, 1, inf}, over `trials` Gaussian matrices.
pub fn curves_json(rows: usize, cols: usize, trials: usize, seed: u64, targets: &str) -> Result<String, String> {
    let grid = targets
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad target '{s}'")))
        .collect::<Result<Vec<f64>, String>>()?;
    let algorithms = vec![
        DecomposeConfig::fs(0.0),
        DecomposeConfig::fp(0.0),
        DecomposeConfig::ma(0.0, Some(0)),
        DecomposeConfig::ma(0.0, Some(1)),
        DecomposeConfig::ma(0.0, None),
    ];
    let names = ["fs", "fp", "ma (dmax 0)", "ma (dmax 1)", "ma (dmax inf)"];
    let spec = ExperimentSpec {
        rows,
        cols,
        trials,
        seed,
        algorithms,
        cost: CostModel::default(),
        grid: Grid::TargetSqnr(grid),
        record_timing: false,
        output: None,
    };
    let table = run_sweep(&spec).map_err(|e| e.to_string())?;
    let series: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let points: Vec<Value> = table
                .aggregates()
                .filter(|r| r.config_index == i)
                .map(|r| json!({"adders": r.cost_adders, "total": r.cost_total, "sqnr_db": db(r.sqnr_db)}))
                .collect();
            json!({"name": name, "points": points})
        })
        .collect();
    Ok(json!({ "series": series }).to_string())
}

/// Digits of `value` and the reconstruction error for 1..=`max_digits` digits.
pub fn csd_json(value: f64, max_digits: usize) -> Result<String, String> {
    let steps = (1..=max_digits.max(1))
        .map(|d| {
            let digits = csd_quantize(value, d).map_err(|e| e.to_string())?;
            let approx: f64 = digits.iter().map(|c| c.value()).sum();
            Ok(json!({
                "digits": digits.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "approx": approx,
                "error": (value - approx).abs(),
            }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(json!({ "value": value, "steps": steps }).to_string())
}

#[wasm_bindgen]
pub fn decompose_matrix(matrix: &str, algorithm: &str, target_db: f64, dmax: &str, schedule: &str) -> Result<String, JsValue> {
    decompose_json(matrix, algorithm, target_db, dmax, schedule).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cost_curves(rows: usize, cols: usize, trials: usize, seed: u64, targets: &str) -> Result<String, JsValue> {
    curves_json(rows, cols, trials, seed, targets).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn csd_digits(value: f64, max_digits: usize) -> Result<String, JsValue> {
    csd_json(value, max_digits).map_err(|e| JsValue::from_str(&e))
}
