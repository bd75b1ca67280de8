//! Browser demo: wasm-bindgen exports over the `flowsep` catalog.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use flowsep::checker::Verdict;
use flowsep::cli::{self, RunConfig};
use flowsep::space::Point;
use flowsep::systems::{annulus_phi, annulus_psi, lookup_flow, CATALOG_NAMES};
use flowsep::witness;

/// Orbits of φ and ψ on the annulus through the point at polar
/// coordinates `(radius, angle)`, sampled at `samples + 1` times in `[0, t_max]`.
pub fn orbits_json(radius: f64, angle: f64, t_max: f64, samples: usize) -> Result<String, String> {
    if !(1.0..=2.0).contains(&radius) {
        return Err("radius must lie in [1, 2]".into());
    }
    if !(t_max > 0.0) || samples == 0 {
        return Err("need t_max > 0 and at least one sample".into());
    }
    let x = Point::annulus_polar(radius, angle);
    let mut out = serde_json::Map::new();
    for flow in [annulus_phi(), annulus_psi()] {
        let mut pts = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let t = t_max * i as f64 / samples as f64;
            match flow.evolve(t, &x).map_err(|e| e.to_string())? {
                Point::Annulus { x1, x2 } => pts.push([x1, x2]),
                p => return Err(format!("unexpected point {}", p.encode())),
            }
        }
        out.insert(flow.name().to_string(), json!(pts));
    }
    Ok(Value::Object(out).to_string())
}

/// `d(φ_t x, φ_t y)` for `t` in `[-horizon, horizon]` on a catalog flow.
/// Points use the witness-file encoding, e.g. `annulus(1.0,0.0)`.
pub fn closeness_json(
    system: &str,
    x: &str,
    y: &str,
    horizon: f64,
    samples: usize,
) -> Result<String, String> {
    let flow = lookup_flow(system).map_err(|e| e.to_string())?;
    let x = Point::parse(x).map_err(|e| e.to_string())?;
    let y = Point::parse(y).map_err(|e| e.to_string())?;
    if !(horizon > 0.0) || samples == 0 {
        return Err("need horizon > 0 and at least one sample".into());
    }
    let mut ts = Vec::with_capacity(samples + 1);
    let mut ds = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = -horizon + 2.0 * horizon * i as f64 / samples as f64;
        let fx = flow.evolve(t, &x).map_err(|e| e.to_string())?;
        let fy = flow.evolve(t, &y).map_err(|e| e.to_string())?;
        ts.push(t);
        ds.push(flow.space().distance(&fx, &fy).map_err(|e| e.to_string())?);
    }
    let sup = ds.iter().cloned().fold(0.0, f64::max);
    Ok(json!({ "t": ts, "d": ds, "sup": sup }).to_string())
}

/// Verdict of one property. `overrides` is a JSON object with the same keys
/// as a CLI config file (`delta`, `grid`, ...); `system` and `preset` given
/// as arguments take precedence.
pub fn classify_json(system: &str, preset: &str, overrides: &str) -> Result<String, String> {
    let base: RunConfig = if overrides.trim().is_empty() {
        RunConfig::default()
    } else {
        serde_json::from_str(overrides).map_err(|e| e.to_string())?
    };
    let cfg = base.overlay(RunConfig {
        system: Some(system.to_string()),
        preset: Some(preset.to_string()),
        ..RunConfig::default()
    });
    let v = cli::verdict_for(&cfg).map_err(|e| e.to_string())?;
    let kind = match &v {
        Verdict::Violated { .. } => "violated",
        Verdict::ConsistentUpTo { .. } => "consistent",
        Verdict::Inconclusive { .. } => "inconclusive",
    };
    Ok(json!({
        "kind": kind,
        "summary": v.to_string(),
        "witness": v.witness().map(witness::to_text),
    })
    .to_string())
}

/// Catalog names.
pub fn catalog_json() -> String {
    json!(CATALOG_NAMES).to_string()
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn orbits(radius: f64, angle: f64, t_max: f64, samples: usize) -> Result<String, JsError> {
    js(orbits_json(radius, angle, t_max, samples))
}

#[wasm_bindgen]
pub fn closeness(
    system: &str,
    x: &str,
    y: &str,
    horizon: f64,
    samples: usize,
) -> Result<String, JsError> {
    js(closeness_json(system, x, y, horizon, samples))
}

#[wasm_bindgen]
pub fn classify(system: &str, preset: &str, overrides: &str) -> Result<String, JsError> {
    js(classify_json(system, preset, overrides))
}

#[wasm_bindgen]
pub fn catalog() -> String {
    catalog_json()
}
