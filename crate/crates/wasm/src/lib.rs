//! Three operations for the static demo page: tier weights, share
//! diagnostics, and a full evaluation on a synthetic grid.

use accessplan::allocator::{level_pct, share_deviation};
use accessplan::blockmap::DEFAULT_BUFFER;
use accessplan::io::{access_properties, allocation_properties, blocks_to_geojson};
use accessplan::landuse::UseMap;
use accessplan::netgraph::DEFAULT_SNAP_TOLERANCE;
use accessplan::pipeline::{evaluate_policy, EvalConfig, Site};
use accessplan::policy::{ObjectiveRecord, Policy};
use accessplan::synth::make_synthetic_grid;
use accessplan::Tier;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// `["district","community_cluster","community"]` -> `[w0, w1, w2]`.
pub fn level_pct_json(tiers: &str) -> Result<String, String> {
    let tiers: Vec<Tier> = parse(tiers)?;
    let w = level_pct(&tiers, None).map_err(|e| e.to_string())?;
    Ok(json!(w).to_string())
}

/// Two `{"R":..,"A":..}` maps -> `{achieved, d_lu, mae, rmse}`.
pub fn share_diagnostics_json(target: &str, achieved: &str) -> Result<String, String> {
    let target: UseMap<f64> = parse(target)?;
    let achieved: UseMap<f64> = parse(achieved)?;
    Ok(json!(share_deviation(&achieved, &target)).to_string())
}

/// Evaluates a policy (missing fields take the knee preset) on an `n`×`n`
/// street grid and returns the record plus the allocation as GeoJSON.
pub fn evaluate_grid_json(n: u32, block_size: f64, policy: &str) -> Result<String, String> {
    if !(2..=12).contains(&n) {
        return Err(format!("grid size must be 2..=12, got {n}"));
    }
    let policy: Policy = parse(policy)?;
    policy.validate().map_err(|e| e.to_string())?;
    let (net, blocks) = make_synthetic_grid(n as usize, block_size).map_err(|e| e.to_string())?;
    let site = Site::new(net, blocks, DEFAULT_BUFFER, DEFAULT_SNAP_TOLERANCE).map_err(|e| e.to_string())?;
    let ev = evaluate_policy(&site, &policy, &EvalConfig::default(), None).map_err(|e| e.to_string())?;
    let mut props = access_properties(&ev.tensor);
    for (p, a) in props.iter_mut().zip(allocation_properties(&ev.allocation)) {
        p.extend(a);
    }
    for (p, a) in props.iter_mut().zip(&ev.access) {
        p.insert("access".into(), (*a).into());
    }
    Ok(json!({
        "record": ObjectiveRecord::ok(ev.policy.clone(), ev.raw),
        "shares": ev.shares,
        "allocation": blocks_to_geojson(&site.blocks, &props),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn level_pct_weights(tiers: &str) -> Result<String, JsValue> {
    js(level_pct_json(tiers))
}

#[wasm_bindgen]
pub fn share_diagnostics(target: &str, achieved: &str) -> Result<String, JsValue> {
    js(share_diagnostics_json(target, achieved))
}

#[wasm_bindgen]
pub fn evaluate_grid(n: u32, block_size: f64, policy: &str) -> Result<String, JsValue> {
    js(evaluate_grid_json(n, block_size, policy))
}
