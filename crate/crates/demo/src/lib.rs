//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain strings or numbers and returns a JSON string, so
//! the page needs no glue beyond `JSON.parse`. The same functions are usable
//! natively, which is how the tests exercise them.

use contextua_core::model::ObjectKind;
use contextua_core::noncontextuality::{contextual_fraction, minimal_negativity, ScaleCap};
use contextua_core::rational::{frac, to_f64};
use contextua_core::vorobyev::graham_reduce;
use contextua_core::{ddg, io, scenarios, Error};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Contextual fraction and minimal negativity of the noisy PR box at
/// `steps + 1` evenly spaced visibilities in `[0, 1]`.
pub fn noise_curve(steps: u32) -> Result<Value, Error> {
    let steps = steps.clamp(1, 64) as i64;
    let mut points = Vec::new();
    for k in 0..=steps {
        let v = frac(k, steps);
        let cf = contextual_fraction(&scenarios::noisy_pr_box(&v)?)?.cf;
        let f = scenarios::noisy_pr_box_table(&v).steering_fragment()?;
        let se = f.equivalences(ObjectKind::State);
        let ee = f.equivalences(ObjectKind::Effect);
        let neg = minimal_negativity(&f, &se, &ee, ScaleCap::default())?.negativity;
        points.push(json!({
            "v": to_f64(&v),
            "cf": to_f64(&cf),
            "negativity": to_f64(&neg),
            "exact": { "v": v.to_string(), "cf": cf.to_string(), "negativity": neg.to_string() },
        }));
    }
    Ok(json!({ "points": points }))
}

/// Graham reduction of a hypergraph given as a JSON list of contexts.
pub fn reduce(hypergraph: &str) -> Result<Value, Error> {
    let h = io::hypergraph_from_json(hypergraph)?;
    let r = graham_reduce(&h);
    let value = serde_json::to_value(&r).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(json!({ "acyclic": r.is_empty(), "reduction": value }))
}

/// Homology groups of a complex given by its maximal simplices.
pub fn homology(complex: &str) -> Result<Value, Error> {
    let k = io::complex_from_json(complex)?;
    let groups: Vec<_> = (0..=k.dim().unwrap_or(0)).map(|n| ddg::homology(&k, n)).collect();
    let groups = serde_json::to_value(&groups).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(json!({ "groups": groups, "euler_characteristic": k.euler_characteristic() }))
}

fn export(r: Result<Value, Error>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = noiseCurve)]
pub fn noise_curve_js(steps: u32) -> Result<String, JsValue> {
    export(noise_curve(steps))
}

#[wasm_bindgen(js_name = grahamReduce)]
pub fn reduce_js(hypergraph: &str) -> Result<String, JsValue> {
    export(reduce(hypergraph))
}

#[wasm_bindgen(js_name = homology)]
pub fn homology_js(complex: &str) -> Result<String, JsValue> {
    export(homology(complex))
}
