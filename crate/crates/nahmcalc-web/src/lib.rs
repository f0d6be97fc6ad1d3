//! wasm-bindgen bindings for the static demo page in `www/`.

use nahmcalc::json::{self, report_render};
use nahmcalc::puiseux::{char_poly, inverse_branches, puiseux_branches, LocalHiggsField};
use nahmcalc::scalar::ComplexScalar;
use nahmcalc::stationary_phase::{full_transform, TransformOptions};
use nahmcalc::weyl::parse_operator;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<String, nahmcalc::Error>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

pub fn transform_report(input: &str, best_effort: bool) -> Result<String, nahmcalc::Error> {
    let data = json::data_from_json(&json::parse_json_text(input)?)?;
    let opts = TransformOptions {
        best_effort,
        ..TransformOptions::default()
    };
    Ok(report_render(&json::transformed_json(&full_transform(
        &data, &opts,
    )?)))
}

pub fn operator_report(p: &str, q: &str) -> Result<String, nahmcalc::Error> {
    let p = parse_operator(p)?;
    let mut v = json!({"fourier_laplace": p.fourier_laplace().to_string()});
    if !q.trim().is_empty() {
        let q = parse_operator(q)?;
        v["product"] = json!(p.multiply(&q)?.to_string());
        v["product_fourier_laplace"] = json!(p.multiply(&q)?.fourier_laplace().to_string());
    }
    Ok(report_render(&v))
}

pub fn branches_report(
    lambda_re: f64,
    lambda_im: f64,
    size: usize,
    depth: usize,
) -> Result<String, nahmcalc::Error> {
    let lambda = ComplexScalar::float(lambda_re, lambda_im);
    let field = LocalHiggsField::jordan_model(lambda, size, ComplexScalar::float(0.7, 0.3), 16)?;
    let branches = puiseux_branches(&char_poly(&field)?, &ComplexScalar::zero(), depth)?;
    let inverses = inverse_branches(&branches, depth)?;
    Ok(report_render(&json!({
        "branches": branches.iter().map(json::branch_json).collect::<Vec<_>>(),
        "inverse_branch_count": inverses.iter().map(|(_, inv)| inv.ramification).sum::<u32>(),
        "inverses": inverses.iter().map(|(_, inv)| json::branch_json(inv)).collect::<Vec<_>>(),
    })))
}

#[wasm_bindgen]
pub fn transform(input: &str, best_effort: bool) -> Result<String, JsValue> {
    to_js(transform_report(input, best_effort))
}

#[wasm_bindgen]
pub fn operators(p: &str, q: &str) -> Result<String, JsValue> {
    to_js(operator_report(p, q))
}

#[wasm_bindgen]
pub fn branches(
    lambda_re: f64,
    lambda_im: f64,
    size: usize,
    depth: usize,
) -> Result<String, JsValue> {
    to_js(branches_report(lambda_re, lambda_im, size, depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports() {
        let input = include_str!("../../nahmcalc/data/rank_one.json");
        assert!(transform_report(input, false)
            .unwrap()
            .contains("\"transformed\""));
        assert!(operator_report("z*Dz - 1/3", "z")
            .unwrap()
            .contains("-zeta*Dzeta - 4/3"));
        let b = branches_report(0.0, 0.0, 2, 6).unwrap();
        assert!(b.contains("\"inverse_branch_count\": 1"));
    }
}
