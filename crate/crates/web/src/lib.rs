//! Browser demo bindings.
//!
//! Each export returns a flat `Float64Array` of fixed-width rows so the page
//! can plot it without any JSON round trip. The `*_rows` functions hold the
//! logic and are plain Rust, so they are tested natively.

use wasm_bindgen::prelude::*;

use stein_lab::divergences::{d_hyp, d_max_smooth, f_aux, kl, min_kl_to_polytope};
use stein_lab::families::realize;
use stein_lab::{units, Alphabet, Distribution, FamilySpec};

fn binary(p0: f64) -> Result<Distribution, String> {
    Distribution::from_weights(vec![p0, 1.0 - p0]).map_err(|e| e.to_string())
}

/// Rows `[x, F_c(x), F_{1/2}(x)]` for `x` on `[0, 1]`; the second curve is
/// the binary entropy continuity bound.
pub fn continuity_rows(c: f64, points: usize) -> Result<Vec<f64>, String> {
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        out.push(x);
        out.push(f_aux(c, x).map_err(|e| e.to_string())?);
        out.push(f_aux(0.5, x).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Rows `[ε, D_H^ε(P‖Q), D_max^ε(P‖Q), D(P‖Q)]` for binary `P = (p0, 1−p0)`,
/// `Q = (q0, 1−q0)` and `ε` strictly inside `(0, 1)`.
pub fn divergence_rows(p0: f64, q0: f64, points: usize) -> Result<Vec<f64>, String> {
    let (p, q) = (binary(p0)?, binary(q0)?);
    let rel = kl(&p, &q).map_err(|e| e.to_string())?.value;
    let points = points.max(1);
    let mut out = Vec::with_capacity(4 * points);
    for i in 1..=points {
        let eps = i as f64 / (points + 1) as f64;
        out.push(eps);
        out.push(d_hyp(&p, &q, eps).map_err(|e| e.to_string())?.value);
        out.push(d_max_smooth(&p, &q, eps).map_err(|e| e.to_string())?.value);
        out.push(rel);
    }
    Ok(out)
}

/// Rows `[γ, D((1,0)‖F_1), ½ D((1,0)^{⊗2}‖F_2), ½ log(γ+1)]` on an even grid.
pub fn werner_rows(gamma_min: f64, gamma_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(gamma_min >= 1.0 && gamma_max >= gamma_min) {
        return Err(format!("need 1 <= gamma_min <= gamma_max, got {gamma_min}, {gamma_max}"));
    }
    let p = Distribution::point_mass(Alphabet::binary(), 0).map_err(|e| e.to_string())?;
    let p2 = p.power(2).map_err(|e| e.to_string())?;
    let points = points.max(1);
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
        let gamma = gamma_min + t * (gamma_max - gamma_min);
        let spec = FamilySpec::WernerGamma { gamma };
        let one = realize(&spec, 1)
            .and_then(|s| min_kl_to_polytope(&p, &s.polytope()))
            .map_err(|e| e.to_string())?;
        let two = realize(&spec, 2)
            .and_then(|s| min_kl_to_polytope(&p2, &s.polytope()))
            .map_err(|e| e.to_string())?;
        out.extend([gamma, one.value, two.value / 2.0, 0.5 * units::log(gamma + 1.0)]);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn continuity_curve(c: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(continuity_rows(c, points))
}

#[wasm_bindgen]
pub fn divergence_curve(p0: f64, q0: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(divergence_rows(p0, q0, points))
}

#[wasm_bindgen]
pub fn werner_sweep(gamma_min: f64, gamma_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(werner_rows(gamma_min, gamma_max, points))
}

#[wasm_bindgen]
pub fn log_unit() -> String {
    units::unit().to_string()
}
