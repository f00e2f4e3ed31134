//! Browser bindings. Each export has a plain-Rust twin so the logic is
//! testable natively; the wrappers only translate errors.

use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

use verblunsky_core::alpha::nice_identity_check;
use verblunsky_core::exact::Rat;
use verblunsky_core::gaussian::variance_pmf;
use verblunsky_core::opuc::{measure_density, VerblunskySeq};

/// Largest degree accepted by the nice-identity sweep.
pub const MAX_NICE_DEGREE: u32 = 4;
/// Largest truncation index accepted by the nice-identity sweep.
pub const MAX_NICE_INDEX: u32 = 5000;

/// Density values on a `grid`-point circle grid for α given as
/// interleaved `[re0, im0, re1, im1, ...]`.
pub fn density(interleaved: &[f64], grid: usize) -> Result<Vec<f64>, String> {
    if interleaved.len() % 2 != 0 {
        return Err("alpha needs an even number of values (re, im pairs)".into());
    }
    let alpha = interleaved
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    let alpha = VerblunskySeq::new(alpha).map_err(|e| e.to_string())?;
    Ok(measure_density(&alpha, grid)
        .map_err(|e| e.to_string())?
        .values)
}

/// JSON array of `{n, lhs, rhs, tail}` for truncation indices
/// `step, 2·step, ..., max_index`; values are decimal approximations.
pub fn nice_convergence(n: u32, beta: &str, max_index: u32, points: u32) -> Result<String, String> {
    if !(1..=MAX_NICE_DEGREE).contains(&n) {
        return Err(format!("n must be in 1..={MAX_NICE_DEGREE}"));
    }
    if !(1..=MAX_NICE_INDEX).contains(&max_index) {
        return Err(format!("max index must be in 1..={MAX_NICE_INDEX}"));
    }
    let beta: Rat = beta.parse().map_err(|e| format!("{e}"))?;
    let points = points.clamp(1, max_index);
    let rows = (1..=points)
        .map(|k| {
            let idx = (max_index as u64 * k as u64 / points as u64) as u32;
            let r = nice_identity_check(n, &beta, idx).map_err(|e| e.to_string())?;
            Ok(json!({
                "n": idx,
                "lhs": r.lhs.to_f64(),
                "rhs": r.rhs.to_f64(),
                "tail": r.tail.to_f64(),
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(serde_json::Value::Array(rows).to_string())
}

/// JSON object mapping powers of 1/β to exact coefficients of E|x_n|².
pub fn variance_polynomial(n: u32) -> Result<String, String> {
    if !(1..=60).contains(&n) {
        return Err("n must be in 1..=60".into());
    }
    serde_json::to_string(&variance_pmf(n)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn density_curve(alpha: &[f64], grid: usize) -> Result<Vec<f64>, JsError> {
    density(alpha, grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn nice_identity_convergence(
    n: u32,
    beta: &str,
    max_index: u32,
    points: u32,
) -> Result<String, JsError> {
    nice_convergence(n, beta, max_index, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn variance_pmf_json(n: u32) -> Result<String, JsError> {
    variance_polynomial(n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_gives_uniform_density() {
        let d = density(&[], 32).unwrap();
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let d = density(&[0.5, 0.0], 64).unwrap();
        let mass = d.iter().sum::<f64>() / 64.0;
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_bad_input() {
        assert!(density(&[0.5], 32).is_err());
        assert!(density(&[1.0, 0.0], 32).is_err());
        assert!(density(&[0.1, 0.0], 8).is_err());
    }

    #[test]
    fn nice_convergence_approaches_one() {
        let rows: serde_json::Value =
            serde_json::from_str(&nice_convergence(2, "1", 1000, 4).unwrap()).unwrap();
        let rows = rows.as_array().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3]["n"], 1000);
        let last = &rows[3];
        let gap = (last["rhs"].as_f64().unwrap() - last["lhs"].as_f64().unwrap()).abs();
        assert!(gap <= last["tail"].as_f64().unwrap() + 1e-15);
        assert_eq!(last["rhs"], 1.0);
        assert!(nice_convergence(0, "1", 10, 2).is_err());
        assert!(nice_convergence(2, "x", 10, 2).is_err());
    }

    #[test]
    fn variance_polynomial_of_three() {
        assert_eq!(
            variance_polynomial(3).unwrap(),
            r#"{"3":"1/6","2":"1/2","1":"1/3"}"#
        );
        assert!(variance_polynomial(0).is_err());
    }
}
