//! JSON encodings of clusters, Hermitian forms and covariant results.

use rug::{Complex, Float};
use serde_json::{json, Value};

use crate::cluster::{PointCluster, ProjectivePoint};
use crate::covariant::{CovariantResult, HermitianForm, ThetaResult};
use crate::error::{Error, Result};
use crate::lattice::json_real;
use crate::linalg::CMatrix;
use crate::mp::{decimal_digits, fmt_float};

fn complex_json(z: &Complex, digits: usize) -> Value {
    json!([fmt_float(z.real(), digits), fmt_float(z.imag(), digits)])
}

fn parse_complex(v: &Value, prec: u32) -> Result<Complex> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            let re = json_real(&pair[0], prec)?;
            let im = json_real(&pair[1], prec)?;
            Ok(Complex::with_val(prec, (re, im)))
        }
        Value::Array(_) => Err(Error::Parse(format!("complex entries need [re, im], found {v}"))),
        other => Ok(Complex::with_val(prec, json_real(other, prec)?)),
    }
}

/// `{ "n": n, "points": [[[re, im], ...], ...] }`; coordinates may also be
/// plain real numbers or exact rational strings.
pub fn cluster_from_json(v: &Value, prec: u32) -> Result<PointCluster> {
    let pts = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("cluster JSON needs a \"points\" array".into()))?;
    let n = v.get("n").and_then(Value::as_u64).map(|n| n as usize);
    let mut out = Vec::with_capacity(pts.len());
    for p in pts {
        let coords = p
            .as_array()
            .ok_or_else(|| Error::Parse("each point must be an array of coordinates".into()))?
            .iter()
            .map(|c| parse_complex(c, prec))
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = n {
            if coords.len() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    found: coords.len(),
                });
            }
        }
        out.push(ProjectivePoint::new(coords)?);
    }
    PointCluster::new(out)
}

pub fn cluster_to_json(c: &PointCluster) -> Value {
    let digits = decimal_digits(c.prec()) as usize;
    let pts: Vec<Value> = c
        .points()
        .iter()
        .map(|p| Value::Array(p.coords().iter().map(|z| complex_json(z, digits)).collect()))
        .collect();
    json!({ "n": c.dim(), "points": pts })
}

pub fn cmatrix_to_json(m: &CMatrix) -> Value {
    let digits = decimal_digits(m.prec()) as usize;
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array((0..m.cols()).map(|j| complex_json(&m[(i, j)], digits)).collect()))
        .collect();
    Value::Array(rows)
}

/// `{ "n": n, "matrix": [[[re, im], ...], ...] }`.
pub fn hermitian_to_json(q: &HermitianForm) -> Value {
    json!({ "n": q.dim(), "matrix": cmatrix_to_json(q.matrix()) })
}

pub fn hermitian_from_json(v: &Value, prec: u32) -> Result<HermitianForm> {
    let rows = v
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("Hermitian form JSON needs a \"matrix\" array".into()))?;
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix rows must be arrays".into()))?
                .iter()
                .map(|x| parse_complex(x, prec))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    HermitianForm::new(CMatrix::from_rows(parsed, prec)?)
}

fn float_str(x: &Float) -> String {
    fmt_float(x, decimal_digits(x.prec()) as usize)
}

pub fn covariant_result_to_json(r: &CovariantResult) -> Value {
    json!({
        "z": hermitian_to_json(&r.z),
        "theta": float_str(&r.theta),
        "log_theta": float_str(&r.log_theta),
        "iterations": r.iterations,
        "final_gradient_norm": float_str(&r.final_gradient_norm),
        "transcript": r.transcript,
    })
}

pub fn theta_result_to_json(r: &ThetaResult) -> Value {
    json!({
        "theta": float_str(&r.theta),
        "log_theta": r.log_theta.as_ref().map(float_str),
        "attained": r.attained,
        "stability": r.class,
        "divergence_witness": r.witness,
        "covariant": r.covariant.as_ref().map(covariant_result_to_json),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_round_trip_and_exact_inputs() {
        let v: Value = serde_json::from_str(r#"{"n": 1, "points": [["1/3", "2"], [["0.5","-1"], ["1","0"]]]}"#).unwrap();
        let c = cluster_from_json(&v, 128).unwrap();
        assert_eq!(c.degree(), 2);
        let back = cluster_from_json(&cluster_to_json(&c), 128).unwrap();
        assert!(back.approx_eq(&c, &Float::with_val(128, 1e-30)));
        let bad: Value = serde_json::from_str(r#"{"n": 2, "points": [["1", "2"]]}"#).unwrap();
        assert!(cluster_from_json(&bad, 128).is_err());
        let zero: Value = serde_json::from_str(r#"{"n": 1, "points": [["0", "0"]]}"#).unwrap();
        assert!(cluster_from_json(&zero, 128).is_err());
    }

    #[test]
    fn hermitian_round_trip() {
        let q = HermitianForm::identity(2, 128);
        let back = hermitian_from_json(&hermitian_to_json(&q), 128).unwrap();
        assert!(back.scaled_distance(&q) < 1e-30);
    }
}
