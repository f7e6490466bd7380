//! JSON and CSV output with 17 significant digits.

use std::str::FromStr;

use liewedge::liealg::ConditionReport;
use liewedge::matcore::Mat;
use liewedge::wedge::Saturation;
use serde_json::{json, Map, Number, Value};

use crate::sysfile::fmt_f64;

pub const SCHEMA_VERSION: u64 = 1;

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Number::from_str(&fmt_f64(x)).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Row-major real and imaginary parts; `im` is null for real matrices.
pub fn matrix(m: &Mat) -> Value {
    let part = |f: fn(&liewedge::matcore::C64) -> f64| -> Value {
        Value::Array(
            (0..m.rows())
                .map(|i| Value::Array((0..m.cols()).map(|j| num(f(&m.get(i, j)))).collect()))
                .collect(),
        )
    };
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "re": part(|z| z.re),
        "im": if m.is_real() { Value::Null } else { part(|z| z.im) },
    })
}

pub fn matrices(ms: &[Mat]) -> Value {
    Value::Array(ms.iter().map(matrix).collect())
}

pub fn conditions(r: &ConditionReport) -> Value {
    json!({
        "dim_kc": r.dim_kc,
        "dim_kd": r.dim_kd,
        "dim_s": r.dim_s,
        "dim_target_k": r.dim_target_k,
        "dim_target_s": r.dim_target_s,
        "holds_H": r.holds_h,
        "holds_WH": r.holds_wh,
        "holds_A": r.holds_a,
    })
}

pub fn saturation(s: &Saturation) -> Value {
    let w = &s.wedge;
    json!({
        "edge_dim": w.edge.dim(),
        "cone_span_dim": w.cone_span_dim(),
        "wedge_dim": w.dim(),
        "rounds": s.rounds,
        "converged": s.converged,
        "edge_dims": s.edge_dims,
        "generator_counts": s.generator_counts,
        "edge_basis": matrices(w.edge.basis()),
        "cone_generators": matrices(w.cone.generators()),
    })
}

/// Top-level document in fixed field order.
pub fn document(command: &str, input: Value, tolerances: Value, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("input".into(), input);
    m.insert("tolerances".into(), tolerances);
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

pub fn csv_row(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}
