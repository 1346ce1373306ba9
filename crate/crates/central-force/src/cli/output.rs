//! Deterministic JSON (17 significant digits) and CSV writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::integrals::PolarState;

fn number(out: &mut String, n: &serde_json::Number) {
    if n.is_i64() || n.is_u64() {
        let _ = write!(out, "{n}");
    } else {
        let x = n.as_f64().unwrap_or(f64::NAN);
        let _ = write!(out, "{x:.16e}");
    }
}

fn string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).unwrap_or_else(|_| "\"\"".into()));
}

fn value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => number(out, n),
        Value::String(s) => string(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| matches!(x, Value::Number(_) | Value::Null | Value::Bool(_)));
            if flat {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                string(out, k);
                out.push_str(": ");
                value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with every float printed with 17 significant digits and keys
/// in sorted order.
pub fn to_json(v: &impl Serialize) -> Result<String> {
    let tree = serde_json::to_value(v).map_err(|e| Error::Io(format!("serialization failed: {e}")))?;
    let mut out = String::new();
    value(&mut out, &tree, 0);
    out.push('\n');
    Ok(out)
}

/// Trajectory CSV with header `t,r,theta,v,omega` and shortest round-trip floats.
pub fn trajectory_csv(states: &[PolarState]) -> String {
    let mut out = String::from("t,r,theta,v,omega\n");
    for s in states {
        let _ = writeln!(out, "{},{},{},{},{}", s.t, s.r, s.theta, s.v, s.omega);
    }
    out
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_17_digits() {
        let s = to_json(&json!({"b": 0.1, "a": [1, 2.5], "c": null})).unwrap();
        assert_eq!(s, "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": null\n}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_round_trips() {
        let s = PolarState { t: 0.1, r: 1.0 / 3.0, theta: 0.0, v: -2.0, omega: 1e-300 };
        let text = trajectory_csv(&[s]);
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row, vec![0.1, 1.0 / 3.0, 0.0, -2.0, 1e-300]);
    }
}
