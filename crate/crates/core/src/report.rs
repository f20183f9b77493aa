//! Deterministic JSON and atomic file output.
//!
//! Floats are printed with 17 significant digits in exponent form so that
//! identical runs give byte-identical files and every value round-trips.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Version of every JSON document written by the crate.
pub const SCHEMA: u32 = 1;

fn push_string(out: &mut String, s: &str) {
    // serde_json already escapes correctly
    out.push_str(&serde_json::to_string(s).expect("string serializes"));
}

fn push_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| {
        for _ in 0..n {
            out.push_str("  ");
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{}", format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => push_string(out, s),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows stay on one line
            if a.len() <= 4 && a.iter().all(|x| x.is_number() || x.is_null()) {
                out.push('[');
                for (k, x) in a.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    push_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                push_value(out, x, indent + 1);
                if k + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                pad(out, indent + 1);
                push_string(out, key);
                out.push_str(": ");
                push_value(out, x, indent + 1);
                if k + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// `{:.16e}` for finite values, `null` otherwise (JSON has no NaN).
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty JSON with fixed float formatting and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    push_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// Wraps a payload as `{"schema": 1, "command": …, "config": …, "result": …}`.
pub fn envelope<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> serde_json::Result<Value> {
    Ok(serde_json::json!({
        "schema": SCHEMA,
        "command": command,
        "config": serde_json::to_value(config)?,
        "result": serde_json::to_value(result)?,
    }))
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        let xs = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0];
        let s = to_json(&xs.to_vec()).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs.to_vec());
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn nan_becomes_null_and_integers_stay_integers() {
        let v = serde_json::json!({"a": f64::NAN, "n": 3, "s": "x\"y"});
        let s = to_json(&v).unwrap();
        assert!(s.contains("\"a\": null"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains(r#""s": "x\"y""#));
        let _: Value = serde_json::from_str(&s).unwrap();
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
