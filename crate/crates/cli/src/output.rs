//! JSON rendering with fixed 17-significant-digit floats, and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

/// Pretty JSON with two-space indentation. Floats are printed as `{:.16e}`,
/// integers and strings as serde_json would print them.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap();
                let _ = write!(out, "{x:.16e}");
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(xs) => {
            if xs.is_empty() {
                out.push_str("[]");
                return;
            }
            // Arrays of scalars stay on one line; matrices read row by row.
            if xs.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, x, depth + 1);
                if i + 1 < xs.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, x)) in map.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                if i + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial document.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = render(&json!({"x": 0.1, "n": 3, "s": "1/2"}));
        assert!(s.contains("\"x\": 1.0000000000000001e-1"));
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn nested_layout() {
        let s = render(&json!({"m": [["1", "2"], ["3", "4"]], "e": []}));
        assert_eq!(s, "{\n  \"e\": [],\n  \"m\": [\n    [\"1\", \"2\"],\n    [\"3\", \"4\"]\n  ]\n}\n");
    }
}
