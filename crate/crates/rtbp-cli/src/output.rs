//! Deterministic artifact emission.
//!
//! Every run produces exactly one artifact, either JSON or CSV, on stdout or
//! at `--out`.  Determinism contract: the same resolved configuration yields
//! byte-identical output, so floats are always printed with a fixed
//! 17-significant-digit scientific format and JSON object keys are emitted in
//! sorted order (serde_json's default `Value` map is a BTreeMap, which the
//! writer walks in key order).

use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

/// Fixed float format used everywhere: 17 significant digits round-trip an
/// IEEE double exactly, and scientific notation keeps the width stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a JSON value with sorted keys, fixed float formatting and
/// two-space indentation.  Returns an error message when a non-finite float
/// is encountered: JSON cannot carry NaN/inf, and silently mangling them
/// would hide a numerical failure.
pub fn to_json_pretty(value: &Value) -> Result<String, String> {
    let mut s = String::new();
    write_value(&mut s, value, 0, true)?;
    s.push('\n');
    Ok(s)
}

/// Compact variant (no whitespace) used for hashing the resolved config.
pub fn to_json_compact(value: &Value) -> Result<String, String> {
    let mut s = String::new();
    write_value(&mut s, value, 0, false)?;
    Ok(s)
}

fn write_value(out: &mut String, v: &Value, depth: usize, pretty: bool) -> Result<(), String> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if !x.is_finite() {
                    return Err(format!("non-finite value {x} cannot be serialized to JSON"));
                }
                let _ = write!(out, "{x:.16e}");
            }
        }
        Value::String(s) => write_json_string(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if pretty {
                    out.push('\n');
                    indent(out, depth + 1);
                }
                write_value(out, item, depth + 1, pretty)?;
            }
            if pretty {
                out.push('\n');
                indent(out, depth);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push('{');
            // serde_json::Map preserves insertion order by default only with
            // the `preserve_order` feature; without it the map is a BTreeMap
            // and iteration is already key-sorted.  Sort defensively anyway so
            // determinism does not hinge on a feature flag.
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if pretty {
                    out.push('\n');
                    indent(out, depth + 1);
                }
                write_json_string(out, key);
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(out, &map[key], depth + 1, pretty)?;
            }
            if pretty {
                out.push('\n');
                indent(out, depth);
            }
            out.push('}');
        }
    }
    Ok(())
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Quote a single CSV field per RFC 4180: fields containing commas, quotes,
/// or line breaks are wrapped in double quotes with embedded quotes doubled.
pub fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        let mut quoted = String::with_capacity(field.len() + 2);
        quoted.push('"');
        for c in field.chars() {
            if c == '"' {
                quoted.push('"');
            }
            quoted.push(c);
        }
        quoted.push('"');
        quoted
    } else {
        field.to_string()
    }
}

/// Assemble a CSV document: header row, data rows, and a trailing metadata
/// comment carrying the resolved-config hash (and the failure tag, if any).
pub fn to_csv(
    header: &[&str],
    rows: &[Vec<String>],
    config_sha256: &str,
    failure: Option<&str>,
) -> String {
    let mut s = String::new();
    s.push_str(
        &header
            .iter()
            .map(|h| csv_field(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    s.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "CSV row width must match header");
        s.push_str(
            &row.iter()
                .map(|f| csv_field(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
    }
    match failure {
        Some(name) => {
            let _ = writeln!(s, "# config-sha256={config_sha256} error={name}");
        }
        None => {
            let _ = writeln!(s, "# config-sha256={config_sha256}");
        }
    }
    s
}

/// Write the artifact to `--out` or stdout.
pub fn write_artifact(out: Option<&PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write output file {}: {e}", path.display())),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| format!("cannot write to stdout: {e}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.25), "-2.5000000000000000e-1");
        assert_eq!(fmt_f64(12345.678), "1.2345678000000000e4");
    }

    #[test]
    fn float_format_round_trips_doubles() {
        for &x in &[
            std::f64::consts::PI,
            1.0 / 3.0,
            -7.213748219e-31,
            6.02214076e23,
        ] {
            let printed = fmt_f64(x);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed} failed to round-trip");
        }
    }

    #[test]
    fn json_keys_are_sorted_and_floats_fixed() {
        let v = json!({"zeta": 1.5, "alpha": {"b": 2, "a": true}, "mid": [1.0, null]});
        let s = to_json_pretty(&v).unwrap();
        let alpha = s.find("\"alpha\"").unwrap();
        let mid = s.find("\"mid\"").unwrap();
        let zeta = s.find("\"zeta\"").unwrap();
        assert!(alpha < mid && mid < zeta, "keys must be alphabetical:\n{s}");
        assert!(s.contains("1.5000000000000000e0"), "{s}");
        assert!(s.contains("1.0000000000000000e0"), "{s}");
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn json_rejects_non_finite_floats() {
        let v = json!({ "x": f64::NAN });
        assert!(to_json_pretty(&v).is_err());
    }

    #[test]
    fn json_escapes_strings() {
        let v = json!({"k": "a\"b\\c\nd"});
        let s = to_json_compact(&v).unwrap();
        assert_eq!(s, r#"{"k":"a\"b\\c\nd"}"#);
    }

    #[test]
    fn compact_json_is_deterministic() {
        let v = json!({"b": [1, 2.5], "a": "x"});
        let s1 = to_json_compact(&v).unwrap();
        let s2 = to_json_compact(&v).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1, r#"{"a":"x","b":[1,2.5000000000000000e0]}"#);
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("with,comma"), "\"with,comma\"");
        assert_eq!(csv_field("with\"quote"), "\"with\"\"quote\"");
        assert_eq!(csv_field("line\nbreak"), "\"line\nbreak\"");
    }

    #[test]
    fn csv_document_has_header_rows_and_hash_comment() {
        let rows = vec![vec!["1".to_string(), "a,b".to_string()]];
        let doc = to_csv(&["x", "label"], &rows, "deadbeef", None);
        assert_eq!(doc, "x,label\n1,\"a,b\"\n# config-sha256=deadbeef\n");
        let doc = to_csv(&["x", "label"], &rows, "deadbeef", Some("CriterionFailed"));
        assert!(doc.ends_with("# config-sha256=deadbeef error=CriterionFailed\n"));
    }
}
