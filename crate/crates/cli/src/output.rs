//! Report serialization: JSON with every float at 17 significant digits, and
//! CSV tables flattened from the same values.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Compact JSON, floats as `d.ddddddddddddddddde±x`.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", float(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        CompactFormatter.begin_object_key(writer, first)
    }
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("serializing a Value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// `{schema_version, command, passed, parameters, result}`.
pub fn envelope(command: &str, passed: bool, parameters: Value, result: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("command".into(), command.into());
    m.insert("passed".into(), passed.into());
    m.insert("parameters".into(), parameters);
    m.insert("result".into(), result);
    Value::Object(m)
}

pub fn error_object(kind: &str, message: &str) -> Value {
    let mut e = Map::new();
    e.insert("kind".into(), kind.into());
    e.insert("message".into(), message.into());
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("error".into(), Value::Object(e));
    Value::Object(m)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => to_json(other).trim_end().to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if !items.iter().any(|x| x.is_object() || x.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// One row per array element (or a single row for an object), columns in
/// first-seen order, header always present.
pub fn to_csv(value: &Value) -> String {
    let rows: Vec<Vec<(String, String)>> = match value {
        Value::Array(items) => items
            .iter()
            .map(|x| {
                let mut r = Vec::new();
                flatten("", x, &mut r);
                r
            })
            .collect(),
        other => {
            let mut r = Vec::new();
            flatten("", other, &mut r);
            vec![r]
        }
    };
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for (k, _) in r {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory CSV");
    for r in &rows {
        let line = header
            .iter()
            .map(|h| r.iter().find(|(k, _)| k == h).map(|(_, v)| v.as_str()).unwrap_or(""));
        w.write_record(line).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

/// `r,u` table of a profile.
pub fn profile_csv(header: [&str; 2], xs: &[f64], ys: &[f64]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([float(*x), float(*y)]).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&json!({"x": 0.1, "n": 3, "ok": true}));
        assert_eq!(s, "{\"x\":1.0000000000000001e-1,\"n\":3,\"ok\":true}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(to_json(&json!({"x": f64::NAN})), "{\"x\":null}\n");
    }

    #[test]
    fn csv_flattens_nested_objects() {
        let v = json!([{"a": 1.5, "b": {"c": 2}}, {"a": 0.25, "d": "x"}]);
        let s = to_csv(&v);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("a,b.c,d"));
        assert_eq!(lines.next(), Some("1.5000000000000000e0,2,"));
        assert_eq!(lines.next(), Some("2.5000000000000000e-1,,x"));
    }

    #[test]
    fn envelope_key_order() {
        let s = to_json(&envelope("c", true, json!({}), json!({})));
        assert!(s.starts_with("{\"schema_version\":1,\"command\":\"c\",\"passed\":true"));
    }
}
