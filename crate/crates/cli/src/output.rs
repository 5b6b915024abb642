//! Rendering of command results.
//!
//! Every command builds a JSON value. `csv` and `text` flatten it into
//! `path,value` rows; nested keys join with `.`, array positions with `[i]`.

use serde_json::Value;

use crate::config::Format;

/// Version of the JSON layout of single-computation commands.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("json value serialises");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["path", "value"]).expect("in-memory write");
            for (k, v) in flatten(value) {
                w.write_record([k, v]).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
        }
        Format::Text => flatten(value).into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect(),
    }
}

pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

fn walk(value: &Value, path: String, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(m) => {
            for (k, v) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(v, p, out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, v) in a.iter().enumerate() {
                walk(v, format!("{path}[{i}]"), out);
            }
        }
        Value::Array(_) => out.push((path, String::new())),
        Value::String(s) => out.push((path, s.clone())),
        Value::Null => out.push((path, String::new())),
        other => out.push((path, other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening() {
        let v = json!({"a": {"b": 1, "c": [true, "x"]}, "d": null, "e": []});
        assert_eq!(
            flatten(&v),
            [("a.b", "1"), ("a.c[0]", "true"), ("a.c[1]", "x"), ("d", ""), ("e", "")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
        );
        assert_eq!(render(&v, Format::Csv).lines().next(), Some("path,value"));
        assert!(render(&v, Format::Text).contains("a.c[1] = x\n"));
    }
}
