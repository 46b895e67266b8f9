//! Deterministic CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Version of every CSV column layout and JSON summary this tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// `x` rounded to 9 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// `x` printed with at most 9 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// JSON document `{schema_version, kind, ...fields of data}` with rounded numbers.
pub fn json_document<T: Serialize>(kind: &str, data: &T) -> io::Result<String> {
    let body = serde_json::to_value(data).map_err(io::Error::other)?;
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "kind": kind });
    match round_value(body) {
        Value::Object(fields) => doc.as_object_mut().expect("object").extend(fields),
        other => {
            doc["data"] = other;
        }
    }
    let mut text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
    text.push('\n');
    Ok(text)
}

/// A CSV table of preformatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_num(x)).collect());
    }

    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io::Error::other)?;
        for r in &self.rows {
            w.write_record(r).map_err(io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        String::from_utf8(bytes).map_err(io::Error::other)
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // a closed pipe (`pdc ... | head`) is not a failure
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(4.672749136765899), "4.67274914");
        assert_eq!(fmt_num(-3.1674406403e-5), "-0.0000316744064");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1234567890123.0), "1234567890000");
    }

    #[test]
    fn json_carries_schema_version() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let text = json_document("test", &S { x: 1.0 / 3.0 }).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["x"].as_f64().unwrap(), 0.333333333);
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1,2".into(), "x".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n\"1,2\",x\n");
    }
}
