use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::numfmt::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// JSON envelope `{command, inputs, outputs, version}`.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a> {
    pub command: &'a str,
    pub inputs: &'a Value,
    pub outputs: &'a Value,
    pub version: &'static str,
}

/// A finished command: structured payload plus its text and CSV renderings.
#[derive(Debug, Clone)]
pub struct Output {
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    pub text: String,
    /// Command-specific CSV; falls back to flattened `key,value` rows.
    pub csv: Option<String>,
    /// False when a self-check inside the command failed.
    pub ok: bool,
}

impl Output {
    pub fn new(command: &'static str, inputs: Value, outputs: Value, text: String) -> Self {
        Output {
            command,
            inputs: round_floats(inputs),
            outputs: round_floats(outputs),
            text,
            csv: None,
            ok: true,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn json(&self) -> String {
        let env = Envelope {
            command: self.command,
            inputs: &self.inputs,
            outputs: &self.outputs,
            version: env!("CARGO_PKG_VERSION"),
        };
        let mut s = serde_json::to_string_pretty(&env).expect("envelope serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => self.json(),
            Format::Csv => match &self.csv {
                Some(csv) => csv.clone(),
                None => flatten_csv(&self.outputs),
            },
        }
    }
}

/// Round every float in a JSON tree to nine significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(sig9(x))
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_floats(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn flatten_csv(outputs: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", outputs, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
