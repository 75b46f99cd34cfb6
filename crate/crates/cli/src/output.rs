//! Run records and their JSON-lines / CSV rendering.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

/// One emitted line: self-describing, independent of surrounding records.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub payload: Value,
    pub wall_ms: Option<f64>,
    pub version: &'static str,
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize to JSON")
}

/// Rounds to 15 significant digits so output bytes do not depend on the last ulps.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.14e}").parse().unwrap()
}

fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round15(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

pub struct Emitter {
    command: String,
    params: Value,
    format: Format,
    sink: Box<dyn Write>,
    started: Instant,
    timing: bool,
    csv_header: Option<Vec<String>>,
}

impl Emitter {
    pub fn new(command: &str, params: Value, format: Format, sink: Box<dyn Write>, timing: bool) -> Self {
        Emitter {
            command: command.to_string(),
            params,
            format,
            sink,
            started: Instant::now(),
            timing,
            csv_header: None,
        }
    }

    pub fn emit(&mut self, n: Option<u64>, payload: Value) -> Result<(), CliError> {
        let mut record = to_value(&RunRecord {
            command: self.command.clone(),
            params: self.params.clone(),
            n,
            payload,
            wall_ms: self.timing.then(|| self.started.elapsed().as_secs_f64() * 1e3),
            version: VERSION,
        });
        normalize(&mut record);
        match self.format {
            Format::Jsonl => {
                let line = serde_json::to_string(&record).unwrap();
                writeln!(self.sink, "{line}").map_err(io_err)
            }
            Format::Csv => self.emit_csv(&record),
        }
    }

    /// Tabular commands put their rows in `payload.rows`; anything else becomes one flattened row.
    fn emit_csv(&mut self, record: &Value) -> Result<(), CliError> {
        let n = record["N"].clone();
        let (tabular, rows): (bool, Vec<Map<String, Value>>) = match record["payload"].get("rows") {
            Some(Value::Array(rows)) => (true, rows.iter().filter_map(|r| r.as_object().cloned()).collect()),
            _ => {
                let mut flat = Map::new();
                flatten("", &record["payload"], &mut flat);
                (false, vec![flat])
            }
        };
        for row in rows {
            let mut cols = Vec::new();
            if !tabular {
                cols.push(("command".to_string(), Value::String(self.command.clone())));
            }
            cols.push(("N".to_string(), n.clone()));
            cols.extend(row.into_iter().filter(|(k, _)| k != "N"));
            let header: Vec<String> = cols.iter().map(|(k, _)| k.clone()).collect();
            if self.csv_header.as_ref() != Some(&header) {
                writeln!(self.sink, "{}", header.join(",")).map_err(io_err)?;
                self.csv_header = Some(header);
            }
            let line: Vec<String> = cols.iter().map(|(_, v)| csv_cell(v)).collect();
            writeln!(self.sink, "{}", line.join(",")).map_err(io_err)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.sink.flush().map_err(io_err)
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        Value::Array(_) => format!("\"{}\"", v.to_string().replace('"', "\"\"")),
        other => other.to_string(),
    }
}
