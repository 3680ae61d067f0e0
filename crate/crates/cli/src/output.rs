use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// One invocation's output. `params` and `results` keep insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub field: Option<String>,
    pub params: Map<String, Value>,
    pub results: Map<String, Value>,
    pub caveat: bool,
    pub wall_time_ms: f64,
}

impl OutputRecord {
    pub fn new(command: &str, field: Option<String>) -> Self {
        OutputRecord {
            command: command.to_string(),
            field,
            params: Map::new(),
            results: Map::new(),
            caveat: false,
            wall_time_ms: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Header and row with one column per scalar; nested values are written
    /// as JSON text.
    pub fn flat_columns(&self) -> (Vec<String>, Vec<String>) {
        let mut header = vec!["command".to_string(), "field".to_string()];
        let mut row = vec![self.command.clone(), self.field.clone().unwrap_or_default()];
        for (k, v) in &self.params {
            header.push(k.clone());
            row.push(scalar_text(v));
        }
        for (k, v) in &self.results {
            header.push(k.clone());
            row.push(scalar_text(v));
        }
        header.push("caveat".to_string());
        row.push(self.caveat.to_string());
        header.push("wall_time_ms".to_string());
        row.push(self.wall_time_ms.to_string());
        (header, row)
    }
}

pub fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        _ => v.to_string(),
    }
}

pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
}

/// `value` rounded to `decimals`, as a JSON number.
pub fn rounded_number(value: f64, decimals: u32) -> Value {
    let text = format!("{value:.*}", decimals as usize);
    Value::from(text.parse::<f64>().expect("formatted float parses"))
}
