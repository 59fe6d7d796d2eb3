//! Tabular output with a schema name and version, as CSV or JSON.
//!
//! CSV carries `# schema`, `# version` and metadata as leading comment lines,
//! then a header row. JSON is `{schema, version, meta, columns, rows}` with
//! one object per row. Floats use Rust's shortest round-trip formatting;
//! non-finite values are written as the strings `inf`, `-inf` and `NaN`.

use std::io::Write;

use serde_json::{json, Map, Value as Json};

use crate::config::Format;
use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(i) => json!(i),
            Value::Float(x) => serde_json::Number::from_f64(*x)
                .map(Json::Number)
                .unwrap_or_else(|| json!(format_float(*x))),
            Value::Text(s) => json!(s),
        }
    }

    fn to_field(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            Value::Text(s) => s.parse().ok(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// Shortest round-trip decimal, with `inf`, `-inf`, `NaN` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: String,
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Table {
            schema: schema.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.meta.push((key.to_string(), v.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.schema);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write(&self, format: Format, w: &mut dyn Write) -> LabResult<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
                writeln!(w)?;
                Ok(())
            }
        }
    }

    pub fn to_json(&self) -> Json {
        let meta: Map<String, Json> = self.meta.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| {
                let o: Map<String, Json> = self.columns.iter().cloned().zip(r.iter().map(Value::to_json)).collect();
                Json::Object(o)
            })
            .collect();
        json!({
            "schema": self.schema,
            "version": SCHEMA_VERSION,
            "meta": meta,
            "columns": self.columns,
            "rows": rows,
        })
    }

    fn write_csv(&self, w: &mut dyn Write) -> LabResult<()> {
        writeln!(w, "# schema = {}", self.schema)?;
        writeln!(w, "# version = {SCHEMA_VERSION}")?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {}", v.to_field())?;
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(&self.columns)?;
        for r in &self.rows {
            cw.write_record(r.iter().map(Value::to_field))?;
        }
        cw.flush()?;
        Ok(())
    }

    /// Reads CSV written by [`Table::write`]; cells come back as text.
    pub fn read_csv(text: &str) -> LabResult<Table> {
        let mut schema = None;
        let mut version = None;
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let (k, v) = line[1..]
                .split_once('=')
                .ok_or_else(|| LabError::Parse(format!("bad comment line `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "schema" => schema = Some(v.to_string()),
                "version" => version = v.parse::<u32>().ok(),
                _ => meta.push((k.to_string(), Value::Text(v.to_string()))),
            }
        }
        if version != Some(SCHEMA_VERSION) {
            return Err(LabError::Parse("missing or unsupported schema version".into()));
        }
        let schema = schema.ok_or_else(|| LabError::Parse("missing schema line".into()))?;
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = rd.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec?.iter().map(|f| Value::Text(f.to_string())).collect());
        }
        Ok(Table {
            schema,
            meta,
            columns,
            rows,
        })
    }

    /// Reads JSON written by [`Table::write`].
    pub fn read_json(text: &str) -> LabResult<Table> {
        let v: Json = serde_json::from_str(text)?;
        let bad = || LabError::Parse("not a diolab table".into());
        if v["version"].as_u64() != Some(SCHEMA_VERSION as u64) {
            return Err(LabError::Parse("missing or unsupported schema version".into()));
        }
        let schema = v["schema"].as_str().ok_or_else(bad)?.to_string();
        let columns: Vec<String> = v["columns"]
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(bad))
            .collect::<LabResult<_>>()?;
        let from = |j: &Json| match j {
            Json::Number(n) => n
                .as_i64()
                .map(Value::Int)
                .unwrap_or_else(|| Value::Float(n.as_f64().unwrap_or(f64::NAN))),
            Json::String(s) => Value::Text(s.clone()),
            other => Value::Text(other.to_string()),
        };
        let meta = v["meta"]
            .as_object()
            .ok_or_else(bad)?
            .iter()
            .map(|(k, x)| (k.clone(), from(x)))
            .collect();
        let mut rows = Vec::new();
        for r in v["rows"].as_array().ok_or_else(bad)? {
            let o = r.as_object().ok_or_else(bad)?;
            rows.push(
                columns
                    .iter()
                    .map(|c| o.get(c).map(from).ok_or_else(bad))
                    .collect::<LabResult<_>>()?,
            );
        }
        Ok(Table {
            schema,
            meta,
            columns,
            rows,
        })
    }
}
