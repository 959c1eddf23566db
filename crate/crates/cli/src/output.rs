use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value as Json};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Null,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::F(x) => format!("{x:.16e}"),
            Value::I(n) => n.to_string(),
            Value::S(s) => s.clone(),
            Value::B(b) => b.to_string(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::F(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::I(n) => Json::from(*n),
            Value::S(s) => Json::from(s.as_str()),
            Value::B(b) => Json::from(*b),
            Value::Null => Json::Null,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::F(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::F)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub meta: Map<String, Json>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, format: Format, out: W) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Value::csv))?;
                }
                w.flush()
            }
            Format::Json => {
                let rows: Vec<Json> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Json::Object(
                            self.columns
                                .iter()
                                .zip(r)
                                .map(|(c, v)| (c.to_string(), v.json()))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = serde_json::json!({ "meta": self.meta, "rows": rows });
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)
            }
        }
    }

    /// Writes to `path`, or stdout when absent.
    pub fn write(&self, format: Format, path: Option<&Path>) -> io::Result<()> {
        match path {
            Some(p) => {
                let mut f = BufWriter::new(File::create(p)?);
                self.write_to(format, &mut f)?;
                f.flush()
            }
            None => self.write_to(format, io::stdout().lock()),
        }
    }
}
