//! Tabular output with a metadata header, written as CSV or JSON.
//!
//! A CSV file starts with one `# ` comment line holding the metadata as
//! JSON, followed by the header row and the data rows. A JSON file is an
//! object `{"metadata": .., "columns": [..], "rows": [{..}, ..]}`. Both are
//! deterministic: the same table always renders to the same bytes.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::format::{fmt_num, round_num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    /// Value not defined for this row, written as an empty field or `null`.
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    /// The CSV field.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(round_num(*x)),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Header written at the top of every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    /// Summary values of the run, when the command produces any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Metadata {
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            summary: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Metadata, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.render_csv(meta),
            Format::Json => self.render_json(meta),
        }
    }

    fn render_csv(&self, meta: &Metadata) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "# {}", serde_json::to_string(meta)?)?;
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out)?)
    }

    fn render_json(&self, meta: &Metadata) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("metadata".into(), serde_json::to_value(meta)?);
        doc.insert("columns".into(), serde_json::to_value(&self.columns)?);
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
        s.push('\n');
        Ok(s)
    }
}

/// A table read back from disk, with every cell in its CSV spelling.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Loaded {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cells of column `name` parsed as numbers.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column(name).with_context(|| format!("no column `{name}`"))?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().with_context(|| format!("column `{name}`: `{}` is not a number", r[i])))
            .collect()
    }
}

pub fn parse_csv(text: &str) -> Result<Loaded> {
    let mut meta = None;
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if meta.is_none() {
                meta = Some(serde_json::from_str::<Metadata>(rest.trim()).context("malformed metadata line")?);
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let metadata = meta.context("missing metadata line")?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let columns = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok(Loaded { metadata, columns, rows })
}

pub fn parse_json(text: &str) -> Result<Loaded> {
    let doc: Value = serde_json::from_str(text)?;
    let metadata = serde_json::from_value(doc.get("metadata").cloned().context("missing `metadata`")?)?;
    let columns: Vec<String> = serde_json::from_value(doc.get("columns").cloned().context("missing `columns`")?)?;
    let Some(Value::Array(raw)) = doc.get("rows") else { bail!("missing `rows` array") };
    let mut rows = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let row = columns
            .iter()
            .map(|c| match r.get(c) {
                Some(Value::Null) => Ok(String::new()),
                Some(Value::Number(n)) => Ok(match (n.as_u64(), n.as_f64()) {
                    (Some(u), _) => u.to_string(),
                    (None, Some(x)) => fmt_num(x),
                    _ => n.to_string(),
                }),
                Some(Value::Bool(b)) => Ok(b.to_string()),
                Some(Value::String(s)) => Ok(s.clone()),
                Some(other) => bail!("row {i}, column `{c}`: unexpected value {other}"),
                None => bail!("row {i}: missing column `{c}`"),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Loaded { metadata, columns, rows })
}

/// Reads a file written by [`write_output`], choosing the format from its
/// first non-blank character.
pub fn load(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if text.trim_start().starts_with('{') { parse_json(&text) } else { parse_csv(&text) };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

/// Writes `content` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
