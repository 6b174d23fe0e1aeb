//! Result tables and their CSV/JSON serialization.
//!
//! CSV files open with a comment line
//! `# cachenet-table v1 config_hash=<hex> seed=<n>` followed by the column
//! header. Floats carry 12 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const TABLE_FORMAT_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Num(x) => format_sig(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => {
                json!(format_sig(*x).parse::<f64>().expect("formatted float parses"))
            }
            Cell::Num(x) => json!(format_sig(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `%.12g`-style formatting: fixed notation for exponents in [−5, 12),
/// scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{:.*e}", digits, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (digits as i32 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

impl Table {
    pub fn new(columns: Vec<String>, config_hash: String, seed: u64) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            config_hash,
            seed,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, `None` for non-numeric cells.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn header_line(&self) -> String {
        format!(
            "# cachenet-table v{TABLE_FORMAT_VERSION} config_hash={} seed={}",
            self.config_hash, self.seed
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header_line())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "format_version": TABLE_FORMAT_VERSION,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    /// Parses CSV written by [`Table::write_csv`]. Cells come back as
    /// numbers when they parse as such, otherwise as text.
    pub fn read_csv(text: &str) -> Result<Self> {
        let (first, rest) = text
            .split_once('\n')
            .ok_or_else(|| Error::Config("table is missing its header line".into()))?;
        let mut config_hash = String::new();
        let mut seed = 0;
        for field in first.split_whitespace() {
            if let Some(h) = field.strip_prefix("config_hash=") {
                config_hash = h.to_string();
            } else if let Some(s) = field.strip_prefix("seed=") {
                seed = s.parse().map_err(|_| Error::Config(format!("bad seed `{s}`")))?;
            }
        }
        let mut r = csv::Reader::from_reader(rest.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut table = Table::new(columns, config_hash, seed);
        for rec in r.records() {
            let rec = rec?;
            table.rows.push(
                rec.iter()
                    .map(|s| {
                        if s.is_empty() {
                            Cell::Empty
                        } else if let Ok(i) = s.parse::<i64>() {
                            Cell::Int(i)
                        } else if let Ok(x) = s.parse::<f64>() {
                            Cell::Num(x)
                        } else {
                            Cell::Text(s.to_string())
                        }
                    })
                    .collect(),
            );
        }
        Ok(table)
    }
}

/// Writes `table` to `path`, creating parent directories.
pub fn emit(table: &Table, format: Format, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    table.write(format, &mut out)?;
    out.flush()?;
    Ok(())
}
