//! Machine-readable output. Every float is printed with 17 significant digits;
//! non-finite values become `null` in JSON and `nan`/`inf`/`-inf` in CSV.

use std::io::Write;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::OutputFormat;
use crate::CliError;

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A float that serializes as a JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
        }
    }
}

/// A command result: a JSON document plus its tabular CSV form.
pub struct Report {
    pub json: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new<T: Serialize>(doc: &T, header: Vec<&'static str>, rows: Vec<Vec<Cell>>) -> Result<Self, CliError> {
        let mut json = serde_json::to_string_pretty(doc).map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
        json.push('\n');
        Ok(Self { json, header, rows })
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.json.clone(),
            OutputFormat::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

/// Writes to `path` if given, otherwise to `out`.
pub fn emit(text: &str, path: Option<&std::path::Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.1), "-1.0000000000000001e-1");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_numbers_round_trip() {
        let s = serde_json::to_string(&[F17(2.5), F17(f64::NAN), F17(-3e-300)]).unwrap();
        assert_eq!(s, "[2.5000000000000000e0,null,-3.0000000000000002e-300]");
        let v: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, vec![Some(2.5), None, Some(-3e-300)]);
    }

    #[test]
    fn csv_quoting() {
        let r = Report { json: String::new(), header: vec!["a", "b"], rows: vec![vec![Cell::Text("x,y".into()), Cell::Int(3)]] };
        assert_eq!(r.render(OutputFormat::Csv), "a,b\n\"x,y\",3\n");
    }
}
