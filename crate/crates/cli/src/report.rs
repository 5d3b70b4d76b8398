//! Tabular output shared by every subcommand: one header, rows of cells,
//! rendered as CSV, JSON or whitespace-separated text.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    /// Value and the number of decimals used under paper rounding.
    Num(f64, usize),
    Missing,
}

impl Cell {
    pub fn text(s: impl ToString) -> Self {
        Cell::Text(s.to_string())
    }

    fn render(&self, paper: bool) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v, d) if paper => format!("{v:.d$}", d = *d),
            Cell::Num(v, _) => format!("{v}"),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self, paper: bool) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v, _) if !v.is_finite() => Value::Null,
            Cell::Num(v, d) if paper => {
                let rounded: f64 = format!("{v:.d$}", d = *d).parse().expect("formatted float parses");
                Value::from(rounded)
            }
            Cell::Num(v, _) => Value::from(*v),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_json(&self, paper: bool) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json(paper)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Writes the table. `text_cols` picks the columns shown in text mode.
    pub fn write<W: Write + ?Sized>(&self, out: &mut W, format: Format, paper: bool, text_cols: &[&str]) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(&self.headers).map_err(csv_io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| c.render(paper))).map_err(csv_io)?;
                }
                w.flush()?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json(paper)).map_err(|e| CliError::Io(e.into()))?;
                writeln!(out)?;
            }
            Format::Text => {
                let idx: Vec<usize> = text_cols
                    .iter()
                    .map(|c| self.headers.iter().position(|h| h == c).expect("text column exists"))
                    .collect();
                for row in &self.rows {
                    let line: Vec<String> = idx.iter().map(|&i| row[i].render(paper)).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}
