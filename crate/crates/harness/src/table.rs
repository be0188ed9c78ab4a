//! Column-ordered tables and their CSV form.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly; integers and booleans are written
//! plainly and missing values as empty fields.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn num(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Inverse of the rendering: integers have no `.`/`e`, floats always
    /// carry an exponent.
    fn parse(s: &str) -> Cell {
        if s.is_empty() {
            return Cell::Empty;
        }
        if let Ok(v) = s.parse::<u64>() {
            return Cell::Int(v);
        }
        match s {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            _ => {}
        }
        match s.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell `(row, column name)`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).and_then(|c| self.rows.get(row).map(|r| &r[c]))
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Table> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut table = Table {
            columns,
            rows: Vec::new(),
        };
        for record in r.records() {
            table.rows.push(record?.iter().map(Cell::parse).collect());
        }
        Ok(table)
    }
}

/// Writes `table` to `path`, creating or truncating the file.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    table.write_to(std::io::BufWriter::new(file))
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Table::read_from(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round_trip(t: &Table) -> Table {
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        Table::read_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["a", "b,c"]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,\"b,c\"\n");
        assert_eq!(round_trip(&t), t);
    }

    #[test]
    fn seventeen_significant_digits() {
        let mut t = Table::new(["x"]);
        t.push(vec![Cell::Num(0.1)]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x\n1.0000000000000001e-1\n");
    }

    proptest! {
        #[test]
        fn numeric_fields_round_trip(
            values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..20),
            ints in proptest::collection::vec(any::<u64>(), 20),
            flag in any::<bool>(),
        ) {
            let mut t = Table::new(["i", "x", "flag", "name", "gap"]);
            for (k, v) in values.iter().enumerate() {
                t.push(vec![Cell::Int(ints[k]), Cell::Num(*v), Cell::Bool(flag), Cell::Text("no-leverage-scott1".into()), Cell::Empty]);
            }
            let back = round_trip(&t);
            prop_assert_eq!(back.columns, t.columns);
            for (a, b) in t.rows.iter().zip(&back.rows) {
                prop_assert_eq!(a[0].clone(), b[0].clone());
                prop_assert_eq!(a[1].as_f64().unwrap().to_bits(), b[1].as_f64().unwrap().to_bits());
                prop_assert_eq!(a[2..].to_vec(), b[2..].to_vec());
            }
        }
    }
}
