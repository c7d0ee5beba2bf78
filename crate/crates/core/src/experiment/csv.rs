//! CSV tables with round-trippable floats.

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl Cell {
    /// Shortest text that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:?}"),
            Cell::Int(k) => k.to_string(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Float(x) => x,
            Cell::Int(k) => k as f64,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

/// A header plus rows of equal width.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_into(&mut w, Path::new("<memory>"))?;
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "<memory>".into(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    fn write_into<W: std::io::Write>(&self, w: &mut csv::Writer<W>, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// Writes `table` to `path` (UTF-8, comma separated, header first).
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = csv::Writer::from_writer(file);
    table.write_into(&mut w, path)
}

/// Reads a table written by [`write_csv`]; every cell is parsed as f64.
pub fn read_csv(path: &Path) -> Result<Table> {
    let io = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header = r.headers().map_err(io)?.iter().map(String::from).collect();
    let mut table = Table { header, rows: Vec::new() };
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map(Cell::Float).map_err(|e| Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{s:?}: {e}")),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        let values = [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, f64::MIN_POSITIVE, 16.67890123456789];
        let mut t = Table::new(["x", "k"]);
        for (k, &v) in values.iter().enumerate() {
            t.push(vec![v.into(), k.into()]);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&t, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.header, ["x", "k"]);
        for (row, &v) in back.rows.iter().zip(&values) {
            assert_eq!(row[0].as_f64().to_bits(), v.to_bits());
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,k\n0.1,0\n"));
    }

    #[test]
    fn missing_directory_names_the_path() {
        let t = Table::new(["a"]);
        let err = write_csv(&t, Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
