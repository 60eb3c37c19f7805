use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A numeric CSV table with a named header.
///
/// Values are written with the shortest representation that parses back to
/// the same `f64`, so write followed by read is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .index_of(name)
            .ok_or_else(|| Error::arg(format!("no column {name:?} (have {:?})", self.columns)))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let io_err = |e: csv::Error| Error::io(path, e.into());
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| Error::io(path, e.into()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut table = Table::new(columns);
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::io(path, e.into()))?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::arg(format!("{}: row {}: {s:?} is not a number", path.display(), i + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != table.columns.len() {
                return Err(Error::arg(format!("{}: row {} has {} fields", path.display(), i + 1, row.len())));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    /// gnuplot data: one two-column block `x y` per column in `series`,
    /// blocks separated by two blank lines so `index k` selects series `k`.
    pub fn write_plot_blocks(&self, path: impl AsRef<Path>, x: &str, series: &[&str]) -> Result<()> {
        let path = path.as_ref();
        let xs = self.column(x)?;
        let mut out = String::new();
        out.push_str(&format!("# two-column blocks, x = {x}\n"));
        for (k, name) in series.iter().enumerate() {
            let ys = self.column(name)?;
            if k > 0 {
                out.push_str("\n\n");
            }
            out.push_str(&format!("# index {k}: {name}\n"));
            for (a, b) in xs.iter().zip(&ys) {
                out.push_str(&format!("{a} {b}\n"));
            }
        }
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}
