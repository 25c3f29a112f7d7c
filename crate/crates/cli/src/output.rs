//! CSV tables and gnuplot scripts, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// A CSV table held in memory until it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Shortest representation that parses back to the same `f64`; `nan` for
/// points that could not be computed.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(&path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(path)
}

/// One plotted curve.
#[derive(Debug, Clone)]
pub struct Series {
    /// gnuplot `using` expression, e.g. `1:3`.
    pub using: String,
    pub title: String,
}

impl Series {
    pub fn column(x: usize, y: usize, title: impl Into<String>) -> Self {
        Series {
            using: format!("{x}:{y}"),
            title: title.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub logx: bool,
    pub logy: bool,
    pub points: bool,
    pub series: Vec<Series>,
    /// Extra raw commands placed before `plot`.
    pub extra: Vec<String>,
}

impl Plot {
    /// gnuplot script reading `csv` and rendering to `<stem>.png`.
    pub fn script(&self, csv: &str, stem: &str) -> String {
        let mut s = String::new();
        s.push_str("# generated by fbmnc; run with `gnuplot <this file>`\n");
        s.push_str("set datafile separator \",\"\n");
        s.push_str("set datafile missing \"nan\"\n");
        s.push_str("set terminal pngcairo size 900,600\n");
        s.push_str(&format!("set output '{stem}.png'\n"));
        s.push_str(&format!("set title \"{}\"\n", self.title.replace('"', "'")));
        s.push_str(&format!("set xlabel \"{}\"\n", self.xlabel));
        s.push_str(&format!("set ylabel \"{}\"\n", self.ylabel));
        if self.logx {
            s.push_str("set logscale x\n");
        }
        if self.logy {
            s.push_str("set logscale y\n");
            s.push_str("set format y \"10^{%L}\"\n");
        }
        s.push_str("set key top left\nset grid\n");
        for e in &self.extra {
            s.push_str(e);
            s.push('\n');
        }
        let style = if self.points { "linespoints" } else { "lines" };
        let curves: Vec<String> = self
            .series
            .iter()
            .map(|c| format!("'{csv}' skip 1 using {} with {style} title \"{}\"", c.using, c.title))
            .collect();
        s.push_str("plot ");
        s.push_str(&curves.join(", \\\n     "));
        s.push('\n');
        s
    }
}

/// Writes `<stem>.csv` and `<stem>.gp` into `dir`.
pub fn emit(dir: &Path, stem: &str, table: &Table, plot: &Plot) -> Result<Vec<PathBuf>, CliError> {
    let csv_name = format!("{stem}.csv");
    let a = write_atomic(dir, &csv_name, &table.to_csv()?)?;
    let b = write_atomic(dir, &format!("{stem}.gp"), plot.script(&csv_name, stem).as_bytes())?;
    Ok(vec![a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 0.0, 1e-300, 123456.789, -2.5e17, f64::MIN_POSITIVE, 9.999935105058286e-13] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(1e-12), "1e-12");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.csv", b"one").unwrap();
        let p = write_atomic(dir.path(), "a.csv", b"two").unwrap();
        assert_eq!(std::fs::read(p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new(["t_slots", "E_bits"]);
        t.push(vec![num(1.0), num(2.5)]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "t_slots,E_bits\n1,2.5\n");
    }
}
