//! Fixed-schema numeric CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// One output file: a header and numeric rows. `None` cells are written
/// empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub path: PathBuf,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvSeries {
    pub fn new(path: PathBuf, columns: &[&str]) -> Self {
        Self { path, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map(format_float).unwrap_or_default()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write(&self) -> Result<(), CliError> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(&self.path, self.render()).map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))
    }
}

/// `<command>_<statistic>_<sigma>_n<min>-<max>.csv` under `dir`.
pub fn series_path(dir: &Path, command: &str, statistic: &str, sigma: &str, grid: &[usize]) -> PathBuf {
    let (lo, hi) = (grid.first().copied().unwrap_or(0), grid.last().copied().unwrap_or(0));
    dir.join(format!("{command}_{statistic}_{sigma}_n{lo}-{hi}.csv"))
}

/// Rounds to 12 significant digits, then prints the shortest string that
/// reads back to the rounded value: fixed notation in `[1e-4, 1e12)`,
/// scientific otherwise.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-4..1e12).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.2), "0.2");
        assert_eq!(format_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_float(100.0), "100");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.234e-7), "1.234e-7");
        assert_eq!(format_float(3.0e15), "3e15");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
    }

    #[test]
    fn rendering() {
        let mut s = CsvSeries::new("x.csv".into(), &["n", "mean", "stderr"]);
        s.push(vec![Some(1.0), Some(0.5), None]);
        s.push(vec![Some(2.0), Some(0.25), Some(0.01)]);
        assert_eq!(s.render(), "n,mean,stderr\n1,0.5,\n2,0.25,0.01\n");
        assert_eq!(s.column("mean"), Some(vec![Some(0.5), Some(0.25)]));
    }

    #[test]
    fn file_names() {
        let p = series_path(Path::new("out"), "trajectories", "purity-1", "pure0-pure0", &[1, 5, 100]);
        assert_eq!(p, Path::new("out/trajectories_purity-1_pure0-pure0_n1-100.csv"));
    }
}
