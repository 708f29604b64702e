use std::io::Write;
use std::path::{Path, PathBuf};

use crate::Fail;

/// 17 significant digits, so values survive a text round trip.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, Fail> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Fail::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| Fail::Io(e.to_string()))
    }
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let err = |e: std::io::Error| Fail::Io(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), Fail> {
    write_atomic(path, &table.to_csv()?)
}

/// `<stem>-<series>.dat` next to the CSV file.
pub fn plot_path(csv: &Path, series: &str) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    csv.with_file_name(format!("{stem}-{series}.dat"))
}

/// Two-column whitespace-separated series for plotting.
pub fn write_plot(path: &Path, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> Result<(), Fail> {
    let mut s = format!("# {xlabel} {ylabel}\n");
    for &(x, y) in pts {
        s.push_str(&num(x));
        s.push(' ');
        s.push_str(&num(y));
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn plot_files_sit_next_to_csv() {
        assert_eq!(plot_path(Path::new("a/b/sweep.csv"), "ratio"), PathBuf::from("a/b/sweep-ratio.dat"));
    }
}
