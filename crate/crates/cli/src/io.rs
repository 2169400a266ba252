//! File output and CSV input.
//!
//! Numbers are written in the shortest form that parses back to the same
//! f64, so every CSV round-trips exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Output directory plus the list of files written so far.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
        s.push('\n');
        self.text(name, &s)
    }

    /// CSV with `#` comment lines, a header row and numeric rows.
    pub fn csv<R>(&mut self, name: &str, comments: &[String], header: &[&str], rows: R) -> Result<PathBuf>
    where
        R: IntoIterator,
        R::Item: Serialize,
    {
        let path = self.root.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut buf = std::io::BufWriter::new(file);
        for c in comments {
            writeln!(buf, "# {c}").map_err(|e| CliError::io(&path, e))?;
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
        let csv_err = |e: csv::Error| CliError::io(&path, e.into());
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Columns of a numeric CSV with a header row; `#` lines are comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

/// Read a CSV whose first `n_cols` columns are numeric. Parse failures name
/// the file and the line.
pub fn read_table(path: &Path, n_cols: usize) -> Result<Table> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(csv_line(&e), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < n_cols {
        return Err(parse_err(
            1,
            format!("expected {n_cols} columns in the header, found {}", header.len()),
        ));
    }
    let mut columns = vec![Vec::new(); n_cols];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < n_cols {
            return Err(parse_err(line, format!("expected {n_cols} fields, found {}", rec.len())));
        }
        for (k, col) in columns.iter_mut().enumerate() {
            let v: f64 = rec[k]
                .parse()
                .map_err(|_| parse_err(line, format!("column '{}': '{}' is not a number", header[k], &rec[k])))?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(Table { header, columns })
}

fn csv_line(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}
