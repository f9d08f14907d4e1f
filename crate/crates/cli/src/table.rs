//! CSV tables with `# key: value` metadata lines, and writing them out.

use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Shortest representation that reads back to the same `f64`, switching to
/// exponent form outside `[1e-4, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            meta: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io {
            path: PathBuf::from("<csv buffer>"),
            source: e.into_error(),
        })?;
        out.push_str(&String::from_utf8(bytes).expect("csv writer emits utf-8"));
        Ok(out)
    }
}

/// One named output: a table and optionally a rendered plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub stem: String,
    pub table: Table,
    pub svg: Option<String>,
}

/// Writes `<stem>.csv` and/or `<stem>.svg` into `dir`, creating it if needed.
pub fn write_artifact(dir: &Path, format: Format, artifact: &Artifact) -> CliResult<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join(format!("{}.csv", artifact.stem));
        std::fs::write(&path, artifact.table.to_csv()?).map_err(io_err(&path))?;
        written.push(path);
    }
    if format.svg() {
        if let Some(svg) = &artifact.svg {
            let path = dir.join(format!("{}.svg", artifact.stem));
            std::fs::write(&path, svg).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
