//! Output files: CSV tables, JSON summaries and two-column `.dat` series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, Result};

/// Version tag of every CSV column layout written by this crate.
pub const CSV_SCHEMA: &str = "repat-csv/1";

/// A directory that report files are written into.
#[derive(Clone, Debug)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    /// Whitespace-separated `x y` lines under a `#` header.
    pub fn dat(&self, name: &str, header: &str, points: &[(f64, f64)]) -> Result<()> {
        let mut s = format!("# {header}\n");
        for (x, y) in points {
            let _ = writeln!(s, "{x:?} {y:?}");
        }
        self.text(name, &s)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|e| LabError::io(&path, e))
    }
}
