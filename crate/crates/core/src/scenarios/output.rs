//! CSV tables, run manifests and a file set that removes what it wrote if
//! the run fails before committing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::engine::Diagnostics;
use crate::error::Result;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// UTF-8 text with LF line endings and a header row.
    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", fmt_num(*v));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl InvariantCheck {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// Trace, Hermiticity, positivity and purity checks for one trajectory.
pub fn trajectory_checks(prefix: &str, d: &Diagnostics) -> Vec<InvariantCheck> {
    vec![
        InvariantCheck::at_most(format!("{prefix}trace_drift"), d.max_trace_drift, 1e-9),
        InvariantCheck::at_most(
            format!("{prefix}hermiticity_defect"),
            d.max_hermiticity_defect,
            1e-10,
        ),
        InvariantCheck::at_least(format!("{prefix}min_eigenvalue"), d.min_eigenvalue, -1e-9),
        InvariantCheck::at_most(format!("{prefix}max_purity"), d.max_purity, 1.0 + 1e-9),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub csv: String,
    pub created_unix_s: u64,
    pub wall_time_s: f64,
    pub parameters: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub invariants: Vec<InvariantCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(scenario: impl Into<String>, csv: impl Into<String>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            scenario: scenario.into(),
            csv: csv.into(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            wall_time_s: 0.0,
            parameters: serde_json::Value::Null,
            tolerances: serde_json::Value::Null,
            invariants: Vec::new(),
            deviation: None,
            notes: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }
}

/// Manifest path belonging to a CSV file name: `x.csv` → `x.manifest.json`.
pub fn manifest_name(csv: &str) -> String {
    format!("{}.manifest.json", csv.trim_end_matches(".csv"))
}

/// Files written for one scenario. Dropping an uncommitted set deletes them.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        // Recorded before writing so a half-written file is cleaned up too.
        self.written.push(path.clone());
        fs::write(&path, body)?;
        Ok(path)
    }

    /// Write `name` and its manifest.
    pub fn write_csv(&mut self, name: &str, table: &CsvTable, manifest: &Manifest) -> Result<()> {
        self.write(name, &table.render())?;
        let m = serde_json::to_string_pretty(manifest)? + "\n";
        self.write(&manifest_name(name), &m)?;
        Ok(())
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}
