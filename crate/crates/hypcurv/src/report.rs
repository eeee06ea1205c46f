//! `report.csv` and `manifest.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use hypcurv_core::{CheckReport, CheckStatus};

use crate::config::Command;
use crate::IoError;

pub const REPORT_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// One row per check: `check,status,measured,bound,citation`.
pub fn report_csv(rows: &[CheckReport]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "status", "measured", "bound", "citation"])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.status.as_str().to_string(),
            r.measured.to_string(),
            r.bound.to_string(),
            r.citation.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_report(dir: &Path, rows: &[CheckReport]) -> Result<PathBuf, IoError> {
    let path = dir.join(REPORT_FILE);
    let bytes = report_csv(rows).map_err(|e| IoError::new(&path, std::io::Error::other(e)))?;
    fs::write(&path, bytes).map_err(|e| IoError::new(&path, e))?;
    Ok(path)
}

/// One human-readable line per check, for stdout.
pub fn format_row(r: &CheckReport) -> String {
    let mut line = format!(
        "{:<13} {} measured={:.6e} bound={:.6e} [{}]",
        r.status.as_str(),
        r.name,
        r.measured,
        r.bound,
        r.citation
    );
    if !r.detail.is_empty() {
        line.push(' ');
        line.push_str(&r.detail);
    }
    line
}

pub fn any_failed(rows: &[CheckReport]) -> bool {
    rows.iter().any(|r| r.status == CheckStatus::Fail)
}

/// Everything needed to reproduce a run, and nothing that changes between
/// identical runs.
pub struct Manifest<'a> {
    pub command: Command,
    pub seed: u64,
    pub output: &'a Path,
    pub exit_code: i32,
    pub files: &'a [PathBuf],
    pub config_text: &'a str,
}

impl Manifest<'_> {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("hypcurv {}\n", crate::VERSION));
        s.push_str(&format!("hypcurv-core {}\n", hypcurv_core::VERSION));
        s.push_str(&format!("command = {}\n", self.command.as_str()));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("output = {}\n", self.output.display()));
        s.push_str(&format!("exit_code = {}\n", self.exit_code));
        s.push_str("files:\n");
        for f in self.files {
            let name = f.strip_prefix(self.output).unwrap_or(f);
            s.push_str(&format!("  {}\n", name.display()));
        }
        s.push_str("config:\n");
        for line in self.config_text.lines() {
            s.push_str(&format!("  | {line}\n"));
        }
        s
    }

    pub fn write(&self) -> Result<PathBuf, IoError> {
        let path = self.output.join(MANIFEST_FILE);
        fs::write(&path, self.render()).map_err(|e| IoError::new(&path, e))?;
        Ok(path)
    }
}
