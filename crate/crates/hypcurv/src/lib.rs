//! File formats, reports and command runners on top of `hypcurv-core`.

use std::path::{Path, PathBuf};

pub mod config;
pub mod mesh;
pub mod report;
pub mod run;

/// An IO failure tagged with the path it happened on.
#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

impl IoError {
    pub fn new(path: &Path, source: std::io::Error) -> Self {
        IoError {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
