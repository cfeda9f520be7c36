//! File ingestion, the estimation pipeline and table rendering behind the
//! `propoor` binary.

use std::path::PathBuf;

use propoor_core::ErrorKind;
use thiserror::Error;

pub mod input;
pub mod pipeline;
pub mod simulate;
pub mod table;

pub use input::{load_column, load_paired, load_panel, PanelSource};
pub use pipeline::{run_on_panel, run_pipeline, PipelineOutput, RunConfig};
pub use table::{render_table, render_tables, Caption, Format, OutputTable, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: cannot parse {text:?} as an income", path.display())]
    Parse { path: PathBuf, line: usize, text: String },
    #[error("cannot pair {} ({n1} rows) with {} ({n2} rows)", path1.display(), path2.display())]
    Unpaired {
        path1: PathBuf,
        n1: usize,
        path2: PathBuf,
        n2: usize,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{label}: {source}")]
    Measure { label: String, source: propoor_core::Error },
    #[error(transparent)]
    Core(#[from] propoor_core::Error),
    #[error("non-finite value in {table} row {row}")]
    NonFiniteCell { table: String, row: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 configuration, 3 data, 4 degenerate estimator, 5 numeric.
    pub fn exit_code(&self) -> i32 {
        let kind = |e: &propoor_core::Error| match e.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Degenerate => 4,
            ErrorKind::Numeric => 5,
        };
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Unpaired { .. } => 3,
            CliError::Measure { source, .. } | CliError::Core(source) => kind(source),
            CliError::NonFiniteCell { .. } | CliError::Json(_) | CliError::Csv(_) => 5,
        }
    }
}
