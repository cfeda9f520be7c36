//! Income files: one value per line, or two whitespace-separated columns.

use std::fs;
use std::path::{Path, PathBuf};

use propoor_core::IncomePanel;

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty data lines with their 1-based numbers. Trailing blank lines are
/// allowed; blank lines between values are not.
fn data_lines(path: &Path, text: &str) -> Result<Vec<(usize, String)>, CliError> {
    let lines: Vec<&str> = text.lines().collect();
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
    lines[..end]
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let t = l.trim();
            if t.is_empty() {
                Err(parse_error(path, i + 1, l))
            } else {
                Ok((i + 1, t.to_string()))
            }
        })
        .collect()
}

fn parse_error(path: &Path, line: usize, text: &str) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        text: text.to_string(),
    }
}

fn parse_value(path: &Path, line: usize, text: &str) -> Result<f64, CliError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_error(path, line, text))
}

/// One income per line.
pub fn load_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read(path)?;
    data_lines(path, &text)?
        .iter()
        .map(|(line, t)| parse_value(path, *line, t))
        .collect()
}

/// Pairs line j of `path1` with line j of `path2`.
pub fn load_panel(path1: &Path, path2: &Path) -> Result<IncomePanel, CliError> {
    let x1 = load_column(path1)?;
    let x2 = load_column(path2)?;
    if x1.len() != x2.len() {
        return Err(CliError::Unpaired {
            path1: path1.to_path_buf(),
            n1: x1.len(),
            path2: path2.to_path_buf(),
            n2: x2.len(),
        });
    }
    Ok(IncomePanel::new(x1, x2)?)
}

/// Two whitespace-separated columns per line: period-1 income, period-2 income.
pub fn load_paired(path: &Path) -> Result<IncomePanel, CliError> {
    let text = read(path)?;
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    for (line, t) in data_lines(path, &text)? {
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(path, line, &t));
        }
        x1.push(parse_value(path, line, fields[0])?);
        x2.push(parse_value(path, line, fields[1])?);
    }
    Ok(IncomePanel::new(x1, x2)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PanelSource {
    Files { data1: PathBuf, data2: PathBuf },
    Paired(PathBuf),
}

impl PanelSource {
    pub fn load(&self) -> Result<IncomePanel, CliError> {
        match self {
            PanelSource::Files { data1, data2 } => load_panel(data1, data2),
            PanelSource::Paired(path) => load_paired(path),
        }
    }
}
