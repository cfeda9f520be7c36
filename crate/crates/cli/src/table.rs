//! Tables shaped like the paper's: variations of inequality, variations of
//! poverty, and ratios grouped by poverty family.

use std::fmt::Write as _;
use std::str::FromStr;

use propoor_core::Classification;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Caption {
    InequalityVariations,
    PovertyVariations,
    RatiosByPovertyFamily,
}

impl Caption {
    pub fn tag(&self) -> &'static str {
        match self {
            Caption::InequalityVariations => "inequality-variations",
            Caption::PovertyVariations => "poverty-variations",
            Caption::RatiosByPovertyFamily => "ratios-by-poverty-family",
        }
    }
}

/// One measure or ratio. Numeric cells are `None` only on degenerate rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub estimate: Option<f64>,
    pub gamma: Option<f64>,
    /// Ratio rows only.
    pub gamma_ij: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub classification: Option<Classification>,
    pub note: Option<String>,
}

impl Row {
    pub fn measure(label: String, estimate: f64, gamma: f64, ci: (f64, f64)) -> Self {
        Self {
            label,
            estimate: Some(estimate),
            gamma: Some(gamma),
            gamma_ij: None,
            ci_lo: Some(ci.0),
            ci_hi: Some(ci.1),
            classification: None,
            note: None,
        }
    }

    pub fn degenerate(label: String, note: String) -> Self {
        Self {
            label,
            estimate: None,
            gamma: None,
            gamma_ij: None,
            ci_lo: None,
            ci_hi: None,
            classification: None,
            note: Some(note),
        }
    }

    fn cells(&self) -> [Option<f64>; 5] {
        [self.estimate, self.gamma, self.gamma_ij, self.ci_lo, self.ci_hi]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTable {
    pub caption: Caption,
    pub title: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format {s:?} (text, csv, json)"))),
        }
    }
}

/// Seven significant digits; fixed notation for moderate magnitudes.
pub fn format_sig7(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.6e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..7).contains(&exp) {
        format!("{:.*}", (6 - exp) as usize, x)
    } else {
        sci
    }
}

pub(crate) fn check_finite(table: &OutputTable) -> Result<(), CliError> {
    for row in &table.rows {
        if row.cells().iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::NonFiniteCell {
                table: table.caption.tag().into(),
                row: row.label.clone(),
            });
        }
    }
    Ok(())
}

const CSV_HEADER: [&str; 10] = [
    "table", "title", "label", "estimate", "gamma", "gamma_ij", "ci_lo", "ci_hi", "classification", "note",
];

fn classification_tag(c: &Option<Classification>) -> String {
    match c {
        Some(Classification::ProPoor) => "pro-poor".into(),
        Some(Classification::AntiPoor) => "anti-poor".into(),
        Some(Classification::Ambiguous) => "ambiguous".into(),
        None => String::new(),
    }
}

fn text_table(table: &OutputTable) -> String {
    let ratio = table.caption == Caption::RatiosByPovertyFamily;
    let header: &[&str] = if ratio {
        &["ratio", "estimate", "gamma_ij", "gamma", "ci_lo", "ci_hi", "class"]
    } else {
        &["measure", "estimate", "gamma", "ci_lo", "ci_hi"]
    };
    let num = |v: Option<f64>| v.map(format_sig7).unwrap_or_else(|| "-".into());
    let mut grid: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for row in &table.rows {
        let mut cells = vec![row.label.clone()];
        match (&row.note, row.estimate) {
            (Some(note), None) => cells.push(note.clone()),
            _ => cells.push(num(row.estimate)),
        }
        if ratio {
            cells.push(num(row.gamma_ij));
        }
        cells.push(num(row.gamma));
        cells.push(num(row.ci_lo));
        cells.push(num(row.ci_hi));
        if ratio {
            let c = classification_tag(&row.classification);
            cells.push(if c.is_empty() { "-".into() } else { c });
        }
        grid.push(cells);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = format!("# {}: {}\n", table.caption.tag(), table.title);
    for r in &grid {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn csv_rows(tables: &[OutputTable]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    w.write_record(CSV_HEADER)?;
    for table in tables {
        for row in &table.rows {
            w.write_record([
                table.caption.tag().to_string(),
                table.title.clone(),
                row.label.clone(),
                cell(row.estimate),
                cell(row.gamma),
                cell(row.gamma_ij),
                cell(row.ci_lo),
                cell(row.ci_hi),
                classification_tag(&row.classification),
                row.note.clone().unwrap_or_default(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders several tables: text blocks separated by blank lines, one CSV
/// with a table column, or a JSON array.
pub fn render_tables(tables: &[OutputTable], format: Format) -> Result<String, CliError> {
    for t in tables {
        check_finite(t)?;
    }
    match format {
        Format::Text => Ok(tables.iter().map(text_table).collect::<Vec<_>>().join("\n")),
        Format::Csv => csv_rows(tables),
        Format::Json => Ok(serde_json::to_string_pretty(tables)? + "\n"),
    }
}

pub fn render_table(table: &OutputTable, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            check_finite(table)?;
            Ok(serde_json::to_string_pretty(table)? + "\n")
        }
        _ => render_tables(std::slice::from_ref(table), format),
    }
}
