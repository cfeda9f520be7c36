//! Coverage experiments described by a key = value file.
//!
//! ```text
//! # comments and blank lines are ignored
//! copula     = clayton:2        # independence | comonotone | clayton:THETA
//! marginal1  = lognormal:0:1    # lognormal:MU:SIGMA | exponential:RATE | pareto:SCALE:SHAPE
//! marginal2  = lognormal:0:1
//! n          = 500
//! replicates = 100
//! seed       = 7
//! ineq       = THEIL,MLD
//! pov        = FGT:1,SEN
//! z_median_frac = 0.5           # or z1 = ..., z2 = ...
//! level      = 0.95
//! grid       = 256
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use propoor_core::mc::{Copula, CoverageResult, Marginal, McConfig, McLines};
use propoor_core::poverty::DEFAULT_GRID;

use crate::pipeline::parse_list;
use crate::table::Format;
use crate::CliError;

const KEYS: [&str; 13] = [
    "copula", "marginal1", "marginal2", "n", "replicates", "seed", "ineq", "pov", "z1", "z2", "z_median_frac", "level",
    "grid",
];

fn config_error(msg: String) -> CliError {
    CliError::Config(msg)
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let key = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(config_error(format!("line {}: unknown key {key:?}", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(config_error(format!("line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(map)
}

fn number<T: std::str::FromStr>(key: &str, text: &str) -> Result<T, CliError> {
    text.parse()
        .map_err(|_| config_error(format!("{key}: cannot parse {text:?}")))
}

fn parse_copula(text: &str) -> Result<Copula, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
        ("independence", 1) => Ok(Copula::Independence),
        ("comonotone", 1) => Ok(Copula::Comonotone),
        ("clayton", 2) => Ok(Copula::Clayton(number("copula", parts[1])?)),
        _ => Err(config_error(format!("copula: cannot parse {text:?}"))),
    }
}

fn parse_marginal(key: &str, text: &str) -> Result<Marginal, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let m = match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
        ("lognormal", 3) => Marginal::LogNormal {
            mu: number(key, parts[1])?,
            sigma: number(key, parts[2])?,
        },
        ("exponential", 2) => Marginal::Exponential { rate: number(key, parts[1])? },
        ("pareto", 3) => Marginal::Pareto {
            scale: number(key, parts[1])?,
            shape: number(key, parts[2])?,
        },
        _ => return Err(config_error(format!("{key}: cannot parse {text:?}"))),
    };
    m.validate()?;
    Ok(m)
}

pub fn parse_mc_config(text: &str) -> Result<McConfig, CliError> {
    let map = parse_key_values(text)?;
    let get = |k: &str| map.get(k).map(String::as_str);
    let require = |k: &str| get(k).ok_or_else(|| config_error(format!("missing key {k:?}")));
    let mut cfg = McConfig::new(
        parse_copula(get("copula").unwrap_or("independence"))?,
        [
            parse_marginal("marginal1", require("marginal1")?)?,
            parse_marginal("marginal2", require("marginal2")?)?,
        ],
        number("n", require("n")?)?,
        number("replicates", require("replicates")?)?,
        get("seed").map_or(Ok(0), |s| number("seed", s))?,
    );
    cfg.inequality = get("ineq").map_or(Ok(Vec::new()), parse_list)?;
    cfg.poverty = get("pov").map_or(Ok(Vec::new()), parse_list)?;
    cfg.lines = match (get("z1"), get("z2"), get("z_median_frac")) {
        (Some(z1), Some(z2), None) => McLines::Fixed {
            z1: number("z1", z1)?,
            z2: number("z2", z2)?,
        },
        (None, None, frac) => McLines::PopulationMedianFraction(frac.map_or(Ok(0.5), |f| number("z_median_frac", f))?),
        _ => return Err(config_error("give both z1 and z2, or z_median_frac alone".into())),
    };
    cfg.level = get("level").map_or(Ok(0.95), |s| number("level", s))?;
    cfg.grid = get("grid").map_or(Ok(DEFAULT_GRID), |s| number("grid", s))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_mc_config(path: &Path) -> Result<McConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mc_config(&text)
}

/// JSON (the full result) or CSV (one line per entry). Text falls back to CSV.
pub fn render_coverage(result: &CoverageResult, format: Format) -> Result<String, CliError> {
    if format == Format::Json {
        return Ok(serde_json::to_string_pretty(result)? + "\n");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label", "target", "truth", "source", "coverage", "mean_width", "variance_ratio", "evaluated", "failed",
    ])?;
    for e in &result.entries {
        w.write_record([
            e.label.clone(),
            tag(&e.target),
            e.truth.to_string(),
            tag(&e.source),
            e.coverage.to_string(),
            e.mean_width.to_string(),
            e.variance_ratio.to_string(),
            e.evaluated.to_string(),
            e.failed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn tag<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}
