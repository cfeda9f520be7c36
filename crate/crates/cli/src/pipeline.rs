//! End-to-end estimation: load, fit every measure, assemble tables and
//! joint reports.

use propoor_core::inequality::InequalityFit;
use propoor_core::joint::wald_ci;
use propoor_core::mc::{bootstrap_replicates, percentile_interval, Statistic};
use propoor_core::poverty::{PovertyFit, DEFAULT_GRID};
use propoor_core::{
    CiMethod, Error, IncomePanel, InequalitySpec, JointReport, LinePolicy, PovertySpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::input::PanelSource;
use crate::table::{Caption, Format, OutputTable, Row};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: PanelSource,
    pub inequality: Vec<InequalitySpec>,
    pub poverty: Vec<PovertySpec>,
    pub lines: LinePolicy,
    pub level: f64,
    pub grid: usize,
    pub format: Format,
    /// Percentile-bootstrap intervals with this many resamples instead of Wald.
    pub bootstrap: Option<usize>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(source: PanelSource) -> Self {
        Self {
            source,
            inequality: Vec::new(),
            poverty: Vec::new(),
            lines: LinePolicy::default(),
            level: 0.95,
            grid: DEFAULT_GRID,
            format: Format::Text,
            bootstrap: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.inequality.is_empty() && self.poverty.is_empty() {
            return Err(CliError::Config("select at least one inequality or poverty measure".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Config(format!("level {} outside (0, 1)", self.level)));
        }
        if let Some(b) = self.bootstrap {
            if b < 100 {
                return Err(CliError::Config(format!("bootstrap needs at least 100 resamples, got {b}")));
            }
        }
        Ok(())
    }
}

/// Everything one run produces; the JSON form is this struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub n: usize,
    pub level: f64,
    pub method: CiMethod,
    pub grid: usize,
    pub bootstrap: Option<usize>,
    pub seed: u64,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub tables: Vec<OutputTable>,
    pub reports: Vec<JointReport>,
}

impl PipelineOutput {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                for t in &self.tables {
                    crate::table::check_finite(t)?;
                }
                Ok(serde_json::to_string_pretty(self)? + "\n")
            }
            _ => crate::table::render_tables(&self.tables, format),
        }
    }
}

fn labeled(label: &str) -> impl Fn(Error) -> CliError + '_ {
    move |source| CliError::Measure {
        label: label.to_string(),
        source,
    }
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput, CliError> {
    cfg.validate()?;
    let panel = cfg.source.load()?;
    run_on_panel(cfg, &panel)
}

/// The pipeline on an already-loaded panel; `cfg.source` is ignored.
pub fn run_on_panel(cfg: &RunConfig, panel: &IncomePanel) -> Result<PipelineOutput, CliError> {
    cfg.validate()?;
    let n = panel.n();
    let lines = if cfg.poverty.is_empty() {
        None
    } else {
        Some(cfg.lines.resolve(panel)?)
    };
    let interval = |stat: Statistic, estimate: f64, gamma: f64| -> Result<(f64, f64), Error> {
        match cfg.bootstrap {
            None => wald_ci(estimate, gamma.max(0.0), n, cfg.level),
            Some(b) => percentile_interval(&bootstrap_replicates(panel, &stat, b, cfg.seed)?, cfg.level),
        }
    };

    let ifits: Vec<(InequalityFit, (f64, f64))> = cfg
        .inequality
        .par_iter()
        .map(|spec| {
            let label = spec.label();
            let fit = InequalityFit::new(spec, panel).map_err(labeled(&label))?;
            let ci = interval(Statistic::DeltaI(*spec), fit.delta(), fit.gamma()).map_err(labeled(&label))?;
            Ok((fit, ci))
        })
        .collect::<Result<_, CliError>>()?;

    let pfits: Vec<(PovertyFit, f64, (f64, f64))> = cfg
        .poverty
        .par_iter()
        .map(|spec| {
            let label = spec.label();
            let (z1, z2) = lines.expect("lines resolved when poverty measures exist");
            let fit = PovertyFit::new(spec, panel, z1, z2, cfg.grid).map_err(labeled(&label))?;
            let gamma = fit.gamma(panel).map_err(labeled(&label))?.total;
            let stat = Statistic::DeltaJ { spec: *spec, z1, z2 };
            let ci = interval(stat, fit.delta(), gamma).map_err(labeled(&label))?;
            Ok((fit, gamma, ci))
        })
        .collect::<Result<_, CliError>>()?;

    let pairs: Vec<(usize, usize)> = (0..pfits.len())
        .flat_map(|p| (0..ifits.len()).map(move |i| (p, i)))
        .collect();
    let joint: Vec<Result<JointReport, (String, Error)>> = pairs
        .par_iter()
        .map(|&(p, i)| {
            let (ifit, ci_i) = &ifits[i];
            let (pfit, _, ci_j) = &pfits[p];
            let label = format!("{}/{}", pfit.spec.label(), ifit.spec.label());
            let report = JointReport::from_fits(ifit, pfit, panel, cfg.level).map_err(|e| (label.clone(), e))?;
            match cfg.bootstrap {
                None => Ok(report),
                Some(_) => {
                    let (z1, z2) = lines.expect("lines resolved");
                    let stat = Statistic::Ratio {
                        inequality: ifit.spec,
                        poverty: pfit.spec,
                        z1,
                        z2,
                    };
                    let ci_r = interval(stat, report.ratio, report.gamma_ratio).map_err(|e| (label, e))?;
                    Ok(report.with_intervals(*ci_i, *ci_j, ci_r, CiMethod::Bootstrap))
                }
            }
        })
        .collect();

    let mut tables = Vec::new();
    if !ifits.is_empty() {
        tables.push(OutputTable {
            caption: Caption::InequalityVariations,
            title: "Variations of the inequality indices".into(),
            rows: ifits
                .iter()
                .map(|(f, ci)| Row::measure(f.spec.label(), f.delta(), f.gamma(), *ci))
                .collect(),
        });
    }
    if !pfits.is_empty() {
        tables.push(OutputTable {
            caption: Caption::PovertyVariations,
            title: "Variations of the poverty indices".into(),
            rows: pfits
                .iter()
                .map(|(f, g, ci)| Row::measure(f.spec.label(), f.delta(), *g, *ci))
                .collect(),
        });
    }
    let mut reports = Vec::new();
    for (p, (pfit, _, _)) in pfits.iter().enumerate() {
        if ifits.is_empty() {
            break;
        }
        let mut rows = Vec::new();
        for (k, &(pp, _)) in pairs.iter().enumerate() {
            if pp != p {
                continue;
            }
            match &joint[k] {
                Ok(r) => {
                    rows.push(Row {
                        label: format!("{}/{}", r.poverty, r.inequality),
                        estimate: Some(r.ratio),
                        gamma: Some(r.gamma_ratio),
                        gamma_ij: Some(r.gamma_ij),
                        ci_lo: Some(r.ci_ratio.0),
                        ci_hi: Some(r.ci_ratio.1),
                        classification: Some(r.classification),
                        note: None,
                    });
                    reports.push(r.clone());
                }
                Err((label, Error::RatioDegenerate { .. })) => rows.push(Row::degenerate(label.clone(), "degenerate".into())),
                Err((label, e)) => {
                    return Err(CliError::Measure {
                        label: label.clone(),
                        source: e.clone(),
                    })
                }
            }
        }
        tables.push(OutputTable {
            caption: Caption::RatiosByPovertyFamily,
            title: format!("Ratio of the variations with {}", pfit.spec.label()),
            rows,
        });
    }

    Ok(PipelineOutput {
        n,
        level: cfg.level,
        method: if cfg.bootstrap.is_some() { CiMethod::Bootstrap } else { CiMethod::Wald },
        grid: cfg.grid,
        bootstrap: cfg.bootstrap,
        seed: cfg.seed,
        z1: lines.map(|l| l.0),
        z2: lines.map(|l| l.1),
        tables,
        reports,
    })
}

/// Comma-separated measure list, e.g. "GE:0.5,THEIL,ATK:-0.5".
pub fn parse_list<T>(text: &str) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr<Err = Error>,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(CliError::from))
        .collect()
}
