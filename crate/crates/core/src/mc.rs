//! Monte-Carlo verification: synthetic panels with a known copula and known
//! marginals, closed-form true values, the pair bootstrap, and coverage
//! experiments for the Wald intervals.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::inequality::{delta_inequality, inequality_eval, InequalityFit, InequalitySpec};
use crate::joint::{ratio_epsilon, wald_ci, JointReport};
use crate::numeric;
use crate::panel::{Ecdf, IncomePanel};
use crate::poverty::{delta_poverty, poverty_eval, PovertyFit, PovertySpec, DEFAULT_GRID};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sample size of the plug-in evaluation standing in for a missing closed form.
pub const PSEUDO_TRUTH_N: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Copula {
    Independence,
    Clayton(f64),
    Comonotone,
}

impl Copula {
    /// Draws one (U, V) pair. Clayton uses the closed-form conditional inverse.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.sample(Open01);
        match *self {
            Copula::Independence => (u, rng.sample(Open01)),
            Copula::Comonotone => (u, u),
            Copula::Clayton(theta) => {
                let w: f64 = rng.sample(Open01);
                let v = ((w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0).powf(-1.0 / theta);
                (u, v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marginal {
    LogNormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Pareto { scale: f64, shape: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Marginal::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Marginal::Pareto { scale, shape } => scale > 0.0 && shape > 0.0 && scale.is_finite() && shape.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid marginal {self:?}")))
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::LogNormal { mu, sigma } => (mu + sigma * Normal::standard().inverse_cdf(u)).exp(),
            Marginal::Exponential { rate } => -(-u).ln_1p() / rate,
            Marginal::Pareto { scale, shape } => scale * (1.0 - u).powf(-1.0 / shape),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    Normal::standard().cdf((x.ln() - mu) / sigma)
                }
            }
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Marginal::Pareto { scale, shape } => {
                if x <= scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(shape)
                }
            }
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// E[X 1{X ≤ z}].
    fn partial_mean(&self, z: f64) -> f64 {
        match *self {
            Marginal::LogNormal { mu, sigma } => {
                if z <= 0.0 {
                    0.0
                } else {
                    (mu + 0.5 * sigma * sigma).exp() * Normal::standard().cdf((z.ln() - mu - sigma * sigma) / sigma)
                }
            }
            Marginal::Exponential { rate } => {
                if z <= 0.0 {
                    0.0
                } else {
                    (1.0 - (-rate * z).exp() * (1.0 + rate * z)) / rate
                }
            }
            Marginal::Pareto { scale, shape } => {
                if z <= scale {
                    0.0
                } else if shape == 1.0 {
                    scale * (z / scale).ln()
                } else {
                    shape * scale.powf(shape) / (shape - 1.0) * (scale.powf(1.0 - shape) - z.powf(1.0 - shape))
                }
            }
        }
    }
}

/// Poverty lines of a synthetic experiment; always fixed numbers when the
/// estimators see them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McLines {
    Fixed { z1: f64, z2: f64 },
    /// Z(i) = fraction × population median of marginal i.
    PopulationMedianFraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub copula: Copula,
    pub marginals: [Marginal; 2],
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub inequality: Vec<InequalitySpec>,
    pub poverty: Vec<PovertySpec>,
    pub lines: McLines,
    pub level: f64,
    pub grid: usize,
}

impl McConfig {
    pub fn new(copula: Copula, marginals: [Marginal; 2], n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            copula,
            marginals,
            n,
            replicates,
            seed,
            inequality: Vec::new(),
            poverty: Vec::new(),
            lines: McLines::PopulationMedianFraction(0.5),
            level: 0.95,
            grid: DEFAULT_GRID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 50 {
            return Err(Error::InvalidParameter(format!("experiments need n >= 50, got {}", self.n)));
        }
        if self.replicates < 10 {
            return Err(Error::InvalidParameter(format!(
                "experiments need at least 10 replicates, got {}",
                self.replicates
            )));
        }
        if let Copula::Clayton(theta) = self.copula {
            if !(theta.is_finite() && theta > 0.0) {
                return Err(Error::InvalidParameter(format!("Clayton needs theta > 0, got {theta}")));
            }
        }
        for m in &self.marginals {
            m.validate()?;
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(format!("level {} outside (0, 1)", self.level)));
        }
        for spec in &self.inequality {
            spec.validated()?;
        }
        for spec in &self.poverty {
            spec.validated()?;
        }
        self.resolve_lines()?;
        Ok(())
    }

    pub fn resolve_lines(&self) -> Result<(f64, f64)> {
        let (z1, z2) = match self.lines {
            McLines::Fixed { z1, z2 } => (z1, z2),
            McLines::PopulationMedianFraction(f) => (f * self.marginals[0].median(), f * self.marginals[1].median()),
        };
        if !(z1.is_finite() && z1 > 0.0 && z2.is_finite() && z2 > 0.0) {
            return Err(Error::InvalidParameter(format!("poverty lines must be positive, got ({z1}, {z2})")));
        }
        Ok((z1, z2))
    }
}

/// Independent generator for stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// Replicate `replicate` of the experiment: (U, V) from the copula pushed
/// through the marginal quantile functions.
pub fn sample_panel(cfg: &McConfig, replicate: usize) -> Result<IncomePanel> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, replicate as u64);
    let (x1, x2) = (0..cfg.n)
        .map(|_| {
            let (u, v) = cfg.copula.sample(&mut rng);
            (cfg.marginals[0].quantile(u), cfg.marginals[1].quantile(v))
        })
        .unzip();
    IncomePanel::new(x1, x2)
}

/// Kendall's τ-a by pair enumeration.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut score: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
            score += s as i64;
        }
    }
    score as f64 / (n * (n - 1) / 2) as f64
}

/// Spearman's ρ from the panel's pseudo-observations.
pub fn spearman_rho(panel: &IncomePanel) -> f64 {
    let obs = panel.pseudo_observations();
    let u: Vec<f64> = (0..panel.n()).map(|j| obs.u(j)).collect();
    let v: Vec<f64> = (0..panel.n()).map(|j| obs.v(j)).collect();
    numeric::centered_cross_moment(&u, &v) / (numeric::centered_second_moment(&u) * numeric::centered_second_moment(&v)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthSource {
    ClosedForm,
    /// Plug-in on a single sample of size [`PSEUDO_TRUTH_N`].
    PseudoTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueValue {
    pub first: f64,
    pub second: f64,
    pub source: TruthSource,
}

impl TrueValue {
    pub fn delta(&self) -> f64 {
        self.second - self.first
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueValues {
    pub inequality: Vec<TrueValue>,
    pub poverty: Vec<TrueValue>,
}

pub fn closed_form_inequality(spec: &InequalitySpec, marginal: &Marginal) -> Result<f64> {
    let unsupported = || Error::Unsupported(format!("{spec} under {marginal:?}"));
    match *marginal {
        Marginal::LogNormal { sigma, .. } => {
            let s2 = sigma * sigma;
            match *spec {
                InequalitySpec::GeneralizedEntropy(a) => Ok(((a * (a - 1.0) * s2 / 2.0).exp() - 1.0) / (a * (a - 1.0))),
                InequalitySpec::Theil | InequalitySpec::MeanLogDeviation => Ok(s2 / 2.0),
                InequalitySpec::Atkinson(a) => Ok(1.0 - ((a - 1.0) * s2 / 2.0).exp()),
                InequalitySpec::Champernowne => Ok(1.0 - (-s2 / 2.0).exp()),
                InequalitySpec::Kolm(_) => Err(unsupported()),
            }
        }
        Marginal::Exponential { rate } => match *spec {
            InequalitySpec::GeneralizedEntropy(a) if a > -1.0 => Ok((gamma(a + 1.0) - 1.0) / (a * (a - 1.0))),
            InequalitySpec::Theil => Ok(1.0 - EULER_GAMMA),
            InequalitySpec::MeanLogDeviation => Ok(EULER_GAMMA),
            InequalitySpec::Atkinson(a) if a > -1.0 => Ok(1.0 - gamma(a + 1.0).powf(1.0 / a)),
            InequalitySpec::Champernowne => Ok(1.0 - (-EULER_GAMMA).exp()),
            InequalitySpec::Kolm(a) => Ok((rate / (rate + a)).ln() / a + 1.0 / rate),
            _ => Err(unsupported()),
        },
        Marginal::Pareto { .. } => Err(unsupported()),
    }
}

pub fn closed_form_poverty(spec: &PovertySpec, marginal: &Marginal, line: f64) -> Result<f64> {
    match *spec {
        PovertySpec::Fgt(0.0) => Ok(marginal.cdf(line)),
        PovertySpec::Fgt(1.0) => Ok(marginal.cdf(line) - marginal.partial_mean(line) / line),
        _ => Err(Error::Unsupported(format!("{spec} under {marginal:?}"))),
    }
}

/// Closed-form true values for every measure of `cfg`; fails on the first
/// (measure, marginal) pair without one.
pub fn true_values(cfg: &McConfig) -> Result<TrueValues> {
    let (z1, z2) = cfg.resolve_lines()?;
    let inequality = cfg
        .inequality
        .iter()
        .map(|spec| {
            Ok(TrueValue {
                first: closed_form_inequality(spec, &cfg.marginals[0])?,
                second: closed_form_inequality(spec, &cfg.marginals[1])?,
                source: TruthSource::ClosedForm,
            })
        })
        .collect::<Result<_>>()?;
    let poverty = cfg
        .poverty
        .iter()
        .map(|spec| {
            Ok(TrueValue {
                first: closed_form_poverty(spec, &cfg.marginals[0], z1)?,
                second: closed_form_poverty(spec, &cfg.marginals[1], z2)?,
                source: TruthSource::ClosedForm,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TrueValues { inequality, poverty })
}

/// Deterministic large sample from one marginal.
pub fn pseudo_truth_sample(marginal: &Marginal, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, u64::MAX);
    let mut xs: Vec<f64> = (0..PSEUDO_TRUTH_N).map(|_| marginal.quantile(rng.sample(Open01))).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Closed forms where available, otherwise plug-in values on one sample of
/// size [`PSEUDO_TRUTH_N`] per marginal. Identical (marginal, line) pairs in
/// both periods share the same value, so their true variation is exactly 0.
pub fn resolve_true_values(cfg: &McConfig) -> Result<TrueValues> {
    let (z1, z2) = cfg.resolve_lines()?;
    let mut samples: Vec<Option<Vec<f64>>> = vec![None, None];
    let mut sample_for = |period: usize| -> Vec<f64> {
        if period == 1 && cfg.marginals[1] == cfg.marginals[0] {
            return sample_cached(&mut samples, 0, &cfg.marginals[0], cfg.seed);
        }
        sample_cached(&mut samples, period, &cfg.marginals[period], cfg.seed)
    };
    let mut inequality = Vec::new();
    for spec in &cfg.inequality {
        let closed = (
            closed_form_inequality(spec, &cfg.marginals[0]),
            closed_form_inequality(spec, &cfg.marginals[1]),
        );
        inequality.push(match closed {
            (Ok(first), Ok(second)) => TrueValue {
                first,
                second,
                source: TruthSource::ClosedForm,
            },
            _ => TrueValue {
                first: inequality_eval(spec, &sample_for(0))?.value,
                second: inequality_eval(spec, &sample_for(1))?.value,
                source: TruthSource::PseudoTruth,
            },
        });
    }
    let mut poverty = Vec::new();
    for spec in &cfg.poverty {
        let closed = (
            closed_form_poverty(spec, &cfg.marginals[0], z1),
            closed_form_poverty(spec, &cfg.marginals[1], z2),
        );
        poverty.push(match closed {
            (Ok(first), Ok(second)) => TrueValue {
                first,
                second,
                source: TruthSource::ClosedForm,
            },
            _ => TrueValue {
                first: poverty_eval(spec, &sample_for(0), z1)?.value,
                second: poverty_eval(spec, &sample_for(1), z2)?.value,
                source: TruthSource::PseudoTruth,
            },
        });
    }
    Ok(TrueValues { inequality, poverty })
}

fn sample_cached(cache: &mut [Option<Vec<f64>>], slot: usize, marginal: &Marginal, seed: u64) -> Vec<f64> {
    cache[slot].get_or_insert_with(|| pseudo_truth_sample(marginal, seed)).clone()
}

/// A scalar statistic of a panel that the bootstrap can recompute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    DeltaI(InequalitySpec),
    DeltaJ { spec: PovertySpec, z1: f64, z2: f64 },
    Ratio { inequality: InequalitySpec, poverty: PovertySpec, z1: f64, z2: f64 },
}

impl Statistic {
    pub fn evaluate(&self, panel: &IncomePanel) -> Result<f64> {
        match self {
            Statistic::DeltaI(spec) => delta_inequality(spec, panel),
            Statistic::DeltaJ { spec, z1, z2 } => delta_poverty(spec, panel, *z1, *z2),
            Statistic::Ratio { inequality, poverty, z1, z2 } => {
                let first = inequality_eval(inequality, panel.x1())?.value;
                let second = inequality_eval(inequality, panel.x2())?.value;
                let delta_i = second - first;
                let epsilon = ratio_epsilon(first, second);
                if delta_i.abs() <= epsilon {
                    return Err(Error::RatioDegenerate { delta_i, epsilon });
                }
                Ok(delta_poverty(poverty, panel, *z1, *z2)? / delta_i)
            }
        }
    }
}

/// The statistic on B pair-resampled panels, in resample order. Rows are
/// drawn with replacement as (x1_j, x2_j) pairs so the dependence between
/// periods is preserved. Failed resamples are dropped; 10% or more failures
/// is an error.
pub fn bootstrap_replicates(panel: &IncomePanel, statistic: &Statistic, resamples: usize, seed: u64) -> Result<Vec<f64>> {
    if resamples < 100 {
        return Err(Error::InvalidParameter(format!("bootstrap needs at least 100 resamples, got {resamples}")));
    }
    let n = panel.n();
    let outcomes: Vec<Option<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            panel
                .resample(&indices)
                .and_then(|p| statistic.evaluate(&p))
                .ok()
                .filter(|v| v.is_finite())
        })
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    if failed * 10 >= resamples {
        return Err(Error::OracleUnreliable { failed, total: resamples });
    }
    Ok(outcomes.into_iter().flatten().collect())
}

/// n × the sample variance of the bootstrap replicates, on the same scale as Γ.
pub fn bootstrap_variance(panel: &IncomePanel, statistic: &Statistic, resamples: usize, seed: u64) -> Result<f64> {
    let values = bootstrap_replicates(panel, statistic, resamples, seed)?;
    let k = values.len() as f64;
    Ok(panel.n() as f64 * numeric::centered_second_moment(&values) * k / (k - 1.0))
}

/// Percentile interval [q((1−level)/2), q((1+level)/2)] of the replicates.
pub fn percentile_interval(replicates: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    if replicates.is_empty() {
        return Err(Error::Domain("no bootstrap replicates".into()));
    }
    let ecdf = Ecdf::new(replicates);
    Ok((ecdf.quantile(0.5 * (1.0 - level))?, ecdf.quantile(0.5 * (1.0 + level))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    DeltaI,
    DeltaJ,
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub label: String,
    pub target: Target,
    pub truth: f64,
    pub source: TruthSource,
    /// Fraction of evaluated replicates whose interval contains `truth`.
    pub coverage: f64,
    pub mean_width: f64,
    /// n × Monte-Carlo variance of the estimates over the mean analytic Γ.
    pub variance_ratio: f64,
    pub evaluated: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub n: usize,
    pub replicates: usize,
    pub level: f64,
    pub entries: Vec<CoverageEntry>,
}

/// (estimate, Γ, lo, hi) of one replicate, or None when it failed.
type Outcome = Option<(f64, f64, f64, f64)>;

fn replicate_outcomes(cfg: &McConfig, replicate: usize, z1: f64, z2: f64, ratio_pairs: &[(usize, usize)]) -> Result<Vec<Outcome>> {
    let panel = sample_panel(cfg, replicate)?;
    let n = panel.n();
    let ifits: Vec<Option<InequalityFit>> = cfg.inequality.iter().map(|s| InequalityFit::new(s, &panel).ok()).collect();
    let pfits: Vec<Option<PovertyFit>> = cfg.poverty.iter().map(|s| PovertyFit::new(s, &panel, z1, z2, cfg.grid).ok()).collect();
    let mut out = Vec::new();
    for fit in &ifits {
        out.push(fit.as_ref().and_then(|f| {
            let g = f.gamma();
            let (lo, hi) = wald_ci(f.delta(), g, n, cfg.level).ok()?;
            Some((f.delta(), g, lo, hi))
        }));
    }
    for fit in &pfits {
        out.push(fit.as_ref().and_then(|f| {
            let g = f.gamma(&panel).ok()?.total;
            let (lo, hi) = wald_ci(f.delta(), g.max(0.0), n, cfg.level).ok()?;
            Some((f.delta(), g, lo, hi))
        }));
    }
    for &(i, p) in ratio_pairs {
        out.push(match (&ifits[i], &pfits[p]) {
            (Some(fi), Some(fp)) => JointReport::from_fits(fi, fp, &panel, cfg.level)
                .ok()
                .map(|r| (r.ratio, r.gamma_ratio, r.ci_ratio.0, r.ci_ratio.1)),
            _ => None,
        });
    }
    Ok(out)
}

/// Runs every replicate, tests each interval against the true value and
/// aggregates. Ratio entries appear only for pairs whose true ΔI is nonzero.
pub fn coverage_experiment(cfg: &McConfig) -> Result<CoverageResult> {
    cfg.validate()?;
    if cfg.inequality.is_empty() && cfg.poverty.is_empty() {
        return Err(Error::InvalidParameter("coverage experiment needs at least one measure".into()));
    }
    let (z1, z2) = cfg.resolve_lines()?;
    let truth = resolve_true_values(cfg)?;

    let mut targets: Vec<(String, Target, TrueValue, f64)> = Vec::new();
    for (spec, t) in cfg.inequality.iter().zip(&truth.inequality) {
        targets.push((spec.label(), Target::DeltaI, *t, t.delta()));
    }
    for (spec, t) in cfg.poverty.iter().zip(&truth.poverty) {
        targets.push((spec.label(), Target::DeltaJ, *t, t.delta()));
    }
    let mut ratio_pairs = Vec::new();
    for (p, (pspec, pt)) in cfg.poverty.iter().zip(&truth.poverty).enumerate() {
        for (i, (ispec, it)) in cfg.inequality.iter().zip(&truth.inequality).enumerate() {
            if it.delta().abs() > ratio_epsilon(it.first, it.second) {
                ratio_pairs.push((i, p));
                let source = if it.source == TruthSource::ClosedForm && pt.source == TruthSource::ClosedForm {
                    TruthSource::ClosedForm
                } else {
                    TruthSource::PseudoTruth
                };
                let combined = TrueValue { first: 0.0, second: 0.0, source };
                targets.push((format!("{pspec}/{ispec}"), Target::Ratio, combined, pt.delta() / it.delta()));
            }
        }
    }

    let per_replicate: Vec<Vec<Outcome>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| replicate_outcomes(cfg, r, z1, z2, &ratio_pairs))
        .collect::<Result<_>>()?;

    let entries = targets
        .into_iter()
        .enumerate()
        .map(|(k, (label, target, tv, truth_value))| {
            let outcomes: Vec<(f64, f64, f64, f64)> = per_replicate.iter().filter_map(|row| row[k]).collect();
            let evaluated = outcomes.len();
            let covered = outcomes.iter().filter(|o| o.2 <= truth_value && truth_value <= o.3).count();
            let estimates: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            let gammas: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            let widths: Vec<f64> = outcomes.iter().map(|o| o.3 - o.2).collect();
            let (coverage, mean_width, variance_ratio) = if evaluated == 0 {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                (
                    covered as f64 / evaluated as f64,
                    numeric::mean(&widths),
                    cfg.n as f64 * numeric::centered_second_moment(&estimates) / numeric::mean(&gammas),
                )
            };
            CoverageEntry {
                label,
                target,
                truth: truth_value,
                source: tv.source,
                coverage,
                mean_width,
                variance_ratio,
                evaluated,
                failed: cfg.replicates - evaluated,
            }
        })
        .collect();

    Ok(CoverageResult {
        n: cfg.n,
        replicates: cfg.replicates,
        level: cfg.level,
        entries,
    })
}
