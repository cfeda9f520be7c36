//! Theil-like inequality measures I = τ(B/h₁(μ) − h₂(μ)), B = mean of h(X),
//! their influence functions over the pseudo-observations and the
//! asymptotic variance of the variation between two periods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::panel::{IncomePanel, Period};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InequalitySpec {
    GeneralizedEntropy(f64),
    Theil,
    MeanLogDeviation,
    Atkinson(f64),
    Champernowne,
    Kolm(f64),
}

impl InequalitySpec {
    pub fn generalized_entropy(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
            return Err(Error::InvalidParameter(format!(
                "GE needs a finite alpha outside {{0, 1}}, got {alpha}"
            )));
        }
        Ok(Self::GeneralizedEntropy(alpha))
    }

    pub fn atkinson(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha >= 1.0 || alpha == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ATK needs alpha < 1 and alpha != 0, got {alpha}"
            )));
        }
        Ok(Self::Atkinson(alpha))
    }

    pub fn kolm(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "KOLM needs alpha > 0, got {alpha}"
            )));
        }
        Ok(Self::Kolm(alpha))
    }

    /// Every parameterized variant re-checked through its constructor.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::GeneralizedEntropy(a) => Self::generalized_entropy(a),
            Self::Atkinson(a) => Self::atkinson(a),
            Self::Kolm(a) => Self::kolm(a),
            other => Ok(other),
        }
    }

    /// Whether h, h₂ or τ involve logs or fractional powers of income.
    pub fn requires_positive(&self) -> bool {
        !matches!(self, Self::Kolm(_))
    }

    pub fn scale_invariant(&self) -> bool {
        !matches!(self, Self::Kolm(_))
    }

    pub fn translation_invariant(&self) -> bool {
        matches!(self, Self::Kolm(_))
    }

    pub fn tau(&self, s: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(a) => (s - 1.0) / (a * (a - 1.0)),
            Self::Theil | Self::MeanLogDeviation => s,
            Self::Atkinson(a) => 1.0 - s.powf(1.0 / a),
            Self::Champernowne => 1.0 - s.exp(),
            Self::Kolm(a) => s.ln() / a,
        }
    }

    pub fn tau_prime(&self, s: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(a) => 1.0 / (a * (a - 1.0)),
            Self::Theil | Self::MeanLogDeviation => 1.0,
            Self::Atkinson(a) => -s.powf(1.0 / a - 1.0) / a,
            Self::Champernowne => -s.exp(),
            Self::Kolm(a) => 1.0 / (a * s),
        }
    }

    pub fn h(&self, x: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(a) | Self::Atkinson(a) => x.powf(a),
            Self::Theil => x * x.ln(),
            Self::MeanLogDeviation => -x.ln(),
            Self::Champernowne => x.ln(),
            Self::Kolm(a) => (-a * x).exp(),
        }
    }

    pub fn h1(&self, x: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(a) | Self::Atkinson(a) => x.powf(a),
            Self::Theil => x,
            Self::MeanLogDeviation | Self::Champernowne => 1.0,
            Self::Kolm(a) => (-a * x).exp(),
        }
    }

    pub fn h1_prime(&self, x: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(a) | Self::Atkinson(a) => a * x.powf(a - 1.0),
            Self::Theil => 1.0,
            Self::MeanLogDeviation | Self::Champernowne => 0.0,
            Self::Kolm(a) => -a * (-a * x).exp(),
        }
    }

    pub fn h2(&self, x: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(_) | Self::Atkinson(_) | Self::Kolm(_) => 0.0,
            Self::Theil | Self::Champernowne => x.ln(),
            Self::MeanLogDeviation => -x.ln(),
        }
    }

    pub fn h2_prime(&self, x: f64) -> f64 {
        match *self {
            Self::GeneralizedEntropy(_) | Self::Atkinson(_) | Self::Kolm(_) => 0.0,
            Self::Theil | Self::Champernowne => 1.0 / x,
            Self::MeanLogDeviation => -1.0 / x,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for InequalitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GeneralizedEntropy(a) => write!(f, "GE({a})"),
            Self::Theil => write!(f, "THEIL"),
            Self::MeanLogDeviation => write!(f, "MLD"),
            Self::Atkinson(a) => write!(f, "ATK({a})"),
            Self::Champernowne => write!(f, "CHAMP"),
            Self::Kolm(a) => write!(f, "KOLM({a})"),
        }
    }
}

/// Parses `GE:0.5`, `THEIL`, `MLD`, `ATK:-0.5`, `CHAMP`, `KOLM:1`
/// (case-insensitive; `GE(0.5)` is accepted too).
impl FromStr for InequalitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = split_measure(s)?;
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Error::InvalidParameter(format!("{name} needs a parameter, e.g. {name}:0.5")))
        };
        let none = |p: Option<f64>, spec: Self| match p {
            Some(_) => Err(Error::InvalidParameter(format!("{name} takes no parameter"))),
            None => Ok(spec),
        };
        match name.as_str() {
            "GE" => Self::generalized_entropy(need(param)?),
            "ATK" | "ATKIN" => Self::atkinson(need(param)?),
            "KOLM" => Self::kolm(need(param)?),
            "THEIL" => none(param, Self::Theil),
            "MLD" => none(param, Self::MeanLogDeviation),
            "CHAMP" => none(param, Self::Champernowne),
            _ => Err(Error::InvalidParameter(format!("unknown inequality measure '{s}'"))),
        }
    }
}

/// Splits `NAME:param` or `NAME(param)` into an upper-cased name and an
/// optional numeric parameter.
pub(crate) fn split_measure(s: &str) -> Result<(String, Option<f64>)> {
    let s = s.trim();
    let (name, param) = if let Some((name, rest)) = s.split_once(':') {
        (name, Some(rest))
    } else if let Some((name, rest)) = s.split_once('(') {
        let inner = rest.strip_suffix(')').ok_or_else(|| {
            Error::InvalidParameter(format!("unbalanced parenthesis in '{s}'"))
        })?;
        (name, Some(inner))
    } else {
        (s, None)
    };
    let param = param
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad parameter in '{s}'")))
        })
        .transpose()?;
    Ok((name.trim().to_ascii_uppercase(), param))
}

/// I_n(i) for one period with the components it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityEstimate {
    pub period: Period,
    pub value: f64,
    /// μ_n(i)
    pub mean: f64,
    /// B_n(i) = (1/n) Σ h(X_j)
    pub b: f64,
    /// K_i = τ′(B_n/h₁(μ_n) − h₂(μ_n))
    pub k: f64,
}

impl InequalityEstimate {
    fn tau_argument(spec: &InequalitySpec, mean: f64, b: f64) -> f64 {
        b / spec.h1(mean) - spec.h2(mean)
    }

    /// Recomputes I_n from the stored mean and B_n.
    pub fn recompute(&self, spec: &InequalitySpec) -> f64 {
        spec.tau(Self::tau_argument(spec, self.mean, self.b))
    }

    /// F*_{i,I} at income x = G⁻¹_{i,n}(Π_i(u,v)).
    pub fn influence_at_income(&self, spec: &InequalitySpec, x: f64) -> f64 {
        let h1 = spec.h1(self.mean);
        let slope = self.b * spec.h1_prime(self.mean) / (h1 * h1) + spec.h2_prime(self.mean);
        self.k * (spec.h(x) / h1 - slope * x)
    }
}

pub fn inequality_eval(spec: &InequalitySpec, sample: &[f64]) -> Result<InequalityEstimate> {
    eval_period(spec, sample, Period::First)
}

fn eval_period(spec: &InequalitySpec, sample: &[f64], period: Period) -> Result<InequalityEstimate> {
    if sample.is_empty() {
        return Err(Error::InvalidPanel("empty sample".into()));
    }
    if spec.requires_positive() {
        if let Some(index) = sample.iter().position(|&x| x <= 0.0) {
            return Err(Error::NonPositiveIncome {
                measure: spec.label(),
                period,
                index,
                value: sample[index],
            });
        }
    }
    let mean = numeric::mean(sample);
    let mut hs = Vec::with_capacity(sample.len());
    for (index, &x) in sample.iter().enumerate() {
        let hx = spec.h(x);
        if !hx.is_finite() {
            return Err(Error::Numeric {
                context: format!("{spec} h(x) in period {period}"),
                index: Some(index),
            });
        }
        hs.push(hx);
    }
    let b = numeric::mean(&hs);
    let arg = InequalityEstimate::tau_argument(spec, mean, b);
    let value = spec.tau(arg);
    let k = spec.tau_prime(arg);
    if !(arg.is_finite() && value.is_finite() && k.is_finite()) {
        return Err(Error::numeric(format!(
            "{spec}: tau argument {arg} outside the domain of tau in period {period}"
        )));
    }
    Ok(InequalityEstimate {
        period,
        value,
        mean,
        b,
        k,
    })
}

/// Both period estimates plus F*_I = F*_{2,I} − F*_{1,I} at every
/// pseudo-observation, in the panel's row order.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityFit {
    pub spec: InequalitySpec,
    pub first: InequalityEstimate,
    pub second: InequalityEstimate,
    pub influence: Vec<f64>,
}

impl InequalityFit {
    pub fn new(spec: &InequalitySpec, panel: &IncomePanel) -> Result<Self> {
        let first = eval_period(spec, panel.x1(), Period::First)?;
        let second = eval_period(spec, panel.x2(), Period::Second)?;
        let obs = panel.pseudo_observations();
        let (e1, e2) = (panel.ecdf(Period::First), panel.ecdf(Period::Second));
        // G⁻¹_n(rank/(n+1)) is the rank-th order statistic.
        let influence = (0..panel.n())
            .map(|j| {
                let x1 = e1.order_statistic(obs.rank(Period::First, j));
                let x2 = e2.order_statistic(obs.rank(Period::Second, j));
                second.influence_at_income(spec, x2) - first.influence_at_income(spec, x1)
            })
            .collect::<Vec<_>>();
        if let Some(index) = influence.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                context: format!("{spec} influence function"),
                index: Some(index),
            });
        }
        Ok(Self {
            spec: *spec,
            first,
            second,
            influence,
        })
    }

    pub fn estimate(&self, period: Period) -> &InequalityEstimate {
        match period {
            Period::First => &self.first,
            Period::Second => &self.second,
        }
    }

    pub fn delta(&self) -> f64 {
        self.second.value - self.first.value
    }

    /// Γ_I: centered second moment of F*_I under the empirical copula.
    pub fn gamma(&self) -> f64 {
        numeric::centered_second_moment(&self.influence)
    }
}

/// F*_{i,I}(u, v) with the empirical quantile in place of G_i⁻¹.
pub fn influence_inequality(
    spec: &InequalitySpec,
    panel: &IncomePanel,
    period: Period,
    u: f64,
    v: f64,
) -> Result<f64> {
    let estimate = eval_period(spec, panel.period(period), period)?;
    let coordinate = match period {
        Period::First => u,
        Period::Second => v,
    };
    let x = panel.ecdf(period).quantile(coordinate)?;
    Ok(estimate.influence_at_income(spec, x))
}

/// I_n(2) − I_n(1).
pub fn delta_inequality(spec: &InequalitySpec, panel: &IncomePanel) -> Result<f64> {
    let first = eval_period(spec, panel.x1(), Period::First)?;
    let second = eval_period(spec, panel.x2(), Period::Second)?;
    Ok(second.value - first.value)
}

pub fn gamma_i(spec: &InequalitySpec, panel: &IncomePanel) -> Result<f64> {
    Ok(InequalityFit::new(spec, panel)?.gamma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_specs() -> Vec<InequalitySpec> {
        vec![
            InequalitySpec::GeneralizedEntropy(0.5),
            InequalitySpec::GeneralizedEntropy(2.0),
            InequalitySpec::GeneralizedEntropy(3.0),
            InequalitySpec::GeneralizedEntropy(-1.0),
            InequalitySpec::Theil,
            InequalitySpec::MeanLogDeviation,
            InequalitySpec::Atkinson(0.5),
            InequalitySpec::Atkinson(-0.5),
            InequalitySpec::Champernowne,
            InequalitySpec::Kolm(1.0),
            InequalitySpec::Kolm(0.3),
        ]
    }

    fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1e-3);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn assert_close_rel(analytic: f64, numeric: f64, what: &str) {
        let scale = analytic.abs().max(numeric.abs()).max(1e-8);
        assert!(
            (analytic - numeric).abs() / scale < 1e-6,
            "{what}: analytic {analytic} vs finite difference {numeric}"
        );
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for spec in all_specs() {
            for &x in &[0.3, 0.9, 1.7, 4.0, 11.0] {
                assert_close_rel(spec.h1_prime(x), central_difference(|t| spec.h1(t), x), &format!("{spec} h1'({x})"));
                assert_close_rel(spec.h2_prime(x), central_difference(|t| spec.h2(t), x), &format!("{spec} h2'({x})"));
                assert_close_rel(spec.tau_prime(x), central_difference(|t| spec.tau(t), x), &format!("{spec} tau'({x})"));
            }
        }
    }

    #[test]
    fn parameter_constraints() {
        assert!(InequalitySpec::generalized_entropy(0.0).is_err());
        assert!(InequalitySpec::generalized_entropy(1.0).is_err());
        assert!(InequalitySpec::atkinson(1.0).is_err());
        assert!(InequalitySpec::atkinson(0.0).is_err());
        assert!(InequalitySpec::atkinson(1.5).is_err());
        assert!(InequalitySpec::kolm(0.0).is_err());
        assert!(InequalitySpec::kolm(-1.0).is_err());
        assert!(InequalitySpec::Atkinson(2.0).validated().is_err());
    }

    #[test]
    fn parses_cli_names() {
        let parsed: Vec<InequalitySpec> = "GE:0.5,THEIL,MLD,ATK:0.5,ATK:-0.5,CHAMP,KOLM:1,ge(2)"
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(
            parsed,
            vec![
                InequalitySpec::GeneralizedEntropy(0.5),
                InequalitySpec::Theil,
                InequalitySpec::MeanLogDeviation,
                InequalitySpec::Atkinson(0.5),
                InequalitySpec::Atkinson(-0.5),
                InequalitySpec::Champernowne,
                InequalitySpec::Kolm(1.0),
                InequalitySpec::GeneralizedEntropy(2.0),
            ]
        );
        assert!("GE".parse::<InequalitySpec>().is_err());
        assert!("THEIL:2".parse::<InequalitySpec>().is_err());
        assert!("GINI".parse::<InequalitySpec>().is_err());
        assert!("GE:1".parse::<InequalitySpec>().is_err());
    }

    #[test]
    fn constant_sample_has_zero_inequality() {
        assert!(inequality_eval(&InequalitySpec::Theil, &[3.0; 5]).unwrap().value.abs() < 1e-15);
        assert!(inequality_eval(&InequalitySpec::Atkinson(0.5), &[7.0; 4]).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn mld_matches_direct_formula() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let expected = 2.5f64.ln() - xs.iter().map(|x: &f64| x.ln()).sum::<f64>() / 4.0;
        let got = inequality_eval(&InequalitySpec::MeanLogDeviation, &xs).unwrap().value;
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn stored_components_reproduce_value() {
        let xs = [0.7, 2.0, 3.5, 9.0, 1.1];
        for spec in all_specs() {
            let est = inequality_eval(&spec, &xs).unwrap();
            assert_eq!(est.recompute(&spec), est.value, "{spec}");
        }
    }

    #[test]
    fn nonpositive_income_is_rejected_with_index() {
        let err = inequality_eval(&InequalitySpec::Theil, &[1.0, 0.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveIncome { index: 1, .. }));
        assert!(inequality_eval(&InequalitySpec::Kolm(1.0), &[1.0, -3.0, 2.0]).is_ok());
    }

    #[test]
    fn kolm_underflow_is_a_numeric_error() {
        let err = inequality_eval(&InequalitySpec::Kolm(1.0), &[1e4, 2e4]).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }

    #[test]
    fn mld_influence_reduces_to_closed_form() {
        let panel = IncomePanel::new(vec![1.0, 4.0, 2.0, 8.0], vec![3.0, 1.0, 5.0, 2.0]).unwrap();
        let spec = InequalitySpec::MeanLogDeviation;
        let mu1 = 15.0 / 4.0;
        // u = 2/5 is the second order statistic, 2.0
        let got = influence_inequality(&spec, &panel, Period::First, 0.4, 0.9).unwrap();
        let expected = -(2.0f64.ln()) + 2.0 / mu1;
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn ge2_influence_matches_hand_computation() {
        // sample {1, 2, 3}: μ = 2, B = 14/3, K = 1/2, h₁(μ) = 4, h₁′(μ) = 4
        let panel = IncomePanel::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap();
        let spec = InequalitySpec::GeneralizedEntropy(2.0);
        let est = inequality_eval(&spec, panel.x1()).unwrap();
        assert!((est.k - 0.5).abs() < 1e-15);
        for (u, x) in [(0.25, 1.0), (0.5, 2.0), (0.75, 3.0)] {
            let expected = 0.5 * (x * x / 4.0 - (14.0 / 3.0) * 4.0 / 16.0 * x);
            let got = influence_inequality(&spec, &panel, Period::First, u, 0.5).unwrap();
            assert!((got - expected).abs() < 1e-14, "x={x}: {got} vs {expected}");
        }
    }

    #[test]
    fn centered_influence_averages_to_zero() {
        let panel = IncomePanel::new(vec![1.0, 4.0, 2.0, 8.0, 3.0], vec![3.0, 1.0, 5.0, 2.0, 2.5]).unwrap();
        for spec in all_specs() {
            let fit = InequalityFit::new(&spec, &panel).unwrap();
            let m = numeric::mean(&fit.influence);
            let centered: Vec<f64> = fit.influence.iter().map(|v| v - m).collect();
            assert!(numeric::mean(&centered).abs() < 1e-14, "{spec}");
        }
    }

    #[test]
    fn fit_uses_quantiles_of_pseudo_observations() {
        let panel = IncomePanel::new(vec![1.0, 4.0, 2.0, 8.0, 4.0], vec![3.0, 1.0, 5.0, 2.0, 2.5]).unwrap();
        let obs = panel.pseudo_observations();
        let spec = InequalitySpec::Theil;
        let fit = InequalityFit::new(&spec, &panel).unwrap();
        for j in 0..panel.n() {
            let (u, v) = (obs.u(j), obs.v(j));
            let expected = influence_inequality(&spec, &panel, Period::Second, u, v).unwrap()
                - influence_inequality(&spec, &panel, Period::First, u, v).unwrap();
            assert!((fit.influence[j] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_and_scaled_periods_have_zero_delta() {
        let xs = vec![1.0, 4.0, 2.0, 8.0, 3.0];
        let same = IncomePanel::new(xs.clone(), xs.clone()).unwrap();
        let scaled = IncomePanel::new(xs.clone(), xs.iter().map(|x| 2.5 * x).collect()).unwrap();
        for spec in all_specs() {
            assert_eq!(delta_inequality(&spec, &same).unwrap(), 0.0);
            if spec.scale_invariant() {
                assert!(delta_inequality(&spec, &scaled).unwrap().abs() < 1e-12, "{spec}");
            }
        }
    }

    #[test]
    fn constant_panel_has_zero_gamma() {
        let panel = IncomePanel::new(vec![2.0; 6], vec![5.0; 6]).unwrap();
        for spec in all_specs() {
            assert!(gamma_i(&spec, &panel).unwrap().abs() < 1e-24, "{spec}");
        }
    }

    proptest! {
        #[test]
        fn measures_are_nonnegative(xs in prop::collection::vec(0.01f64..50.0, 2..80)) {
            for spec in all_specs() {
                let v = inequality_eval(&spec, &xs).unwrap().value;
                prop_assert!(v >= -1e-12, "{} = {}", spec, v);
                if spec == InequalitySpec::Champernowne {
                    prop_assert!(v < 1.0);
                }
            }
        }

        #[test]
        fn scale_invariance(xs in prop::collection::vec(0.01f64..50.0, 2..80)) {
            for spec in all_specs().into_iter().filter(InequalitySpec::scale_invariant) {
                let base = inequality_eval(&spec, &xs).unwrap().value;
                for lambda in [0.5, 3.0, 100.0] {
                    let scaled: Vec<f64> = xs.iter().map(|x| lambda * x).collect();
                    let v = inequality_eval(&spec, &scaled).unwrap().value;
                    prop_assert!((v - base).abs() <= 1e-10, "{} λ={}: {} vs {}", spec, lambda, v, base);
                }
            }
        }

        #[test]
        fn kolm_translation_invariance(xs in prop::collection::vec(0.0f64..10.0, 2..80)) {
            for alpha in [0.3, 1.0] {
                let spec = InequalitySpec::Kolm(alpha);
                let base = inequality_eval(&spec, &xs).unwrap().value;
                for c in [1.0, 50.0] {
                    let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
                    let v = inequality_eval(&spec, &shifted).unwrap().value;
                    prop_assert!((v - base).abs() <= 1e-10, "c={}: {} vs {}", c, v, base);
                }
            }
        }

        #[test]
        fn gamma_is_nonnegative(
            pairs in prop::collection::vec((0.01f64..50.0, 0.01f64..50.0), 2..60)
        ) {
            let (x1, x2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let panel = IncomePanel::new(x1, x2).unwrap();
            for spec in all_specs() {
                prop_assert!(gamma_i(&spec, &panel).unwrap() >= 0.0);
            }
        }
    }
}
