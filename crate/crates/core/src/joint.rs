//! Joint law of (ΔJ_n, ΔI_n): the cross term Γ_IJ, the ratio R = ΔJ/ΔI with
//! its delta-method variance Γ = a²Γ_J + b²Γ_I − 2abΓ_IJ, and Wald intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::inequality::{InequalityFit, InequalitySpec};
use crate::numeric;
use crate::panel::{EmpiricalCopula, IncomePanel};
use crate::poverty::{GammaJ, PovertyFit, PovertySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Wald,
    Bootstrap,
}

/// Reading of a (poverty, inequality) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Poverty and inequality both fell and the ratio interval excludes 0.
    ProPoor,
    /// Poverty and inequality both rose and the ratio interval excludes 0.
    AntiPoor,
    Ambiguous,
}

impl Classification {
    pub fn from_signs(delta_i: f64, delta_j: f64, ci_ratio: (f64, f64)) -> Self {
        let excludes_zero = ci_ratio.0 > 0.0 || ci_ratio.1 < 0.0;
        if !excludes_zero {
            Classification::Ambiguous
        } else if delta_j < 0.0 && delta_i < 0.0 {
            Classification::ProPoor
        } else if delta_j > 0.0 && delta_i > 0.0 {
            Classification::AntiPoor
        } else {
            Classification::Ambiguous
        }
    }
}

/// Standard-normal quantile of (1 + level)/2.
pub fn z_score(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 * (1.0 + level)))
}

/// estimate ∓ z·√(gamma/n).
pub fn wald_ci(estimate: f64, gamma: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    let z = z_score(level)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("variance {gamma} must be finite and nonnegative")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("sample size {n} below 2")));
    }
    let half = z * (gamma / n as f64).sqrt();
    Ok((estimate - half, estimate + half))
}

/// Default ε below which |ΔI| is treated as zero.
pub fn ratio_epsilon(i1: f64, i2: f64) -> f64 {
    1e-9 * i1.abs().max(i2.abs()).max(1e-12)
}

/// Γ_IJ from already-fitted measures.
pub fn gamma_ij_from_fits(ineq: &InequalityFit, pov: &PovertyFit, panel: &IncomePanel) -> f64 {
    let obs = panel.pseudo_observations();
    let copula = EmpiricalCopula::new(&obs);
    numeric::centered_cross_moment(&ineq.influence, &pov.influence) + pov.nu.influence_covariance(&copula, &ineq.influence)
}

pub fn gamma_ij(
    ineq: &InequalitySpec,
    pov: &PovertySpec,
    panel: &IncomePanel,
    z1: f64,
    z2: f64,
    m: usize,
) -> Result<f64> {
    let ifit = InequalityFit::new(ineq, panel)?;
    let pfit = PovertyFit::new(pov, panel, z1, z2, m)?;
    Ok(gamma_ij_from_fits(&ifit, &pfit, panel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub inequality: String,
    pub poverty: String,
    pub delta_i: f64,
    pub delta_j: f64,
    pub gamma_i: f64,
    pub gamma_j: f64,
    pub gamma_j_components: GammaJ,
    pub gamma_ij: f64,
    pub ratio: f64,
    pub a: f64,
    pub b: f64,
    pub gamma_ratio: f64,
    pub n: usize,
    pub level: f64,
    pub ci_delta_i: (f64, f64),
    pub ci_delta_j: (f64, f64),
    pub ci_ratio: (f64, f64),
    pub method: CiMethod,
    pub classification: Classification,
}

impl JointReport {
    pub fn from_fits(ineq: &InequalityFit, pov: &PovertyFit, panel: &IncomePanel, level: f64) -> Result<Self> {
        let delta_i = ineq.delta();
        let delta_j = pov.delta();
        let epsilon = ratio_epsilon(ineq.first.value, ineq.second.value);
        if delta_i.abs() <= epsilon {
            return Err(Error::RatioDegenerate { delta_i, epsilon });
        }
        let gamma_i = ineq.gamma();
        let components = pov.gamma(panel)?;
        let gamma_j = components.total;
        let gamma_ij = gamma_ij_from_fits(ineq, pov, panel);
        let ratio = delta_j / delta_i;
        let a = 1.0 / delta_i;
        let b = delta_j / (delta_i * delta_i);
        let gamma_ratio = delta_method_variance(a, b, gamma_i, gamma_j, gamma_ij);
        if !gamma_ratio.is_finite() {
            return Err(Error::numeric("ratio variance"));
        }
        let n = panel.n();
        let ci_delta_i = wald_ci(delta_i, gamma_i, n, level)?;
        let ci_delta_j = wald_ci(delta_j, gamma_j.max(0.0), n, level)?;
        let ci_ratio = wald_ci(ratio, gamma_ratio.max(0.0), n, level)?;
        let report = Self {
            inequality: ineq.spec.label(),
            poverty: pov.spec.label(),
            delta_i,
            delta_j,
            gamma_i,
            gamma_j,
            gamma_j_components: components,
            gamma_ij,
            ratio,
            a,
            b,
            gamma_ratio,
            n,
            level,
            ci_delta_i,
            ci_delta_j,
            ci_ratio,
            method: CiMethod::Wald,
            classification: Classification::from_signs(delta_i, delta_j, ci_ratio),
        };
        debug_assert!(report.identity_residual() <= 1e-12 * report.gamma_ratio.abs().max(1.0));
        Ok(report)
    }

    /// |Γ − (a²Γ_J + b²Γ_I − 2abΓ_IJ)| recomputed from the stored fields.
    pub fn identity_residual(&self) -> f64 {
        (self.gamma_ratio - delta_method_variance(self.a, self.b, self.gamma_i, self.gamma_j, self.gamma_ij)).abs()
    }

    /// Replaces the intervals with bootstrap ones and reclassifies.
    pub fn with_intervals(mut self, ci_delta_i: (f64, f64), ci_delta_j: (f64, f64), ci_ratio: (f64, f64), method: CiMethod) -> Self {
        self.ci_delta_i = ci_delta_i;
        self.ci_delta_j = ci_delta_j;
        self.ci_ratio = ci_ratio;
        self.method = method;
        self.classification = Classification::from_signs(self.delta_i, self.delta_j, ci_ratio);
        self
    }
}

fn delta_method_variance(a: f64, b: f64, gamma_i: f64, gamma_j: f64, gamma_ij: f64) -> f64 {
    a * a * gamma_j + b * b * gamma_i - 2.0 * a * b * gamma_ij
}

pub fn ratio_report(
    ineq: &InequalitySpec,
    pov: &PovertySpec,
    panel: &IncomePanel,
    z1: f64,
    z2: f64,
    level: f64,
    m: usize,
) -> Result<JointReport> {
    let ifit = InequalityFit::new(ineq, panel)?;
    let pfit = PovertyFit::new(pov, panel, z1, z2, m)?;
    JointReport::from_fits(&ifit, &pfit, panel, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poverty::DEFAULT_GRID;

    #[test]
    fn z_score_at_95_percent() {
        assert!((z_score(0.95).unwrap() - 1.959964).abs() < 5e-7);
    }

    #[test]
    fn wald_examples() {
        assert_eq!(wald_ci(0.3, 0.0, 10, 0.9).unwrap(), (0.3, 0.3));
        let (lo, hi) = wald_ci(0.0, 1.0, 100, 0.95).unwrap();
        assert!((lo + 0.1959964).abs() < 1e-7 && (hi - 0.1959964).abs() < 1e-7);
        let (lo, hi) = wald_ci(-0.04, 0.0177, 696, 0.95).unwrap();
        assert!((lo + 0.04989).abs() < 1e-5, "{lo}");
        assert!((hi + 0.03011).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn wald_rejects_bad_inputs() {
        for level in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(wald_ci(0.0, 1.0, 10, level), Err(Error::Domain(_))));
        }
        assert!(wald_ci(0.0, -1.0, 10, 0.95).is_err());
        assert!(wald_ci(0.0, 1.0, 1, 0.95).is_err());
    }

    #[test]
    fn wald_width_monotonicity() {
        let width = |n: usize, level: f64| {
            let (lo, hi) = wald_ci(1.0, 2.0, n, level).unwrap();
            hi - lo
        };
        assert!(width(100, 0.99) > width(100, 0.95));
        assert!(width(100, 0.95) > width(100, 0.90));
        assert!(width(400, 0.95) < width(100, 0.95));
    }

    #[test]
    fn classification_rules() {
        assert_eq!(Classification::from_signs(-0.1, -0.05, (0.2, 0.8)), Classification::ProPoor);
        assert_eq!(Classification::from_signs(0.1, 0.05, (0.2, 0.8)), Classification::AntiPoor);
        assert_eq!(Classification::from_signs(-0.1, -0.05, (-0.2, 0.8)), Classification::Ambiguous);
        assert_eq!(Classification::from_signs(0.1, -0.05, (-0.8, -0.2)), Classification::Ambiguous);
    }

    fn panel() -> IncomePanel {
        let x1: Vec<f64> = (0..80).map(|j| 1.0 + ((j * 37) % 80) as f64 / 20.0).collect();
        let x2: Vec<f64> = (0..80).map(|j| 0.5 + ((j * 53 + 3) % 80) as f64 / 16.0 + 0.2 * x1[j]).collect();
        IncomePanel::new(x1, x2).unwrap()
    }

    #[test]
    fn identical_periods_are_ratio_degenerate() {
        let xs: Vec<f64> = (1..=30).map(f64::from).collect();
        let p = IncomePanel::new(xs.clone(), xs).unwrap();
        let err = ratio_report(&InequalitySpec::Theil, &PovertySpec::Fgt(0.0), &p, 10.0, 10.0, 0.95, DEFAULT_GRID).unwrap_err();
        assert!(matches!(err, Error::RatioDegenerate { delta_i, .. } if delta_i == 0.0));
    }

    #[test]
    fn fgt_cross_term_is_pure_moment() {
        let p = panel();
        let ifit = InequalityFit::new(&InequalitySpec::MeanLogDeviation, &p).unwrap();
        let pfit = PovertyFit::new(&PovertySpec::Fgt(1.0), &p, 2.0, 2.5, DEFAULT_GRID).unwrap();
        let expected = numeric::centered_cross_moment(&ifit.influence, &pfit.influence);
        assert_eq!(gamma_ij_from_fits(&ifit, &pfit, &p), expected);
    }

    #[test]
    fn cross_moment_is_symmetric_and_bounded() {
        let p = panel();
        for spec in [PovertySpec::Sen, PovertySpec::Shorrocks, PovertySpec::Kakwani(2)] {
            let ifit = InequalityFit::new(&InequalitySpec::Theil, &p).unwrap();
            let pfit = PovertyFit::new(&spec, &p, 2.0, 2.5, DEFAULT_GRID).unwrap();
            let ij = numeric::centered_cross_moment(&ifit.influence, &pfit.influence);
            let ji = numeric::centered_cross_moment(&pfit.influence, &ifit.influence);
            assert!((ij - ji).abs() < 1e-12);
            let gamma1 = pfit.gamma(&p).unwrap().gamma1;
            assert!(ij.abs() <= (gamma1 * ifit.gamma()).sqrt() + 1e-12);
        }
    }

    #[test]
    fn report_satisfies_delta_method_identity() {
        let p = panel();
        let r = ratio_report(&InequalitySpec::GeneralizedEntropy(0.5), &PovertySpec::Shorrocks, &p, 2.0, 2.5, 0.95, DEFAULT_GRID).unwrap();
        assert!(r.identity_residual() <= 1e-12);
        assert_eq!(r.ratio, r.delta_j / r.delta_i);
        assert!(r.ci_ratio.0 <= r.ratio && r.ratio <= r.ci_ratio.1);
        assert_eq!(r.method, CiMethod::Wald);
    }

    #[test]
    fn sign_of_ratio_matches_direct_recomputation() {
        // period 2 shrinks incomes below the line, leaves the rest untouched
        let x1: Vec<f64> = (1..=60).map(|j| f64::from(j) / 6.0).collect();
        let z = 4.0;
        let x2: Vec<f64> = x1.iter().map(|&x| if x <= z { 0.8 * x } else { x }).collect();
        let p = IncomePanel::new(x1, x2).unwrap();
        let ineq = InequalitySpec::Theil;
        let pov = PovertySpec::Fgt(1.0);
        let r = ratio_report(&ineq, &pov, &p, z, z, 0.95, DEFAULT_GRID).unwrap();
        let di = crate::inequality::delta_inequality(&ineq, &p).unwrap();
        let dj = crate::poverty::delta_poverty(&pov, &p, z, z).unwrap();
        assert!(di > 0.0 && dj > 0.0);
        assert_eq!(r.ratio.signum(), (dj / di).signum());
    }

    #[test]
    fn report_json_field_names() {
        let p = panel();
        let r = ratio_report(&InequalitySpec::Theil, &PovertySpec::Sen, &p, 2.0, 2.5, 0.95, 64).unwrap();
        let value = serde_json::to_value(&r).unwrap();
        for key in [
            "delta_i", "delta_j", "gamma_i", "gamma_j", "gamma_ij", "ratio", "gamma_ratio", "ci_delta_i", "ci_delta_j",
            "ci_ratio", "n", "level", "method",
        ] {
            assert!(value.get(key).is_some(), "{key}");
        }
        assert_eq!(value["method"], "wald");
    }
}
