//! Concrete members of the general poverty index family (FGT, Sen, Kakwani,
//! Shorrocks/Thon), their empirical g and ν kernels, and the asymptotic
//! variance Γ_J = Γ₁ + (γ₁ − 2γ₂ + γ₃) + 2Γ₃ of the variation between two
//! periods.
//!
//! Every population object is replaced by its empirical plug-in: G by G_n,
//! G⁻¹ by the ⌈ns⌉-th order statistic, and the integral constants J and K by
//! order-statistic sums over the poor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::split_measure;
use crate::numeric::{self, Accumulator};
use crate::panel::{Ecdf, EmpiricalCopula, IncomePanel, Period, PseudoObs};

/// Default number of midpoint nodes per axis.
pub const DEFAULT_GRID: usize = 256;
/// Smallest accepted quadrature size.
pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PovertySpec {
    Fgt(f64),
    Sen,
    Kakwani(u32),
    /// Thon's index has the same kernels and is parsed to this variant.
    Shorrocks,
}

impl PovertySpec {
    pub fn fgt(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("FGT needs alpha >= 0, got {alpha}")));
        }
        Ok(Self::Fgt(alpha))
    }

    pub fn kakwani(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("KAK needs an integer k >= 1".into()));
        }
        Ok(Self::Kakwani(k))
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Fgt(a) => Self::fgt(a),
            Self::Kakwani(k) => Self::kakwani(k),
            other => Ok(other),
        }
    }

    /// ν ≡ 0 for the FGT family.
    pub fn nu_vanishes(&self) -> bool {
        matches!(self, Self::Fgt(_))
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PovertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fgt(a) => write!(f, "FGT({a})"),
            Self::Sen => write!(f, "SEN"),
            Self::Kakwani(k) => write!(f, "KAK({k})"),
            Self::Shorrocks => write!(f, "SHOR"),
        }
    }
}

/// Parses `FGT:0`, `SEN`, `KAK:2`, `SHOR` (or `THON`), case-insensitive.
impl FromStr for PovertySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = split_measure(s)?;
        let bare = |spec: Self| match param {
            Some(_) => Err(Error::InvalidParameter(format!("{name} takes no parameter"))),
            None => Ok(spec),
        };
        match name.as_str() {
            "FGT" => Self::fgt(param.ok_or_else(|| Error::InvalidParameter("FGT needs alpha, e.g. FGT:1".into()))?),
            "KAK" | "KAKWANI" => {
                let k = param.ok_or_else(|| Error::InvalidParameter("KAK needs k, e.g. KAK:2".into()))?;
                if k.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&k) {
                    return Err(Error::InvalidParameter(format!("KAK needs an integer k >= 1, got {k}")));
                }
                Self::kakwani(k as u32)
            }
            "SEN" => bare(Self::Sen),
            "SHOR" | "SHORROCKS" | "THON" => bare(Self::Shorrocks),
            _ => Err(Error::InvalidParameter(format!("unknown poverty measure '{s}'"))),
        }
    }
}

/// How the poverty line of each period is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinePolicy {
    Fixed { z1: f64, z2: f64 },
    /// Z(i) = fraction × median of period i.
    MedianFraction(f64),
}

impl Default for LinePolicy {
    fn default() -> Self {
        Self::MedianFraction(0.5)
    }
}

impl LinePolicy {
    pub fn resolve(&self, panel: &IncomePanel) -> Result<(f64, f64)> {
        let (z1, z2) = match *self {
            Self::Fixed { z1, z2 } => (z1, z2),
            Self::MedianFraction(fraction) => {
                if !(fraction.is_finite() && fraction > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "median fraction must be positive, got {fraction}"
                    )));
                }
                (
                    fraction * panel.ecdf(Period::First).quantile(0.5)?,
                    fraction * panel.ecdf(Period::Second).quantile(0.5)?,
                )
            }
        };
        for (period, z) in [(Period::First, z1), (Period::Second, z2)] {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::Domain(format!("poverty line of period {period} must be positive, got {z}")));
            }
        }
        Ok((z1, z2))
    }
}

/// The user-facing kernel pair of one period. Implement this to run the
/// variance machinery on a poverty index outside the built-in families; the
/// regularity conditions behind the asymptotics are then the caller's to
/// check.
pub trait GpiKernel {
    fn g(&self, x: f64) -> f64;
    fn nu(&self, s: f64) -> f64;
    fn nu_vanishes(&self) -> bool {
        false
    }
    /// Points of (0,1) where ν may jump. Cell averages of ν are integrated
    /// piecewise between them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Sen/Kakwani integral constants evaluated on the empirical distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub j: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovertyEstimate {
    pub period: Period,
    pub value: f64,
    pub line: f64,
    /// G_n(Z)
    pub headcount: f64,
    pub constants: Option<KernelConstants>,
}

/// Number of sample points ≤ line, failing unless 0 < G_n(Z) < 1.
pub fn check_h1(ecdf: &Ecdf, line: f64, period: Period) -> Result<usize> {
    if !(line.is_finite() && line > 0.0) {
        return Err(Error::Domain(format!("poverty line of period {period} must be positive, got {line}")));
    }
    let poor = ecdf.count_le(line);
    if poor == 0 || poor == ecdf.n() {
        return Err(Error::NoPoorOrAllPoor {
            period,
            line,
            headcount: poor as f64 / ecdf.n() as f64,
        });
    }
    Ok(poor)
}

/// One period's kernels bound to its ECDF and poverty line.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodKernel {
    spec: PovertySpec,
    period: Period,
    line: f64,
    ecdf: Ecdf,
    poor: usize,
    constants: Option<KernelConstants>,
}

impl PeriodKernel {
    pub fn new(spec: &PovertySpec, sample: &[f64], line: f64, period: Period) -> Result<Self> {
        let spec = spec.validated()?;
        let ecdf = Ecdf::new(sample);
        let poor = check_h1(&ecdf, line, period)?;
        let mut kernel = Self {
            spec,
            period,
            line,
            ecdf,
            poor,
            constants: None,
        };
        kernel.constants = match spec {
            PovertySpec::Sen => Some(kernel.sen_constants()),
            PovertySpec::Kakwani(k) => Some(kernel.kakwani_constants(k)),
            _ => None,
        };
        Ok(kernel)
    }

    pub fn spec(&self) -> &PovertySpec {
        &self.spec
    }

    pub fn line(&self) -> f64 {
        self.line
    }

    pub fn ecdf(&self) -> &Ecdf {
        &self.ecdf
    }

    /// G_n(Z)
    pub fn headcount(&self) -> f64 {
        self.poor as f64 / self.ecdf.n() as f64
    }

    pub fn constants(&self) -> Option<KernelConstants> {
        self.constants
    }

    fn gap(&self, x: f64) -> f64 {
        (self.line - x) / self.line
    }

    /// (1/n) Σ_{j ≤ q} φ(j/q) (Z − X₍ⱼ₎)/Z over the q poor order statistics:
    /// the plug-in of ∫₀^{G(Z)} φ(s/G(Z)) (Z − G⁻¹(s))/Z ds.
    fn poor_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let q = self.poor as f64;
        let terms = (1..=self.poor).map(|j| weight(j as f64 / q) * self.gap(self.ecdf.order_statistic(j)));
        numeric::sum(terms) / self.ecdf.n() as f64
    }

    fn sen_constants(&self) -> KernelConstants {
        let p = self.headcount();
        let j = 2.0 * self.poor_sum(|r| 1.0 - r);
        let poor_income = numeric::sum(self.ecdf.sorted()[..self.poor].iter().copied()) / self.ecdf.n() as f64;
        let k = 2.0 * (1.0 - poor_income / (self.line * p)) + j / p;
        KernelConstants { j, k }
    }

    fn kakwani_constants(&self, k: u32) -> KernelConstants {
        let p = self.headcount();
        let kf = f64::from(k);
        let j = (kf + 1.0) * self.poor_sum(|r| (1.0 - r).powi(k as i32));
        let k_const = kf * (kf + 1.0) / p * self.poor_sum(|r| (1.0 - r).powi(k as i32 - 1)) + j / p;
        KernelConstants { j, k: k_const }
    }

    /// J_n(i).
    pub fn value(&self) -> f64 {
        match self.spec {
            PovertySpec::Fgt(_) | PovertySpec::Shorrocks => {
                numeric::sum(self.ecdf.sorted()[..self.poor].iter().map(|&x| self.g(x))) / self.ecdf.n() as f64
            }
            PovertySpec::Sen | PovertySpec::Kakwani(_) => self.constants.expect("constants built with kernel").j,
        }
    }

    pub fn estimate(&self) -> PovertyEstimate {
        PovertyEstimate {
            period: self.period,
            value: self.value(),
            line: self.line,
            headcount: self.headcount(),
            constants: self.constants,
        }
    }
}

impl GpiKernel for PeriodKernel {
    fn g(&self, x: f64) -> f64 {
        if x > self.line {
            return 0.0;
        }
        let gap = self.gap(x);
        let p = self.headcount();
        let rel = self.ecdf.eval(x) / p;
        match self.spec {
            PovertySpec::Fgt(0.0) => 1.0,
            PovertySpec::Fgt(alpha) => gap.powf(alpha),
            PovertySpec::Shorrocks => 2.0 * (1.0 - self.ecdf.eval(x)) * gap,
            PovertySpec::Sen => {
                let c = self.constants.expect("constants built with kernel");
                2.0 * ((1.0 - rel) * gap - rel * (c.j / p)) + c.k
            }
            PovertySpec::Kakwani(k) => {
                let c = self.constants.expect("constants built with kernel");
                let kf = f64::from(k);
                (kf + 1.0) * ((1.0 - rel).powi(k as i32) * gap - (c.j / p) * rel.powi(k as i32)) + c.k
            }
        }
    }

    fn nu(&self, s: f64) -> f64 {
        if self.spec.nu_vanishes() {
            return 0.0;
        }
        let y = match self.ecdf.quantile(s) {
            Ok(y) => y,
            Err(_) => return 0.0,
        };
        if y > self.line {
            return 0.0;
        }
        let gap = self.gap(y);
        let p = self.headcount();
        match self.spec {
            PovertySpec::Fgt(_) => 0.0,
            PovertySpec::Shorrocks => -2.0 * gap,
            PovertySpec::Sen => {
                let c = self.constants.expect("constants built with kernel");
                -2.0 / p * (gap + c.j / p)
            }
            PovertySpec::Kakwani(k) => {
                let c = self.constants.expect("constants built with kernel");
                let kf = f64::from(k);
                let rel = s / p;
                -kf * (kf + 1.0) / p
                    * ((1.0 - rel).powi(k as i32 - 1) * gap + (c.j / p) * rel.powi(k as i32 - 1))
            }
        }
    }

    fn nu_vanishes(&self) -> bool {
        self.spec.nu_vanishes()
    }

    /// ν depends on s through G_n⁻¹(s), which jumps at j/n.
    fn breakpoints(&self) -> Vec<f64> {
        let n = self.ecdf.n();
        (1..n).map(|j| j as f64 / n as f64).collect()
    }
}

pub fn poverty_eval(spec: &PovertySpec, sample: &[f64], line: f64) -> Result<PovertyEstimate> {
    Ok(PeriodKernel::new(spec, sample, line, Period::First)?.estimate())
}

/// (J, K) for Sen and Kakwani; `None` for families without constants.
pub fn kernel_constants(spec: &PovertySpec, sample: &[f64], line: f64) -> Result<Option<KernelConstants>> {
    Ok(PeriodKernel::new(spec, sample, line, Period::First)?.constants())
}

/// J_n(2) − J_n(1).
pub fn delta_poverty(spec: &PovertySpec, panel: &IncomePanel, z1: f64, z2: f64) -> Result<f64> {
    let first = PeriodKernel::new(spec, panel.x1(), z1, Period::First)?;
    let second = PeriodKernel::new(spec, panel.x2(), z2, Period::Second)?;
    Ok(second.value() - first.value())
}

/// Average of ν over [a, b]: two-point Gauss-Legendre on each piece between
/// consecutive breakpoints.
fn cell_average(k: &dyn GpiKernel, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let first = breaks.partition_point(|&x| x <= a);
    let last = breaks.partition_point(|&x| x < b);
    let edges = std::iter::once(a).chain(breaks[first..last].iter().copied()).chain(std::iter::once(b));
    let mut acc = Accumulator::default();
    let mut lo = a;
    for hi in edges.skip(1) {
        if hi > lo {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let off = half / 3f64.sqrt();
            acc.add(half * (k.nu(mid - off) + k.nu(mid + off)));
        }
        lo = hi;
    }
    acc.value() / (b - a)
}

/// ν₁ and ν₂ on m equal cells of (0,1): `nu1`, `nu2` hold the exact cell
/// averages and `nodes` the cell midpoints. Every integral against ν is then
/// exact for the cell-averaged ν.
#[derive(Debug, Clone, PartialEq)]
pub struct NuGrid {
    pub nodes: Vec<f64>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub vanishes: bool,
    /// tail[i] = ∫_{i/m}^1 ν̄, length m + 1.
    tail1: Vec<f64>,
    tail2: Vec<f64>,
}

impl NuGrid {
    pub fn new(k1: &dyn GpiKernel, k2: &dyn GpiKernel, m: usize) -> Result<Self> {
        if m < MIN_GRID {
            return Err(Error::InvalidParameter(format!("quadrature grid needs m >= {MIN_GRID}, got {m}")));
        }
        let nodes = numeric::midpoint_nodes(m);
        let vanishes = k1.nu_vanishes() && k2.nu_vanishes();
        let h = 1.0 / m as f64;
        let tabulate = |k: &dyn GpiKernel| -> Result<Vec<f64>> {
            if k.nu_vanishes() {
                return Ok(vec![0.0; m]);
            }
            let mut breaks = k.breakpoints();
            breaks.retain(|b| *b > 0.0 && *b < 1.0);
            breaks.sort_by(f64::total_cmp);
            let values: Vec<f64> = (0..m)
                .map(|i| cell_average(k, i as f64 * h, (i + 1) as f64 * h, &breaks))
                .collect();
            match values.iter().position(|v| !v.is_finite()) {
                Some(index) => Err(Error::Numeric {
                    context: "nu kernel on quadrature grid".into(),
                    index: Some(index),
                }),
                None => Ok(values),
            }
        };
        let nu1 = tabulate(k1)?;
        let nu2 = tabulate(k2)?;
        let tails = |nu: &[f64]| {
            let mut t = vec![0.0; m + 1];
            for i in (0..m).rev() {
                t[i] = t[i + 1] + nu[i] * h;
            }
            t
        };
        Ok(Self {
            tail1: tails(&nu1),
            tail2: tails(&nu2),
            nodes,
            nu1,
            nu2,
            vanishes,
        })
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// ∫_r^1 ν̄ for the cell averages `nu` with suffix sums `tail`.
    fn upper_integral(&self, nu: &[f64], tail: &[f64], r: f64) -> f64 {
        let m = self.m();
        let c = ((r * m as f64) as usize).min(m - 1);
        tail[c + 1] + nu[c] * ((c + 1) as f64 / m as f64 - r)
    }

    /// ∫ s ν̄(s) ds
    fn first_moment(&self, nu: &[f64]) -> f64 {
        numeric::sum(nu.iter().zip(&self.nodes).map(|(v, s)| v * s)) / self.m() as f64
    }

    /// ∫ ν_a(s) ν_b(t) (min(s,t) − st) ds dt. Off the diagonal the kernel is
    /// bilinear on each cell pair, so the midpoint value is its cell mean;
    /// diagonal cells carry the −h/6 kink correction.
    pub fn bridge_covariance(&self, nu_a: &[f64], nu_b: &[f64]) -> f64 {
        let m = self.m();
        let h = 1.0 / m as f64;
        let mut acc = Accumulator::default();
        for (a, &s) in self.nodes.iter().enumerate() {
            if nu_a[a] == 0.0 {
                continue;
            }
            let mut row = Accumulator::default();
            for (b, &t) in self.nodes.iter().enumerate() {
                row.add(nu_b[b] * (s.min(t) - s * t));
            }
            row.add(-nu_b[a] * h / 6.0);
            acc.add(nu_a[a] * row.value());
        }
        acc.value() * h * h
    }

    /// γ₂ = ∫ ν₂(s) ν₁(t) (C_n(t,s) − ts) ds dt
    ///    = (1/n) Σ N₁(u_j) N₂(v_j) − ∫tν₁ ∫sν₂, with N(r) = ∫_r^1 ν.
    pub fn copula_covariance(&self, copula: &EmpiricalCopula<'_>) -> f64 {
        let obs = copula.observations();
        let n = obs.n();
        let mut acc = Accumulator::default();
        for (u, v) in obs.iter() {
            acc.add(self.upper_integral(&self.nu1, &self.tail1, u) * self.upper_integral(&self.nu2, &self.tail2, v));
        }
        acc.value() / n as f64 - self.first_moment(&self.nu1) * self.first_moment(&self.nu2)
    }

    /// ∫ {ν₂(s) ∫_{(0,1)×(0,s)} F dC − ν₁(s) ∫_{(0,s)×(0,1)} F dC} ds
    /// − P(F) ∫ s (ν₂(s) − ν₁(s)) ds, with `values` = F at the
    /// pseudo-observations. This is Γ₃ for F = F*_J and the ν part of
    /// Γ_{IJ} for F = F*_I. Exchanging the order of integration gives
    /// (1/n) Σ F_j (N₂(v_j) − N₁(u_j)) − P(F) ∫ s (ν₂ − ν₁).
    pub fn influence_covariance(&self, copula: &EmpiricalCopula<'_>, values: &[f64]) -> f64 {
        if self.vanishes {
            return 0.0;
        }
        let obs = copula.observations();
        let mut cross = Accumulator::default();
        for ((u, v), f) in obs.iter().zip(values) {
            cross.add(f * (self.upper_integral(&self.nu2, &self.tail2, v) - self.upper_integral(&self.nu1, &self.tail1, u)));
        }
        let drift = self.first_moment(&self.nu2) - self.first_moment(&self.nu1);
        cross.value() / obs.n() as f64 - numeric::mean(values) * drift
    }
}

/// F*_J = g₂∘G⁻¹_{2,n}(v) − g₁∘G⁻¹_{1,n}(u) at every pseudo-observation.
pub fn poverty_influence(
    k1: &dyn GpiKernel,
    k2: &dyn GpiKernel,
    panel: &IncomePanel,
    obs: &PseudoObs,
) -> Result<Vec<f64>> {
    let (e1, e2) = (panel.ecdf(Period::First), panel.ecdf(Period::Second));
    let values: Vec<f64> = (0..panel.n())
        .map(|j| {
            k2.g(e2.order_statistic(obs.rank(Period::Second, j))) - k1.g(e1.order_statistic(obs.rank(Period::First, j)))
        })
        .collect();
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::Numeric {
            context: "poverty influence function".into(),
            index: Some(index),
        }),
        None => Ok(values),
    }
}

/// Components of Γ_J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaJ {
    /// Γ₁: centered second moment of F*_J.
    pub gamma1: f64,
    pub small_gamma1: f64,
    pub small_gamma2: f64,
    pub small_gamma3: f64,
    /// Γ₃: covariance of the F*_J part with the ν part.
    pub gamma3: f64,
    pub total: f64,
}

impl GammaJ {
    /// Γ₂ = γ₁ − 2γ₂ + γ₃.
    pub fn gamma2(&self) -> f64 {
        self.small_gamma1 - 2.0 * self.small_gamma2 + self.small_gamma3
    }
}

/// Both periods' kernels for one poverty measure, with F*_J and ν tabulated.
#[derive(Debug, Clone)]
pub struct PovertyFit {
    pub spec: PovertySpec,
    pub first: PeriodKernel,
    pub second: PeriodKernel,
    pub influence: Vec<f64>,
    pub nu: NuGrid,
}

impl PovertyFit {
    pub fn new(spec: &PovertySpec, panel: &IncomePanel, z1: f64, z2: f64, m: usize) -> Result<Self> {
        let first = PeriodKernel::new(spec, panel.x1(), z1, Period::First)?;
        let second = PeriodKernel::new(spec, panel.x2(), z2, Period::Second)?;
        let obs = panel.pseudo_observations();
        let influence = poverty_influence(&first, &second, panel, &obs)?;
        let nu = NuGrid::new(&first, &second, m)?;
        Ok(Self {
            spec: *spec,
            first,
            second,
            influence,
            nu,
        })
    }

    pub fn delta(&self) -> f64 {
        self.second.value() - self.first.value()
    }

    pub fn gamma(&self, panel: &IncomePanel) -> Result<GammaJ> {
        let obs = panel.pseudo_observations();
        assemble_gamma_j(&self.influence, &self.nu, &EmpiricalCopula::new(&obs))
    }
}

fn assemble_gamma_j(influence: &[f64], nu: &NuGrid, copula: &EmpiricalCopula<'_>) -> Result<GammaJ> {
    let gamma1 = numeric::centered_second_moment(influence);
    let (small_gamma1, small_gamma2, small_gamma3, gamma3) = if nu.vanishes {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (
            nu.bridge_covariance(&nu.nu2, &nu.nu2),
            nu.copula_covariance(copula),
            nu.bridge_covariance(&nu.nu1, &nu.nu1),
            nu.influence_covariance(copula, influence),
        )
    };
    let gamma2 = small_gamma1 - 2.0 * small_gamma2 + small_gamma3;
    let total = gamma1 + gamma2 + 2.0 * gamma3;
    let scale = gamma1 + small_gamma1.abs() + 2.0 * small_gamma2.abs() + small_gamma3.abs() + 2.0 * gamma3.abs();
    let tolerance = 0.01 * scale + 1e-12;
    if !total.is_finite() {
        return Err(Error::numeric("Gamma_J assembly"));
    }
    if total < -tolerance {
        return Err(Error::NegativeVariance { value: total, tolerance });
    }
    Ok(GammaJ {
        gamma1,
        small_gamma1,
        small_gamma2,
        small_gamma3,
        gamma3,
        total,
    })
}

/// Γ_J for a built-in family.
pub fn gamma_j(spec: &PovertySpec, panel: &IncomePanel, z1: f64, z2: f64, m: usize) -> Result<GammaJ> {
    PovertyFit::new(spec, panel, z1, z2, m)?.gamma(panel)
}

/// Γ_J for user-supplied kernels.
pub fn gamma_j_with_kernels(
    k1: &dyn GpiKernel,
    k2: &dyn GpiKernel,
    panel: &IncomePanel,
    m: usize,
) -> Result<GammaJ> {
    let obs = panel.pseudo_observations();
    let influence = poverty_influence(k1, k2, panel, &obs)?;
    let nu = NuGrid::new(k1, k2, m)?;
    assemble_gamma_j(&influence, &nu, &EmpiricalCopula::new(&obs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(spec: PovertySpec, xs: &[f64], z: f64) -> PeriodKernel {
        PeriodKernel::new(&spec, xs, z, Period::First).unwrap()
    }

    #[test]
    fn parses_cli_names() {
        let parsed: Vec<PovertySpec> = "FGT:0,FGT:1,FGT:2,SEN,KAK:1,KAK:2,SHOR,thon"
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(
            parsed,
            vec![
                PovertySpec::Fgt(0.0),
                PovertySpec::Fgt(1.0),
                PovertySpec::Fgt(2.0),
                PovertySpec::Sen,
                PovertySpec::Kakwani(1),
                PovertySpec::Kakwani(2),
                PovertySpec::Shorrocks,
                PovertySpec::Shorrocks,
            ]
        );
        for bad in ["FGT", "FGT:-1", "KAK:0", "KAK:1.5", "SEN:1", "WATTS"] {
            assert!(bad.parse::<PovertySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn fgt_headcount_and_zero_gaps() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(poverty_eval(&PovertySpec::Fgt(0.0), &xs, 2.5).unwrap().value, 0.5);
        // all above the line violates the data check, so compare a line at the minimum
        let at_min = poverty_eval(&PovertySpec::Fgt(1.0), &xs, 1.0).unwrap();
        assert_eq!(at_min.value, 0.0);
        assert_eq!(at_min.headcount, 0.25);
    }

    #[test]
    fn degenerate_lines_are_rejected() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        for z in [0.5, 4.0, 10.0] {
            assert!(matches!(
                poverty_eval(&PovertySpec::Fgt(1.0), &xs, z),
                Err(Error::NoPoorOrAllPoor { .. })
            ));
        }
        assert!(matches!(poverty_eval(&PovertySpec::Sen, &xs, -1.0), Err(Error::Domain(_))));
        assert!(matches!(poverty_eval(&PovertySpec::Sen, &xs, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sen_matches_order_statistic_oracle() {
        // poor: 1, 2 of n = 4, q = 2; J = (2/4)[(1 − 1/2)(1.5/2.5) + (1 − 2/2)(0.5/2.5)] = 0.15
        let got = poverty_eval(&PovertySpec::Sen, &[3.0, 1.0, 4.0, 2.0], 2.5).unwrap().value;
        assert!((got - 0.15).abs() < 1e-15, "{got}");
    }

    #[test]
    fn kernel_constants_two_term_sum() {
        // sample {1, 2, 3, 4}, Z = 2.5: q = 2, p = 1/2, gaps 0.6 and 0.2
        let c = kernel_constants(&PovertySpec::Sen, &[1.0, 2.0, 3.0, 4.0], 2.5).unwrap().unwrap();
        let j = 2.0 / 4.0 * (0.5 * 0.6 + 0.0 * 0.2);
        let k = 2.0 * (1.0 - (3.0 / 4.0) / (2.5 * 0.5)) + j / 0.5;
        assert!((c.j - j).abs() < 1e-15);
        assert!((c.k - k).abs() < 1e-15);
        let kak2 = kernel_constants(&PovertySpec::Kakwani(2), &[1.0, 2.0, 3.0, 4.0], 2.5).unwrap().unwrap();
        let j2 = 3.0 / 4.0 * (0.25 * 0.6);
        let k2 = 6.0 / 0.5 * (1.0 / 4.0) * (0.5 * 0.6 + 0.0 * 0.2) + j2 / 0.5;
        assert!((kak2.j - j2).abs() < 1e-15);
        assert!((kak2.k - k2).abs() < 1e-15);
    }

    #[test]
    fn poor_at_the_line_have_zero_gap() {
        let c = kernel_constants(&PovertySpec::Sen, &[2.0, 2.0, 5.0, 6.0], 2.0).unwrap().unwrap();
        assert_eq!(c.j, 0.0);
    }

    #[test]
    fn kakwani_one_is_sen() {
        let xs = [0.4, 3.1, 1.2, 2.2, 0.9, 5.0, 7.5, 1.7, 2.9];
        let z = 2.5;
        let sen = kernel(PovertySpec::Sen, &xs, z);
        let kak = kernel(PovertySpec::Kakwani(1), &xs, z);
        let (cs, ck) = (sen.constants().unwrap(), kak.constants().unwrap());
        assert!((cs.j - ck.j).abs() < 1e-15);
        assert!((cs.k - ck.k).abs() < 1e-14);
        assert!((sen.value() - kak.value()).abs() < 1e-15);
        for s in numeric::midpoint_nodes(64) {
            assert!((sen.nu(s) - kak.nu(s)).abs() < 1e-13, "nu at {s}");
        }
        for &x in &xs {
            assert!((sen.g(x) - kak.g(x)).abs() < 1e-13, "g at {x}");
        }
    }

    #[test]
    fn sen_g_hand_expansion() {
        // {1, 2, 3, 4}, Z = 2.5: G_n(1) = 1/4, p = 1/2, so G/p = 1/2 at x = 1
        let k = kernel(PovertySpec::Sen, &[1.0, 2.0, 3.0, 4.0], 2.5);
        let c = k.constants().unwrap();
        let expected = 2.0 * ((1.0 - 0.5) * 0.6 - 0.5 * (c.j / 0.5)) + c.k;
        assert!((k.g(1.0) - expected).abs() < 1e-15);
        let at_two = 2.0 * ((1.0 - 1.0) * 0.2 - 1.0 * (c.j / 0.5)) + c.k;
        assert!((k.g(2.0) - at_two).abs() < 1e-15);
        assert_eq!(k.g(3.0), 0.0);
    }

    #[test]
    fn kernel_indicators() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kernel(PovertySpec::Fgt(2.0), &xs, 2.5).g(3.0), 0.0);
        let shor = kernel(PovertySpec::Shorrocks, &xs, 2.5);
        assert_eq!(shor.g(2.5), 0.0);
        // G_n⁻¹(0.8) = 4 > Z
        assert_eq!(shor.nu(0.8), 0.0);
        assert_eq!(shor.nu(0.2), -2.0 * 0.6);
        for alpha in [0.0, 1.0, 2.0, 3.5] {
            let fgt = kernel(PovertySpec::Fgt(alpha), &xs, 2.5);
            assert!(numeric::midpoint_nodes(32).into_iter().all(|s| fgt.nu(s) == 0.0));
        }
    }

    #[test]
    fn fgt_zero_kernel_counts_the_line_itself() {
        let k = kernel(PovertySpec::Fgt(0.0), &[1.0, 2.5, 3.0, 4.0], 2.5);
        assert_eq!(k.g(2.5), 1.0);
        assert_eq!(k.value(), 0.5);
    }

    #[test]
    fn median_fraction_lines() {
        let panel = IncomePanel::new(vec![1.0, 2.0, 3.0, 4.0], vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        assert_eq!(LinePolicy::MedianFraction(0.5).resolve(&panel).unwrap(), (1.0, 10.0));
        assert!(LinePolicy::Fixed { z1: 1.0, z2: 0.0 }.resolve(&panel).is_err());
        assert!(LinePolicy::MedianFraction(-1.0).resolve(&panel).is_err());
    }

    fn synthetic_panel(n: usize) -> IncomePanel {
        // deterministic, dependent, with ties-free values
        let x1: Vec<f64> = (0..n).map(|j| 1.0 + ((j * 37) % n) as f64 / n as f64 * 4.0 + j as f64 * 1e-6).collect();
        let x2: Vec<f64> = (0..n)
            .map(|j| 0.8 + ((j * 53 + 7) % n) as f64 / n as f64 * 3.0 + 0.3 * x1[j])
            .collect();
        IncomePanel::new(x1, x2).unwrap()
    }

    #[test]
    fn fgt_gamma_collapses_to_sample_variance() {
        let panel = synthetic_panel(101);
        for alpha in [0.0, 1.0, 2.0] {
            let spec = PovertySpec::Fgt(alpha);
            let gj = gamma_j(&spec, &panel, 2.5, 2.2, DEFAULT_GRID).unwrap();
            assert_eq!((gj.small_gamma1, gj.small_gamma2, gj.small_gamma3, gj.gamma3), (0.0, 0.0, 0.0, 0.0));
            let k1 = kernel(spec, panel.x1(), 2.5);
            let k2 = PeriodKernel::new(&spec, panel.x2(), 2.2, Period::Second).unwrap();
            let diffs: Vec<f64> = (0..panel.n()).map(|j| k2.g(panel.x2()[j]) - k1.g(panel.x1()[j])).collect();
            let m = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let var = diffs.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / diffs.len() as f64;
            assert!((gj.total - var).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_covariance_is_symmetric_under_transpose() {
        let panel = synthetic_panel(200);
        let fit = PovertyFit::new(&PovertySpec::Kakwani(2), &panel, 2.5, 2.2, 128).unwrap();
        let nu = &fit.nu;
        let direct = nu.bridge_covariance(&nu.nu1, &nu.nu1);
        // transpose: swap the roles of s and t
        let m = nu.m();
        let mut acc = 0.0;
        for b in 0..m {
            for a in 0..m {
                let (s, t) = (nu.nodes[a], nu.nodes[b]);
                let diagonal = if a == b { 1.0 / (6.0 * m as f64) } else { 0.0 };
                acc += nu.nu1[b] * nu.nu1[a] * (t.min(s) - t * s - diagonal);
            }
        }
        let transposed = acc / (m * m) as f64;
        assert!((direct - transposed).abs() < 1e-12);
    }

    struct Step {
        at: f64,
        below: f64,
        above: f64,
    }

    impl GpiKernel for Step {
        fn g(&self, _: f64) -> f64 {
            0.0
        }
        fn nu(&self, s: f64) -> f64 {
            if s < self.at {
                self.below
            } else {
                self.above
            }
        }
        fn breakpoints(&self) -> Vec<f64> {
            vec![self.at]
        }
    }

    #[test]
    fn bridge_covariance_is_exact_for_cellwise_constant_nu() {
        // ∫∫ c² (min(s,t) − st) = c²/12 at any resolution
        let flat = Step { at: 0.5, below: 3.0, above: 3.0 };
        for m in [16, 17, 100, 256] {
            let grid = NuGrid::new(&flat, &flat, m).unwrap();
            assert!((grid.bridge_covariance(&grid.nu1, &grid.nu1) - 0.75).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn cell_averages_straddle_jumps_exactly() {
        let step = Step { at: 0.3, below: 1.0, above: -2.0 };
        let grid = NuGrid::new(&step, &step, 20).unwrap();
        // cell 6 = [0.30, 0.35), cell 5 = [0.25, 0.30)
        assert!((grid.nu1[5] - 1.0).abs() < 1e-13);
        assert!((grid.nu1[6] + 2.0).abs() < 1e-13);
        let step = Step { at: 0.31, below: 1.0, above: -2.0 };
        let grid = NuGrid::new(&step, &step, 20).unwrap();
        assert!((grid.nu1[6] - (0.2 * 1.0 + 0.8 * -2.0)).abs() < 1e-13);
        // ∫∫ ν(s)ν(t)(min − st) for the two-level step, by hand:
        // N(r) = ∫_r^1 ν; γ = ∫ N² − (∫ N)².
        let (a, b, c) = (0.31f64, 1.0f64, -2.0f64);
        let n_at = c * (1.0 - a);
        let int_n = (b * a * a / 2.0 + n_at * a) + c * (1.0 - a) * (1.0 - a) / 2.0;
        let int_n2 = {
            // on [0,a]: N = n_at + b(a − r); on [a,1]: N = c(1 − r)
            let lower = (0..=2000).map(|k| {
                let r = a * (k as f64 + 0.5) / 2001.0;
                (n_at + b * (a - r)).powi(2)
            });
            let lower: f64 = lower.sum::<f64>() * a / 2001.0;
            lower + c * c * (1.0 - a).powi(3) / 3.0
        };
        let exact = int_n2 - int_n * int_n;
        let fine = NuGrid::new(&step, &step, 1000).unwrap();
        assert!((fine.bridge_covariance(&fine.nu1, &fine.nu1) - exact).abs() < 1e-6);
    }

    #[test]
    fn grid_is_validated() {
        let panel = synthetic_panel(50);
        assert!(matches!(
            gamma_j(&PovertySpec::Sen, &panel, 2.5, 2.2, 8),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn identical_periods_have_zero_delta() {
        let xs = vec![1.0, 4.0, 2.0, 8.0, 3.0];
        let panel = IncomePanel::new(xs.clone(), xs).unwrap();
        for spec in [PovertySpec::Fgt(1.0), PovertySpec::Sen, PovertySpec::Kakwani(2), PovertySpec::Shorrocks] {
            assert_eq!(delta_poverty(&spec, &panel, 3.5, 3.5).unwrap(), 0.0);
        }
    }

    struct Linear;
    impl GpiKernel for Linear {
        fn g(&self, x: f64) -> f64 {
            x
        }
        fn nu(&self, _: f64) -> f64 {
            0.0
        }
        fn nu_vanishes(&self) -> bool {
            true
        }
    }

    #[test]
    fn custom_kernels_run_through_the_same_machinery() {
        let panel = synthetic_panel(60);
        let gj = gamma_j_with_kernels(&Linear, &Linear, &panel, 32).unwrap();
        let diffs: Vec<f64> = (0..60).map(|j| panel.x2()[j] - panel.x1()[j]).collect();
        assert!((gj.total - numeric::centered_second_moment(&diffs)).abs() < 1e-12);
    }
}
