//! Paired income samples and the rank-based primitives every estimator reads:
//! the empirical distribution function, its generalized inverse,
//! pseudo-observations and the empirical copula.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// One of the two observation periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Period {
    First,
    Second,
}

impl Period {
    pub const BOTH: [Period; 2] = [Period::First, Period::Second];

    pub fn index(self) -> usize {
        match self {
            Period::First => 1,
            Period::Second => 2,
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Incomes of the same n units observed in two periods, paired by index.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomePanel {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl IncomePanel {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::InvalidPanel(format!(
                "period 1 has {} observations, period 2 has {}",
                x1.len(),
                x2.len()
            )));
        }
        if x1.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "need at least 2 paired observations, got {}",
                x1.len()
            )));
        }
        for (period, xs) in [(Period::First, &x1), (Period::Second, &x2)] {
            if let Some((index, &value)) = xs.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                return Err(Error::NonFiniteIncome {
                    period,
                    index,
                    value,
                });
            }
        }
        Ok(Self { x1, x2 })
    }

    pub fn n(&self) -> usize {
        self.x1.len()
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn period(&self, period: Period) -> &[f64] {
        match period {
            Period::First => &self.x1,
            Period::Second => &self.x2,
        }
    }

    /// Fails with the first nonpositive income of `period`.
    pub fn require_positive(&self, period: Period, measure: &str) -> Result<()> {
        match self.period(period).iter().position(|&x| x <= 0.0) {
            Some(index) => Err(Error::NonPositiveIncome {
                measure: measure.to_string(),
                period,
                index,
                value: self.period(period)[index],
            }),
            None => Ok(()),
        }
    }

    /// Panel made of the rows listed in `indices` (with repetition).
    pub fn resample(&self, indices: &[usize]) -> Result<Self> {
        let x1 = indices.iter().map(|&j| self.x1[j]).collect();
        let x2 = indices.iter().map(|&j| self.x2[j]).collect();
        Self::new(x1, x2)
    }

    pub fn ecdf(&self, period: Period) -> Ecdf {
        Ecdf::new(self.period(period))
    }

    pub fn pseudo_observations(&self) -> PseudoObs {
        PseudoObs::from_panel(self)
    }
}

/// Right-continuous empirical distribution function G_n(x) = #{X_j ≤ x}/n.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Panics on an empty or non-finite sample; callers validate first.
    pub fn new(sample: &[f64]) -> Self {
        assert!(!sample.is_empty(), "ECDF of an empty sample");
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of sample points ≤ x.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.n() as f64
    }

    /// j-th order statistic, 1-based.
    pub fn order_statistic(&self, j: usize) -> f64 {
        self.sorted[j - 1]
    }

    /// Left-continuous generalized inverse inf{x : G_n(x) ≥ p}, i.e. the
    /// ⌈np⌉-th order statistic.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!(
                "quantile level {p} outside (0, 1]"
            )));
        }
        Ok(self.sorted[self.quantile_rank(p) - 1])
    }

    /// ⌈np⌉ for p ∈ (0, 1], snapping products that land within rounding
    /// error of an integer so that p = k/n maps to exactly k.
    fn quantile_rank(&self, p: f64) -> usize {
        let n = self.n();
        let np = n as f64 * p;
        let nearest = np.round();
        let k = if (np - nearest).abs() <= 4.0 * f64::EPSILON * np {
            nearest
        } else {
            np.ceil()
        };
        (k as usize).clamp(1, n)
    }
}

/// Scaled ranks (u_j, v_j) = (rank(x1_j), rank(x2_j)) / (n + 1).
///
/// Ties are ranked by original index, so ranks are always a permutation of
/// 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObs {
    rank_u: Vec<usize>,
    rank_v: Vec<usize>,
}

fn stable_ranks(xs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    // sort_by is stable, so equal values keep index order.
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0; xs.len()];
    for (pos, &j) in order.iter().enumerate() {
        ranks[j] = pos + 1;
    }
    ranks
}

impl PseudoObs {
    pub fn from_panel(panel: &IncomePanel) -> Self {
        Self {
            rank_u: stable_ranks(panel.x1()),
            rank_v: stable_ranks(panel.x2()),
        }
    }

    pub fn n(&self) -> usize {
        self.rank_u.len()
    }

    pub fn rank(&self, period: Period, j: usize) -> usize {
        match period {
            Period::First => self.rank_u[j],
            Period::Second => self.rank_v[j],
        }
    }

    pub fn u(&self, j: usize) -> f64 {
        self.rank_u[j] as f64 / (self.n() + 1) as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        self.rank_v[j] as f64 / (self.n() + 1) as f64
    }

    /// Coordinate Π_i(u_j, v_j).
    pub fn coordinate(&self, period: Period, j: usize) -> f64 {
        match period {
            Period::First => self.u(j),
            Period::Second => self.v(j),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n()).map(|j| (self.u(j), self.v(j)))
    }
}

/// Empirical copula C_n(s, t) = #{j : u_j ≤ s, v_j ≤ t} / n.
#[derive(Debug, Clone, Copy)]
pub struct EmpiricalCopula<'a> {
    obs: &'a PseudoObs,
}

impl<'a> EmpiricalCopula<'a> {
    pub fn new(obs: &'a PseudoObs) -> Self {
        Self { obs }
    }

    pub fn observations(&self) -> &'a PseudoObs {
        self.obs
    }

    pub fn pseudo_observations(&self) -> &'a PseudoObs {
        self.obs
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let count = self.obs.iter().filter(|&(u, v)| u <= s && v <= t).count();
        count as f64 / self.obs.n() as f64
    }

    /// Plug-in for ∫ f dC over (0,a)×(0,b): (1/n) Σ f(u_j,v_j) 1{u_j < a, v_j < b}.
    pub fn integral<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut terms = Vec::with_capacity(self.obs.n());
        for (j, (u, v)) in self.obs.iter().enumerate() {
            if u < a && v < b {
                let value = f(u, v);
                if !value.is_finite() {
                    return Err(Error::Numeric {
                        context: "copula integrand".into(),
                        index: Some(j),
                    });
                }
                terms.push(value);
            }
        }
        Ok(numeric::sum(terms) / self.obs.n() as f64)
    }

    /// C_n(nodes[a], nodes[b]) for every pair of ascending `nodes`, row-major
    /// in a. Built from a 2-D histogram in O(n + m²).
    pub fn grid(&self, nodes: &[f64]) -> Vec<f64> {
        let m = nodes.len();
        let mut counts = vec![0usize; m * m];
        for (u, v) in self.obs.iter() {
            let a = nodes.partition_point(|&t| t < u);
            let b = nodes.partition_point(|&t| t < v);
            if a < m && b < m {
                counts[a * m + b] += 1;
            }
        }
        for a in 0..m {
            for b in 1..m {
                counts[a * m + b] += counts[a * m + b - 1];
            }
        }
        for a in 1..m {
            for b in 0..m {
                counts[a * m + b] += counts[(a - 1) * m + b];
            }
        }
        let n = self.obs.n() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// For each node s: (1/n) Σ values_j 1{Π_i(u_j, v_j) < s}, i.e. the
    /// plug-in of ∫ f dC over (0,s)×(0,1) for the first period and
    /// (0,1)×(0,s) for the second. `values` holds f at the pseudo-observations.
    pub fn lower_partial_integrals(&self, period: Period, values: &[f64], nodes: &[f64]) -> Vec<f64> {
        let m = nodes.len();
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); m];
        for (j, &value) in values.iter().enumerate() {
            let w = self.obs.coordinate(period, j);
            let first = nodes.partition_point(|&s| s <= w);
            if first < m {
                buckets[first].push(value);
            }
        }
        let n = self.obs.n() as f64;
        let mut running = numeric::Accumulator::default();
        buckets
            .into_iter()
            .map(|bucket| {
                for value in bucket {
                    running.add(value);
                }
                running.value() / n
            })
            .collect()
    }
}
