//! Summation and quadrature helpers shared by the estimators.

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    total: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, x: f64) {
        let t = self.total + x;
        if self.total.abs() >= x.abs() {
            self.comp += (self.total - t) + x;
        } else {
            self.comp += (x - t) + self.total;
        }
        self.total = t;
    }

    pub fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// Compensated sum. Results are insensitive to the order of accumulation up
/// to a few ulps, so serial and parallel paths agree.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Accumulator::default();
    for x in values {
        acc.add(x);
    }
    acc.value()
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// (1/n) Σ (a_j − ā)(b_j − b̄).
pub fn centered_cross_moment(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb))) / a.len() as f64
}

/// (1/n) Σ (a_j − ā)².
pub fn centered_second_moment(a: &[f64]) -> f64 {
    let m = mean(a);
    sum(a.iter().map(|x| (x - m) * (x - m))) / a.len() as f64
}

/// Midpoint nodes (i − 0.5)/m, i = 1..m, of the unit interval.
pub fn midpoint_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
}
