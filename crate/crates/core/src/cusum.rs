//! Weighted CUSUM estimation of a single common change point in a short
//! panel series.
//!
//! A series has `N` time steps, each a vector of `d` panel values. For a
//! candidate split `p` the statistic is
//!
//! ```text
//! w(p, N) * sqrt( sum_k ( sum_{j <= p} (Y[j][k] - mean_k) )^2 )
//! w(p, N) = ((p/N) (1 - p/N))^(-gamma)
//! ```
//!
//! and the estimate is the smallest maximizing `p` in `1..N`.
//!
//! Summation order is fixed so results are reproducible bit for bit: panel
//! means and partial sums accumulate over `j` ascending (separately per
//! panel), and the squared partial sums are added over `k` ascending.

use std::fmt;

use crate::error::{Error, Result};

/// Shortest admissible series length.
pub const MIN_LEN: usize = 4;

/// Sensitivity exponent of the weight function, in `[0, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Gamma(f64);

impl Gamma {
    pub const ZERO: Gamma = Gamma(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..0.5).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!(
                "gamma must lie in [0, 0.5), got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An `N × d` panel series stored time-major: row `j` holds the `d` panel
/// values of step `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelSeries {
    values: Vec<f64>,
    len: usize,
    panels: usize,
}

impl PanelSeries {
    pub fn new(values: Vec<f64>, len: usize, panels: usize) -> Result<Self> {
        if len < MIN_LEN {
            return Err(Error::domain(format!(
                "series length must be at least {MIN_LEN}, got {len}"
            )));
        }
        if panels == 0 {
            return Err(Error::domain("series needs at least one panel"));
        }
        if values.len() != len * panels {
            return Err(Error::domain(format!(
                "expected {} values for a {len}x{panels} series, got {}",
                len * panels,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("series values must be finite"));
        }
        Ok(Self {
            values,
            len,
            panels,
        })
    }

    /// Builds a series from per-step rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let panels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != panels) {
            return Err(Error::domain("ragged series rows"));
        }
        Self::new(rows.concat(), rows.len(), panels)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Panel values of step `j` (1-based).
    pub fn step(&self, j: usize) -> &[f64] {
        &self.values[(j - 1) * self.panels..j * self.panels]
    }

    /// Value of panel `k` at step `j` (both 1-based).
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j - 1) * self.panels + (k - 1)]
    }
}

/// `((p/N)(1 - p/N))^(-gamma)` for `1 <= p <= N-1`.
pub fn weight(p: usize, len: usize, gamma: Gamma) -> Result<f64> {
    if p == 0 || p >= len {
        return Err(Error::domain(format!(
            "split {p} outside 1..={}",
            len.saturating_sub(1)
        )));
    }
    Ok(weight_unchecked(p, len, gamma))
}

fn weight_unchecked(p: usize, len: usize, gamma: Gamma) -> f64 {
    let t = p as f64 / len as f64;
    (t * (1.0 - t)).powf(-gamma.0)
}

/// The weighted CUSUM statistic of `series` at split `p`.
pub fn cusum_statistic(series: &PanelSeries, p: usize, gamma: Gamma) -> Result<f64> {
    let w = weight(p, series.len, gamma)?;
    let mut ws = Workspace::new(series.panels);
    ws.load_means(series.len, |j| series.step(j));
    for j in 1..p {
        ws.accumulate(series.step(j));
    }
    Ok(w * ws.accumulate(series.step(p)).sqrt())
}

/// Location and value of the CUSUM maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangeEstimate {
    /// Smallest maximizing split, in `1..N`.
    pub index: usize,
    /// The maximal statistic.
    pub statistic: f64,
}

impl ChangeEstimate {
    /// The statistic vanishes at every split, as for constant input; the
    /// index then only reflects the tie rule.
    pub fn is_degenerate(&self) -> bool {
        self.statistic == 0.0
    }
}

/// The smallest split at which the weighted CUSUM statistic is maximal.
pub fn estimate_change_point(series: &PanelSeries, gamma: Gamma) -> usize {
    estimate_with_statistic(series, gamma).index
}

pub fn estimate_with_statistic(series: &PanelSeries, gamma: Gamma) -> ChangeEstimate {
    let weights = Weights::new(series.len, gamma);
    let mut ws = Workspace::new(series.panels);
    ws.estimate(&weights, |j| series.step(j))
}

/// Precomputed `w(p, N)` for `p = 1..N-1`.
#[derive(Clone, Debug)]
pub(crate) struct Weights {
    len: usize,
    values: Vec<f64>,
}

impl Weights {
    pub(crate) fn new(len: usize, gamma: Gamma) -> Self {
        Self {
            len,
            values: (1..len).map(|p| weight_unchecked(p, len, gamma)).collect(),
        }
    }
}

/// Scratch buffers for evaluating many series with the same panel count.
#[derive(Clone, Debug)]
pub(crate) struct Workspace {
    mean: Vec<f64>,
    acc: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(panels: usize) -> Self {
        Self {
            mean: vec![0.0; panels],
            acc: vec![0.0; panels],
        }
    }

    fn load_means<'a>(&mut self, len: usize, step: impl Fn(usize) -> &'a [f64]) {
        self.mean.fill(0.0);
        for j in 1..=len {
            for (m, y) in self.mean.iter_mut().zip(step(j)) {
                *m += y;
            }
        }
        let n = len as f64;
        for m in &mut self.mean {
            *m /= n;
        }
        self.acc.fill(0.0);
    }

    /// Adds one step to the centred partial sums and returns their squared
    /// norm.
    fn accumulate(&mut self, row: &[f64]) -> f64 {
        let mut norm2 = 0.0;
        for ((a, m), y) in self.acc.iter_mut().zip(&self.mean).zip(row) {
            *a += y - m;
            norm2 += *a * *a;
        }
        norm2
    }

    /// Runs the estimator over the series whose step `j` (1-based) is
    /// `step(j)`; every row must have the workspace's panel count.
    pub(crate) fn estimate<'a>(
        &mut self,
        weights: &Weights,
        step: impl Fn(usize) -> &'a [f64],
    ) -> ChangeEstimate {
        let len = weights.len;
        self.load_means(len, &step);
        let mut best = ChangeEstimate {
            index: 1,
            statistic: f64::NEG_INFINITY,
        };
        for p in 1..len {
            let stat = weights.values[p - 1] * self.accumulate(step(p)).sqrt();
            if stat > best.statistic {
                best = ChangeEstimate {
                    index: p,
                    statistic: stat,
                };
            }
        }
        best
    }
}
