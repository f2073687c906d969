//! Expansion reports, Richardson ratio tests and grid sweeps.

use rayon::prelude::*;
use std::f64::consts::PI;

/// Remainder measurements of one expansion at a single small parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionSample {
    pub epsilon: f64,
    /// Sup over the grid of the remainder before division by `ε^order`.
    pub remainder_sup: f64,
    /// Sup of the weighted, rescaled remainder (the quantity the bound controls).
    pub weighted_sup: f64,
}

/// Measured remainders of one expansion along a decreasing `ε` sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub label: String,
    pub expected_order: f64,
    pub samples: Vec<ExpansionSample>,
    /// Measured leading coefficient, when the check has a natural one.
    pub leading: Option<f64>,
}

impl ExpansionReport {
    pub fn new(label: impl Into<String>, expected_order: f64) -> Self {
        Self {
            label: label.into(),
            expected_order,
            samples: Vec::new(),
            leading: None,
        }
    }

    /// `e(ε_i) / e(ε_{i+1})` for consecutive samples.
    pub fn ratios(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .map(|w| w[0].remainder_sup / w[1].remainder_sup)
            .collect()
    }

    /// Observed orders `log(e_i/e_{i+1}) / log(ε_i/ε_{i+1})`.
    pub fn order_estimates(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .map(|w| (w[0].remainder_sup / w[1].remainder_sup).ln() / (w[0].epsilon / w[1].epsilon).ln())
            .collect()
    }

    /// True when every ratio lies within `(ε_i/ε_{i+1})^order · (1 ± frac)`.
    pub fn ratios_within(&self, frac: f64) -> bool {
        self.samples.len() >= 2
            && self.samples.windows(2).all(|w| {
                let expect = (w[0].epsilon / w[1].epsilon).powf(self.expected_order);
                let r = w[0].remainder_sup / w[1].remainder_sup;
                r.is_finite() && (r / expect - 1.0).abs() <= frac
            })
    }

    pub fn weighted_sup(&self) -> f64 {
        self.samples.iter().map(|s| s.weighted_sup).fold(0.0, f64::max)
    }

    /// Largest ratio of successive weighted sups (stability of the bound).
    pub fn weighted_growth(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].weighted_sup / w[0].weighted_sup)
            .fold(0.0, f64::max)
    }

    pub fn worst_order(&self) -> Option<f64> {
        self.order_estimates()
            .into_iter()
            .map(|o| (o, (o - self.expected_order).abs()))
            .fold(None, |acc: Option<(f64, f64)>, (o, d)| match acc {
                Some((_, best)) if best >= d => acc,
                _ => Some((o, d)),
            })
            .map(|p| p.0)
    }
}

/// `n` equally spaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `m` equally spaced angles covering `[-π, π)`.
pub fn angle_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| -PI + 2.0 * PI * j as f64 / m as f64).collect()
}

/// Parallel sweep over a tensor grid, returning the component-wise maxima of
/// `|f|`. Max is order independent, so the result does not depend on
/// scheduling.
pub fn grid_sup_array<const K: usize, E, F>(ts: &[f64], thetas: &[f64], f: F) -> Result<[f64; K], E>
where
    E: Send,
    F: Fn(f64, f64) -> Result<[f64; K], E> + Sync,
{
    let merge = |mut a: [f64; K], b: [f64; K]| {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.max(y.abs());
        }
        a
    };
    ts.par_iter()
        .map(|&t| {
            let mut acc = [0.0_f64; K];
            for &th in thetas {
                acc = merge(acc, f(t, th)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, E>>()
        .map(|rows| rows.into_iter().fold([0.0_f64; K], merge))
}

/// Two-valued [`grid_sup_array`].
pub fn grid_sup2<E, F>(ts: &[f64], thetas: &[f64], f: F) -> Result<(f64, f64), E>
where
    E: Send,
    F: Fn(f64, f64) -> Result<(f64, f64), E> + Sync,
{
    grid_sup_array(ts, thetas, |t, th| f(t, th).map(|(a, b)| [a, b])).map(|[a, b]| (a, b))
}

/// Sup of `|f|` over a tensor grid.
pub fn grid_sup<E, F>(ts: &[f64], thetas: &[f64], f: F) -> Result<f64, E>
where
    E: Send,
    F: Fn(f64, f64) -> Result<f64, E> + Sync,
{
    grid_sup2(ts, thetas, |t, th| f(t, th).map(|v| (v, 0.0))).map(|p| p.0)
}
