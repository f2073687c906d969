//! Gauss–Legendre rules and composite panel quadrature.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` with a single panel.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// Mapped nodes and weights for the panel `[a, b]`.
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }

    /// Composite rule: `[a, b]` split into panels of width at most `width`.
    pub fn composite(&self, a: f64, b: f64, width: f64, f: impl Fn(f64) -> f64) -> f64 {
        let panels = (((b - a) / width).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|j| self.integrate(a + j as f64 * h, a + (j + 1) as f64 * h, &f))
            .sum()
    }

    /// Nodes and weights of the composite rule, in increasing order.
    pub fn composite_nodes(&self, a: f64, b: f64, width: f64) -> Vec<(f64, f64)> {
        let panels = (((b - a) / width).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .flat_map(|j| self.panel(a + j as f64 * h, a + (j + 1) as f64 * h).collect::<Vec<_>>())
            .collect()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of the periodic trapezoid rule on `[-π, π)`.
pub fn periodic_nodes(m: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|j| (-PI + j as f64 * h, h)).collect()
}
