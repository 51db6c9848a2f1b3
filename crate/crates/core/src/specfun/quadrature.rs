use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes and positive weights of a quadrature rule on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a: f64,
    b: f64,
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Gauss–Legendre rule of the given order on `[a, b]`, exact for polynomials of
/// degree `2 * order - 1`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<QuadratureGrid> {
    if order == 0 {
        return Err(Error::Validation("quadrature order must be positive".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Validation(format!("invalid interval [{a}, {b}]")));
    }
    let (t, w) = legendre_rule(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureGrid {
        nodes: t.iter().map(|&t| mid + half * t).collect(),
        weights: w.iter().map(|&w| half * w).collect(),
        a,
        b,
    })
}

/// Composite Gauss–Legendre rule over consecutive panels given by `edges`.
pub fn composite_gauss_legendre(order: usize, edges: &[f64]) -> Result<QuadratureGrid> {
    if edges.len() < 2 {
        return Err(Error::Validation("need at least one panel".into()));
    }
    let mut nodes = Vec::with_capacity(order * (edges.len() - 1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in edges.windows(2) {
        let panel = gauss_legendre(order, pair[0], pair[1])?;
        nodes.extend_from_slice(&panel.nodes);
        weights.extend_from_slice(&panel.weights);
    }
    Ok(QuadratureGrid {
        nodes,
        weights,
        a: edges[0],
        b: edges[edges.len() - 1],
    })
}

/// Nodes (ascending) and weights on [-1, 1] by Newton iteration on P_n.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
