//! Product-integration Nyström scheme for kernels with a derivative jump on
//! the diagonal, such as e^{ik|x−x′|}. The plain rule converges only
//! algebraically there; splitting every integral at the kink restores fast
//! convergence of the continuum resolvent at the nodes.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{build_kernel, pole_guard, symmetrize, ResolventMatrix};
use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, QuadratureGrid};

/// Extra Gauss–Legendre points per panel when integrating against the
/// interpolation basis.
const BASIS_EXTRA: usize = 24;
/// Points per panel for the kernel-kernel products.
const PRODUCT_ORDER: usize = 40;

/// Continuum resolvent at the nodes of an `order`-point Gauss–Legendre grid
/// on [a, b]. With D = Γ − g, the equation D = ν g∘g + ν g∘D is discretized by
/// interpolating D(·, x_j) through the nodes and integrating g against the
/// interpolants exactly up to quadrature on panels split at the kinks.
pub fn product_nystrom_resolvent<F>(
    green: F,
    a: f64,
    b: f64,
    order: usize,
    k: f64,
    nu: Complex64,
) -> Result<ResolventMatrix>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let grid = gauss_legendre(order, a, b)?;
    let kernel = build_kernel(&green, &grid, k)?;
    pole_guard(&kernel.weighted(), nu)?;
    let x = grid.nodes().to_vec();
    let bary = barycentric_weights(&grid);
    let n = order;
    let unit = gauss_legendre(PRODUCT_ORDER, 0.0, 1.0)?;

    let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut m_row = vec![Complex64::new(0.0, 0.0); n];
            for (lo, hi) in [(a, x[i]), (x[i], b)] {
                let panel = gauss_legendre(n + BASIS_EXTRA, lo, hi)?;
                for (&y, &wy) in panel.nodes().iter().zip(panel.weights()) {
                    let gy = green(x[i], y) * wy;
                    for (j, l) in lagrange_basis(&x, &bary, y).into_iter().enumerate() {
                        m_row[j] += gy * l;
                    }
                }
            }
            let mut phi_row = vec![Complex64::new(0.0, 0.0); n];
            for (j, slot) in phi_row.iter_mut().enumerate() {
                let mut cuts = [a, x[i], x[j], b];
                cuts.sort_by(|p, q| p.total_cmp(q));
                let mut s = Complex64::new(0.0, 0.0);
                for pair in cuts.windows(2) {
                    if pair[1] - pair[0] <= 1e-15 * (b - a) {
                        continue;
                    }
                    let h = pair[1] - pair[0];
                    s += unit.integrate(|t| {
                        let y = pair[0] + h * t;
                        green(x[i], y) * green(y, x[j]) * h
                    });
                }
                *slot = nu * s;
            }
            Ok((m_row, phi_row))
        })
        .collect::<Result<_>>()?;

    let lhs = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        Complex64::new(d, 0.0) - nu * rows[i].0[j]
    });
    let phi = Mat::from_fn(n, n, |i, j| rows[i].1[j]);
    let d = lhs.partial_piv_lu().solve(&phi);
    let mut entries = Mat::from_fn(n, n, |i, j| kernel.get(i, j) + d[(i, j)]);
    if !super::max_abs(&entries).is_finite() {
        return Err(Error::Convergence("product-integration solve is not finite".into()));
    }
    symmetrize(&mut entries);
    Ok(ResolventMatrix {
        entries,
        nu,
        kernel,
    })
}

/// Barycentric weights of Gauss–Legendre nodes: (−1)^j √((1 − t_j²) w_j)
/// in the reference variable t ∈ [−1, 1].
fn barycentric_weights(grid: &QuadratureGrid) -> Vec<f64> {
    let (a, b) = grid.interval();
    let half = 0.5 * (b - a);
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .map(|(j, (&x, &w))| {
            let t = (x - a) / half - 1.0;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((1.0 - t * t) * w / half).sqrt()
        })
        .collect()
}

fn lagrange_basis(x: &[f64], bary: &[f64], y: f64) -> Vec<f64> {
    if let Some(hit) = x.iter().position(|&xj| xj == y) {
        let mut v = vec![0.0; x.len()];
        v[hit] = 1.0;
        return v;
    }
    let terms: Vec<f64> = x.iter().zip(bary).map(|(&xj, &bj)| bj / (y - xj)).collect();
    let total: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / total).collect()
}
