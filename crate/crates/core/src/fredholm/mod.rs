//! Nyström discretization of Fredholm equations of the second kind,
//! E = E₀ + ν ∫ g E, with a complex symmetric kernel g.
//!
//! All matrices act on nodal values; integrals carry the quadrature weights
//! explicitly through W = diag(w).

mod noise;
mod product;
mod spectral;

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{csv_f64, write_lines};
use crate::specfun::QuadratureGrid;

pub use noise::{
    commutator_closure_residual, mode_expansion_discrepancy, noise_commutator_matrix,
    noise_mode_commutators, noise_restoration_residual, spectral_noise_matrix,
    vacuum_noise_intensity, CommutatorScale, VacuumIntensity,
};
pub use product::product_nystrom_resolvent;
pub use spectral::{eigen_decompose, mode_overlap_residual, DegeneracyWarning, SpectralData};

/// Relative tolerance for the symmetry of sampled kernels.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative guard radius around eigenvalues of the homogeneous problem.
pub const POLE_GUARD: f64 = 1e-8;
/// Eigenvalues of G·W below this fraction of the largest are discarded.
pub const RETENTION: f64 = 1e-12;

/// G_ij = g(x_i, x_j) on a quadrature grid.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    grid: QuadratureGrid,
    entries: Mat<Complex64>,
    k: f64,
}

impl KernelMatrix {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// G·W, the matrix of the integral operator on nodal values.
    pub fn weighted(&self) -> Mat<Complex64> {
        let w = self.grid.weights();
        Mat::from_fn(self.len(), self.len(), |i, j| self.entries[(i, j)] * w[j])
    }

    /// CSV dump with header `i,j,x_i,x_j,re,im`, row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        dump_matrix(&self.grid, &self.entries, out)
    }
}

/// Samples `green` on `grid`; the kernel must be symmetric and finite at the nodes.
pub fn build_kernel<F>(green: F, grid: &QuadratureGrid, k: f64) -> Result<KernelMatrix>
where
    F: Fn(f64, f64) -> Complex64,
{
    if grid.is_empty() {
        return Err(Error::Validation("empty quadrature grid".into()));
    }
    let x = grid.nodes();
    let entries = Mat::from_fn(x.len(), x.len(), |i, j| green(x[i], x[j]));
    let scale = max_abs(&entries);
    if !scale.is_finite() {
        return Err(Error::Validation("kernel is not finite at the nodes".into()));
    }
    let asym = asymmetry(&entries);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Validation(format!(
            "kernel violates g(x, x') = g(x', x) by {asym:.3e} (scale {scale:.3e})"
        )));
    }
    Ok(KernelMatrix {
        grid: grid.clone(),
        entries,
        k,
    })
}

/// Discrete resolvent Γ = (I − νGW)⁻¹G at spectral parameter ν.
#[derive(Clone, Debug)]
pub struct ResolventMatrix {
    entries: Mat<Complex64>,
    nu: Complex64,
    kernel: KernelMatrix,
}

impl ResolventMatrix {
    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// R = I + νΓW, the map E₀ ↦ E.
    pub fn response(&self) -> Mat<Complex64> {
        let w = self.kernel.grid.weights();
        let n = w.len();
        Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            self.nu * self.entries[(i, j)] * w[j] + d
        })
    }

    /// max |(Γ − G) − νΓWG|, the discrete Hilbert–Schmidt relation.
    pub fn hilbert_schmidt_residual(&self) -> f64 {
        let g = &self.kernel.entries;
        let gw = self.kernel.weighted();
        let prod = &self.entries * &gw.transpose().to_owned();
        // ΓWG = Γ (GW)ᵀ because G and W are symmetric.
        let n = g.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r = self.entries[(i, j)] - g[(i, j)] - self.nu * prod[(i, j)];
                worst = worst.max(r.norm());
            }
        }
        worst
    }

    /// max |(I − νGW)(I + νΓW) − I|.
    pub fn consistency_residual(&self) -> f64 {
        let n = self.kernel.len();
        let gw = self.kernel.weighted();
        let a = Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - self.nu * gw[(i, j)]
        });
        let prod = &a * &self.response();
        let eye = Mat::<Complex64>::identity(n, n);
        max_abs(&(&prod - &eye))
    }

    /// max |Γ_ij − Γ_ji|.
    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        dump_matrix(&self.kernel.grid, &self.entries, out)
    }
}

/// Γ = (I − νGW)⁻¹G, refused within the pole guard of an eigenvalue ν_n.
pub fn resolvent_matrix(kernel: &KernelMatrix, nu: Complex64) -> Result<ResolventMatrix> {
    check_finite_nu(nu)?;
    if nu == Complex64::new(0.0, 0.0) {
        return Ok(ResolventMatrix {
            entries: kernel.entries.clone(),
            nu,
            kernel: kernel.clone(),
        });
    }
    let gw = kernel.weighted();
    pole_guard(&gw, nu)?;
    let n = kernel.len();
    let a = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        Complex64::new(d, 0.0) - nu * gw[(i, j)]
    });
    let mut entries = a.partial_piv_lu().solve(&kernel.entries);
    if !max_abs(&entries).is_finite() {
        return Err(Error::Convergence("resolvent solve produced non-finite values".into()));
    }
    symmetrize(&mut entries);
    Ok(ResolventMatrix {
        entries,
        nu,
        kernel: kernel.clone(),
    })
}

/// E = E₀ + νΓWE₀, the solution of E − νGWE = E₀.
pub fn solve_fredholm(
    kernel: &KernelMatrix,
    nu: Complex64,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    if rhs.len() != kernel.len() {
        return Err(Error::Validation(format!(
            "right-hand side has {} samples, grid has {}",
            rhs.len(),
            kernel.len()
        )));
    }
    let res = resolvent_matrix(kernel, nu)?;
    Ok(apply_response(&res, rhs))
}

/// max |E − νGWE − E₀|, the residual of the original equation.
pub fn fredholm_residual(
    kernel: &KernelMatrix,
    nu: Complex64,
    solution: &[Complex64],
    rhs: &[Complex64],
) -> f64 {
    let gw = kernel.weighted();
    (0..kernel.len())
        .map(|i| {
            let s: Complex64 = (0..kernel.len()).map(|j| gw[(i, j)] * solution[j]).sum();
            (solution[i] - nu * s - rhs[i]).norm()
        })
        .fold(0.0, f64::max)
}

pub(crate) fn apply_response(res: &ResolventMatrix, rhs: &[Complex64]) -> Vec<Complex64> {
    let w = res.kernel.grid.weights();
    (0..rhs.len())
        .map(|i| {
            let s: Complex64 = (0..rhs.len())
                .map(|j| res.entries[(i, j)] * w[j] * rhs[j])
                .sum();
            rhs[i] + res.nu * s
        })
        .collect()
}

fn check_finite_nu(nu: Complex64) -> Result<()> {
    if nu.re.is_finite() && nu.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("spectral parameter {nu} is not finite")))
    }
}

/// Rejects ν within the relative guard radius of some ν_n = 1/λ_n.
fn pole_guard(gw: &Mat<Complex64>, nu: Complex64) -> Result<()> {
    let lambdas = gw
        .eigenvalues()
        .map_err(|e| Error::Convergence(format!("eigenvalue iteration failed: {e:?}")))?;
    check_poles(&lambdas, nu)
}

pub(crate) fn check_poles(lambdas: &[Complex64], nu: Complex64) -> Result<()> {
    let top = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    for &lambda in lambdas {
        if lambda.norm() <= RETENTION * top {
            continue;
        }
        // |ν − ν_n| / |ν_n| = |1 − νλ_n|
        let distance = (1.0 - nu * lambda).norm();
        if distance < POLE_GUARD {
            return Err(Error::PoleProximity {
                nu,
                nearest: 1.0 / lambda,
                distance,
            });
        }
    }
    Ok(())
}

pub(crate) fn max_abs(m: &Mat<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)].norm();
            if v.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(v);
        }
    }
    worst
}

fn asymmetry(m: &Mat<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

/// Averages the matrix with its transpose, removing solver round-off asymmetry.
fn symmetrize(m: &mut Mat<Complex64>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn dump_matrix<W: Write>(grid: &QuadratureGrid, m: &Mat<Complex64>, out: W) -> std::io::Result<()> {
    let x = grid.nodes();
    let rows = (0..m.nrows()).flat_map(|i| {
        (0..m.ncols()).map(move |j| {
            let v = m[(i, j)];
            format!(
                "{i},{j},{},{},{},{}",
                csv_f64(x[i]),
                csv_f64(x[j]),
                csv_f64(v.re),
                csv_f64(v.im)
            )
        })
    });
    write_lines(out, "i,j,x_i,x_j,re,im", rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_legendre;

    fn layer_kernel(n: usize, k: f64) -> KernelMatrix {
        let grid = gauss_legendre(n, 0.0, 1.0).unwrap();
        let g = move |x: f64, y: f64| {
            Complex64::new(0.0, k * (x - y).abs()).exp() / Complex64::new(0.0, 2.0 * k)
        };
        build_kernel(g, &grid, k).unwrap()
    }

    #[test]
    fn layer_kernel_diagonal_and_symmetry() {
        let kern = layer_kernel(8, 1.0);
        for i in 0..8 {
            assert_eq!(kern.get(i, i), Complex64::new(0.0, -0.5));
            for j in 0..8 {
                assert_eq!(kern.get(i, j), kern.get(j, i));
            }
        }
    }

    #[test]
    fn rank_one_kernel_is_all_ones() {
        let grid = gauss_legendre(5, 0.0, 1.0).unwrap();
        let kern = build_kernel(|_, _| Complex64::new(1.0, 0.0), &grid, 1.0).unwrap();
        assert!((0..5).all(|i| (0..5).all(|j| kern.get(i, j) == Complex64::new(1.0, 0.0))));
    }

    #[test]
    fn asymmetric_kernel_is_rejected() {
        let grid = gauss_legendre(4, 0.0, 1.0).unwrap();
        let r = build_kernel(|x, y| Complex64::new(x - 2.0 * y, 0.0), &grid, 1.0);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn zero_parameter_gives_kernel() {
        let kern = layer_kernel(10, 2.0);
        let res = resolvent_matrix(&kern, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(res.entries(), kern.entries());
        let e0: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let e = solve_fredholm(&kern, Complex64::new(0.0, 0.0), &e0).unwrap();
        assert_eq!(e, e0);
    }

    #[test]
    fn hilbert_schmidt_and_consistency() {
        let kern = layer_kernel(48, 2.0);
        let res = resolvent_matrix(&kern, Complex64::new(-5.0, 0.0)).unwrap();
        assert!(res.hilbert_schmidt_residual() < 1e-10);
        assert!(res.consistency_residual() < 1e-10);
        assert!(res.asymmetry() < 1e-10);
    }

    #[test]
    fn pole_is_refused() {
        let grid = gauss_legendre(6, 0.0, 1.0).unwrap();
        let kern = build_kernel(|_, _| Complex64::new(1.0, 0.0), &grid, 1.0).unwrap();
        let r = resolvent_matrix(&kern, Complex64::new(1.0, 0.0));
        assert!(matches!(r, Err(Error::PoleProximity { .. })), "{r:?}");
        assert!(resolvent_matrix(&kern, Complex64::new(1.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn csv_dump_shape() {
        let kern = layer_kernel(3, 1.0);
        let mut buf = Vec::new();
        kern.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.split('\n').collect();
        assert_eq!(lines[0], "i,j,x_i,x_j,re,im");
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[10], "");
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("0,0,"));
    }
}
