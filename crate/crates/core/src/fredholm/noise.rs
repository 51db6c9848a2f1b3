use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{apply_response, check_poles, resolvent_matrix, KernelMatrix, SpectralData};
use crate::error::{Error, Result};

/// κ = ħck²/(πε), the prefactor of the field commutator. The δ(k − k′)
/// factor that accompanies every commutator is implied, not stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorScale {
    pub hbar: f64,
    pub c: f64,
    pub epsilon: f64,
    pub k: f64,
}

impl CommutatorScale {
    pub fn new(hbar: f64, c: f64, epsilon: f64, k: f64) -> Result<Self> {
        let s = CommutatorScale { hbar, c, epsilon, k };
        if [hbar, c, epsilon, k].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(s)
        } else {
            Err(Error::Validation(format!(
                "commutator scale needs hbar, c, epsilon, k > 0, got {s:?}"
            )))
        }
    }

    /// Natural units ħ = c = 1.
    pub fn natural(epsilon: f64, k: f64) -> Result<Self> {
        Self::new(1.0, 1.0, epsilon, k)
    }

    pub fn kappa(&self) -> f64 {
        self.hbar * self.c * self.k * self.k / (std::f64::consts::PI * self.epsilon)
    }
}

/// Relative residual max|R Im(G) R† − Im(Γ)| / max|Im(Γ)| with R = I + νΓW,
/// for real ν. It vanishes when the naive solution already preserves the
/// free-field commutator, which happens only at ν = 0.
pub fn commutator_closure_residual(kernel: &KernelMatrix, nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(0.0);
    }
    let res = resolvent_matrix(kernel, Complex64::new(nu, 0.0))?;
    let r = res.response();
    let g = kernel.entries();
    let n = kernel.len();
    let img = Mat::from_fn(n, n, |i, j| Complex64::new(g[(i, j)].im, 0.0));
    let rh = r.adjoint().to_owned();
    let lhs = &(&r * &img) * &rh;
    let gamma = res.entries();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((lhs[(i, j)] - Complex64::new(gamma[(i, j)].im, 0.0)).norm());
            scale = scale.max(gamma[(i, j)].im.abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// N_ij = −κ Im(Γ_ij − G_ij), the commutator of the noise field at nodes i, j.
pub fn noise_commutator_matrix(
    kernel: &KernelMatrix,
    nu: Complex64,
    scale: &CommutatorScale,
) -> Result<Mat<f64>> {
    let res = resolvent_matrix(kernel, nu)?;
    let kappa = scale.kappa();
    let g = kernel.entries();
    let gamma = res.entries();
    Ok(Mat::from_fn(kernel.len(), kernel.len(), |i, j| {
        -kappa * (gamma[(i, j)] - g[(i, j)]).im
    }))
}

/// max |Im(Γ) − Im(Γ − G) − Im(G)| entrywise: adding the noise commutator
/// back to the naive one restores the free-field commutator.
pub fn noise_restoration_residual(kernel: &KernelMatrix, nu: Complex64) -> Result<f64> {
    let res = resolvent_matrix(kernel, nu)?;
    let g = kernel.entries();
    let gamma = res.entries();
    let mut worst: f64 = 0.0;
    for i in 0..kernel.len() {
        for j in 0..kernel.len() {
            let noise = (gamma[(i, j)] - g[(i, j)]).im;
            worst = worst.max((gamma[(i, j)].im - noise - g[(i, j)].im).abs());
        }
    }
    Ok(worst)
}

/// c_n = −κν Im(1/((ν_n − ν)ν_n)), the commutator of each noise mode operator.
pub fn noise_mode_commutators(
    spec: &SpectralData,
    nu: f64,
    scale: &CommutatorScale,
) -> Result<Vec<f64>> {
    let nu_c = Complex64::new(nu, 0.0);
    let lambdas: Vec<Complex64> = spec.eigenvalues().iter().map(|v| 1.0 / v).collect();
    check_poles(&lambdas, nu_c)?;
    let kappa = scale.kappa();
    Ok(spec
        .eigenvalues()
        .iter()
        .map(|&nun| -kappa * nu * (1.0 / ((nun - nu_c) * nun)).im)
        .collect())
}

/// −κ Im Σ_n u_n u_nᵀ ν/((ν_n − ν)ν_n), the noise commutator rebuilt from the
/// spectral expansion of Γ − G.
pub fn spectral_noise_matrix(
    spec: &SpectralData,
    nu: f64,
    scale: &CommutatorScale,
) -> Result<Mat<f64>> {
    let nu_c = Complex64::new(nu, 0.0);
    let lambdas: Vec<Complex64> = spec.eigenvalues().iter().map(|v| 1.0 / v).collect();
    check_poles(&lambdas, nu_c)?;
    let kappa = scale.kappa();
    let u = spec.vectors();
    let factors: Vec<Complex64> = spec
        .eigenvalues()
        .iter()
        .map(|&nun| nu_c / ((nun - nu_c) * nun))
        .collect();
    let rows = u.nrows();
    Ok(Mat::from_fn(rows, rows, |i, j| {
        let s: Complex64 = (0..spec.len()).map(|n| u[(i, n)] * u[(j, n)] * factors[n]).sum();
        -kappa * s.im
    }))
}

/// max |N_ij − Σ_n c_n u_n(x_i) u_n*(x_j)|: how far a diagonal mode
/// expansion of the noise field is from reproducing the noise commutator.
/// Zero for a single real mode; nonzero in general because complex
/// eigenfunctions leave u_n u_m* cross terms.
pub fn mode_expansion_discrepancy(
    kernel: &KernelMatrix,
    spec: &SpectralData,
    nu: f64,
    scale: &CommutatorScale,
) -> Result<f64> {
    let n_mat = noise_commutator_matrix(kernel, Complex64::new(nu, 0.0), scale)?;
    let c = noise_mode_commutators(spec, nu, scale)?;
    let u = spec.vectors();
    let rows = kernel.len();
    let mut worst: f64 = 0.0;
    for i in 0..rows {
        for j in 0..rows {
            let s: Complex64 = (0..spec.len()).map(|n| c[n] * u[(i, n)] * u[(j, n)].conj()).sum();
            worst = worst.max((Complex64::new(n_mat[(i, j)], 0.0) - s).norm());
        }
    }
    Ok(worst)
}

/// Per-node intensity split into the coherent part |E|², E = E₀ + νΓWE₀,
/// and the vacuum noise part under both operator orderings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VacuumIntensity {
    pub coherent: Vec<f64>,
    /// ⟨F†F⟩ in the vacuum: only noise modes with negative commutator,
    /// whose operators act as creators, contribute.
    pub noise_normal: Vec<f64>,
    /// ⟨FF†⟩ in the vacuum: the positive-commutator modes.
    pub noise_antinormal: Vec<f64>,
}

impl VacuumIntensity {
    pub fn total_normal(&self) -> Vec<f64> {
        self.coherent.iter().zip(&self.noise_normal).map(|(a, b)| a + b).collect()
    }

    pub fn total_antinormal(&self) -> Vec<f64> {
        self.coherent
            .iter()
            .zip(&self.noise_antinormal)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Vacuum intensity at the nodes for real ν. The noise kernel N is split as
/// N = N₊ − N₋ through the eigenpairs of W^½ N W^½, so the nodal values
/// converge to the continuum kernel under refinement.
pub fn vacuum_noise_intensity(
    kernel: &KernelMatrix,
    nu: f64,
    scale: &CommutatorScale,
    e0: &[Complex64],
) -> Result<VacuumIntensity> {
    let rows = kernel.len();
    if e0.len() != rows {
        return Err(Error::Validation(format!(
            "coherent field has {} samples, grid has {rows}",
            e0.len()
        )));
    }
    let nu_c = Complex64::new(nu, 0.0);
    let res = resolvent_matrix(kernel, nu_c)?;
    let coherent = apply_response(&res, e0).iter().map(|e| e.norm_sqr()).collect();
    if nu == 0.0 {
        return Ok(VacuumIntensity {
            coherent,
            noise_normal: vec![0.0; rows],
            noise_antinormal: vec![0.0; rows],
        });
    }
    let n_mat = noise_commutator_matrix(kernel, nu_c, scale)?;
    let sw: Vec<f64> = kernel.grid().weights().iter().map(|w| w.sqrt()).collect();
    let s = Mat::from_fn(rows, rows, |i, j| {
        0.5 * (n_mat[(i, j)] + n_mat[(j, i)]) * sw[i] * sw[j]
    });
    let eig = s
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("symmetric eigen-solver failed: {e:?}")))?;
    let mu = eig.S().column_vector();
    let v = eig.U();
    let mut normal = vec![0.0; rows];
    let mut antinormal = vec![0.0; rows];
    for m in 0..rows {
        let target = if mu[m] < 0.0 { &mut normal } else { &mut antinormal };
        for i in 0..rows {
            target[i] += mu[m].abs() * v[(i, m)] * v[(i, m)] / (sw[i] * sw[i]);
        }
    }
    Ok(VacuumIntensity {
        coherent,
        noise_normal: normal,
        noise_antinormal: antinormal,
    })
}
