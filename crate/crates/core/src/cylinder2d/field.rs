//! Scattered field Ũ = νΓ∘U₀ of a source U₀ supported inside the cylinder,
//! built two ways: from the mode coefficients A_n, B_n, and by applying the
//! resolvent kernel directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{CylinderConfig, ModeTable, PolarPoint, I, MODE_STEP, TAIL_TOL};
use crate::error::{Error, Result};
use crate::specfun::{
    bessel_j_sequence, composite_gauss_legendre, gauss_legendre, CylinderSeq, QuadratureGrid,
};

/// Rays of the local polar rule around an evaluation point.
const LOCAL_RAYS: usize = 384;
/// Gauss–Legendre points per panel along each ray.
const LOCAL_ORDER: usize = 20;
/// Geometric grading levels toward the logarithmic singularity at s = 0.
const LOCAL_GRADING: i32 = 14;

/// Tensor rule on the disk: Gauss–Legendre in ρ (with the Jacobian ρ folded
/// into the weights) times the trapezoid rule in φ.
#[derive(Clone, Debug)]
pub struct PolarGrid {
    radius: f64,
    radial: QuadratureGrid,
    azimuth: usize,
}

impl PolarGrid {
    pub fn new(radius: f64, radial_order: usize, azimuth: usize) -> Result<Self> {
        if azimuth == 0 {
            return Err(Error::Validation("polar grid needs azimuthal samples".into()));
        }
        Ok(PolarGrid {
            radius,
            radial: gauss_legendre(radial_order, 0.0, radius)?,
            azimuth,
        })
    }

    /// 48 radial points and max(4N, 128) azimuthal samples.
    pub fn for_config(cfg: &CylinderConfig) -> Result<Self> {
        Self::new(cfg.radius, 48, (4 * cfg.modes).max(128))
    }

    pub fn radial_nodes(&self) -> &[f64] {
        self.radial.nodes()
    }

    pub fn azimuth(&self) -> usize {
        self.azimuth
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.azimuth as f64
    }

    /// All nodes with their area weights.
    pub fn nodes(&self) -> Vec<(PolarPoint, f64)> {
        let dphi = 2.0 * PI / self.azimuth as f64;
        let mut out = Vec::with_capacity(self.radial.len() * self.azimuth);
        for (&r, &w) in self.radial.nodes().iter().zip(self.radial.weights()) {
            for j in 0..self.azimuth {
                out.push((PolarPoint { rho: r, phi: self.phi(j) }, w * r * dphi));
            }
        }
        out
    }

    fn check(&self, cfg: &CylinderConfig) -> Result<()> {
        if (self.radius - cfg.radius).abs() > 1e-12 * cfg.radius {
            return Err(Error::Validation(format!(
                "polar grid radius {} differs from cylinder radius {}",
                self.radius, cfg.radius
            )));
        }
        if self.azimuth < 4 * cfg.modes {
            return Err(Error::Validation(format!(
                "polar grid has {} azimuthal samples, fewer than 4N = {}",
                self.azimuth,
                4 * cfg.modes
            )));
        }
        Ok(())
    }
}

/// A_n, B_n and f_n = ∫ J_n(k√ερ′) e^{−inφ′} U₀ d²ρ′ for |n| ≤ N. They solve
/// A_n J_n(qa) − B_n H_n(ka) = (i/4) f_n H_n(qa) and
/// A_n √ε J_n′(qa) − B_n H_n′(ka) = (i/4) √ε f_n H_n′(qa).
#[derive(Clone, Debug, Serialize)]
pub struct ModeCoefficients {
    n_max: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn idx(&self, n: i32) -> usize {
        (n + self.n_max as i32) as usize
    }

    pub fn a(&self, n: i32) -> Complex64 {
        self.a[self.idx(n)]
    }

    pub fn b(&self, n: i32) -> Complex64 {
        self.b[self.idx(n)]
    }

    pub fn f(&self, n: i32) -> Complex64 {
        self.f[self.idx(n)]
    }

    /// Largest residual of the two boundary equations relative to the size
    /// of their terms, over all modes.
    pub fn system_residual(&self, cfg: &CylinderConfig) -> Result<f64> {
        let se = cfg.epsilon.sqrt();
        let ka = CylinderSeq::new(Complex64::new(cfg.k * cfg.radius, 0.0), self.n_max + 1)?;
        let qa = CylinderSeq::new(Complex64::new(cfg.q() * cfg.radius, 0.0), self.n_max + 1)?;
        let mut worst: f64 = 0.0;
        for n in -(self.n_max as i32)..=self.n_max as i32 {
            let (a, b, f) = (self.a(n), self.b(n), self.f(n));
            let t = [a * qa.j(n), b * ka.h1(n), 0.25 * I * f * qa.h1(n)];
            let r1 = (t[0] - t[1] - t[2]).norm() / t.iter().map(|x| x.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
            let u = [
                a * se * qa.j_deriv(n),
                b * ka.h1_deriv(n),
                0.25 * I * se * f * qa.h1_deriv(n),
            ];
            let r2 = (u[0] - u[1] - u[2]).norm() / u.iter().map(|x| x.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
            worst = worst.max(r1).max(r2);
        }
        Ok(worst)
    }
}

/// Angular Fourier coefficients ∫ e^{−inφ} U₀(ρ, φ) dφ for |n| ≤ N.
fn angular_harmonics<F>(source: &F, rho: f64, samples: usize, n_max: usize) -> Vec<Complex64>
where
    F: Fn(PolarPoint) -> Complex64,
{
    let dphi = 2.0 * PI / samples as f64;
    let values: Vec<Complex64> = (0..samples)
        .map(|j| source(PolarPoint { rho, phi: dphi * j as f64 }))
        .collect();
    let n = n_max as i32;
    (-n..=n)
        .map(|m| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(dphi, -(m as f64) * dphi * j as f64))
                .sum()
        })
        .collect()
}

fn sign(n: i32) -> f64 {
    if n < 0 && n % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Mode coefficients of the field scattered from `source` on `grid`.
pub fn mode_coefficients<F>(
    cfg: &CylinderConfig,
    source: &F,
    grid: &PolarGrid,
) -> Result<ModeCoefficients>
where
    F: Fn(PolarPoint) -> Complex64 + Sync,
{
    cfg.validate()?;
    grid.check(cfg)?;
    let n_max = cfg.modes;
    let q = cfg.q();
    let rows: Vec<Vec<Complex64>> = grid
        .radial
        .nodes()
        .par_iter()
        .zip(grid.radial.weights())
        .map(|(&r, &w)| -> Result<Vec<Complex64>> {
            let js = bessel_j_sequence(Complex64::new(q * r, 0.0), n_max)?;
            let harm = angular_harmonics(source, r, grid.azimuth, n_max);
            Ok((-(n_max as i32)..=n_max as i32)
                .zip(harm)
                .map(|(n, u)| js[n.unsigned_abs() as usize] * sign(n) * u * (w * r))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut f = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    for row in &rows {
        for (acc, v) in f.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let table = ModeTable::new(cfg.epsilon, cfg.radius, Complex64::new(cfg.k, 0.0), 0, n_max)?;
    let se = cfg.epsilon.sqrt();
    let ka = CylinderSeq::new(Complex64::new(cfg.k * cfg.radius, 0.0), n_max + 1)?;
    let qa = CylinderSeq::new(Complex64::new(q * cfg.radius, 0.0), n_max + 1)?;
    let mut a = Vec::with_capacity(f.len());
    let mut b = Vec::with_capacity(f.len());
    for (idx, n) in (-(n_max as i32)..=n_max as i32).enumerate() {
        let fn_ = f[idx];
        a.push(0.25 * I * table.value(n).value * fn_);
        // Eliminating A_n with the Wronskian J H′ − J′H = 2i/(πx) gives
        // B_n = √ε f_n / (2π qa D_n), D_n the W_n denominator.
        let d = ka.h1_deriv(n) * qa.j(n) - se * ka.h1(n) * qa.j_deriv(n);
        b.push(se * fn_ / (2.0 * PI * q * cfg.radius * d));
    }
    Ok(ModeCoefficients { n_max, a, b, f })
}

/// Values and radial derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub value: Complex64,
    pub radial_derivative: Complex64,
}

/// Relative mismatch of the inside and outside fields on ρ = a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryResidual {
    pub value: f64,
    pub derivative: f64,
}

/// A source together with its mode coefficients.
pub struct CylinderSolution<'s, F> {
    cfg: CylinderConfig,
    grid: PolarGrid,
    source: &'s F,
    coeffs: ModeCoefficients,
}

impl<'s, F> CylinderSolution<'s, F>
where
    F: Fn(PolarPoint) -> Complex64 + Sync,
{
    pub fn new(cfg: &CylinderConfig, source: &'s F, grid: PolarGrid) -> Result<Self> {
        let coeffs = mode_coefficients(cfg, source, &grid)?;
        Ok(CylinderSolution {
            cfg: *cfg,
            grid,
            source,
            coeffs,
        })
    }

    pub fn coefficients(&self) -> &ModeCoefficients {
        &self.coeffs
    }

    pub fn config(&self) -> &CylinderConfig {
        &self.cfg
    }

    fn harmonic_sum<G>(&self, phi: f64, mut term: G) -> Complex64
    where
        G: FnMut(i32) -> Complex64,
    {
        let n = self.coeffs.n_max as i32;
        (-n..=n)
            .map(|m| term(m) * Complex64::from_polar(1.0, m as f64 * phi))
            .sum()
    }

    /// Ũ from the mode coefficients. Inside, the free-space part is expanded
    /// with the addition theorem, splitting the radial integral at ρ.
    pub fn field(&self, p: &PolarPoint) -> Result<Complex64> {
        let cfg = &self.cfg;
        let n_max = self.coeffs.n_max;
        if p.rho > cfg.radius {
            let h = CylinderSeq::new(Complex64::new(cfg.k * p.rho, 0.0), n_max)?;
            return Ok(cfg.nu() * self.harmonic_sum(p.phi, |n| self.coeffs.b(n) * h.h1(n)));
        }
        let q = cfg.q();
        let order = self.grid.radial.len();
        let mut inner = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
        let mut outer = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
        if p.rho > 0.0 {
            accumulate(&mut inner, self.source, 0.0, p.rho, order, self.grid.azimuth, n_max, |r| {
                Ok(bessel_j_sequence(Complex64::new(q * r, 0.0), n_max)?)
            })?;
        }
        if p.rho < cfg.radius {
            accumulate(&mut outer, self.source, p.rho, cfg.radius, order, self.grid.azimuth, n_max, |r| {
                let s = CylinderSeq::new(Complex64::new(q * r, 0.0), n_max)?;
                Ok((0..=n_max as i32).map(|n| s.h1(n)).collect())
            })?;
        }
        let js = bessel_j_sequence(Complex64::new(q * p.rho, 0.0), n_max)?;
        let hs = if p.rho > 0.0 {
            let s = CylinderSeq::new(Complex64::new(q * p.rho, 0.0), n_max)?;
            (0..=n_max as i32).map(|n| s.h1(n)).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); n_max + 1]
        };
        let idx = |n: i32| (n + n_max as i32) as usize;
        let jn = |n: i32| js[n.unsigned_abs() as usize] * sign(n);
        let hn = |n: i32| hs[n.unsigned_abs() as usize] * sign(n);
        let free = self.harmonic_sum(p.phi, |n| hn(n) * inner[idx(n)] + jn(n) * outer[idx(n)]);
        let modes = self.harmonic_sum(p.phi, |n| self.coeffs.a(n) * jn(n));
        Ok(cfg.nu() * (-0.25 * I * free + modes))
    }

    /// Ũ(p) = ν ∫ Γ(p, p′) U₀(p′) d²p′ with the kernel applied directly: the
    /// free part by a polar rule centred on p, δg on the global grid.
    pub fn field_from_kernel(&self, p: &PolarPoint) -> Result<Complex64> {
        let cfg = &self.cfg;
        if p.rho > cfg.radius {
            return Err(Error::Validation(format!(
                "kernel route needs an interior point, got rho = {}",
                p.rho
            )));
        }
        let free = self.local_free_integral(p)?;
        let correction = self.delta_g_integral(p)?;
        Ok(cfg.nu() * (free + correction))
    }

    fn local_free_integral(&self, p: &PolarPoint) -> Result<Complex64> {
        let cfg = &self.cfg;
        let (px, py) = p.cartesian();
        let q = cfg.q();
        let unit = gauss_legendre(LOCAL_ORDER, 0.0, 1.0)?;
        let max_panel = cfg.radius / 8.0;
        let dalpha = 2.0 * PI / LOCAL_RAYS as f64;
        let parts: Vec<Complex64> = (0..LOCAL_RAYS)
            .into_par_iter()
            .map(|ray| -> Result<Complex64> {
                let alpha = dalpha * ray as f64;
                let (ex, ey) = (alpha.cos(), alpha.sin());
                let pe = px * ex + py * ey;
                let reach = -pe + (pe * pe + cfg.radius * cfg.radius - p.rho * p.rho).max(0.0).sqrt();
                if reach <= 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let mut edges = vec![0.0];
                for level in (1..=LOCAL_GRADING).rev() {
                    edges.push(reach * 0.5f64.powi(level));
                }
                let half = reach * 0.5;
                let pieces = (half / max_panel).ceil().max(1.0) as usize;
                for i in 1..=pieces {
                    edges.push(half + half * i as f64 / pieces as f64);
                }
                let mut s = Complex64::new(0.0, 0.0);
                for pair in edges.windows(2) {
                    let h = pair[1] - pair[0];
                    for (&t, &w) in unit.nodes().iter().zip(unit.weights()) {
                        let r = pair[0] + h * t;
                        let point = PolarPoint::from_cartesian(px + r * ex, py + r * ey);
                        let u = (self.source)(point);
                        if u == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let h0 = CylinderSeq::new(Complex64::new(q * r, 0.0), 0)?.h1(0);
                        s += h0 * u * (r * w * h);
                    }
                }
                Ok(s * dalpha)
            })
            .collect::<Result<_>>()?;
        Ok(-0.25 * I * parts.iter().sum::<Complex64>())
    }

    fn delta_g_integral(&self, p: &PolarPoint) -> Result<Complex64> {
        let cfg = &self.cfg;
        let nodes = self.grid.nodes();
        let sources: Vec<Complex64> = nodes.iter().map(|(pt, _)| (self.source)(*pt)).collect();
        let cap = 4 * cfg.modes + 64;
        let mut n = cfg.modes;
        loop {
            let table = ModeTable::new(cfg.epsilon, cfg.radius, Complex64::new(cfg.k, 0.0), 0, n)?;
            let jp = table.j_row(p.rho)?;
            let radial = self.grid.radial.nodes();
            let rows: Vec<Vec<Complex64>> = radial
                .iter()
                .map(|&r| table.j_row(r))
                .collect::<Result<_>>()?;
            let m = self.grid.azimuth;
            let (sum, tail) = (0..nodes.len())
                .into_par_iter()
                .map(|idx| {
                    let u = sources[idx];
                    if u == Complex64::new(0.0, 0.0) {
                        return (Complex64::new(0.0, 0.0), 0.0);
                    }
                    let (pt, w) = nodes[idx];
                    let jr = &rows[idx / m];
                    let dphi = (p.phi - pt.phi).abs();
                    let (v, tail) = if p.rho <= pt.rho {
                        table.delta_g_rows(&jp, jr, dphi)
                    } else {
                        table.delta_g_rows(jr, &jp, dphi)
                    };
                    (v * u * w, tail)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold((Complex64::new(0.0, 0.0), 0.0f64), |(s, t), (v, tl)| (s + v, t.max(tl)));
            if tail < TAIL_TOL {
                return Ok(sum);
            }
            if n >= cap {
                return Err(Error::Truncation { modes: n, tail });
            }
            n = (n + MODE_STEP).min(cap);
        }
    }

    /// −(i/4)∫H₀(q|p − p′|)U₀ d²p′ and its ρ-derivative on the global grid.
    /// Accurate only where p is well separated from the source support.
    fn free_on_grid(&self, p: &PolarPoint) -> Result<FieldSample> {
        let q = self.cfg.q();
        let (px, py) = p.cartesian();
        let (cx, cy) = (p.phi.cos(), p.phi.sin());
        let parts: Vec<(Complex64, Complex64)> = self
            .grid
            .nodes()
            .into_par_iter()
            .map(|(pt, w)| -> Result<(Complex64, Complex64)> {
                let u = (self.source)(pt);
                if u == Complex64::new(0.0, 0.0) {
                    return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
                }
                let (x, y) = pt.cartesian();
                let (dx, dy) = (px - x, py - y);
                let r = dx.hypot(dy);
                let s = CylinderSeq::new(Complex64::new(q * r, 0.0), 1)?;
                let dr = (dx * cx + dy * cy) / r;
                Ok((s.h1(0) * u * w, -q * s.h1(1) * dr * u * w))
            })
            .collect::<Result<_>>()?;
        let (v, d) = parts
            .iter()
            .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(a, b), (x, y)| (a + x, b + y));
        Ok(FieldSample {
            value: -0.25 * I * v,
            radial_derivative: -0.25 * I * d,
        })
    }

    /// Inside and outside limits of Ũ and ∂Ũ/∂ρ at (a, φ).
    pub fn boundary_limits(&self, phi: f64) -> Result<(FieldSample, FieldSample)> {
        let cfg = &self.cfg;
        let n_max = self.coeffs.n_max;
        let p = PolarPoint { rho: cfg.radius, phi };
        let free = self.free_on_grid(&p)?;
        let qa = CylinderSeq::new(Complex64::new(cfg.q() * cfg.radius, 0.0), n_max + 1)?;
        let ka = CylinderSeq::new(Complex64::new(cfg.k * cfg.radius, 0.0), n_max + 1)?;
        let nu = cfg.nu();
        let inside = FieldSample {
            value: nu * (free.value + self.harmonic_sum(phi, |n| self.coeffs.a(n) * qa.j(n))),
            radial_derivative: nu
                * (free.radial_derivative
                    + cfg.q() * self.harmonic_sum(phi, |n| self.coeffs.a(n) * qa.j_deriv(n))),
        };
        let outside = FieldSample {
            value: nu * self.harmonic_sum(phi, |n| self.coeffs.b(n) * ka.h1(n)),
            radial_derivative: nu * cfg.k * self.harmonic_sum(phi, |n| self.coeffs.b(n) * ka.h1_deriv(n)),
        };
        Ok((inside, outside))
    }

    /// max over `samples` angles of the value and derivative mismatch on
    /// ρ = a, each relative to the largest outside value.
    pub fn boundary_residual(&self, samples: usize) -> Result<BoundaryResidual> {
        let mut dv: f64 = 0.0;
        let mut dd: f64 = 0.0;
        let mut sv: f64 = 0.0;
        let mut sd: f64 = 0.0;
        for j in 0..samples {
            let phi = 2.0 * PI * j as f64 / samples as f64;
            let (inside, outside) = self.boundary_limits(phi)?;
            dv = dv.max((inside.value - outside.value).norm());
            dd = dd.max((inside.radial_derivative - outside.radial_derivative).norm());
            sv = sv.max(outside.value.norm());
            sd = sd.max(outside.radial_derivative.norm());
        }
        Ok(BoundaryResidual {
            value: if sv > 0.0 { dv / sv } else { dv },
            derivative: if sd > 0.0 { dd / sd } else { dd },
        })
    }
}

/// Adds ∫_lo^hi R_n(ρ′) U₀_n(ρ′) ρ′ dρ′ to `acc`, where `radial(ρ′)` returns
/// R_n for 0 ≤ n ≤ N and U₀_n are the angular harmonics of the source.
#[allow(clippy::too_many_arguments)]
fn accumulate<F, R>(
    acc: &mut [Complex64],
    source: &F,
    lo: f64,
    hi: f64,
    order: usize,
    samples: usize,
    n_max: usize,
    radial: R,
) -> Result<()>
where
    F: Fn(PolarPoint) -> Complex64 + Sync,
    R: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    let rule = composite_gauss_legendre(order, &[lo, hi])?;
    let rows: Vec<Vec<Complex64>> = rule
        .nodes()
        .par_iter()
        .zip(rule.weights())
        .map(|(&r, &w)| -> Result<Vec<Complex64>> {
            let rn = radial(r)?;
            let harm = angular_harmonics(source, r, samples, n_max);
            Ok((-(n_max as i32)..=n_max as i32)
                .zip(harm)
                .map(|(n, u)| rn[n.unsigned_abs() as usize] * sign(n) * u * (w * r))
                .collect())
        })
        .collect::<Result<_>>()?;
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(())
}

/// Boundary mismatch of the field scattered from `source`, sampled at
/// 16 angles on ρ = a.
pub fn boundary_continuity_residual<F>(
    cfg: &CylinderConfig,
    source: &F,
    grid: PolarGrid,
) -> Result<BoundaryResidual>
where
    F: Fn(PolarPoint) -> Complex64 + Sync,
{
    CylinderSolution::new(cfg, source, grid)?.boundary_residual(16)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(p: PolarPoint) -> Complex64 {
        let (x, y) = p.cartesian();
        let (cx, cy) = (0.45 * 0.5f64.cos(), 0.45 * 0.5f64.sin());
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        Complex64::new((-r2 / (2.0 * 0.08 * 0.08)).exp(), 0.0)
    }

    #[test]
    fn coefficients_solve_boundary_system() {
        let cfg = CylinderConfig::new(2.25, 1.0, 2.0, Some(24)).unwrap();
        let grid = PolarGrid::for_config(&cfg).unwrap();
        let c = mode_coefficients(&cfg, &gaussian, &grid).unwrap();
        assert!(c.system_residual(&cfg).unwrap() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let cfg = CylinderConfig::new(2.25, 1.0, 2.0, Some(24)).unwrap();
        let grid = PolarGrid::new(1.0, 16, 32).unwrap();
        assert!(matches!(mode_coefficients(&cfg, &gaussian, &grid), Err(Error::Validation(_))));
    }
}
