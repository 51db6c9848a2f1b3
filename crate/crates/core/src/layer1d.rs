//! Planar dielectric layer 0 ≤ x ≤ l of permittivity ε in vacuum: closed-form
//! resolvent, its poles, and the damped commutator-tail integral.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_f64, write_lines};
use crate::specfun::gauss_legendre;

const I: Complex64 = Complex64::new(0.0, 1.0);
/// Guard on |1 − r²e^{2ik√εl}| below which the layer is at a resonance.
pub const RESONANCE_GUARD: f64 = 1e-12;

/// Geometry and frequency of the layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub epsilon: f64,
    pub length: f64,
    pub k: f64,
}

impl LayerConfig {
    pub fn new(epsilon: f64, length: f64, k: f64) -> Result<Self> {
        let cfg = LayerConfig { epsilon, length, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 1.0) {
            return Err(Error::Validation(format!(
                "layer permittivity must satisfy epsilon >= 1, got {}",
                self.epsilon
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Validation(format!(
                "layer length must be positive, got {}",
                self.length
            )));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::Validation(format!(
                "wavenumber must be positive, got {}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn sqrt_eps(&self) -> f64 {
        self.epsilon.sqrt()
    }

    /// ν = −k²(ε − 1).
    pub fn nu(&self) -> f64 {
        -self.k * self.k * (self.epsilon - 1.0)
    }

    /// Φ = kl.
    pub fn phi(&self) -> f64 {
        self.k * self.length
    }

    /// Φ_ε = k√ε l.
    pub fn phi_eps(&self) -> f64 {
        self.k * self.sqrt_eps() * self.length
    }

    /// Normal-incidence Fresnel coefficient r = (1 − √ε)/(1 + √ε).
    pub fn fresnel_r(&self) -> f64 {
        (1.0 - self.sqrt_eps()) / (1.0 + self.sqrt_eps())
    }
}

/// Free kernel g(x, x′) = e^{ik|x−x′|}/(2ik).
pub fn green_free_1d(x: f64, xp: f64, k: f64) -> Complex64 {
    (I * k * (x - xp).abs()).exp() / (2.0 * I * k)
}

/// Interior amplitudes A, B and exterior amplitudes C (x > l), D (x < 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

/// Solves the four interface conditions for the given projections
/// f± = ν/(2ik) ∫ e^{±ik√εx′} U₀(x′) dx′ at the configured real k.
pub fn boundary_solve(
    cfg: &LayerConfig,
    f_plus: Complex64,
    f_minus: Complex64,
) -> Result<BoundaryCoefficients> {
    cfg.validate()?;
    boundary_solve_at(cfg, Complex64::new(cfg.k, 0.0), f_plus, f_minus)
}

/// As [`boundary_solve`] at a complex wavenumber, where the slab can resonate.
pub fn boundary_solve_at(
    cfg: &LayerConfig,
    k: Complex64,
    f_plus: Complex64,
    f_minus: Complex64,
) -> Result<BoundaryCoefficients> {
    let se = cfg.sqrt_eps();
    let r = cfg.fresnel_r();
    let e2 = (2.0 * I * k * se * cfg.length).exp();
    let denom = 1.0 - r * r * e2;
    if denom.norm() < RESONANCE_GUARD {
        return Err(Error::Resonance(format!(
            "|1 - r^2 e^(2ik sqrt(eps) l)| = {:.3e} at k = {k}",
            denom.norm()
        )));
    }
    let xi = r * e2 / denom;
    let a = -xi / se * (f_plus / e2 - r * f_minus);
    let b = xi / se * (r * f_plus - f_minus);
    let ephi_eps = (I * k * se * cfg.length).exp();
    let ephi = (I * k * cfg.length).exp();
    let d = a + b + f_plus / se;
    let c = (a * ephi_eps + b / ephi_eps + ephi_eps * f_minus / se) / ephi;
    Ok(BoundaryCoefficients { a, b, c, d })
}

/// The closed-form resolvent kernel at the configured wavenumber.
pub fn layer_resolvent_kernel(cfg: &LayerConfig, x: f64, xp: f64) -> Result<Complex64> {
    cfg.validate()?;
    check_inside(cfg, x)?;
    check_inside(cfg, xp)?;
    Ok(resolvent_at(cfg, x, xp, Complex64::new(cfg.k, 0.0)))
}

/// Closed-form resolvent at any wavenumber k ≠ 0 off the poles:
/// e^{ik√ε|x−x′|}/(2ik√ε) plus the four reflection terms.
pub fn resolvent_at(cfg: &LayerConfig, x: f64, xp: f64, k: Complex64) -> Complex64 {
    let q = k * cfg.sqrt_eps();
    (I * q * (x - xp).abs()).exp() / (2.0 * I * q) + reflected_at(cfg, x, xp, k)
}

/// The reflection part δΓ = Γ − e^{ik√ε|x−x′|}/(2ik√ε); every term carries r.
pub fn reflected_at(cfg: &LayerConfig, x: f64, xp: f64, k: Complex64) -> Complex64 {
    let q = k * cfg.sqrt_eps();
    let l = cfg.length;
    let r = cfg.fresnel_r();
    let pre = 1.0 / (2.0 * I * q * (1.0 - r * r * (2.0 * I * q * l).exp()));
    pre * (-r * (I * q * (x + xp)).exp()
        + r * r * (I * q * (x - xp + 2.0 * l)).exp()
        + r * r * (-I * q * (x - xp - 2.0 * l)).exp()
        - r * (-I * q * (x + xp - 2.0 * l)).exp())
}

fn check_inside(cfg: &LayerConfig, x: f64) -> Result<()> {
    if (0.0..=cfg.length).contains(&x) {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "point {x} outside the layer [0, {}]",
            cfg.length
        )))
    }
}

/// One root of r²e^{2ik√εl} = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub n: i64,
    pub k: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    /// JSON array of {n, re_k, im_k, residual}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.poles
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "n": p.n,
                        "re_k": p.k.re,
                        "im_k": p.k.im,
                        "residual": p.residual,
                    })
                })
                .collect(),
        )
    }
}

/// Poles k_n for n_min ≤ n ≤ n_max, seeded at nπ/(√εl) + i ln|r|/(√εl)
/// and polished by Newton's method.
pub fn layer_poles(cfg: &LayerConfig, n_min: i64, n_max: i64) -> Result<PoleSet> {
    cfg.validate()?;
    if n_min > n_max {
        return Err(Error::Validation(format!("empty pole range {n_min}..={n_max}")));
    }
    let r = cfg.fresnel_r();
    if r == 0.0 {
        return Err(Error::Validation("no poles without contrast (epsilon = 1)".into()));
    }
    let s = cfg.sqrt_eps() * cfg.length;
    let r2 = r * r;
    let f = |k: Complex64| r2 * (2.0 * I * k * s).exp() - 1.0;
    let mut poles = Vec::new();
    for n in n_min..=n_max {
        let mut k = Complex64::new(n as f64 * std::f64::consts::PI / s, r.abs().ln() / s);
        let mut converged = false;
        for _ in 0..50 {
            let fk = f(k);
            if fk.norm() < 1e-14 {
                converged = true;
                break;
            }
            let dk = fk / (2.0 * I * s * r2 * (2.0 * I * k * s).exp());
            k -= dk;
            if dk.norm() <= 1e-16 * k.norm().max(1.0) {
                converged = f(k).norm() < 1e-12;
                break;
            }
        }
        let residual = f(k).norm();
        if !converged && residual >= 1e-12 {
            return Err(Error::Convergence(format!(
                "Newton iteration for pole {n} stalled at residual {residual:.3e}"
            )));
        }
        poles.push(Pole { n, k, residual });
    }
    Ok(PoleSet { poles })
}

/// A damped k-integral together with the free-kernel scale it is judged against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampedIntegral {
    pub eta: f64,
    pub cutoff: f64,
    pub value: Complex64,
    pub reference: f64,
    /// |value at the base rule − value at the refined rule|.
    pub error_estimate: f64,
}

impl DampedIntegral {
    pub fn ratio(&self) -> f64 {
        self.value.norm() / self.reference
    }
}

/// Panel width (in k) and orders of the composite rules used for k-integrals.
const K_PANEL: f64 = 1.0;
const K_ORDER: usize = 16;
const K_ORDER_CHECK: usize = 24;

/// ∫_{−K}^{K} δΓ(x, x′; k) k e^{−η|k|} dk, folded onto [0, K] with
/// δΓ(−k) = δΓ*(k) into 2i ∫_0^K k Im δΓ e^{−ηk} dk. The reference scale is
/// ∫_0^K |g(x, x′; k) k| e^{−ηk} dk = (1 − e^{−ηK})/(2η).
pub fn layer_noise_integral(
    cfg: &LayerConfig,
    x: f64,
    xp: f64,
    cutoff: f64,
    eta: f64,
) -> Result<DampedIntegral> {
    cfg.validate()?;
    check_inside(cfg, x)?;
    check_inside(cfg, xp)?;
    if !(cutoff > 0.0 && eta > 0.0 && cutoff.is_finite() && eta.is_finite()) {
        return Err(Error::Validation(format!(
            "cutoff and damping must be positive, got K = {cutoff}, eta = {eta}"
        )));
    }
    let reference = -(-eta * cutoff).exp_m1() / (2.0 * eta);
    if cfg.epsilon == 1.0 {
        return Ok(DampedIntegral {
            eta,
            cutoff,
            value: Complex64::new(0.0, 0.0),
            reference,
            error_estimate: 0.0,
        });
    }
    let f = |k: f64| {
        if k == 0.0 {
            return 0.0;
        }
        k * reflected_at(cfg, x, xp, Complex64::new(k, 0.0)).im * (-eta * k).exp()
    };
    let base = panel_integral(&f, cutoff, K_ORDER)?;
    let fine = panel_integral(&f, cutoff, K_ORDER_CHECK)?;
    let value = Complex64::new(0.0, 2.0 * fine);
    let error_estimate = 2.0 * (fine - base).abs();
    if error_estimate > 0.1 * value.norm() && error_estimate > 1e-14 * reference {
        return Err(Error::Convergence(format!(
            "damped integral error estimate {error_estimate:.3e} exceeds 10% of |value| = {:.3e}",
            value.norm()
        )));
    }
    Ok(DampedIntegral {
        eta,
        cutoff,
        value,
        reference,
        error_estimate,
    })
}

/// Composite Gauss–Legendre over [0, K] with unit-width panels; panels are
/// summed in order so the result does not depend on the thread count.
pub(crate) fn panel_integral<F>(f: &F, cutoff: f64, order: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let panels = (cutoff / K_PANEL).ceil().max(1.0) as usize;
    let rule = gauss_legendre(order, 0.0, 1.0)?;
    let h = cutoff / panels as f64;
    let parts: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let lo = p as f64 * h;
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&t, &w)| f(lo + t * h) * w * h)
                .sum()
        })
        .collect();
    Ok(parts.iter().sum())
}

/// Scattered field Ũ of an incident field U₀ confined to the layer.
#[derive(Clone, Debug)]
pub struct LayerField {
    cfg: LayerConfig,
    coeffs: BoundaryCoefficients,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

/// Builds Ũ for the incident field `source` on [0, l]; integrals use
/// `order`-point Gauss–Legendre panels split at the evaluation point.
pub fn scattered_field<F>(cfg: &LayerConfig, source: F, order: usize) -> Result<LayerField>
where
    F: Fn(f64) -> Complex64,
{
    cfg.validate()?;
    let grid = gauss_legendre(order, 0.0, cfg.length)?;
    let values: Vec<Complex64> = grid.nodes().iter().map(|&x| source(x)).collect();
    let field = LayerField {
        cfg: *cfg,
        coeffs: BoundaryCoefficients {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(0.0, 0.0),
        },
        nodes: grid.nodes().to_vec(),
        weights: grid.weights().to_vec(),
        values,
    };
    let q = cfg.k * cfg.sqrt_eps();
    let pre = cfg.nu() / (2.0 * I * cfg.k);
    let f_plus = pre * field.integrate(0.0, cfg.length, |t| (I * q * t).exp());
    let f_minus = pre * field.integrate(0.0, cfg.length, |t| (-I * q * t).exp());
    let coeffs = boundary_solve(cfg, f_plus, f_minus)?;
    Ok(LayerField { coeffs, ..field })
}

impl LayerField {
    pub fn coefficients(&self) -> &BoundaryCoefficients {
        &self.coeffs
    }

    /// ∫_lo^hi U₀(t) h(t) dt with U₀ interpolated from the nodes on a rule
    /// matched to the subinterval.
    fn integrate<H: Fn(f64) -> Complex64>(&self, lo: f64, hi: f64, h: H) -> Complex64 {
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        if lo == 0.0 && hi == self.cfg.length {
            return self
                .nodes
                .iter()
                .zip(&self.weights)
                .zip(&self.values)
                .map(|((&t, &w), &u)| u * h(t) * w)
                .sum();
        }
        let sub = gauss_legendre(self.nodes.len(), lo, hi).expect("nonempty interval");
        sub.integrate(|t| self.interpolate(t) * h(t))
    }

    /// Barycentric interpolation of U₀ through the Gauss–Legendre nodes.
    fn interpolate(&self, t: f64) -> Complex64 {
        let l = self.cfg.length;
        let half = 0.5 * l;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, ((&x, &w), &u)) in self.nodes.iter().zip(&self.weights).zip(&self.values).enumerate() {
            if x == t {
                return u;
            }
            let s = x / half - 1.0;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let b = sign * ((1.0 - s * s) * w / half).sqrt() / (t - x);
            num += b * u;
            den += b;
        }
        num / den
    }

    /// Ũ(x) anywhere on the line.
    pub fn value(&self, x: f64) -> Complex64 {
        let k = self.cfg.k;
        let l = self.cfg.length;
        if x < 0.0 {
            return self.coeffs.d * (-I * k * x).exp();
        }
        if x > l {
            return self.coeffs.c * (I * k * x).exp();
        }
        let q = k * self.cfg.sqrt_eps();
        let (left, right) = self.split(x);
        self.cfg.nu() / (2.0 * I * q) * (left + right)
            + self.coeffs.a * (I * q * x).exp()
            + self.coeffs.b * (-I * q * x).exp()
    }

    /// dŨ/dx anywhere on the line.
    pub fn derivative(&self, x: f64) -> Complex64 {
        let k = self.cfg.k;
        let l = self.cfg.length;
        if x < 0.0 {
            return -I * k * self.coeffs.d * (-I * k * x).exp();
        }
        if x > l {
            return I * k * self.coeffs.c * (I * k * x).exp();
        }
        let q = k * self.cfg.sqrt_eps();
        let (left, right) = self.split(x);
        self.cfg.nu() / 2.0 * (left - right)
            + I * q * (self.coeffs.a * (I * q * x).exp() - self.coeffs.b * (-I * q * x).exp())
    }

    /// ∫_0^x e^{iq(x−t)}U₀ and ∫_x^l e^{iq(t−x)}U₀.
    fn split(&self, x: f64) -> (Complex64, Complex64) {
        let q = self.cfg.k * self.cfg.sqrt_eps();
        let left = self.integrate(0.0, x, |t| (I * q * (x - t)).exp());
        let right = self.integrate(x, self.cfg.length, |t| (I * q * (t - x)).exp());
        (left, right)
    }

    /// Largest jump of Ũ or dŨ/dx across the two interfaces.
    pub fn continuity_residual(&self) -> f64 {
        let k = self.cfg.k;
        let l = self.cfg.length;
        let c = &self.coeffs;
        let outside = [
            (0.0, c.d, -I * k * c.d),
            (l, c.c * (I * k * l).exp(), I * k * c.c * (I * k * l).exp()),
        ];
        outside
            .iter()
            .map(|&(x, v, dv)| {
                (self.value(x) - v).norm().max((self.derivative(x) - dv).norm() / k)
            })
            .fold(0.0, f64::max)
    }
}

/// max_ij |Γ_N(x_i, x_j) − Γ(x_i, x_j)| / |Γ(x_i, x_j)| between the
/// product-integration Nyström resolvent of order N and the closed form.
pub fn nystrom_relative_error(cfg: &LayerConfig, order: usize) -> Result<f64> {
    cfg.validate()?;
    let k = cfg.k;
    let res = crate::fredholm::product_nystrom_resolvent(
        |x, y| green_free_1d(x, y, k),
        0.0,
        cfg.length,
        order,
        k,
        Complex64::new(cfg.nu(), 0.0),
    )?;
    let x = res.kernel().grid().nodes().to_vec();
    let mut worst: f64 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            let exact = layer_resolvent_kernel(cfg, xi, xj)?;
            worst = worst.max((res.get(i, j) - exact).norm() / exact.norm());
        }
    }
    Ok(worst)
}

/// Kernel dump `x,xp,re,im` of the closed-form resolvent on the given points.
pub fn write_kernel_csv<W: Write>(cfg: &LayerConfig, points: &[f64], out: W) -> Result<()> {
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &x in points {
        for &xp in points {
            let v = layer_resolvent_kernel(cfg, x, xp)?;
            rows.push(format!(
                "{},{},{},{}",
                csv_f64(x),
                csv_f64(xp),
                csv_f64(v.re),
                csv_f64(v.im)
            ));
        }
    }
    write_lines(out, "x,xp,re,im", rows).map_err(|e| Error::Validation(format!("write failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::Solve;
    use faer::Mat;

    fn cfg() -> LayerConfig {
        LayerConfig::new(2.25, 1.0, 2.0).unwrap()
    }

    #[test]
    fn free_kernel_basics() {
        let k = 1.7;
        assert_eq!(green_free_1d(0.3, 0.3, k), 1.0 / (2.0 * I * k));
        assert_eq!(green_free_1d(0.1, 0.8, k), green_free_1d(0.8, 0.1, k));
        let h = 1e-4;
        let (x, xp) = (0.7, 0.2);
        let d2 = (green_free_1d(x + h, xp, k) - 2.0 * green_free_1d(x, xp, k)
            + green_free_1d(x - h, xp, k))
            / (h * h);
        assert!((d2 + k * k * green_free_1d(x, xp, k)).norm() < 1e-6);
    }

    #[test]
    fn no_contrast_means_no_reflection() {
        let c = LayerConfig::new(1.0, 1.0, 2.0).unwrap();
        let bc = boundary_solve(&c, Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)).unwrap();
        assert_eq!(bc.a, Complex64::new(0.0, 0.0));
        assert_eq!(bc.b, Complex64::new(0.0, 0.0));
        let g = layer_resolvent_kernel(&c, 0.2, 0.9).unwrap();
        assert!((g - green_free_1d(0.2, 0.9, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_dense_solve() {
        let c = cfg();
        let (fp, fm) = (Complex64::new(0.7, -0.3), Complex64::new(-0.4, 1.1));
        let bc = boundary_solve(&c, fp, fm).unwrap();
        let se = c.sqrt_eps();
        let ee = (I * c.phi_eps()).exp();
        let e = (I * c.phi()).exp();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let rows = [
            [one, one, zero, -one],
            [se * one, -se * one, zero, one],
            [ee, 1.0 / ee, -e, zero],
            [se * ee, -se / ee, -e, zero],
        ];
        let m = Mat::from_fn(4, 4, |i, j| rows[i][j]);
        let rhs_v = [-fp / se, fp, -ee * fm / se, -ee * fm];
        let rhs = Mat::from_fn(4, 1, |i, _| rhs_v[i]);
        let sol = m.partial_piv_lu().solve(&rhs);
        // unknowns ordered A, B, C, D
        for (got, want) in [bc.a, bc.b, bc.c, bc.d].iter().zip(0..4) {
            assert!((got - sol[(want, 0)]).norm() < 1e-12);
        }
        // B = ξ r f₊ / √ε when f₋ = 0
        let bc0 = boundary_solve(&c, fp, zero).unwrap();
        let r = c.fresnel_r();
        let e2 = ee * ee;
        let xi = r * e2 / (1.0 - r * r * e2);
        assert!((bc0.b - xi * r * fp / se).norm() < 1e-15);
    }

    #[test]
    fn resonance_at_complex_pole() {
        let c = cfg();
        let poles = layer_poles(&c, 1, 1).unwrap();
        let r = boundary_solve_at(&c, poles.poles[0].k, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(matches!(r, Err(Error::Resonance(_))));
    }

    #[test]
    fn conjugation_symmetry() {
        let c = cfg();
        let (x, xp) = (0.3, 0.7);
        let plus = resolvent_at(&c, x, xp, Complex64::new(2.0, 0.0));
        let minus = resolvent_at(&c, x, xp, Complex64::new(-2.0, 0.0));
        assert!((minus - plus.conj()).norm() < 1e-12);
        assert_eq!(
            layer_resolvent_kernel(&c, x, xp).unwrap(),
            layer_resolvent_kernel(&c, xp, x).unwrap()
        );
    }

    #[test]
    fn poles_for_quarter_contrast() {
        let c = LayerConfig::new(4.0, 1.0, 1.0).unwrap();
        let set = layer_poles(&c, -10, 10).unwrap();
        assert_eq!(set.poles.len(), 21);
        for p in &set.poles {
            assert!(p.residual < 1e-12);
            assert!(p.k.im < 0.0);
            assert!((p.k.im - (1.0f64 / 3.0).ln() / 2.0).abs() < 1e-10);
        }
        assert!(layer_poles(&LayerConfig::new(1.0, 1.0, 1.0).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn noise_integral_vanishes_without_contrast() {
        let c = LayerConfig::new(1.0, 1.0, 2.0).unwrap();
        let v = layer_noise_integral(&c, 0.4, 0.6, 200.0, 0.2).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let f = scattered_field(&cfg(), |_| Complex64::new(0.0, 0.0), 32).unwrap();
        for x in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            assert_eq!(f.value(x), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn field_is_continuous_and_solves_helmholtz() {
        let c = cfg();
        let src = |x: f64| Complex64::new((-(x - 0.5f64).powi(2) / (2.0 * 0.05f64.powi(2))).exp(), 0.0);
        let f = scattered_field(&c, src, 96).unwrap();
        assert!(f.continuity_residual() < 1e-8, "{}", f.continuity_residual());
        let q2 = c.k * c.k * c.epsilon;
        let h = 1e-3;
        for x in [0.15, 0.3, 0.8] {
            let d2 = (f.value(x + h) - 2.0 * f.value(x) + f.value(x - h)) / (h * h);
            let res = d2 + q2 * f.value(x) - c.nu() * src(x);
            assert!(res.norm() < 1e-5, "x={x} res={}", res.norm());
        }
        // Outside, an outgoing wave of constant modulus.
        assert!((f.value(3.0).norm() - f.value(1.5).norm()).abs() < 1e-12);
    }
}
