//! Circular dielectric cylinder ρ ≤ a of permittivity ε in vacuum (scalar,
//! longitudinal field): W_n, the resolvent correction δg, mode coefficients
//! of the scattered field, and the damped commutator-tail integral.

mod field;
mod noise;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_f64, write_lines};
use crate::specfun::{bessel_j, bessel_j_sequence, hankel1, CylinderSeq};

pub use field::{
    boundary_continuity_residual, mode_coefficients, CylinderSolution, ModeCoefficients,
    PolarGrid,
};
pub use noise::{cylinder_noise_integral, CylinderNoise};

const I: Complex64 = Complex64::new(0.0, 1.0);
/// Relative size of the W_n denominator below which the cylinder resonates.
pub const RESONANCE_GUARD: f64 = 1e-12;
/// Relative size of the last two mode terms accepted as converged.
pub const TAIL_TOL: f64 = 1e-10;
/// Modes added per retry when a mode sum has not converged.
pub const MODE_STEP: usize = 8;
/// Points closer than this fraction of the radius count as coincident.
pub const COINCIDENCE_GUARD: f64 = 1e-6;

/// Geometry, frequency and mode cutoff N (sums run over |n| ≤ N).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderConfig {
    pub epsilon: f64,
    pub radius: f64,
    pub k: f64,
    pub modes: usize,
}

impl CylinderConfig {
    /// `modes = None` picks the smallest admissible cutoff ⌈k√ε a⌉ + 8.
    pub fn new(epsilon: f64, radius: f64, k: f64, modes: Option<usize>) -> Result<Self> {
        let mut cfg = CylinderConfig {
            epsilon,
            radius,
            k,
            modes: 0,
        };
        cfg.check_physical()?;
        cfg.modes = modes.unwrap_or_else(|| cfg.min_modes());
        cfg.validate()?;
        Ok(cfg)
    }

    fn check_physical(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 1.0) {
            return Err(Error::Validation(format!(
                "cylinder permittivity must satisfy epsilon >= 1, got {}",
                self.epsilon
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Validation(format!(
                "cylinder radius must be positive, got {}",
                self.radius
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

    pub fn validate(&self) -> Result<()> {
        self.check_physical()?;
        if self.modes < self.min_modes() {
            return Err(Error::Validation(format!(
                "mode cutoff {} is below ceil(k sqrt(eps) a) + 8 = {}",
                self.modes,
                self.min_modes()
            )));
        }
        Ok(())
    }

    pub fn min_modes(&self) -> usize {
        (self.q() * self.radius).ceil() as usize + 8
    }

    /// Interior wavenumber k√ε.
    pub fn q(&self) -> f64 {
        self.k * self.epsilon.sqrt()
    }

    /// ν = −k²(ε − 1).
    pub fn nu(&self) -> f64 {
        -self.k * self.k * (self.epsilon - 1.0)
    }
}

/// A point (ρ, φ) of the cross-section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub rho: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(rho: f64, phi: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0 && phi.is_finite()) {
            return Err(Error::Validation(format!(
                "polar point needs finite rho >= 0 and finite phi, got ({rho}, {phi})"
            )));
        }
        Ok(PolarPoint { rho, phi })
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        PolarPoint {
            rho: x.hypot(y),
            phi: y.atan2(x),
        }
    }

    pub fn cartesian(&self) -> (f64, f64) {
        (self.rho * self.phi.cos(), self.rho * self.phi.sin())
    }

    pub fn distance(&self, other: &PolarPoint) -> f64 {
        let (x1, y1) = self.cartesian();
        let (x2, y2) = other.cartesian();
        (x1 - x2).hypot(y1 - y2)
    }
}

/// Free kernel −(i/4) H₀⁽¹⁾(k|p − p′|).
pub fn green_free_2d(p: &PolarPoint, pp: &PolarPoint, k: f64) -> Result<Complex64> {
    let r = p.distance(pp);
    if r == 0.0 {
        return Err(Error::Singularity("free kernel at coincident points".into()));
    }
    Ok(-0.25 * I * hankel1(0, Complex64::new(k * r, 0.0))?)
}

/// W_n with the magnitude of its denominator
/// H_n⁽¹⁾′(ka) J_n(k√εa) − √ε H_n⁽¹⁾(ka) J_n′(k√εa).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WnValue {
    pub n: i32,
    pub value: Complex64,
    pub denominator_magnitude: f64,
}

/// W_n(k) at the configured real k.
pub fn wn(n: i32, cfg: &CylinderConfig) -> Result<Complex64> {
    Ok(wn_value(n, cfg)?.value)
}

pub fn wn_value(n: i32, cfg: &CylinderConfig) -> Result<WnValue> {
    cfg.validate()?;
    let table = ModeTable::new(
        cfg.epsilon,
        cfg.radius,
        Complex64::new(cfg.k, 0.0),
        0,
        n.unsigned_abs() as usize,
    )?;
    Ok(table.value(n))
}

/// W_n at the point k·e^{iπ·turns} of the Riemann surface, with k given on the
/// principal sheet. Arguments ka and k√εa are continued together.
pub fn wn_at(n: i32, epsilon: f64, radius: f64, k: Complex64, turns: i32) -> Result<Complex64> {
    let table = ModeTable::new(epsilon, radius, k, turns, n.unsigned_abs() as usize)?;
    Ok(table.value(n).value)
}

/// JSON array of {n, re, im, denominator_magnitude} for −N ≤ n ≤ N.
pub fn wn_table_json(cfg: &CylinderConfig) -> Result<serde_json::Value> {
    cfg.validate()?;
    let table = ModeTable::new(cfg.epsilon, cfg.radius, Complex64::new(cfg.k, 0.0), 0, cfg.modes)?;
    let n_max = cfg.modes as i32;
    Ok(serde_json::Value::Array(
        (-n_max..=n_max)
            .map(|n| {
                let v = table.value(n);
                serde_json::json!({
                    "n": n,
                    "re": v.value.re,
                    "im": v.value.im,
                    "denominator_magnitude": v.denominator_magnitude,
                })
            })
            .collect(),
    ))
}

/// Per-mode pieces of W_n in overflow-safe form. With s₁ = 1/|H_n(ka)| and
/// s₂ = 1/|H_n(qa)|, num = s₁s₂·(numerator), den = s₁·(denominator), so
/// W_n = num/(den·s₂) and products with J_n(qρ)J_n(qρ′) stay finite.
pub(crate) struct ModeTable {
    turns: i32,
    q: Complex64,
    zero: bool,
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    hq_abs: Vec<f64>,
    den_abs: Vec<f64>,
}

impl ModeTable {
    pub(crate) fn new(
        epsilon: f64,
        radius: f64,
        k: Complex64,
        turns: i32,
        n_max: usize,
    ) -> Result<Self> {
        let ka = CylinderSeq::new(k * radius, n_max + 1)?;
        let qa = CylinderSeq::new(k * epsilon.sqrt() * radius, n_max + 1)?;
        Self::from_seqs(epsilon, k, turns, &ka.on_sheet(turns), &qa.on_sheet(turns), n_max)
    }

    /// Table from sequences at ka and k√εa already continued to `turns`.
    pub(crate) fn from_seqs(
        epsilon: f64,
        k: Complex64,
        turns: i32,
        ka: &CylinderSeq,
        qa: &CylinderSeq,
        n_max: usize,
    ) -> Result<Self> {
        let se = epsilon.sqrt();
        let q = k * se;
        let zero = epsilon == 1.0;
        let mut table = ModeTable {
            turns,
            q,
            zero,
            num: Vec::with_capacity(n_max + 1),
            den: Vec::with_capacity(n_max + 1),
            hq_abs: Vec::with_capacity(n_max + 1),
            den_abs: Vec::with_capacity(n_max + 1),
        };
        for n in 0..=n_max as i32 {
            let hk = ka.h1(n);
            let s1 = 1.0 / hk.norm();
            let hkd = ka.h1_deriv(n) * s1;
            let hk = hk * s1;
            let hq = qa.h1(n);
            let s2 = 1.0 / hq.norm();
            let num = hkd * (hq * s2) - se * hk * (qa.h1_deriv(n) * s2);
            let (jq, jqd) = (qa.j(n), qa.j_deriv(n));
            let den = hkd * jq - se * hk * jqd;
            let size = (hkd * jq).norm() + se * (hk * jqd).norm();
            if !zero && den.norm() < RESONANCE_GUARD * size {
                return Err(Error::Resonance(format!(
                    "W_{n} denominator vanishes at k = {k} (relative size {:.3e})",
                    den.norm() / size
                )));
            }
            if !(num.re.is_finite() && num.im.is_finite() && den.norm().is_finite()) {
                return Err(Error::Overflow(format!("W_{n} at k = {k}")));
            }
            table.num.push(num);
            table.den.push(den);
            table.hq_abs.push(1.0 / s2);
            table.den_abs.push(den.norm() / s1);
        }
        Ok(table)
    }

    pub(crate) fn n_max(&self) -> usize {
        self.num.len() - 1
    }

    pub(crate) fn value(&self, n: i32) -> WnValue {
        let m = n.unsigned_abs() as usize;
        let value = if self.zero {
            Complex64::new(0.0, 0.0)
        } else {
            // W_{−n} = W_n: the factors (−1)^n cancel between the two rows.
            self.num[m] / self.den[m] * self.hq_abs[m]
        };
        WnValue {
            n,
            value,
            denominator_magnitude: self.den_abs[m],
        }
    }

    /// W_m J_m(qρ_small) J_m(qρ_large) without forming W_m.
    fn term(&self, m: usize, j_small: Complex64, j_large: Complex64) -> Complex64 {
        if self.zero {
            return Complex64::new(0.0, 0.0);
        }
        self.num[m] * (j_large / self.den[m]) * (j_small * self.hq_abs[m])
    }

    /// J_n(qρ e^{iπ·turns}) for 0 ≤ n ≤ n_max.
    pub(crate) fn j_row(&self, rho: f64) -> Result<Vec<Complex64>> {
        let mut v = bessel_j_sequence(self.q * rho, self.n_max())?;
        if self.turns.rem_euclid(2) == 1 {
            v.iter_mut().skip(1).step_by(2).for_each(|x| *x = -*x);
        }
        Ok(v)
    }

    /// (i/4) Σ_{|n|≤N} W_n J_n(qρ)J_n(qρ′) e^{in(φ−φ′)} with n and −n paired.
    /// Returns the sum and the relative size of the last two retained modes.
    pub(crate) fn delta_g(&self, p: &PolarPoint, pp: &PolarPoint) -> Result<(Complex64, f64)> {
        let (small, large) = if p.rho <= pp.rho { (p, pp) } else { (pp, p) };
        let js = self.j_row(small.rho)?;
        let jl = self.j_row(large.rho)?;
        Ok(self.delta_g_rows(&js, &jl, (p.phi - pp.phi).abs()))
    }

    pub(crate) fn delta_g_rows(&self, js: &[Complex64], jl: &[Complex64], dphi: f64) -> (Complex64, f64) {
        let n_max = self.n_max();
        let mut sum = self.term(0, js[0], jl[0]);
        let mut total = sum.norm();
        let mut last = [0.0f64; 2];
        for m in 1..=n_max {
            let t = self.term(m, js[m], jl[m]) * (2.0 * (m as f64 * dphi).cos());
            sum += t;
            total += t.norm();
            last = [last[1], t.norm()];
        }
        let tail = if total > 0.0 { (last[0] + last[1]) / total } else { 0.0 };
        (0.25 * I * sum, tail)
    }
}

/// δg with automatic mode raising: starts at `n_start` and adds
/// [`MODE_STEP`] modes until the tail test passes or `n_cap` is reached.
pub(crate) fn delta_g_converged(
    epsilon: f64,
    radius: f64,
    k: Complex64,
    turns: i32,
    p: &PolarPoint,
    pp: &PolarPoint,
    n_start: usize,
    n_cap: usize,
) -> Result<Complex64> {
    let mut n = n_start;
    loop {
        let table = ModeTable::new(epsilon, radius, k, turns, n)?;
        let (v, tail) = table.delta_g(p, pp)?;
        if tail < TAIL_TOL {
            return Ok(v);
        }
        if n >= n_cap {
            return Err(Error::Truncation { modes: n, tail });
        }
        n = (n + MODE_STEP).min(n_cap);
    }
}

fn check_inside(cfg: &CylinderConfig, p: &PolarPoint) -> Result<()> {
    if p.rho <= cfg.radius {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "point at rho = {} lies outside the cylinder of radius {}",
            p.rho, cfg.radius
        )))
    }
}

fn mode_cap(n: usize) -> usize {
    4 * n + 64
}

/// δg(p, p′) at the configured k, raising N past the configured cutoff if the
/// tail test fails.
pub fn delta_g(p: &PolarPoint, pp: &PolarPoint, cfg: &CylinderConfig) -> Result<Complex64> {
    delta_g_at(p, pp, cfg, Complex64::new(cfg.k, 0.0), 0)
}

/// δg(p, p′) at k·e^{iπ·turns} with k on the principal sheet.
pub fn delta_g_at(
    p: &PolarPoint,
    pp: &PolarPoint,
    cfg: &CylinderConfig,
    k: Complex64,
    turns: i32,
) -> Result<Complex64> {
    cfg.validate()?;
    check_inside(cfg, p)?;
    check_inside(cfg, pp)?;
    delta_g_converged(
        cfg.epsilon,
        cfg.radius,
        k,
        turns,
        p,
        pp,
        cfg.modes,
        mode_cap(cfg.modes),
    )
}

/// Γ(p, p′) = −(i/4) H₀⁽¹⁾(k√ε|p − p′|) + δg(p, p′).
pub fn cylinder_resolvent(p: &PolarPoint, pp: &PolarPoint, cfg: &CylinderConfig) -> Result<Complex64> {
    cfg.validate()?;
    check_inside(cfg, p)?;
    check_inside(cfg, pp)?;
    if p.distance(pp) < COINCIDENCE_GUARD * cfg.radius {
        return Err(Error::Singularity(
            "resolvent at coincident points".into(),
        ));
    }
    Ok(green_free_2d(p, pp, cfg.q())? + delta_g(p, pp, cfg)?)
}

/// Kernel dump `rho,phi,rhop,phip,re,im` over all ordered pairs of distinct points.
pub fn write_kernel_csv<W: Write>(
    cfg: &CylinderConfig,
    points: &[PolarPoint],
    out: W,
) -> Result<()> {
    let mut rows = Vec::new();
    for p in points {
        for pp in points {
            if p.distance(pp) < COINCIDENCE_GUARD * cfg.radius {
                continue;
            }
            let v = cylinder_resolvent(p, pp, cfg)?;
            rows.push(format!(
                "{},{},{},{},{},{}",
                csv_f64(p.rho),
                csv_f64(p.phi),
                csv_f64(pp.rho),
                csv_f64(pp.phi),
                csv_f64(v.re),
                csv_f64(v.im)
            ));
        }
    }
    write_lines(out, "rho,phi,rhop,phip,re,im", rows)
        .map_err(|e| Error::Validation(format!("write failed: {e}")))
}

/// |Σ_{|n|≤N} J_n(kρ)J_n(kρ′)e^{in(φ−φ′)} − J₀(k|p − p′|)|.
pub fn addition_theorem_residual(k: f64, points: (PolarPoint, PolarPoint), n: usize) -> Result<f64> {
    let (p, pp) = points;
    let a = bessel_j_sequence(Complex64::new(k * p.rho, 0.0), n)?;
    let b = bessel_j_sequence(Complex64::new(k * pp.rho, 0.0), n)?;
    let dphi = p.phi - pp.phi;
    let mut sum = a[0] * b[0];
    for m in 1..=n {
        sum += a[m] * b[m] * (2.0 * (m as f64 * dphi).cos());
    }
    let j0 = bessel_j(0, Complex64::new(k * p.distance(&pp), 0.0))?;
    Ok((sum - j0).norm())
}

/// Weak form of ∫₀ᴷ Im g(x, p) k dk against a normalized Gaussian of width σ
/// centred at p, next to the value −(π/2)·test(p) it tends to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaWeak {
    pub sigma: f64,
    pub cutoff: f64,
    pub value: f64,
    pub expected: f64,
    /// Numerical ∫ test d²x, 1 for a normalized test function.
    pub weight: f64,
    /// |value(K) − value(0.9K)| / |value(K)|.
    pub tail: f64,
}

impl DeltaWeak {
    pub fn deviation(&self) -> f64 {
        (self.value - self.expected).abs() / self.expected.abs()
    }
}

/// Computes the weak value without judging the cutoff. With Im g = −J₀(kr)/4
/// and ∫₀ᴷ k J₀(kr) dk = K J₁(Kr)/r, the value is
/// −(1/4)·2π ∫₀^∞ T(r) K J₁(Kr) dr.
pub fn delta_weak_value(sigma: f64, cutoff: f64) -> Result<DeltaWeak> {
    if !(sigma > 0.0 && cutoff > 0.0 && sigma.is_finite() && cutoff.is_finite()) {
        return Err(Error::Validation(format!(
            "test width and cutoff must be positive, got sigma = {sigma}, K = {cutoff}"
        )));
    }
    let test = |r: f64| (-(r * r) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma);
    let reach = 12.0 * sigma;
    let weak = |kk: f64| -> Result<f64> {
        let panels = ((reach * kk / PI).ceil() as usize).max(24);
        let edges: Vec<f64> = (0..=panels).map(|i| reach * i as f64 / panels as f64).collect();
        let rule = crate::specfun::composite_gauss_legendre(16, &edges)?;
        let mut s = 0.0;
        for (&r, &w) in rule.nodes().iter().zip(rule.weights()) {
            s += test(r) * kk * bessel_j(1, Complex64::new(kk * r, 0.0))?.re * w;
        }
        Ok(-0.5 * PI * s)
    };
    let value = weak(cutoff)?;
    let shorter = weak(0.9 * cutoff)?;
    let edges: Vec<f64> = (0..=24).map(|i| reach * i as f64 / 24.0).collect();
    let rule = crate::specfun::composite_gauss_legendre(16, &edges)?;
    let weight = 2.0 * PI * rule.integrate(|r| r * test(r));
    Ok(DeltaWeak {
        sigma,
        cutoff,
        value,
        expected: -0.5 * PI * test(0.0),
        weight,
        tail: (value - shorter).abs() / value.abs(),
    })
}

/// Relative deviation of the weak value from −(π/2)·test(p); fails when the
/// cutoff is too small for the oscillatory tail to have settled within 1%.
pub fn free_commutator_delta_check(sigma: f64, cutoff: f64) -> Result<f64> {
    let w = delta_weak_value(sigma, cutoff)?;
    if !(w.tail <= 1e-2) {
        return Err(Error::Convergence(format!(
            "cutoff K = {cutoff} too small for sigma = {sigma}: tail change {:.3e}",
            w.tail
        )));
    }
    Ok(w.deviation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(rho: f64, phi: f64) -> PolarPoint {
        PolarPoint::new(rho, phi).unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = CylinderConfig::new(2.25, 1.0, 2.0, None).unwrap();
        assert_eq!(cfg.modes, 3 + 8);
        assert!(CylinderConfig::new(2.25, 1.0, 2.0, Some(5)).is_err());
        assert!(CylinderConfig::new(0.5, 1.0, 2.0, None).is_err());
        assert!((cfg.nu() + 4.0 * 1.25).abs() < 1e-15);
    }

    #[test]
    fn free_kernel_properties() {
        let (p, q) = (pt(0.3, 0.2), pt(0.7, 2.0));
        let k = 1.3;
        let g = green_free_2d(&p, &q, k).unwrap();
        assert_eq!(g, green_free_2d(&q, &p, k).unwrap());
        let j0 = bessel_j(0, Complex64::new(k * p.distance(&q), 0.0)).unwrap();
        assert!((g.im + 0.25 * j0.re).abs() < 1e-15);
        assert!(matches!(green_free_2d(&p, &p, k), Err(Error::Singularity(_))));
    }

    #[test]
    fn free_kernel_solves_helmholtz() {
        let k = 2.0;
        let src = PolarPoint::from_cartesian(0.1, -0.2);
        let (x, y) = (0.6, 0.4);
        let h = 1e-3;
        let g = |x: f64, y: f64| green_free_2d(&PolarPoint::from_cartesian(x, y), &src, k).unwrap();
        let lap = (g(x + h, y) + g(x - h, y) + g(x, y + h) + g(x, y - h) - 4.0 * g(x, y)) / (h * h);
        assert!((lap + k * k * g(x, y)).norm() < 1e-5);
    }

    #[test]
    fn no_contrast_gives_no_correction() {
        let cfg = CylinderConfig::new(1.0, 1.0, 2.0, None).unwrap();
        for n in -4..=4 {
            assert_eq!(wn(n, &cfg).unwrap(), Complex64::new(0.0, 0.0));
        }
        assert_eq!(delta_g(&pt(0.2, 0.0), &pt(0.5, 1.0), &cfg).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn delta_g_is_symmetric() {
        let cfg = CylinderConfig::new(2.25, 1.0, 2.0, None).unwrap();
        let (p, q) = (pt(0.4, 0.0), pt(0.6, PI / 3.0));
        assert_eq!(delta_g(&p, &q, &cfg).unwrap(), delta_g(&q, &p, &cfg).unwrap());
        assert_eq!(
            cylinder_resolvent(&p, &q, &cfg).unwrap(),
            cylinder_resolvent(&q, &p, &cfg).unwrap()
        );
    }

    #[test]
    fn reflection_and_branch_relations() {
        for ka in [1.0, 2.0, 3.0] {
            let k = Complex64::new(ka, 0.0);
            for n in -10..=10 {
                let lhs = wn_at(-n, 2.25, 1.0, k, 0).unwrap();
                let rhs = -wn_at(n, 2.25, 1.0, k, 1).unwrap().conj();
                assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0), "ka={ka} n={n}");
            }
        }
        let cfg = CylinderConfig::new(2.25, 1.0, 2.0, None).unwrap();
        let (p, q) = (pt(0.4, 0.0), pt(0.6, PI / 3.0));
        let base = delta_g(&p, &q, &cfg).unwrap();
        let up = delta_g_at(&p, &q, &cfg, Complex64::new(2.0, 0.0), 1).unwrap();
        assert!((base.conj() - up).norm() < 1e-8);
    }

    #[test]
    fn rotated_sheet_matches_upper_rim_of_cut() {
        // arg(−x + 0i) = π on the principal branch, the same point as x e^{iπ}.
        for ka in [1.0, 2.0, 3.0] {
            for n in [0, 1, 4, 10] {
                let rotated = wn_at(n, 2.25, 1.0, Complex64::new(ka, 0.0), 1).unwrap();
                let rim = wn_at(n, 2.25, 1.0, Complex64::new(-ka, 0.0), 0).unwrap();
                assert!((rotated - rim).norm() < 1e-10 * rim.norm().max(1.0), "ka={ka} n={n}");
            }
        }
    }

    #[test]
    fn wn_decays_in_upper_half_plane() {
        let mut last = f64::INFINITY;
        for r in [20.0, 40.0, 80.0] {
            let k = Complex64::from_polar(r, PI / 4.0);
            let w = wn_at(2, 2.25, 1.0, k, 0).unwrap().norm();
            assert!(w < last, "|k|a={r} |W|={w}");
            last = w;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn addition_theorem() {
        let k = 1.0;
        let p = pt(2.0, 1.0);
        let q = pt(3.0, 0.0);
        assert!(addition_theorem_residual(k, (p, q), 40).unwrap() < 1e-12);
        let r = addition_theorem_residual(k, (p, p), 30).unwrap();
        assert!(r < 1e-14);
        let mut last = f64::INFINITY;
        for n in [8, 12, 16, 20] {
            let r = addition_theorem_residual(k, (p, q), n).unwrap();
            assert!(r < last * 0.5 || r < 1e-15, "n={n}");
            last = r;
        }
    }

    #[test]
    fn delta_identity_in_weak_form() {
        assert!(free_commutator_delta_check(0.1, 400.0).unwrap() < 1e-2);
        let devs: Vec<f64> = [40.0, 60.0, 400.0]
            .iter()
            .map(|&k| delta_weak_value(0.1, k).unwrap().deviation())
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
        assert!((delta_weak_value(0.1, 400.0).unwrap().weight - 1.0).abs() < 1e-2);
        assert!(matches!(free_commutator_delta_check(0.1, 15.0), Err(Error::Convergence(_))));
    }
}
