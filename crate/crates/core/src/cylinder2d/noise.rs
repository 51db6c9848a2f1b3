//! Damped k-integral of the resolvent correction δg along the contour that
//! runs out along the positive axis and back below the branch cut.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    check_inside, CylinderConfig, ModeTable, PolarPoint, MODE_STEP, TAIL_TOL,
};
use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, hankel1, CylinderSeq};

const K_PANEL: f64 = 1.0;
const K_ORDER: usize = 16;
const K_ORDER_CHECK: usize = 24;

/// Result of the damped cylinder integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderNoise {
    pub eta: f64,
    pub cutoff: f64,
    /// ∫₀ᴷ κ [δg(κ) − δg(κe^{−iπ})] e^{−ηκ} dκ.
    pub value: Complex64,
    /// 2i ∫₀ᴷ κ Im δg(κ) e^{−ηκ} dκ, the fold over the upper rim of the cut,
    /// kept for comparison with the layer.
    pub upper_fold: Complex64,
    /// ∫₀ᴷ |(1/4) H₀⁽¹⁾(κ|p − p′|)| κ e^{−ηκ} dκ.
    pub reference: f64,
    /// |value at the base rule − value at the refined rule|.
    pub error_estimate: f64,
    /// max(|value| − error_estimate, 0).
    pub lower_bound: f64,
}

impl CylinderNoise {
    pub fn ratio(&self) -> f64 {
        self.value.norm() / self.reference
    }
}

/// δg at κ on the principal sheet and at κe^{−iπ}, sharing one set of
/// cylinder functions. Modes start from a count that covers the oscillatory
/// range of J_n(k√ε ρ) and grow until the tail test passes.
fn sheet_pair(
    epsilon: f64,
    radius: f64,
    kappa: f64,
    p: &PolarPoint,
    pp: &PolarPoint,
) -> Result<(Complex64, Complex64)> {
    let q = kappa * epsilon.sqrt();
    let x = q * p.rho.max(pp.rho);
    let mut n = (x + 10.0 * x.cbrt() + 10.0).ceil() as usize;
    let cap = 4 * n + 64;
    let k = Complex64::new(kappa, 0.0);
    let (small, large) = if p.rho <= pp.rho { (p, pp) } else { (pp, p) };
    let dphi = (p.phi - pp.phi).abs();
    loop {
        let ka = CylinderSeq::new(k * radius, n + 1)?;
        let qa = CylinderSeq::new(k * epsilon.sqrt() * radius, n + 1)?;
        let up = ModeTable::from_seqs(epsilon, k, 0, &ka, &qa, n)?;
        let down = ModeTable::from_seqs(epsilon, k, -1, &ka.on_sheet(-1), &qa.on_sheet(-1), n)?;
        let js = up.j_row(small.rho)?;
        let jl = up.j_row(large.rho)?;
        let (a, tail) = up.delta_g_rows(&js, &jl, dphi);
        let flip = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter()
                .enumerate()
                .map(|(m, x)| if m % 2 == 1 { -x } else { *x })
                .collect()
        };
        let (b, _) = down.delta_g_rows(&flip(&js), &flip(&jl), dphi);
        if tail < TAIL_TOL {
            return Ok((a, b));
        }
        if n >= cap {
            return Err(Error::Truncation { modes: n, tail });
        }
        n = (n + MODE_STEP).min(cap);
    }
}

fn panel_sum<F>(f: &F, cutoff: f64, order: usize) -> Result<[Complex64; 2]>
where
    F: Fn(f64) -> Result<[Complex64; 2]> + Sync,
{
    let panels = (cutoff / K_PANEL).ceil().max(1.0) as usize;
    let rule = gauss_legendre(order, 0.0, 1.0)?;
    let h = cutoff / panels as f64;
    let parts: Vec<[Complex64; 2]> = (0..panels)
        .into_par_iter()
        .map(|panel| -> Result<[Complex64; 2]> {
            let lo = panel as f64 * h;
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                let v = f(lo + t * h)?;
                acc[0] += v[0] * (w * h);
                acc[1] += v[1] * (w * h);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts
        .iter()
        .fold([Complex64::new(0.0, 0.0); 2], |a, b| [a[0] + b[0], a[1] + b[1]]))
}

/// Damped contour integral of κ·δg(p, p′; κ) for the cylinder. The wavenumber
/// and mode cutoff of `cfg` are not used: κ is the integration variable and
/// the mode count is chosen per κ.
pub fn cylinder_noise_integral(
    p: &PolarPoint,
    pp: &PolarPoint,
    cfg: &CylinderConfig,
    cutoff: f64,
    eta: f64,
) -> Result<CylinderNoise> {
    cfg.validate()?;
    check_inside(cfg, p)?;
    check_inside(cfg, pp)?;
    if !(cutoff > 0.0 && eta > 0.0 && cutoff.is_finite() && eta.is_finite()) {
        return Err(Error::Validation(format!(
            "cutoff and damping must be positive, got K = {cutoff}, eta = {eta}"
        )));
    }
    let r = p.distance(pp);
    if r == 0.0 {
        return Err(Error::Singularity("reference scale at coincident points".into()));
    }
    let reference_fn = |kk: f64| -> Result<[Complex64; 2]> {
        let h = hankel1(0, Complex64::new(kk * r, 0.0))?;
        Ok([Complex64::new(0.25 * h.norm() * kk * (-eta * kk).exp(), 0.0), Complex64::new(0.0, 0.0)])
    };
    let reference = panel_sum(&reference_fn, cutoff, K_ORDER_CHECK)?[0].re;
    if cfg.epsilon == 1.0 {
        let zero = Complex64::new(0.0, 0.0);
        return Ok(CylinderNoise {
            eta,
            cutoff,
            value: zero,
            upper_fold: zero,
            reference,
            error_estimate: 0.0,
            lower_bound: 0.0,
        });
    }
    let integrand = |kk: f64| -> Result<[Complex64; 2]> {
        let (up, down) = sheet_pair(cfg.epsilon, cfg.radius, kk, p, pp)?;
        let damp = kk * (-eta * kk).exp();
        Ok([(up - down) * damp, Complex64::new(0.0, 2.0 * up.im * damp)])
    };
    let base = panel_sum(&integrand, cutoff, K_ORDER)?;
    let fine = panel_sum(&integrand, cutoff, K_ORDER_CHECK)?;
    let error_estimate = (base[0] - fine[0]).norm();
    if !(fine[0].re.is_finite() && fine[0].im.is_finite()) {
        return Err(Error::Convergence("cylinder noise integral is not finite".into()));
    }
    if error_estimate > 1e-3 * fine[0].norm().max(reference) {
        return Err(Error::Convergence(format!(
            "cylinder noise integral rules disagree by {error_estimate:.3e}"
        )));
    }
    Ok(CylinderNoise {
        eta,
        cutoff,
        value: fine[0],
        upper_fold: fine[1],
        reference,
        error_estimate,
        lower_bound: (fine[0].norm() - error_estimate).max(0.0),
    })
}
