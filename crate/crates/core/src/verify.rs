//! Invariant suites with PASS/FAIL verdicts, collected into a report whose
//! JSON rendering is byte-stable for a fixed configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cylinder2d::{
    addition_theorem_residual, cylinder_noise_integral, delta_g, delta_g_at, delta_weak_value,
    wn_at, CylinderConfig, PolarPoint,
};
use crate::error::Result;
use crate::fredholm::{
    build_kernel, commutator_closure_residual, eigen_decompose, mode_overlap_residual,
    noise_restoration_residual, resolvent_matrix, KernelMatrix,
};
use crate::layer1d::{green_free_1d, layer_noise_integral, LayerConfig};
use crate::specfun::gauss_legendre;

/// Acceptance thresholds of the suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub closure: f64,
    pub restoration: f64,
    pub hilbert_schmidt: f64,
    pub mode_overlap: f64,
    pub addition: f64,
    pub branch: f64,
    pub delta: f64,
    /// Largest admissible final layer ratio |integral|/reference.
    pub layer_tail: f64,
    /// Smallest admissible cylinder ratio along the schedule.
    pub cylinder_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            closure: 1e-10,
            restoration: 1e-14,
            hilbert_schmidt: 1e-10,
            mode_overlap: 1e-8,
            addition: 1e-12,
            branch: 1e-8,
            delta: 1e-2,
            layer_tail: 1e-3,
            cylinder_floor: 1e-2,
        }
    }
}

impl Tolerances {
    /// Sets every residual tolerance to `tol`; the contrast thresholds keep
    /// their values.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            closure: tol,
            restoration: tol,
            hilbert_schmidt: tol,
            mode_overlap: tol,
            addition: tol,
            branch: tol,
            delta: tol,
            ..Tolerances::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.closure,
            self.restoration,
            self.hilbert_schmidt,
            self.mode_overlap,
            self.addition,
            self.branch,
            self.delta,
            self.layer_tail,
            self.cylinder_floor,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(crate::Error::Validation("all tolerances must be positive".into()))
        }
    }
}

/// Problem parameters and numeric controls of the suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Nyström order for the layer-kernel suites.
    pub grid_order: usize,
    /// Damping values η; the cutoff is `cutoff_factor / η`.
    pub eta_schedule: Vec<f64>,
    pub cutoff_factor: f64,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid_order: 64,
            eta_schedule: vec![0.2, 0.1, 0.05],
            cutoff_factor: 40.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.grid_order < 2 {
            return Err(crate::Error::Validation("grid order must be at least 2".into()));
        }
        if self.eta_schedule.is_empty()
            || !self.eta_schedule.iter().all(|e| e.is_finite() && *e > 0.0)
        {
            return Err(crate::Error::Validation(
                "damping schedule must hold positive values".into(),
            ));
        }
        if !(self.cutoff_factor.is_finite() && self.cutoff_factor > 0.0) {
            return Err(crate::Error::Validation("cutoff factor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub details: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(|s| s.status == Status::Pass)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn suite(name: &str, residual: f64, tolerance: f64, details: Vec<(&str, Value)>) -> SuiteResult {
    SuiteResult {
        name: name.to_string(),
        status: if residual <= tolerance { Status::Pass } else { Status::Fail },
        residual,
        tolerance,
        details: details.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    }
}

/// Free-space kernel e^{ik|x−x′|}/(2ik) of the layer ε = 2.25, l = 1, k = 2.
pub fn reference_layer_kernel(order: usize) -> Result<(LayerConfig, KernelMatrix)> {
    let cfg = LayerConfig::new(2.25, 1.0, 2.0)?;
    let grid = gauss_legendre(order, 0.0, cfg.length)?;
    let k = cfg.k;
    let kernel = build_kernel(|x, y| green_free_1d(x, y, k), &grid, k)?;
    Ok((cfg, kernel))
}

/// max over ka ∈ {1, 2, 3}, |n| ≤ 10 of |W_{−n}(x) + W_n*(e^{iπ}x)| relative
/// to max(|W_{−n}|, 1).
pub fn reflection_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for ka in [1.0, 2.0, 3.0] {
        let k = Complex64::new(ka, 0.0);
        for n in -10..=10 {
            let lhs = wn_at(-n, 2.25, 1.0, k, 0)?;
            let rhs = -wn_at(n, 2.25, 1.0, k, 1)?.conj();
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// The cut relation for δg at ka ∈ {1, 2, 3}: the conjugate of δg(k) set
/// against δg(k e^{+iπ}) and δg(k e^{−iπ}). Returns both residuals relative
/// to max |δg(k)|.
pub fn cut_relation_residuals() -> Result<(f64, f64)> {
    let p = PolarPoint::new(0.4, 0.0)?;
    let q = PolarPoint::new(0.6, PI / 3.0)?;
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for ka in [1.0, 2.0, 3.0] {
        let cfg = CylinderConfig::new(2.25, 1.0, ka, None)?;
        let k = Complex64::new(ka, 0.0);
        let base = delta_g(&p, &q, &cfg)?;
        plus = plus.max((base.conj() - delta_g_at(&p, &q, &cfg, k, 1)?).norm());
        minus = minus.max((base.conj() - delta_g_at(&p, &q, &cfg, k, -1)?).norm());
        scale = scale.max(base.norm());
    }
    Ok((plus / scale, minus / scale))
}

/// Layer and cylinder damped integrals along the schedule.
pub struct NoiseContrast {
    pub layer: Vec<f64>,
    pub cylinder: Vec<f64>,
    pub cylinder_lower_bounds: Vec<f64>,
}

impl NoiseContrast {
    pub fn layer_decreasing(&self) -> bool {
        self.layer.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn noise_contrast(eta_schedule: &[f64], cutoff_factor: f64) -> Result<NoiseContrast> {
    let layer_cfg = LayerConfig::new(2.25, 1.0, 2.0)?;
    let cyl_cfg = CylinderConfig::new(2.25, 1.0, 2.0, None)?;
    let p = PolarPoint::new(0.4, 0.0)?;
    let q = PolarPoint::new(0.6, PI / 3.0)?;
    let mut out = NoiseContrast {
        layer: Vec::new(),
        cylinder: Vec::new(),
        cylinder_lower_bounds: Vec::new(),
    };
    for &eta in eta_schedule {
        let cutoff = cutoff_factor / eta;
        out.layer
            .push(layer_noise_integral(&layer_cfg, 0.4, 0.6, cutoff, eta)?.ratio());
        let c = cylinder_noise_integral(&p, &q, &cyl_cfg, cutoff, eta)?;
        out.cylinder.push(c.ratio());
        out.cylinder_lower_bounds.push(c.lower_bound / c.reference);
    }
    Ok(out)
}

/// Runs every suite. Numerical failures abort with an error; verdicts
/// below tolerance are reported as FAIL entries.
pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut suites = Vec::new();

    let (layer, kernel) = reference_layer_kernel(config.grid_order)?;
    let nu = layer.nu();
    let closure = commutator_closure_residual(&kernel, nu)?;
    suites.push(suite(
        "commutator_closure",
        closure,
        tol.closure,
        vec![("grid_order", json!(config.grid_order)), ("nu", json!(nu))],
    ));
    let restoration = noise_restoration_residual(&kernel, Complex64::new(nu, 0.0))?;
    suites.push(suite("noise_restoration", restoration, tol.restoration, vec![]));
    let res = resolvent_matrix(&kernel, Complex64::new(nu, 0.0))?;
    suites.push(suite(
        "hilbert_schmidt",
        res.hilbert_schmidt_residual(),
        tol.hilbert_schmidt,
        vec![],
    ));
    let spec = eigen_decompose(&kernel)?;
    suites.push(suite(
        "mode_overlap_identity",
        mode_overlap_residual(&spec, &kernel),
        tol.mode_overlap,
        vec![("modes", json!(spec.len()))],
    ));

    let pts = (PolarPoint::new(2.0, 1.0)?, PolarPoint::new(3.0, 0.0)?);
    suites.push(suite(
        "addition_theorem",
        addition_theorem_residual(1.0, pts, 40)?,
        tol.addition,
        vec![("k_rho", json!(2.0)), ("k_rhop", json!(3.0)), ("modes", json!(40))],
    ));

    let reflection = reflection_residual()?;
    let (plus, minus) = cut_relation_residuals()?;
    suites.push(suite(
        "branch_relation",
        reflection.max(plus),
        tol.branch,
        vec![
            ("reflection", json!(reflection)),
            ("conjugate_vs_plus_i_pi", json!(plus)),
            ("conjugate_vs_minus_i_pi", json!(minus)),
        ],
    ));

    let contrast = noise_contrast(&config.eta_schedule, config.cutoff_factor)?;
    let layer_final = *contrast.layer.last().expect("schedule is nonempty");
    let cyl_min = contrast.cylinder.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = layer_final < tol.layer_tail && contrast.layer_decreasing() && cyl_min > tol.cylinder_floor;
    let mut entry = suite(
        "noise_contrast",
        layer_final,
        tol.layer_tail,
        vec![
            ("eta_schedule", json!(config.eta_schedule)),
            ("layer_ratio", json!(contrast.layer)),
            ("layer_decreasing", json!(contrast.layer_decreasing())),
            ("cylinder_ratio", json!(contrast.cylinder)),
            ("cylinder_lower_bound_ratio", json!(contrast.cylinder_lower_bounds)),
            ("cylinder_floor", json!(tol.cylinder_floor)),
        ],
    );
    entry.status = if pass { Status::Pass } else { Status::Fail };
    suites.push(entry);

    let delta = delta_weak_value(0.1, 400.0)?;
    suites.push(suite(
        "delta_identity",
        delta.deviation(),
        tol.delta,
        vec![
            ("sigma", json!(0.1)),
            ("cutoff", json!(400.0)),
            ("value", json!(delta.value)),
            ("expected", json!(delta.expected)),
            ("weight", json!(delta.weight)),
        ],
    ));

    Ok(VerifyReport {
        config: config.clone(),
        suites,
    })
}
