//! JSON run configuration. Every field has a default, unknown keys are
//! rejected, and command-line flags override the file.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, PI};
use std::path::PathBuf;

use quantum_resolvent::antenna::{FarZonePhase, DEFAULT_N_MAX, DEFAULT_THETA_POINTS};
use quantum_resolvent::verify::VerifyConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    /// Damping values η for the noise integrals.
    pub eta_schedule: Vec<f64>,
    /// The cutoff is `cutoff_factor / η`.
    pub cutoff_factor: f64,
    pub layer: LayerSection,
    pub cylinder: CylinderSection,
    pub antenna: AntennaSection,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let verify = VerifyConfig::default();
        RunConfig {
            out: None,
            eta_schedule: verify.eta_schedule.clone(),
            cutoff_factor: verify.cutoff_factor,
            layer: LayerSection::default(),
            cylinder: CylinderSection::default(),
            antenna: AntennaSection::default(),
            verify,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerSection {
    pub epsilon: f64,
    pub length: f64,
    pub k: f64,
    /// Number of equally spaced kernel samples on [0, l] per axis.
    pub kernel_points: usize,
    /// Pole indices n_min..=n_max.
    pub pole_range: [i64; 2],
    pub grid_order: usize,
    /// (x, x′) for the noise integral.
    pub noise_points: [f64; 2],
}

impl Default for LayerSection {
    fn default() -> Self {
        LayerSection {
            epsilon: 2.25,
            length: 1.0,
            k: 2.0,
            kernel_points: 11,
            pole_range: [-3, 3],
            grid_order: 64,
            noise_points: [0.4, 0.6],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderSection {
    pub epsilon: f64,
    pub radius: f64,
    pub k: f64,
    /// Mode cutoff N; the smallest admissible value when absent.
    pub modes: Option<usize>,
    /// (ρ, φ) kernel samples; the CSV holds every ordered pair.
    pub kernel_points: Vec<[f64; 2]>,
    /// (ρ, φ) pair for the noise integral and the branch check.
    pub noise_points: [[f64; 2]; 2],
    /// Gaussian source used for the boundary residual, center in (ρ, φ).
    pub source_center: [f64; 2],
    pub source_width: f64,
}

impl Default for CylinderSection {
    fn default() -> Self {
        CylinderSection {
            epsilon: 2.25,
            radius: 1.0,
            k: 2.0,
            modes: None,
            kernel_points: vec![[0.2, 0.0], [0.5, 1.0], [0.8, 2.5]],
            noise_points: [[0.4, 0.0], [0.6, FRAC_PI_3]],
            source_center: [0.45, 0.5],
            source_width: 0.08,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    /// Scattering-matrix entries as [re, im].
    pub r: [f64; 2],
    pub t1: [f64; 2],
    pub t2: [f64; 2],
    pub t3: [f64; 2],
    /// Input occupation of (x1, x2, y1, y2).
    pub input: Vec<usize>,
    pub n_max: usize,
    pub theta_points: usize,
    pub kd: f64,
    pub beta: f64,
    pub phase: FarZonePhase,
}

impl Default for AntennaSection {
    fn default() -> Self {
        AntennaSection {
            r: [0.0, 0.0],
            t1: [0.0, 0.0],
            t2: [FRAC_1_SQRT_2, 0.0],
            t3: [0.0, -FRAC_1_SQRT_2],
            input: vec![1, 1, 0, 0],
            n_max: DEFAULT_N_MAX,
            theta_points: DEFAULT_THETA_POINTS,
            kd: PI,
            beta: 0.0,
            phase: FarZonePhase::default(),
        }
    }
}

impl RunConfig {
    pub fn apply_overrides(
        &mut self,
        grid_order: Option<usize>,
        modes: Option<usize>,
        eta_schedule: Option<Vec<f64>>,
        theta_points: Option<usize>,
    ) {
        if let Some(g) = grid_order {
            self.layer.grid_order = g;
            self.verify.grid_order = g;
        }
        if let Some(m) = modes {
            self.cylinder.modes = Some(m);
        }
        if let Some(e) = eta_schedule {
            self.verify.eta_schedule = e.clone();
            self.eta_schedule = e;
        }
        if let Some(t) = theta_points {
            self.antenna.theta_points = t;
        }
    }

    /// Checks the fields that the library does not see directly.
    pub fn validate(&self) -> Result<(), String> {
        if self.eta_schedule.is_empty() || !self.eta_schedule.iter().all(|e| e.is_finite() && *e > 0.0) {
            return Err("damping schedule must hold positive values".into());
        }
        if !(self.cutoff_factor.is_finite() && self.cutoff_factor > 0.0) {
            return Err("cutoff factor must be positive".into());
        }
        if self.layer.kernel_points == 0 {
            return Err("layer kernel_points must be at least 1".into());
        }
        if self.layer.grid_order < 2 {
            return Err("grid order must be at least 2".into());
        }
        if self.layer.pole_range[0] > self.layer.pole_range[1] {
            return Err("pole_range must satisfy n_min <= n_max".into());
        }
        if !(self.cylinder.source_width.is_finite() && self.cylinder.source_width > 0.0) {
            return Err("cylinder source_width must be positive".into());
        }
        if self.antenna.theta_points < 2 {
            return Err("theta_points must be at least 2".into());
        }
        if self.antenna.input.len() != 4 {
            return Err(format!(
                "antenna input needs 4 occupations (x1, x2, y1, y2), got {}",
                self.antenna.input.len()
            ));
        }
        Ok(())
    }
}
