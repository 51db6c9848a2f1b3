//! `qres`: runs the layer, cylinder and antenna solvers and the verification
//! suites, writing CSV and JSON artifacts to an output directory.

mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quantum_resolvent::antenna::{
    angular_pattern, make_smatrix, mean_output_intensity, noise_commutators, theta_grid,
    transform_state, FockState,
};
use quantum_resolvent::cylinder2d::{
    boundary_continuity_residual, cylinder_noise_integral, delta_g, delta_g_at, wn_table_json,
    write_kernel_csv as write_cylinder_csv, CylinderConfig, PolarGrid, PolarPoint,
};
use quantum_resolvent::layer1d::{
    layer_noise_integral, layer_poles, nystrom_relative_error, resolvent_at,
    write_kernel_csv as write_layer_csv, LayerConfig,
};
use quantum_resolvent::verify::{run_verify, Status, Tolerances};
use quantum_resolvent::{Complex64, Error};
use serde_json::{json, Value};

use config::RunConfig;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qres", version, about = "Resolvent kernels and quantum-noise checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dielectric layer: kernel CSV, pole table, noise-integral report.
    Layer(Common),
    /// Dielectric cylinder: kernel CSV, W_n table, noise-integral report.
    Cylinder(Common),
    /// Two-element antenna: pattern CSV, output state, noise commutators.
    Antenna(Common),
    /// Invariant suites with a PASS/FAIL report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "QRES_OUT_DIR")]
    out: Option<PathBuf>,
    /// Nyström grid order.
    #[arg(long)]
    grid_order: Option<usize>,
    /// Cylinder mode cutoff N.
    #[arg(long)]
    modes: Option<usize>,
    /// Comma-separated damping values, e.g. 0.2,0.1,0.05.
    #[arg(long, value_delimiter = ',')]
    eta_schedule: Option<Vec<f64>>,
    /// Number of θ samples on [0, π].
    #[arg(long)]
    theta_points: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Sets every residual tolerance to this value.
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    // Sequential dense algebra keeps every report independent of the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Layer(c) => {
            let (cfg, out) = load(&c)?;
            run_layer(&cfg, &out)
        }
        Command::Cylinder(c) => {
            let (cfg, out) = load(&c)?;
            run_cylinder(&cfg, &out)
        }
        Command::Antenna(c) => {
            let (cfg, out) = load(&c)?;
            run_antenna(&cfg, &out)
        }
        Command::Verify(v) => {
            let (mut cfg, out) = load(&v.common)?;
            if let Some(t) = v.tolerance {
                cfg.verify.tolerances = Tolerances::uniform(t);
            }
            run_verify_command(&cfg, &out)
        }
    }
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| invalid(format!("invalid config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(c.grid_order, c.modes, c.eta_schedule.clone(), c.theta_points);
    cfg.validate().map_err(invalid)?;
    let out = c
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("qres-out"));
    fs::create_dir_all(&out)
        .map_err(|e| invalid(format!("cannot create output directory {}: {e}", out.display())))?;
    Ok((cfg, out))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_layer(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let s = &cfg.layer;
    let layer = LayerConfig::new(s.epsilon, s.length, s.k)?;
    let n = s.kernel_points.max(1);
    let points: Vec<f64> = if n == 1 {
        vec![0.5 * s.length]
    } else {
        (0..n).map(|i| s.length * i as f64 / (n - 1) as f64).collect()
    };
    write_layer_csv(&layer, &points, create(out, "layer_kernel.csv")?)?;

    let poles = if layer.epsilon == 1.0 {
        json!([])
    } else {
        layer_poles(&layer, s.pole_range[0], s.pole_range[1])?.to_json()
    };
    write_json(out, "layer_poles.json", &poles)?;

    // Γ(−k) = Γ*(k) for real k, checked on the kernel points.
    let mut conj: f64 = 0.0;
    for &x in &points {
        for &xp in &points {
            let up = resolvent_at(&layer, x, xp, Complex64::new(layer.k, 0.0));
            let down = resolvent_at(&layer, x, xp, Complex64::new(-layer.k, 0.0));
            conj = conj.max((down - up.conj()).norm() / up.norm());
        }
    }
    let nystrom = if layer.epsilon == 1.0 {
        0.0
    } else {
        nystrom_relative_error(&layer, s.grid_order)?
    };
    let mut noise = Vec::new();
    for &eta in &cfg.eta_schedule {
        let v = layer_noise_integral(&layer, s.noise_points[0], s.noise_points[1], cfg.cutoff_factor / eta, eta)?;
        noise.push(json!({
            "eta": eta,
            "cutoff": v.cutoff,
            "re": v.value.re,
            "im": v.value.im,
            "reference": v.reference,
            "ratio": v.ratio(),
            "error_estimate": v.error_estimate,
        }));
    }
    let report = json!({
        "config": s,
        "nu": layer.nu(),
        "nystrom_grid_order": s.grid_order,
        "nystrom_max_relative_error": nystrom,
        "conjugation_check": {"relation": "Gamma(-k) = conj(Gamma(k))", "residual": conj, "status": status(conj < 1e-12)},
        "noise_points": s.noise_points,
        "noise_integral": noise,
    });
    write_json(out, "layer_report.json", &report)?;
    println!("layer: wrote layer_kernel.csv, layer_poles.json, layer_report.json to {}", out.display());
    Ok(())
}

/// Gaussian of width `width` centred at the polar point `center`.
fn gaussian_source(center: PolarPoint, width: f64) -> impl Fn(PolarPoint) -> Complex64 + Sync {
    let (cx, cy) = center.cartesian();
    move |p: PolarPoint| {
        let (x, y) = p.cartesian();
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    }
}

fn run_cylinder(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let s = &cfg.cylinder;
    let cyl = CylinderConfig::new(s.epsilon, s.radius, s.k, s.modes)?;
    let points = s
        .kernel_points
        .iter()
        .map(|&[rho, phi]| PolarPoint::new(rho, phi))
        .collect::<Result<Vec<_>, _>>()?;
    write_cylinder_csv(&cyl, &points, create(out, "cylinder_kernel.csv")?)?;
    write_json(out, "cylinder_wn.json", &wn_table_json(&cyl)?)?;

    let p = PolarPoint::new(s.noise_points[0][0], s.noise_points[0][1])?;
    let q = PolarPoint::new(s.noise_points[1][0], s.noise_points[1][1])?;
    let base = delta_g(&p, &q, &cyl)?;
    let rotated = delta_g_at(&p, &q, &cyl, Complex64::new(cyl.k, 0.0), 1)?;
    let branch = if base.norm() > 0.0 {
        (base.conj() - rotated).norm() / base.norm()
    } else {
        (base.conj() - rotated).norm()
    };
    let center = s.source_center;
    let source = gaussian_source(PolarPoint::new(center[0], center[1])?, s.source_width);
    let boundary = boundary_continuity_residual(&cyl, &source, PolarGrid::for_config(&cyl)?)?;
    let mut noise = Vec::new();
    for &eta in &cfg.eta_schedule {
        let v = cylinder_noise_integral(&p, &q, &cyl, cfg.cutoff_factor / eta, eta)?;
        noise.push(json!({
            "eta": eta,
            "cutoff": v.cutoff,
            "re": v.value.re,
            "im": v.value.im,
            "upper_fold_im": v.upper_fold.im,
            "reference": v.reference,
            "ratio": v.ratio(),
            "lower_bound": v.lower_bound,
            "error_estimate": v.error_estimate,
        }));
    }
    let report = json!({
        "config": cyl,
        "nu": cyl.nu(),
        "branch_check": {"relation": "conj(delta_g(k)) = delta_g(k e^{i pi})", "residual": branch, "status": status(branch < 1e-8)},
        "boundary_residual": {"value": boundary.value, "derivative": boundary.derivative, "source_center": center, "source_width": s.source_width},
        "noise_points": s.noise_points,
        "noise_integral": noise,
    });
    write_json(out, "cylinder_report.json", &report)?;
    println!("cylinder: wrote cylinder_kernel.csv, cylinder_wn.json, cylinder_report.json to {}", out.display());
    Ok(())
}

fn run_antenna(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let a = &cfg.antenna;
    let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    let s = make_smatrix(c(a.r), c(a.t1), c(a.t2), c(a.t3))?;
    let input = FockState::basis(&a.input, a.n_max)?;
    let state = transform_state(&s, &input)?;
    let thetas = theta_grid(a.theta_points);
    let pattern = angular_pattern(&state, &thetas, a.kd, a.beta, a.phase)?;
    pattern.write_csv(create(out, "antenna_pattern.csv")?)?;
    write_json(out, "antenna_state.json", &state.to_json())?;
    let n = noise_commutators(&s);
    let feed = FockState::basis(&a.input[..2], a.n_max)?;
    let intensity = mean_output_intensity(&s, &feed)?;
    let noise = json!({
        "commutators": n,
        "diagonal_expected": 1.0 - s.t2.norm_sqr() - s.t3.norm_sqr(),
        "off_diagonal_expected": -(s.t2 * s.t3.conj() + s.t3 * s.t2.conj()).re,
        "mean_output_intensity": {
            "coherent": intensity.coherent,
            "noise": intensity.noise,
            "total": intensity.total(),
        },
    });
    write_json(out, "antenna_noise.json", &noise)?;
    println!("antenna: wrote antenna_pattern.csv, antenna_state.json, antenna_noise.json to {}", out.display());
    Ok(())
}

fn run_verify_command(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let report = run_verify(&cfg.verify)?;
    let path = out.join("verify_report.json");
    fs::write(&path, report.to_json())
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    for s in &report.suites {
        let tag = if s.status == Status::Pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<20} residual {:.3e} tolerance {:.1e}", s.name, s.residual, s.tolerance);
    }
    println!("verify: wrote {}", path.display());
    Ok(())
}
