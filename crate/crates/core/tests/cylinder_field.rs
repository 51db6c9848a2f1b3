//! The scattered field Ũ = ν∫Γ U₀ of a cylinder must satisfy
//! ∇²Ũ + k²εŨ = νU₀ inside and ∇²Ũ + k²Ũ = 0 outside. Checked with a
//! fourth-order five-point Laplacian, h = 0.01.

use num_complex::Complex64;
use quantum_resolvent::cylinder2d::{CylinderConfig, CylinderSolution, PolarGrid, PolarPoint};

const H: f64 = 0.01;

fn gaussian(center: (f64, f64), width: f64) -> impl Fn(PolarPoint) -> Complex64 + Sync {
    move |p: PolarPoint| {
        let (x, y) = p.cartesian();
        let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    }
}

fn laplacian<F>(f: F, x: f64, y: f64) -> (Complex64, Complex64)
where
    F: Fn(PolarPoint) -> Complex64,
{
    let at = |dx: f64, dy: f64| f(PolarPoint::from_cartesian(x + dx, y + dy));
    let centre = at(0.0, 0.0);
    let second = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| {
        (-a + 16.0 * b - 30.0 * centre + 16.0 * c - d) / (12.0 * H * H)
    };
    let lap = second(at(-2.0 * H, 0.0), at(-H, 0.0), at(H, 0.0), at(2.0 * H, 0.0))
        + second(at(0.0, -2.0 * H), at(0.0, -H), at(0.0, H), at(0.0, 2.0 * H));
    (lap, centre)
}

#[test]
fn kernel_field_solves_interior_helmholtz() {
    let cfg = CylinderConfig::new(2.25, 1.0, 2.0, Some(27)).unwrap();
    let source = gaussian(PolarPoint::new(0.45, 0.5).unwrap().cartesian(), 0.08);
    let sol = CylinderSolution::new(&cfg, &source, PolarGrid::for_config(&cfg).unwrap()).unwrap();
    let k2eps = cfg.k * cfg.k * cfg.epsilon;
    for (rho, phi) in [(0.7, 2.5), (0.3, -1.2)] {
        let (x, y) = PolarPoint::new(rho, phi).unwrap().cartesian();
        let (lap, u) = laplacian(|p| sol.field_from_kernel(&p).unwrap(), x, y);
        let u0 = source(PolarPoint::from_cartesian(x, y));
        let residual = (lap + k2eps * u - cfg.nu() * u0).norm() / (k2eps * u.norm());
        assert!(residual < 1e-5, "interior residual {residual:.3e} at ({rho}, {phi})");
    }
}

#[test]
fn mode_field_solves_exterior_helmholtz() {
    let cfg = CylinderConfig::new(2.25, 1.0, 2.0, Some(27)).unwrap();
    let source = gaussian(PolarPoint::new(0.45, 0.5).unwrap().cartesian(), 0.08);
    let sol = CylinderSolution::new(&cfg, &source, PolarGrid::for_config(&cfg).unwrap()).unwrap();
    let k2 = cfg.k * cfg.k;
    for (rho, phi) in [(1.5, 0.3), (2.5, -2.0)] {
        let (x, y) = PolarPoint::new(rho, phi).unwrap().cartesian();
        let (lap, u) = laplacian(|p| sol.field(&p).unwrap(), x, y);
        let residual = (lap + k2 * u).norm() / (k2 * u.norm());
        assert!(residual < 1e-6, "exterior residual {residual:.3e} at ({rho}, {phi})");
    }
}

#[test]
fn both_routes_agree_in_the_far_interior() {
    let cfg = CylinderConfig::new(2.25, 1.0, 2.0, Some(27)).unwrap();
    let source = gaussian(PolarPoint::new(0.45, 0.5).unwrap().cartesian(), 0.08);
    let sol = CylinderSolution::new(&cfg, &source, PolarGrid::for_config(&cfg).unwrap()).unwrap();
    let p = PolarPoint::new(0.8, -2.0).unwrap();
    let a = sol.field(&p).unwrap();
    let b = sol.field_from_kernel(&p).unwrap();
    assert!((a - b).norm() < 1e-8 * a.norm(), "{a} vs {b}");
}
