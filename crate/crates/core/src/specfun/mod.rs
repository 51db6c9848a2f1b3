//! Cylinder functions and quadrature rules.

mod bessel;
mod quadrature;

pub use bessel::{
    bessel_j, bessel_j_deriv, bessel_j_sequence, bessel_y, hankel1, hankel1_deriv,
    hankel1_on_sheet, hankel2, hankel2_on_sheet, CylinderSeq, MAX_ARGUMENT, MAX_ORDER,
};
pub use quadrature::{composite_gauss_legendre, gauss_legendre, QuadratureGrid};
