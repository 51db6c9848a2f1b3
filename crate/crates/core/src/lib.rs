//! Resolvent kernels of dielectric scatterers and the quantum noise they imply.
//!
//! The crate discretizes Fredholm equations of the second kind by the Nyström
//! method, builds closed-form resolvents for a dielectric layer and a dielectric
//! cylinder, checks the commutator identities that force ancillary noise fields
//! into the quantized solution, and simulates the Fock-state algebra of a
//! two-element quantum antenna.

pub mod antenna;
pub mod cylinder2d;
pub mod error;
pub mod fredholm;
pub mod io;
pub mod layer1d;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
