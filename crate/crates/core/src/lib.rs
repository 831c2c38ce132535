//! Numerical laboratory for singular-perturbation limits of quantum
//! stochastic evolutions: regular Hamiltonians `i∂ + E|g^(k)⟩⟨g^(k)|` on a
//! periodic grid and on truncated Fock space, compared against the exact
//! scattering-shift and Hudson–Parthasarathy dynamics they converge to.

pub mod error;
pub mod linalg;
pub mod profile;
pub mod quadrature;

pub mod first_quantized;
pub mod harness;
pub mod fock;
pub mod mollifier;
pub mod qsde;
pub mod slh;

pub use error::{Error, Result};
