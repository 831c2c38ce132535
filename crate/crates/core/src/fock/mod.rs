//! Truncated bosonic Fock space over the periodic grid, second-quantized
//! regular Hamiltonians and closed-form pseudo-exponential vectors.

pub mod krylov;
pub mod operators;
pub mod pseudo;
pub mod space;

pub use krylov::{krylov_propagate, FockOperator, KrylovOptions, KrylovStats};
pub use operators::{
    apply_annihilation, apply_creation, build_second_quantized_hk, creation_overflow, differential_second_quantization,
    second_quantize_contraction, OneParticleOperator, SecondQuantizedHamiltonian,
};
pub use pseudo::{
    boundary_residual, gregoratti_apply, jump_annihilation, point_annihilation, pseudo_exponential, sample_state, Coord,
    ExponentialState, ProductState, PseudoExponentialSpec,
};
pub use space::{FockVector, TruncatedFockSpace};

#[cfg(test)]
mod tests;
