//! Small open quantum systems: operators, density matrices, Lindblad
//! superoperators, steady states and time evolution.
//!
//! Superoperators act on column-stacked density matrices, so that
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

mod density;
mod evolve;
mod liouvillian;
mod operator;
mod steady;

pub use density::DensityMatrix;
pub use evolve::{evolve, DrivenLiouvillian, EvolveOptions, Generator};
pub use liouvillian::{
    build_liouvillian, build_liouvillian_recycled, hamiltonian_superoperator, unvectorize,
    vectorize, LindbladTerm, Liouvillian,
};
pub use operator::{eigenvalues, Operator};
pub use steady::{linear_response, steady_state};

/// Largest Hilbert-space dimension the dense routines are meant for.
pub const MAX_DIM: usize = 16;
