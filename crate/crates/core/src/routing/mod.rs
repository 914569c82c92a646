//! Three-level routing model: effective Hamiltonian, direction- and
//! helicity-dependent non-Hermiticity, Zeeman-weighted chiral
//! susceptibilities and transmission figures of merit.
//!
//! Level order in every 3×3 matrix is `(|g⟩, |s⟩, |e⟩)`.

mod hamiltonian;
mod params;
mod susceptibility;
mod transmission;
mod zeeman;

pub use hamiltonian::{
    build_h_eff, default_lindblad_terms, steady_coherence, steady_coherence_full, EXCITED, GROUND,
    STORAGE,
};
pub use params::{gamma_eff, lambda_for, Direction, Helicity, RoutingParams, WEAK_PROBE_LIMIT};
pub use susceptibility::{
    susceptibility, susceptibility_with, ChiralSusceptibility, LossAccounting,
};
pub use transmission::{
    directional_transmission, insertion_loss_db, isolation_db, transmission, Transmission,
};
pub use zeeman::{clebsch_gordan, DipolePair, ZeemanScheme};
