use nalgebra::DMatrix;

use super::RoutingParams;
use crate::quantum::{
    build_liouvillian_recycled, hamiltonian_superoperator, linear_response, steady_state,
    DensityMatrix, LindbladTerm, Operator,
};
use crate::{Result, C64};

pub const GROUND: usize = 0;
pub const STORAGE: usize = 1;
pub const EXCITED: usize = 2;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn h_eff_matrix(delta_p: f64, delta: f64, omega_p: f64, omega_c: f64, lambda: C64) -> DMatrix<C64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[
            lambda,
            re(0.0),
            re(omega_p / 2.0),
            re(0.0),
            re(delta),
            re(omega_c / 2.0),
            re(omega_p / 2.0),
            re(omega_c / 2.0),
            re(delta_p),
        ],
    )
}

/// Effective Hamiltonian in the rotating frame,
///
/// ```text
/// ⎡ Λ     0     Ωp/2 ⎤
/// ⎢ 0     δ     Ωc/2 ⎥
/// ⎣ Ωp/2  Ωc/2  Δp   ⎦
/// ```
pub fn build_h_eff(params: &RoutingParams, lambda: C64) -> Result<Operator> {
    params.validate()?;
    Operator::new(h_eff_matrix(
        params.delta_p,
        params.two_photon_detuning(),
        params.omega_p,
        params.omega_c,
        lambda,
    ))
}

/// Decay of |e⟩ at total rate Γ, split equally into |g⟩ and |s⟩, and
/// dephasing of the ground coherence at `γ_gs`.
pub fn default_lindblad_terms(params: &RoutingParams) -> Result<Vec<LindbladTerm>> {
    Ok(vec![
        LindbladTerm::new(
            Operator::transition(3, GROUND, EXCITED)?,
            params.gamma / 2.0,
        )?,
        LindbladTerm::new(
            Operator::transition(3, STORAGE, EXCITED)?,
            params.gamma / 2.0,
        )?,
        // ρ_sg decays at rate/2
        LindbladTerm::new(
            Operator::transition(3, STORAGE, STORAGE)?,
            2.0 * params.gamma_gs,
        )?,
    ])
}

/// Weak-probe optical coherence `−⟨e|ρ|g⟩/(Ωp/2)` in steady state.
///
/// Evaluated to first order in Ωp around the prepared state `|g⟩⟨g|`, with
/// the norm lost through a non-Hermitian Λ returned to |g⟩. For Λ = 0 it
/// reduces to
/// `i / (Γ/2 + iΔp + (Ωc/2)²/(γ_gs + iδ))`; its imaginary part is the
/// absorption.
pub fn steady_coherence(params: &RoutingParams, lambda: C64) -> Result<C64> {
    params.validate_weak_probe()?;
    let h0 = Operator::new(h_eff_matrix(
        params.delta_p,
        params.two_photon_detuning(),
        0.0,
        params.omega_c,
        lambda,
    ))?;
    let l0 = build_liouvillian_recycled(&h0, &default_lindblad_terms(params)?)?;
    let probe = Operator::transition(3, GROUND, EXCITED)?.into_matrix()
        + Operator::transition(3, EXCITED, GROUND)?.into_matrix();
    let l1 = hamiltonian_superoperator(&(probe * re(0.5)));
    let rho1 = linear_response(&l0, &l1, &DensityMatrix::basis(3, GROUND)?)?;
    Ok(-rho1[(EXCITED, GROUND)] * 2.0)
}

/// Same quantity from the full (nonlinear in Ωp) steady state.
pub fn steady_coherence_full(params: &RoutingParams, lambda: C64) -> Result<C64> {
    params.validate()?;
    let h = build_h_eff(params, lambda)?;
    let l = build_liouvillian_recycled(&h, &default_lindblad_terms(params)?)?;
    let rho = steady_state(&l)?;
    Ok(-rho.get(EXCITED, GROUND) / (params.omega_p / 2.0))
}
