use serde::Serialize;

use super::{
    susceptibility, ChiralSusceptibility, Direction, Helicity, RoutingParams, ZeemanScheme,
};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transmission {
    /// Field amplitude h.
    pub amplitude: C64,
    /// Power transmission `T = |h|²`.
    pub power: f64,
}

/// Propagation through optical depth `D`: attenuation from `Im χ̃`,
/// phase from `Re χ̃`.
pub fn transmission(chi: &ChiralSusceptibility, depth: f64) -> Result<Transmission> {
    if !(depth >= 0.0) || !depth.is_finite() {
        return Err(Error::param(
            "depth",
            format!("must be finite and nonnegative, got {depth}"),
        ));
    }
    let x = chi.total();
    Ok(Transmission {
        amplitude: C64::new(-depth * x.im / 2.0, depth * x.re / 2.0).exp(),
        power: (-depth * x.im).exp(),
    })
}

/// Susceptibility followed by propagation, for one direction.
pub fn directional_transmission(
    dir: Direction,
    scheme: &ZeemanScheme,
    params: &RoutingParams,
    control: Helicity,
    depth: f64,
) -> Result<Transmission> {
    transmission(&susceptibility(dir, scheme, params, control)?, depth)
}

/// `10·log10((T_f + b)/(T_b + b))`
pub fn isolation_db(t_forward: f64, t_backward: f64, noise_floor: f64) -> Result<f64> {
    if !(noise_floor >= 0.0) {
        return Err(Error::param(
            "noise_floor",
            format!("must be nonnegative, got {noise_floor}"),
        ));
    }
    if !(t_forward >= 0.0) || !(t_backward >= 0.0) {
        return Err(Error::param("transmission", "must be nonnegative"));
    }
    let num = t_forward + noise_floor;
    let den = t_backward + noise_floor;
    if num <= 0.0 || den <= 0.0 {
        return Err(Error::param(
            "transmission",
            "isolation undefined for zero power",
        ));
    }
    Ok(10.0 * (num / den).log10())
}

/// `−10·log10(T_f)`
pub fn insertion_loss_db(t_forward: f64) -> Result<f64> {
    if !(t_forward > 0.0) {
        return Err(Error::param(
            "t_forward",
            format!("must be positive, got {t_forward}"),
        ));
    }
    Ok(-10.0 * t_forward.log10())
}
