use serde::{Deserialize, Serialize};

use super::{lambda_for, steady_coherence, Direction, Helicity, RoutingParams, ZeemanScheme};
use crate::{Result, C64};

/// How the dissipative channel enters the counter-rotating susceptibility.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossAccounting {
    /// Every counter-rotating pair sees Λ; the stretched pair is reported
    /// as `chi_loss` and excluded from `chi_eit`.
    #[default]
    Exclusive,
    /// `chi_eit` sums all pairs at Λ = 0 and the stretched pair at Λ is
    /// added on top as `chi_loss`.
    AsPrinted,
}

/// Effective susceptibility `χ̃ = χ_EIT + χ_loss` seen by the signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiralSusceptibility {
    chi_eit: C64,
    chi_loss: C64,
    total: C64,
}

impl ChiralSusceptibility {
    pub fn new(chi_eit: C64, chi_loss: C64) -> Self {
        ChiralSusceptibility {
            chi_eit,
            chi_loss,
            total: chi_eit + chi_loss,
        }
    }

    pub fn chi_eit(&self) -> C64 {
        self.chi_eit
    }

    pub fn chi_loss(&self) -> C64 {
        self.chi_loss
    }

    pub fn total(&self) -> C64 {
        self.total
    }
}

pub fn susceptibility(
    dir: Direction,
    scheme: &ZeemanScheme,
    params: &RoutingParams,
    control: Helicity,
) -> Result<ChiralSusceptibility> {
    susceptibility_with(dir, scheme, params, control, LossAccounting::default())
}

/// Zeeman-weighted susceptibility, normalized so that a resonant bare
/// two-level medium gives `χ̃ = i` (T = e^{−D}).
pub fn susceptibility_with(
    dir: Direction,
    scheme: &ZeemanScheme,
    params: &RoutingParams,
    control: Helicity,
    accounting: LossAccounting,
) -> Result<ChiralSusceptibility> {
    params.validate_weak_probe()?;
    let pairs = scheme.pairs(dir.probe_delta_m())?;
    let scale = 1.0 / (2.0 * scheme.reference_weight());
    let coherent = steady_coherence(params, C64::new(0.0, 0.0))?;

    let all: f64 = pairs.iter().map(|p| p.strength()).sum();
    if dir.is_co_rotating(control) {
        return Ok(ChiralSusceptibility::new(
            coherent * (scale * all),
            C64::new(0.0, 0.0),
        ));
    }

    let lossy = steady_coherence(params, lambda_for(dir, control, params))?;
    let (stretched, rest) = match pairs.split_last() {
        Some((last, rest)) => (last.strength(), rest),
        None => (0.0, &pairs[..]),
    };
    let chi_loss = lossy * (scale * stretched);
    let chi_eit = match accounting {
        LossAccounting::Exclusive => {
            lossy * (scale * rest.iter().map(|p| p.strength()).sum::<f64>())
        }
        LossAccounting::AsPrinted => coherent * (scale * all),
    };
    Ok(ChiralSusceptibility::new(chi_eit, chi_loss))
}
