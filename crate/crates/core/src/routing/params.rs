use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Largest probe Rabi frequency (units of Γ) accepted for susceptibility
/// evaluation.
pub const WEAK_PROBE_LIMIT: f64 = 0.1;

/// Rates and detunings of the three-level model, in units of Γ.
///
/// The two-photon detuning `δ = Δp − Δc` is derived, never stored.
/// `Default` gives the parameter set fitted to the M1 operating point
/// (D = 14, δ = 0); see [`crate::calibration`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingParams {
    /// Probe (signal) detuning Δp.
    pub delta_p: f64,
    /// Control detuning Δc.
    pub delta_c: f64,
    /// Probe Rabi frequency Ωp.
    pub omega_p: f64,
    /// Control Rabi frequency Ωc.
    pub omega_c: f64,
    /// Rabi frequency Ω of the dissipative coupling.
    pub omega_diss: f64,
    /// Decay rate of |e⟩; the unit of everything else.
    pub gamma: f64,
    /// Ground-state coherence decay rate.
    pub gamma_gs: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            delta_p: 0.0,
            delta_c: 0.0,
            omega_p: 0.01,
            omega_c: M1_OMEGA_C,
            omega_diss: M1_OMEGA_DISS,
            gamma: 1.0,
            gamma_gs: M1_GAMMA_GS,
        }
    }
}

// `calibration::calibrate_m1` started from Ωc = 0.3, Ω = 1.67,
// γ_gs = 2.4e-4, b = 0.008.
pub(crate) const M1_OMEGA_C: f64 = 0.301_021_302_5;
pub(crate) const M1_OMEGA_DISS: f64 = 1.674_413_558_5;
pub(crate) const M1_GAMMA_GS: f64 = 2.395_962_052e-4;

impl RoutingParams {
    pub fn two_photon_detuning(&self) -> f64 {
        self.delta_p - self.delta_c
    }

    /// Sets δ by moving the probe detuning, keeping Δc fixed.
    pub fn with_two_photon_detuning(mut self, delta: f64) -> Self {
        self.delta_p = self.delta_c + delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta_p", self.delta_p),
            ("delta_c", self.delta_c),
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("omega_diss", self.omega_diss),
            ("gamma", self.gamma),
            ("gamma_gs", self.gamma_gs),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega_p <= 0.0 {
            return Err(Error::param(
                "omega_p",
                "probe Rabi frequency must be positive",
            ));
        }
        if self.omega_c < 0.0 {
            return Err(Error::param("omega_c", "must be nonnegative"));
        }
        if self.omega_diss < 0.0 {
            return Err(Error::param("omega_diss", "must be nonnegative"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::param("gamma", "decay rate must be positive"));
        }
        if self.gamma_gs < 0.0 {
            return Err(Error::param("gamma_gs", "must be nonnegative"));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the weak-probe bound.
    pub fn validate_weak_probe(&self) -> Result<()> {
        self.validate()?;
        if self.omega_p > WEAK_PROBE_LIMIT {
            return Err(Error::param(
                "omega_p",
                format!(
                    "{} exceeds the weak-probe limit {WEAK_PROBE_LIMIT}",
                    self.omega_p
                ),
            ));
        }
        Ok(())
    }

    pub fn gamma_eff(&self) -> f64 {
        self.omega_diss * self.omega_diss / self.gamma
    }
}

/// Control-field helicity σ = ±1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn value(self) -> i32 {
        match self {
            Helicity::Plus => 1,
            Helicity::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

impl TryFrom<i32> for Helicity {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Helicity::Plus),
            -1 => Ok(Helicity::Minus),
            _ => Err(Error::param(
                "helicity",
                format!("must be +1 or -1, got {v}"),
            )),
        }
    }
}

impl From<Helicity> for i32 {
    fn from(h: Helicity) -> i32 {
        h.value()
    }
}

impl fmt::Display for Helicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Propagation direction of the signal: forward is port 1 → 2 along +z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    /// Change of magnetic quantum number driven by the signal photon.
    /// Reversing `k` reverses the helicity seen by the atoms.
    pub fn probe_delta_m(self) -> i32 {
        match self {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }

    /// Signal and control drive the same Δm: coherent (EIT) coupling.
    pub fn is_co_rotating(self, control: Helicity) -> bool {
        self.probe_delta_m() == control.value()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `γ_eff = Ω²/Γ`
pub fn gamma_eff(omega_diss: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::param(
            "gamma",
            format!("must be positive, got {gamma}"),
        ));
    }
    if !(omega_diss >= 0.0) {
        return Err(Error::param(
            "omega_diss",
            format!("must be nonnegative, got {omega_diss}"),
        ));
    }
    Ok(omega_diss * omega_diss / gamma)
}

/// Non-Hermitian ground-state shift Λ: zero when signal and control are
/// co-rotating, `−iγ_eff/2` otherwise.
pub fn lambda_for(dir: Direction, control: Helicity, params: &RoutingParams) -> C64 {
    if dir.is_co_rotating(control) {
        C64::new(0.0, 0.0)
    } else {
        C64::new(0.0, -0.5 * params.gamma_eff())
    }
}
