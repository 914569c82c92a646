//! Conversion between laboratory units and the dimensionless units used by
//! the model (Γ ≡ 1).

use std::f64::consts::PI;

/// Natural linewidth of the excited state, Γ = 2π × 6 MHz, in rad/s.
pub const GAMMA_RAD_PER_S: f64 = 2.0 * PI * 6.0e6;

/// Linewidth Γ/2π in MHz.
pub const GAMMA_MHZ: f64 = 6.0;

/// Nanoseconds to units of 1/Γ.
pub fn ns_to_gamma_time(ns: f64) -> f64 {
    ns * 1e-9 * GAMMA_RAD_PER_S
}

/// Units of 1/Γ to nanoseconds.
pub fn gamma_time_to_ns(t: f64) -> f64 {
    t / GAMMA_RAD_PER_S * 1e9
}

/// Frequency detuning Δ/2π in MHz to units of Γ.
pub fn mhz_to_gamma(mhz: f64) -> f64 {
    mhz / GAMMA_MHZ
}

pub fn gamma_to_mhz(x: f64) -> f64 {
    x * GAMMA_MHZ
}
