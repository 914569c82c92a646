//! Dual-rail polarization qubits and the lossy channel of the router.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::quantum::DensityMatrix;
use crate::routing::{
    susceptibility, transmission, ChiralSusceptibility, Direction, Helicity, RoutingParams,
    ZeemanScheme,
};
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-12;
const BLOCKED: f64 = 1e-15;

/// Insertion losses the default rail imbalance reproduces at the M1 point.
pub const DEFAULT_RAIL_IL_DB: [f64; 2] = [0.36, 0.18];
/// Unpolarized fraction of the default channel.
pub const DEFAULT_BACKGROUND: f64 = 0.11;

/// `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationQubit {
    h: C64,
    v: C64,
}

impl PolarizationQubit {
    /// Normalized state from raw amplitudes.
    pub fn from_amplitudes(h: C64, v: C64) -> Result<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("qubit amplitudes vanish".into()));
        }
        Ok(PolarizationQubit { h: h / n, v: v / n })
    }

    pub fn h() -> Self {
        PolarizationQubit {
            h: C64::new(1.0, 0.0),
            v: C64::new(0.0, 0.0),
        }
    }

    pub fn v() -> Self {
        PolarizationQubit {
            h: C64::new(0.0, 0.0),
            v: C64::new(1.0, 0.0),
        }
    }

    pub fn d() -> Self {
        PolarizationQubit {
            h: C64::new(FRAC_1_SQRT_2, 0.0),
            v: C64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn a() -> Self {
        PolarizationQubit {
            h: C64::new(FRAC_1_SQRT_2, 0.0),
            v: C64::new(-FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn r() -> Self {
        PolarizationQubit {
            h: C64::new(FRAC_1_SQRT_2, 0.0),
            v: C64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    pub fn l() -> Self {
        PolarizationQubit {
            h: C64::new(FRAC_1_SQRT_2, 0.0),
            v: C64::new(0.0, -FRAC_1_SQRT_2),
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.h, self.v]
    }

    pub fn vector(&self) -> DVector<C64> {
        DVector::from_vec(vec![self.h, self.v])
    }

    pub fn density(&self) -> DensityMatrix {
        let psi = self.vector();
        DensityMatrix::from_matrix_unchecked(&psi * psi.adjoint())
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &PolarizationQubit) -> f64 {
        (self.h.conj() * other.h + self.v.conj() * other.v).norm_sqr()
    }
}

pub fn encode(theta: f64, phi: f64) -> Result<PolarizationQubit> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::param(
            "theta",
            format!("must lie in [0, π], got {theta}"),
        ));
    }
    if !phi.is_finite() {
        return Err(Error::param("phi", "must be finite"));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let q = PolarizationQubit {
        h: C64::new(c, 0.0),
        v: C64::from_polar(s, phi),
    };
    debug_assert!((q.h.norm_sqr() + q.v.norm_sqr() - 1.0).abs() < NORM_TOL);
    Ok(q)
}

/// Per-rail deviation from a polarization-blind channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RailImbalance {
    /// Optical-depth multipliers for the H and V rails.
    pub depth_scale: [f64; 2],
    /// Extra phase of the V rail (rad).
    pub phase_offset: f64,
    /// Unpolarized fraction p: `ρ → (1−p)ρ + p·I/2` after the rails.
    pub background: f64,
}

impl Default for RailImbalance {
    fn default() -> Self {
        RailImbalance {
            depth_scale: [1.0, 1.0],
            phase_offset: 0.0,
            background: 0.0,
        }
    }
}

impl RailImbalance {
    /// Depth scales that give each rail the requested forward insertion loss.
    pub fn from_insertion_loss(
        forward: &ChiralSusceptibility,
        depth: f64,
        il_db: [f64; 2],
        phase_offset: f64,
        background: f64,
    ) -> Result<Self> {
        let absorption = depth * forward.total().im;
        if !(absorption > 0.0) {
            return Err(Error::param(
                "depth",
                "forward rail must be absorbing to scale it",
            ));
        }
        let mut depth_scale = [0.0; 2];
        for (s, il) in depth_scale.iter_mut().zip(il_db) {
            if !(il >= 0.0) {
                return Err(Error::param(
                    "insertion_loss",
                    format!("must be nonnegative, got {il}"),
                ));
            }
            *s = il / 10.0 * std::f64::consts::LN_10 / absorption;
        }
        let r = RailImbalance {
            depth_scale,
            phase_offset,
            background,
        };
        r.validate()?;
        Ok(r)
    }

    /// Default imbalance fitted at `depth` with control helicity +1.
    pub fn calibrated(params: &RoutingParams, scheme: &ZeemanScheme, depth: f64) -> Result<Self> {
        let p = params.with_two_photon_detuning(0.0);
        let chi = susceptibility(Direction::Forward, scheme, &p, Helicity::Plus)?;
        Self::from_insertion_loss(&chi, depth, DEFAULT_RAIL_IL_DB, 0.0, DEFAULT_BACKGROUND)
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .depth_scale
            .iter()
            .any(|s| !(*s >= 0.0) || !s.is_finite())
        {
            return Err(Error::param(
                "depth_scale",
                "must be finite and nonnegative",
            ));
        }
        if !self.phase_offset.is_finite() {
            return Err(Error::param("phase_offset", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::param("background", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Diagonal lossy map on the {|H⟩, |V⟩} rails, optionally followed by an
/// unpolarized admixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualRailChannel {
    h_h: C64,
    h_v: C64,
    direction: Direction,
    background: f64,
}

impl DualRailChannel {
    pub fn new(h_h: C64, h_v: C64, direction: Direction) -> Result<Self> {
        for (name, h) in [("h_H", h_h), ("h_V", h_v)] {
            if !(h.norm() <= 1.0 + NORM_TOL) {
                return Err(Error::param(
                    "rail",
                    format!("|{name}| = {} exceeds 1", h.norm()),
                ));
            }
        }
        Ok(DualRailChannel {
            h_h,
            h_v,
            direction,
            background: 0.0,
        })
    }

    pub fn with_background(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(
                "background",
                format!("must lie in [0, 1], got {p}"),
            ));
        }
        self.background = p;
        Ok(self)
    }

    /// Both rails propagate through the same medium, each with its own
    /// depth scale.
    pub fn from_model(
        dir: Direction,
        scheme: &ZeemanScheme,
        params: &RoutingParams,
        control: Helicity,
        depth: f64,
        imbalance: &RailImbalance,
    ) -> Result<Self> {
        imbalance.validate()?;
        let chi = susceptibility(dir, scheme, params, control)?;
        let h = transmission(&chi, depth * imbalance.depth_scale[0])?.amplitude;
        let v = transmission(&chi, depth * imbalance.depth_scale[1])?.amplitude
            * C64::from_polar(1.0, imbalance.phase_offset);
        Self::new(h, v, dir)?.with_background(imbalance.background)
    }

    pub fn h_h(&self) -> C64 {
        self.h_h
    }

    pub fn h_v(&self) -> C64 {
        self.h_v
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    /// Unnormalized output; linear in `rho`.
    pub fn map(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if rho.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.nrows(),
            });
        }
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![self.h_h, self.h_v]));
        let out = &k * rho * k.adjoint();
        let p = self.background;
        let tr = out.trace();
        Ok(out * C64::new(1.0 - p, 0.0) + DMatrix::identity(2, 2) * (tr * (p / 2.0)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelResult {
    pub rho_out: DensityMatrix,
    pub success_prob: f64,
    pub fidelity: f64,
}

pub fn apply_channel(q: &PolarizationQubit, ch: &DualRailChannel) -> Result<ChannelResult> {
    let out = ch.map(q.density().matrix())?;
    let success_prob = out.trace().re;
    if success_prob < BLOCKED {
        return Err(Error::FullyBlocked(success_prob));
    }
    let rho_out = DensityMatrix::normalized(out)?;
    let fidelity = fidelity(&rho_out, q);
    Ok(ChannelResult {
        rho_out,
        success_prob,
        fidelity,
    })
}

/// `⟨ψ|ρ|ψ⟩`
pub fn fidelity(rho: &DensityMatrix, psi: &PolarizationQubit) -> f64 {
    rho.expectation_in(&psi.vector()).clamp(0.0, 1.0)
}

/// Uhlmann fidelity of two qubit states, `Tr ρσ + 2√(det ρ · det σ)`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 || sigma.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim().max(sigma.dim()),
        });
    }
    let overlap = (rho.matrix() * sigma.matrix()).trace().re;
    let det = |m: &DMatrix<C64>| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    let f = overlap + 2.0 * (det(rho.matrix()) * det(sigma.matrix())).sqrt();
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn encoding_poles_and_equator() {
        assert_eq!(encode(0.0, 0.0).unwrap(), PolarizationQubit::h());
        let v = encode(PI, 0.0).unwrap();
        assert!(v.overlap(&PolarizationQubit::v()) > 1.0 - 1e-15);
        let r = encode(PI / 2.0, PI / 2.0).unwrap();
        assert!((r.overlap(&PolarizationQubit::r()) - 1.0).abs() < 1e-15);
        assert!(encode(4.0, 0.0).is_err());
        assert!(encode(-0.1, 0.0).is_err());
    }

    #[test]
    fn lossless_channel_is_identity() {
        let ch = DualRailChannel::new(unit(), unit(), Direction::Forward).unwrap();
        let q = encode(1.1, 2.3).unwrap();
        let res = apply_channel(&q, &ch).unwrap();
        assert!((res.success_prob - 1.0).abs() < 1e-15);
        assert!((res.fidelity - 1.0).abs() < 1e-15);
        assert!(res.rho_out.max_abs_diff(&q.density()) < 1e-15);
    }

    #[test]
    fn projector_channel() {
        let ch = DualRailChannel::new(unit(), C64::new(0.0, 0.0), Direction::Forward).unwrap();
        let res = apply_channel(&PolarizationQubit::d(), &ch).unwrap();
        assert!((res.success_prob - 0.5).abs() < 1e-15);
        assert!((res.fidelity - 0.5).abs() < 1e-15);
        assert!(res.rho_out.max_abs_diff(&PolarizationQubit::h().density()) < 1e-15);
        let blocked = apply_channel(&PolarizationQubit::v(), &ch);
        assert!(matches!(blocked, Err(Error::FullyBlocked(_))));
    }

    #[test]
    fn balanced_loss() {
        let a = C64::new(0.93f64.sqrt(), 0.0);
        let ch = DualRailChannel::new(a, a, Direction::Forward).unwrap();
        let res = apply_channel(&PolarizationQubit::h(), &ch).unwrap();
        assert!((res.success_prob - 0.93).abs() < 1e-15);
        assert!((res.fidelity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplitudes_above_one_rejected() {
        assert!(DualRailChannel::new(C64::new(1.1, 0.0), unit(), Direction::Forward).is_err());
        let ch = DualRailChannel::new(unit(), unit(), Direction::Forward).unwrap();
        assert!(ch.with_background(1.5).is_err());
    }

    #[test]
    fn background_sets_fidelity() {
        let ch = DualRailChannel::new(unit(), unit(), Direction::Forward)
            .unwrap()
            .with_background(0.1)
            .unwrap();
        let res = apply_channel(&encode(0.4, 0.2).unwrap(), &ch).unwrap();
        assert!((res.fidelity - 0.95).abs() < 1e-14);
    }

    #[test]
    fn mixed_state_fidelity() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((fidelity(&mixed, &encode(0.7, 1.0).unwrap()) - 0.5).abs() < 1e-15);
        let h = PolarizationQubit::h().density();
        assert!((fidelity(&h, &PolarizationQubit::h()) - 1.0).abs() < 1e-15);
        assert!((state_fidelity(&mixed, &h).unwrap() - 0.5).abs() < 1e-15);
        assert!((state_fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn calibrated_rails_reproduce_insertion_loss() {
        let params = RoutingParams::default();
        let scheme = ZeemanScheme::default();
        let imb = RailImbalance::calibrated(&params, &scheme, 14.0).unwrap();
        let ch = DualRailChannel::from_model(
            Direction::Forward,
            &scheme,
            &params,
            Helicity::Plus,
            14.0,
            &imb,
        )
        .unwrap();
        let il = |t: f64| -10.0 * t.log10();
        assert!((il(ch.h_h().norm_sqr()) - 0.36).abs() < 1e-10);
        assert!((il(ch.h_v().norm_sqr()) - 0.18).abs() < 1e-10);
    }
}
