//! JSON run configuration.

use std::path::Path;

use qrouter::calibration::{FitOptions, M1Targets, M1_NOISE_FLOOR};
use qrouter::qubit::{encode, PolarizationQubit, RailImbalance};
use qrouter::routing::{Direction, Helicity, LossAccounting, RoutingParams, ZeemanScheme};
use qrouter::storage::PulseSequence;
use qrouter::units::mhz_to_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningUnit {
    Gamma,
    Mhz,
}

impl DetuningUnit {
    pub fn to_gamma(self, x: f64) -> f64 {
        match self {
            DetuningUnit::Gamma => x,
            DetuningUnit::Mhz => mhz_to_gamma(x),
        }
    }
}

/// Closed range `[min, max]` sampled at `steps` evenly spaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / n)
            .collect()
    }

    fn validate(&self, field: &'static str) -> Result<(), ConfigError> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(ConfigError::invalid(field, "bounds must be finite"));
        }
        if self.steps < 1 {
            return Err(ConfigError::invalid(field, "steps must be at least 1"));
        }
        if self.min > self.max {
            return Err(ConfigError::invalid(field, "min must not exceed max"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub label: String,
    pub theta: f64,
    pub phi: f64,
}

impl QubitSpec {
    pub fn state(&self) -> Result<PolarizationQubit, RunError> {
        Ok(encode(self.theta, self.phi)?)
    }
}

fn default_states() -> Vec<QubitSpec> {
    use std::f64::consts::{FRAC_PI_2, PI};
    [
        ("H", 0.0, 0.0),
        ("V", PI, 0.0),
        ("D", FRAC_PI_2, 0.0),
        ("R", FRAC_PI_2, FRAC_PI_2),
    ]
    .iter()
    .map(|&(label, theta, phi)| QubitSpec {
        label: label.into(),
        theta,
        phi,
    })
    .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Calibrated,
}

/// A number, or `"calibrated"` for the fitted detection floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseFloor {
    Value(f64),
    Preset(Preset),
}

impl NoiseFloor {
    pub fn value(self) -> f64 {
        match self {
            NoiseFloor::Value(v) => v,
            NoiseFloor::Preset(Preset::Calibrated) => M1_NOISE_FLOOR,
        }
    }
}

/// Explicit rail imbalance, or `"calibrated"` for the default fit at `depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rails {
    Explicit(RailImbalance),
    Preset(Preset),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageSpec {
    pub write_ns: f64,
    pub dark_ns: f64,
    pub read_ns: f64,
    pub edge_ns: f64,
    /// Control peak in Γ; `null` uses `params.omega_c`.
    pub control_peak: Option<f64>,
    pub input_fwhm_ns: f64,
    pub sample_ns: f64,
}

impl Default for StorageSpec {
    fn default() -> Self {
        StorageSpec {
            write_ns: 1000.0,
            dark_ns: 500.0,
            read_ns: 1000.0,
            edge_ns: 20.0,
            control_peak: None,
            input_fwhm_ns: 300.0,
            sample_ns: 2.0,
        }
    }
}

impl StorageSpec {
    pub fn sequence(&self, params: &RoutingParams) -> PulseSequence {
        PulseSequence::from_ns(
            self.write_ns,
            self.dark_ns,
            self.read_ns,
            self.control_peak.unwrap_or(params.omega_c),
            self.edge_ns,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    pub start_noise_floor: f64,
    pub targets: M1Targets,
    pub fit: FitOptions,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec {
            start_noise_floor: 0.008,
            targets: M1Targets::default(),
            fit: FitOptions::default(),
        }
    }
}

fn default_delta_range() -> Range {
    Range {
        min: -5.0,
        max: 5.0,
        steps: 101,
    }
}

fn default_depth_range() -> Range {
    Range {
        min: 0.0,
        max: 40.0,
        steps: 41,
    }
}

fn default_depth() -> f64 {
    14.0
}

fn default_helicity() -> Helicity {
    Helicity::Plus
}

fn default_directions() -> Vec<Direction> {
    vec![Direction::Forward, Direction::Backward]
}

fn default_shots() -> u64 {
    10_000
}

fn default_noise_floor() -> NoiseFloor {
    NoiseFloor::Value(0.0)
}

fn default_rails() -> Rails {
    Rails::Preset(Preset::Calibrated)
}

/// Sweep definition shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Unit of `delta_range`; required.
    pub detuning_unit: DetuningUnit,
    #[serde(default = "default_delta_range")]
    pub delta_range: Range,
    #[serde(default = "default_depth_range")]
    pub depth_range: Range,
    /// Optical depth for single-depth runs.
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default = "default_helicity")]
    pub helicity: Helicity,
    #[serde(default = "default_directions")]
    pub directions: Vec<Direction>,
    #[serde(default = "default_states")]
    pub qubit_states: Vec<QubitSpec>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_noise_floor")]
    pub noise_floor: NoiseFloor,
    #[serde(default)]
    pub params: RoutingParams,
    #[serde(default)]
    pub scheme: ZeemanScheme,
    #[serde(default)]
    pub loss_accounting: LossAccounting,
    #[serde(default = "default_rails")]
    pub rails: Rails,
    #[serde(default)]
    pub storage: StorageSpec,
    #[serde(default)]
    pub calibration: CalibrationSpec,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(ConfigError::from_serde)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Canonical serialization: every field present, fixed order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.delta_range.validate("delta_range")?;
        self.depth_range.validate("depth_range")?;
        if self.depth_range.min < 0.0 {
            return Err(ConfigError::invalid(
                "depth_range",
                "optical depth must be nonnegative",
            ));
        }
        if !(self.depth >= 0.0) || !self.depth.is_finite() {
            return Err(ConfigError::invalid(
                "depth",
                "must be finite and nonnegative",
            ));
        }
        if self.directions.is_empty() {
            return Err(ConfigError::invalid(
                "directions",
                "at least one direction is required",
            ));
        }
        let b = self.noise_floor.value();
        if !(b >= 0.0) || !b.is_finite() {
            return Err(ConfigError::invalid(
                "noise_floor",
                "must be finite and nonnegative",
            ));
        }
        self.params
            .validate_weak_probe()
            .map_err(|e| ConfigError::invalid("params", e.to_string()))?;
        for q in &self.qubit_states {
            encode(q.theta, q.phi)
                .map_err(|e| ConfigError::invalid("qubit_states", format!("{}: {e}", q.label)))?;
        }
        if let Rails::Explicit(r) = &self.rails {
            r.validate()
                .map_err(|e| ConfigError::invalid("rails", e.to_string()))?;
        }
        let seq = self.storage.sequence(&self.params);
        seq.validate()
            .map_err(|e| ConfigError::invalid("storage", e.to_string()))?;
        if !(self.storage.input_fwhm_ns > 0.0) || !(self.storage.sample_ns > 0.0) {
            return Err(ConfigError::invalid(
                "storage",
                "input_fwhm_ns and sample_ns must be positive",
            ));
        }
        Ok(())
    }

    /// Detuning grid in units of Γ, paired with the configured values.
    pub fn deltas(&self) -> Vec<(f64, f64)> {
        self.delta_range
            .points()
            .into_iter()
            .map(|d| (d, self.detuning_unit.to_gamma(d)))
            .collect()
    }

    pub fn rail_imbalance(&self) -> Result<RailImbalance, RunError> {
        match self.rails {
            Rails::Explicit(r) => Ok(r),
            Rails::Preset(Preset::Calibrated) => Ok(RailImbalance::calibrated(
                &self.params,
                &self.scheme,
                self.depth,
            )?),
        }
    }
}
