//! Spin-wave storage and directional retrieval.
//!
//! A single Λ system is driven by a time-dependent control and by the
//! signal, treated as a weak coherent amplitude `a(t)` coupled to the
//! `|g⟩ ↔ |e⟩` transition at rate `Γc`:
//!
//! ```text
//! Ωp(t)    = 2 √Γc · ε · a_in(t)
//! a_out(t) = a_in(t) − i √Γc · ρ_eg(t) / ε
//! ```
//!
//! with `ε` small enough that the atomic response is linear. Efficiency is
//! the output energy in the read window over the input energy.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quantum::{
    build_liouvillian_recycled, evolve, hamiltonian_superoperator, DensityMatrix,
    DrivenLiouvillian, EvolveOptions, Operator,
};
use crate::routing::{
    build_h_eff, default_lindblad_terms, lambda_for, Direction, Helicity, RoutingParams,
    ZeemanScheme, EXCITED, GROUND, STORAGE,
};
use crate::units::{gamma_time_to_ns, ns_to_gamma_time};
use crate::{Error, Result, C64};

/// Floor on the backward efficiency in [`diode_contrast`].
pub const CONTRAST_FLOOR: f64 = 1e-12;

/// Write / dark / read control sequence. Times in 1/Γ, Rabi frequency in Γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    pub write_duration: f64,
    pub dark_time: f64,
    pub read_duration: f64,
    pub control_peak: f64,
    /// Half-width of each smoothed edge.
    pub edge_smoothing: f64,
}

impl Default for PulseSequence {
    fn default() -> Self {
        PulseSequence::from_ns(
            1000.0,
            500.0,
            1000.0,
            RoutingParams::default().omega_c,
            20.0,
        )
    }
}

impl PulseSequence {
    pub fn from_ns(write: f64, dark: f64, read: f64, control_peak: f64, edge: f64) -> Self {
        PulseSequence {
            write_duration: ns_to_gamma_time(write),
            dark_time: ns_to_gamma_time(dark),
            read_duration: ns_to_gamma_time(read),
            control_peak,
            edge_smoothing: ns_to_gamma_time(edge),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("write_duration", self.write_duration),
            ("dark_time", self.dark_time),
            ("read_duration", self.read_duration),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.control_peak >= 0.0) || !self.control_peak.is_finite() {
            return Err(Error::param(
                "control_peak",
                "must be finite and nonnegative",
            ));
        }
        let e = self.edge_smoothing;
        if !(e >= 0.0) || e >= self.write_duration / 4.0 {
            return Err(Error::param(
                "edge_smoothing",
                "must be nonnegative and below a quarter of the write window",
            ));
        }
        if e >= self.read_duration / 4.0 || 2.0 * e >= self.dark_time {
            return Err(Error::param("edge_smoothing", "edges would overlap"));
        }
        Ok(())
    }

    pub fn read_start(&self) -> f64 {
        self.write_duration + self.dark_time
    }

    pub fn read_end(&self) -> f64 {
        self.read_start() + self.read_duration
    }

    /// End of the falling edge of the read pulse.
    pub fn total_duration(&self) -> f64 {
        self.read_end() + self.edge_smoothing
    }

    /// Interval with the control fully off.
    pub fn dark_window(&self) -> (f64, f64) {
        (
            self.write_duration + self.edge_smoothing,
            self.read_start() - self.edge_smoothing,
        )
    }

    /// Interval over which retrieved light is collected.
    pub fn read_window(&self) -> (f64, f64) {
        (
            self.read_start() - self.edge_smoothing,
            self.total_duration(),
        )
    }
}

fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

// 0 → 1 across [edge − w, edge + w]
fn rise(t: f64, edge: f64, w: f64) -> f64 {
    if t >= edge + w {
        return 1.0;
    }
    if t < edge - w {
        return 0.0;
    }
    smootherstep((t - edge + w) / (2.0 * w))
}

/// Control Rabi frequency at time `t`: on from 0 to the end of the write
/// window and across the read window, off in between. Edges are odd about
/// the nominal switching times, so the pulse area is unchanged.
pub fn control_envelope(seq: &PulseSequence, t: f64) -> f64 {
    let w = seq.edge_smoothing;
    let write = 1.0 - rise(t, seq.write_duration, w);
    let read = rise(t, seq.read_start(), w) * (1.0 - rise(t, seq.read_end(), w));
    seq.control_peak * (write + read)
}

/// Complex envelope sampled on a strictly increasing grid (1/Γ).
#[derive(Clone, Debug, PartialEq)]
pub struct SignalWaveform {
    time: Vec<f64>,
    amplitude: Vec<C64>,
}

impl SignalWaveform {
    pub fn new(time: Vec<f64>, amplitude: Vec<C64>) -> Result<Self> {
        if time.len() != amplitude.len() {
            return Err(Error::DimensionMismatch {
                expected: time.len(),
                found: amplitude.len(),
            });
        }
        if time.len() < 2 {
            return Err(Error::param("time", "need at least two samples"));
        }
        if time.iter().any(|t| !t.is_finite()) || time.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "time",
                "grid must be finite and strictly increasing",
            ));
        }
        if amplitude
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::param("amplitude", "must be finite"));
        }
        Ok(SignalWaveform { time, amplitude })
    }

    /// Gaussian packet with the given intensity FWHM, sampled every `step`
    /// over `[start, end]` and normalized to unit energy.
    pub fn gaussian(center: f64, fwhm: f64, start: f64, end: f64, step: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !(step > 0.0) || !(end > start) {
            return Err(Error::param(
                "waveform",
                "need fwhm > 0, step > 0 and end > start",
            ));
        }
        let n = ((end - start) / step).round() as usize;
        let time: Vec<f64> = (0..=n)
            .map(|i| start + (end - start) * i as f64 / n as f64)
            .collect();
        // amplitude width is √2 × the intensity width
        let sigma_i = fwhm / (2.0 * (2.0 * LN_2).sqrt());
        let amplitude = time
            .iter()
            .map(|t| {
                C64::new(
                    (-(t - center).powi(2) / (4.0 * sigma_i * sigma_i)).exp(),
                    0.0,
                )
            })
            .collect();
        let w = SignalWaveform::new(time, amplitude)?;
        let e = w.energy();
        Ok(w.scaled(1.0 / e.sqrt()))
    }

    /// Default input: 300 ns FWHM, centered in the write window.
    pub fn default_input(seq: &PulseSequence, step: f64) -> Result<Self> {
        Self::gaussian(
            seq.write_duration / 2.0,
            ns_to_gamma_time(300.0),
            0.0,
            seq.write_duration,
            step,
        )
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn scaled(mut self, k: f64) -> Self {
        self.amplitude.iter_mut().for_each(|a| *a *= k);
        self
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn at(&self, t: f64) -> C64 {
        let n = self.time.len();
        if t < self.time[0] || t > self.time[n - 1] {
            return C64::new(0.0, 0.0);
        }
        let i = self.time.partition_point(|&x| x <= t).clamp(1, n - 1);
        let (t0, t1) = (self.time[i - 1], self.time[i]);
        let f = (t - t0) / (t1 - t0);
        self.amplitude[i - 1] * (1.0 - f) + self.amplitude[i] * f
    }

    /// Trapezoidal `∫|a|² dt`.
    pub fn energy(&self) -> f64 {
        self.energy_between(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Trapezoidal energy of the samples inside `[from, to]`.
    pub fn energy_between(&self, from: f64, to: f64) -> f64 {
        let mut e = 0.0;
        for i in 1..self.time.len() {
            let (t0, t1) = (self.time[i - 1], self.time[i]);
            if t0 >= from && t1 <= to {
                e += 0.5
                    * (t1 - t0)
                    * (self.amplitude[i - 1].norm_sqr() + self.amplitude[i].norm_sqr());
            }
        }
        e
    }

    /// Energy-weighted mean time.
    pub fn centroid(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..self.time.len() {
            let dt = self.time[i] - self.time[i - 1];
            let (p0, p1) = (
                self.amplitude[i - 1].norm_sqr(),
                self.amplitude[i].norm_sqr(),
            );
            num += 0.5 * dt * (p0 * self.time[i - 1] + p1 * self.time[i]);
            den += 0.5 * dt * (p0 + p1);
        }
        num / den
    }

    /// `time_ns,re_amp,im_amp,abs2` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_ns,re_amp,im_amp,abs2\n");
        for (t, a) in self.time.iter().zip(&self.amplitude) {
            let _ = writeln!(
                s,
                "{:.8e},{:.8e},{:.8e},{:.8e}",
                gamma_time_to_ns(*t),
                a.re,
                a.im,
                a.norm_sqr()
            );
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageOptions {
    /// Signal scale ε.
    pub epsilon: f64,
    /// Output sampling interval (1/Γ).
    pub sample_step: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for StorageOptions {
    fn default() -> Self {
        StorageOptions {
            epsilon: 1e-3,
            sample_step: ns_to_gamma_time(2.0),
            rtol: 1e-8,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StorageResult {
    pub output: SignalWaveform,
    pub retrieval_efficiency: f64,
    /// Peak stored amplitude `|ρ_gs|/ε` in the dark window.
    pub spin_wave_peak: f64,
    /// `|ρ_gs|/ε` on the output grid.
    pub spin_wave: Vec<f64>,
}

fn coupling_superop(a: usize, b: usize, imaginary: bool) -> Result<DMatrix<C64>> {
    // (|a⟩⟨b| + h.c.)/2, or i(|b⟩⟨a| − |a⟩⟨b|)/2 for the quadrature
    let ab = Operator::transition(3, a, b)?.into_matrix();
    let ba = Operator::transition(3, b, a)?.into_matrix();
    let v = if imaginary {
        (ba - ab) * C64::new(0.0, 0.5)
    } else {
        (ab + ba) * C64::new(0.5, 0.0)
    };
    Ok(hamiltonian_superoperator(&v))
}

pub fn simulate_storage(
    dir: Direction,
    control: Helicity,
    seq: &PulseSequence,
    params: &RoutingParams,
    scheme: &ZeemanScheme,
    input: &SignalWaveform,
    opts: &StorageOptions,
) -> Result<StorageResult> {
    seq.validate()?;
    params.validate()?;
    if !(opts.epsilon > 0.0) || !(opts.sample_step > 0.0) {
        return Err(Error::param(
            "storage options",
            "epsilon and sample_step must be positive",
        ));
    }
    let e_in = input.energy();
    if !(e_in > 0.0) {
        return Err(Error::param("input", "waveform carries no energy"));
    }
    let outside = e_in - input.energy_between(0.0, seq.write_duration);
    if outside > 1e-6 * e_in {
        return Err(Error::param(
            "input",
            "signal must lie inside the write window",
        ));
    }

    // Signal coupling follows the helicity-resolved dipole strength.
    let strength: f64 = scheme
        .pairs(dir.probe_delta_m())?
        .iter()
        .map(|p| p.strength())
        .sum();
    let gamma_c = 0.5 * params.gamma * strength / scheme.reference_weight();
    if gamma_c > params.gamma {
        return Err(Error::param(
            "scheme",
            "signal coupling exceeds the excited-state decay",
        ));
    }
    let root = gamma_c.sqrt();

    let bare = RoutingParams {
        omega_c: 0.0,
        omega_p: 1.0,
        ..*params
    };
    let mut h = build_h_eff(&bare, lambda_for(dir, control, params))?.into_matrix();
    h[(GROUND, EXCITED)] = C64::new(0.0, 0.0);
    h[(EXCITED, GROUND)] = C64::new(0.0, 0.0);
    let base = build_liouvillian_recycled(&Operator::new(h)?, &default_lindblad_terms(params)?)?;

    let seq_c = *seq;
    let drive_in = Arc::new(input.clone());
    let (re_in, im_in) = (Arc::clone(&drive_in), Arc::clone(&drive_in));
    let scale = 2.0 * root * opts.epsilon;
    let gen = DrivenLiouvillian::new(base)
        .with_drive(coupling_superop(STORAGE, EXCITED, false)?, move |t| {
            control_envelope(&seq_c, t)
        })?
        .with_drive(coupling_superop(GROUND, EXCITED, false)?, move |t| {
            scale * re_in.at(t).re
        })?
        .with_drive(coupling_superop(GROUND, EXCITED, true)?, move |t| {
            scale * im_in.at(t).im
        })?;

    let end = seq.total_duration();
    let n = (end / opts.sample_step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    let evolve_opts = EvolveOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_step: opts.sample_step,
        ..EvolveOptions::default()
    };
    let states = evolve(&DensityMatrix::basis(3, GROUND)?, &gen, &grid, &evolve_opts)?;

    let amplitude: Vec<C64> = grid
        .iter()
        .zip(&states)
        .map(|(&t, rho)| input.at(t) - C64::i() * root * rho.get(EXCITED, GROUND) / opts.epsilon)
        .collect();
    let spin_wave: Vec<f64> = states
        .iter()
        .map(|rho| rho.get(GROUND, STORAGE).norm() / opts.epsilon)
        .collect();
    let output = SignalWaveform::new(grid.clone(), amplitude)?;

    let (r0, r1) = seq.read_window();
    let retrieval_efficiency = output.energy_between(r0, r1) / e_in;
    let (d0, d1) = seq.dark_window();
    let spin_wave_peak = grid
        .iter()
        .zip(&spin_wave)
        .filter(|(&t, _)| t >= d0 && t <= d1)
        .map(|(_, &s)| s)
        .fold(0.0, f64::max);

    Ok(StorageResult {
        output,
        retrieval_efficiency,
        spin_wave_peak,
        spin_wave,
    })
}

/// `10·log10(η_f / max(η_b, floor))`
pub fn diode_contrast(forward: &StorageResult, backward: &StorageResult) -> Result<f64> {
    contrast_db(forward.retrieval_efficiency, backward.retrieval_efficiency)
}

pub fn contrast_db(forward: f64, backward: f64) -> Result<f64> {
    if !(forward > 0.0) {
        return Err(Error::param("forward efficiency", "must be positive"));
    }
    Ok(10.0 * (forward / backward.max(CONTRAST_FLOOR)).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_plateaus() {
        let seq = PulseSequence::default();
        let p = seq.control_peak;
        assert_eq!(control_envelope(&seq, seq.write_duration / 2.0), p);
        assert_eq!(
            control_envelope(&seq, seq.write_duration + seq.dark_time / 2.0),
            0.0
        );
        assert_eq!(
            control_envelope(&seq, seq.read_start() + seq.read_duration / 2.0),
            p
        );
        assert_eq!(control_envelope(&seq, 0.0), p);
        assert_eq!(control_envelope(&seq, seq.total_duration()), 0.0);
    }

    #[test]
    fn envelope_area() {
        let seq = PulseSequence::default();
        let n = 200_000;
        let end = seq.total_duration();
        let h = end / n as f64;
        let area: f64 = (0..n)
            .map(|i| control_envelope(&seq, (i as f64 + 0.5) * h) * h)
            .sum();
        let expected = seq.control_peak * (seq.write_duration + seq.read_duration);
        assert!((area - expected).abs() / expected < 0.02);
    }

    #[test]
    fn sequence_validation() {
        let mut seq = PulseSequence::default();
        assert!(seq.validate().is_ok());
        seq.edge_smoothing = seq.write_duration / 3.0;
        assert!(seq.validate().is_err());
        let neg = PulseSequence {
            dark_time: -1.0,
            ..PulseSequence::default()
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let w = SignalWaveform::gaussian(10.0, 3.0, 0.0, 20.0, 0.01).unwrap();
        assert!((w.energy() - 1.0).abs() < 1e-12);
        assert!((w.centroid() - 10.0).abs() < 1e-9);
        let half = w.at(10.0 + 1.5).norm_sqr() / w.at(10.0).norm_sqr();
        assert!((half - 0.5).abs() < 1e-4);
        assert_eq!(w.at(-1.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn csv_layout() {
        let w = SignalWaveform::new(vec![0.0, 1.0], vec![C64::new(1.0, -0.5); 2]).unwrap();
        let csv = w.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time_ns,re_amp,im_amp,abs2"));
        assert_eq!(
            lines.next(),
            Some("0.00000000e0,1.00000000e0,-5.00000000e-1,1.25000000e0")
        );
    }

    #[test]
    fn contrast_arithmetic() {
        assert!((contrast_db(0.1, 0.001).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(contrast_db(0.3, 0.3).unwrap(), 0.0);
        assert!((contrast_db(1e-3, 0.0).unwrap() - 90.0).abs() < 1e-9);
        assert!(contrast_db(0.0, 0.1).is_err());
    }

    #[test]
    fn nothing_written_without_control() {
        let seq = PulseSequence {
            control_peak: 0.0,
            ..PulseSequence::default()
        };
        let opts = StorageOptions::default();
        let input = SignalWaveform::default_input(&seq, opts.sample_step).unwrap();
        let r = simulate_storage(
            Direction::Forward,
            Helicity::Plus,
            &seq,
            &RoutingParams::default(),
            &ZeemanScheme::default(),
            &input,
            &opts,
        )
        .unwrap();
        // only the free decay of the optical coherence reaches the read window
        assert!(r.retrieval_efficiency < 1e-9, "{}", r.retrieval_efficiency);
    }
}
