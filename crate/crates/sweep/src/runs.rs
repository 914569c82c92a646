//! Sweep drivers behind each subcommand. Grid points are evaluated with
//! rayon inside whatever pool the caller installs; `collect` keeps input
//! order, so results never depend on scheduling.

use qrouter::calibration::{calibrate_m1, Calibration};
use qrouter::qubit::{apply_channel, fidelity, DualRailChannel};
use qrouter::routing::{
    insertion_loss_db, isolation_db, susceptibility_with, transmission, ChiralSusceptibility,
    Direction, Helicity,
};
use qrouter::storage::{contrast_db, simulate_storage, SignalWaveform, StorageOptions};
use qrouter::tomography::{
    mle_reconstruct, simulate_counts, ComplexMatrixJson, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use qrouter::units::ns_to_gamma_time;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::SweepSpec;
use crate::error::{ConfigError, RunError};
use crate::table::{Cell, Table};

fn chi(
    spec: &SweepSpec,
    dir: Direction,
    control: Helicity,
    delta: f64,
) -> Result<ChiralSusceptibility, RunError> {
    let p = spec.params.with_two_photon_detuning(delta);
    Ok(susceptibility_with(
        dir,
        &spec.scheme,
        &p,
        control,
        spec.loss_accounting,
    )?)
}

fn power(c: &ChiralSusceptibility, depth: f64) -> Result<f64, RunError> {
    Ok(transmission(c, depth)?.power)
}

/// Forward and backward transmission against δ at the configured depth.
pub fn run_spectrum(spec: &SweepSpec) -> Result<Table, RunError> {
    let rows: Vec<Vec<Cell>> = spec
        .deltas()
        .par_iter()
        .map(|&(label, delta)| {
            let tf = power(
                &chi(spec, Direction::Forward, spec.helicity, delta)?,
                spec.depth,
            )?;
            let tb = power(
                &chi(spec, Direction::Backward, spec.helicity, delta)?,
                spec.depth,
            )?;
            Ok(vec![label.into(), tf.into(), tb.into()])
        })
        .collect::<Result<_, RunError>>()?;
    let mut t = Table::new(vec!["delta", "t_forward", "t_backward"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Transmission over the (D, δ) grid, one table per requested direction,
/// rows sorted by D then δ.
pub fn run_map(spec: &SweepSpec) -> Result<Vec<(Direction, Table)>, RunError> {
    if spec.delta_range.steps < 2 || spec.depth_range.steps < 2 {
        return Err(ConfigError::invalid(
            "delta_range/depth_range",
            "map needs at least 2 steps on each axis",
        )
        .into());
    }
    let deltas = spec.deltas();
    let depths = spec.depth_range.points();
    spec.directions
        .iter()
        .map(|&dir| {
            let chis: Vec<ChiralSusceptibility> = deltas
                .par_iter()
                .map(|&(_, d)| chi(spec, dir, spec.helicity, d))
                .collect::<Result<_, _>>()?;
            let mut t = Table::new(vec!["depth", "delta", "transmission"]);
            for &depth in &depths {
                for ((label, _), c) in deltas.iter().zip(&chis) {
                    t.push(vec![depth.into(), (*label).into(), power(c, depth)?.into()]);
                }
            }
            Ok((dir, t))
        })
        .collect()
}

/// Isolation against depth at δ = 0 with the configured noise floor.
pub fn run_isolation_vs_depth(spec: &SweepSpec) -> Result<Table, RunError> {
    let cf = chi(spec, Direction::Forward, spec.helicity, 0.0)?;
    let cb = chi(spec, Direction::Backward, spec.helicity, 0.0)?;
    let b = spec.noise_floor.value();
    let mut t = Table::new(vec!["depth", "t_forward", "t_backward", "isolation_db"]);
    for depth in spec.depth_range.points() {
        let (tf, tb) = (power(&cf, depth)?, power(&cb, depth)?);
        t.push(vec![
            depth.into(),
            tf.into(),
            tb.into(),
            isolation_db(tf, tb, b)?.into(),
        ]);
    }
    Ok(t)
}

fn channel(
    spec: &SweepSpec,
    dir: Direction,
    control: Helicity,
) -> Result<DualRailChannel, RunError> {
    let rails = spec.rail_imbalance()?;
    let p = spec.params.with_two_photon_detuning(0.0);
    Ok(DualRailChannel::from_model(
        dir,
        &spec.scheme,
        &p,
        control,
        spec.depth,
        &rails,
    )?)
}

/// Qubit transmission for both control helicities and both directions.
pub fn run_helicity_flip(spec: &SweepSpec) -> Result<Table, RunError> {
    let cases: Vec<(Helicity, Direction)> = [Helicity::Plus, Helicity::Minus]
        .iter()
        .flat_map(|&h| [Direction::Forward, Direction::Backward].map(|d| (h, d)))
        .collect();
    let blocks: Vec<Vec<Vec<Cell>>> = cases
        .par_iter()
        .map(|&(h, d)| {
            let ch = channel(spec, d, h)?;
            spec.qubit_states
                .iter()
                .map(|q| {
                    let res = apply_channel(&q.state()?, &ch)?;
                    Ok(vec![
                        h.value().into(),
                        d.as_str().into(),
                        q.label.clone().into(),
                        res.success_prob.into(),
                    ])
                })
                .collect::<Result<Vec<_>, RunError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(vec!["sigma", "direction", "state", "transmission"]);
    blocks.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

pub struct QubitReport {
    pub summary: Table,
    pub details: Value,
}

/// Figures of merit per qubit state, plus simulated tomography when
/// `shots > 0`.
pub fn run_qubit_report(spec: &SweepSpec) -> Result<QubitReport, RunError> {
    if spec.qubit_states.is_empty() {
        return Err(ConfigError::invalid("qubit_states", "at least one state is required").into());
    }
    let fwd = channel(spec, Direction::Forward, spec.helicity)?;
    let bwd = channel(spec, Direction::Backward, spec.helicity)?;
    let b = spec.noise_floor.value();
    let tomography = spec.shots > 0;

    let per_state: Vec<(Vec<Cell>, Value)> = spec
        .qubit_states
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let psi = q.state()?;
            let f = apply_channel(&psi, &fwd)?;
            let tb = apply_channel(&psi, &bwd)
                .map(|r| r.success_prob)
                .or_else(|e| match e {
                    qrouter::Error::FullyBlocked(p) => Ok(p),
                    e => Err(e),
                })?;
            let mut row: Vec<Cell> = vec![
                q.label.clone().into(),
                q.theta.into(),
                q.phi.into(),
                f.success_prob.into(),
                tb.into(),
                isolation_db(f.success_prob, tb, b)?.into(),
                insertion_loss_db(f.success_prob)?.into(),
                f.fidelity.into(),
            ];
            let mut detail = json!({
                "state": q.label,
                "rho_out": ComplexMatrixJson::from(f.rho_out.matrix()),
            });
            if tomography {
                let records =
                    simulate_counts(&f.rho_out, spec.shots, spec.seed.wrapping_add(i as u64))?;
                let rec = mle_reconstruct(&records, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
                row.push(fidelity(&rec.rho_hat, &psi).into());
                row.push(rec.rho_hat.purity().into());
                detail["records"] = serde_json::to_value(&records).expect("records serialize");
                detail["reconstruction"] = serde_json::to_value(&rec).expect("result serializes");
            }
            Ok((row, detail))
        })
        .collect::<Result<_, RunError>>()?;

    let mut columns = vec![
        "state",
        "theta",
        "phi",
        "t_forward",
        "t_backward",
        "isolation_db",
        "insertion_loss_db",
        "fidelity",
    ];
    if tomography {
        columns.extend(["tomography_fidelity", "tomography_purity"]);
    }
    let mut summary = Table::new(columns);
    let mut details = Vec::new();
    for (row, d) in per_state {
        summary.push(row);
        details.push(d);
    }
    Ok(QubitReport {
        summary,
        details: Value::Array(details),
    })
}

pub struct StorageReport {
    pub waveforms: Vec<(Direction, Table)>,
    pub summary: Table,
    /// Forward over backward retrieval, when both directions ran.
    pub contrast_db: Option<f64>,
}

pub fn run_storage(spec: &SweepSpec) -> Result<StorageReport, RunError> {
    let seq = spec.storage.sequence(&spec.params);
    let opts = StorageOptions {
        sample_step: ns_to_gamma_time(spec.storage.sample_ns),
        ..StorageOptions::default()
    };
    let input = SignalWaveform::gaussian(
        seq.write_duration / 2.0,
        ns_to_gamma_time(spec.storage.input_fwhm_ns),
        0.0,
        seq.write_duration,
        opts.sample_step,
    )?;
    let results = spec
        .directions
        .par_iter()
        .map(|&dir| {
            let r = simulate_storage(
                dir,
                spec.helicity,
                &seq,
                &spec.params,
                &spec.scheme,
                &input,
                &opts,
            )?;
            Ok((dir, r))
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let mut summary = Table::new(vec!["direction", "retrieval_efficiency", "spin_wave_peak"]);
    let mut waveforms = Vec::new();
    for (dir, r) in &results {
        summary.push(vec![
            dir.as_str().into(),
            r.retrieval_efficiency.into(),
            r.spin_wave_peak.into(),
        ]);
        let mut w = Table::new(vec!["time_ns", "re_amp", "im_amp", "abs2"]);
        for (t, a) in r.output.time().iter().zip(r.output.amplitude()) {
            w.push(vec![
                qrouter::units::gamma_time_to_ns(*t).into(),
                a.re.into(),
                a.im.into(),
                a.norm_sqr().into(),
            ]);
        }
        waveforms.push((*dir, w));
    }
    let eff = |d: Direction| {
        results
            .iter()
            .find(|(x, _)| *x == d)
            .map(|(_, r)| r.retrieval_efficiency)
    };
    let contrast_db = match (eff(Direction::Forward), eff(Direction::Backward)) {
        (Some(f), Some(b)) => Some(contrast_db(f, b)?),
        _ => None,
    };
    Ok(StorageReport {
        waveforms,
        summary,
        contrast_db,
    })
}

pub fn run_calibrate(spec: &SweepSpec) -> Result<Calibration, RunError> {
    let c = &spec.calibration;
    Ok(calibrate_m1(
        &spec.params,
        c.start_noise_floor,
        &spec.scheme,
        &c.targets,
        &c.fit,
    )?)
}
