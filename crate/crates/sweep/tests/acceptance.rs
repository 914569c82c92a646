//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qrouter::calibration::{calibrate_m1, FitOptions, M1Targets};
use qrouter::quantum::eigenvalues;
use qrouter::qubit::{apply_channel, fidelity, DualRailChannel, PolarizationQubit, RailImbalance};
use qrouter::routing::*;
use qrouter::storage::*;
use qrouter::tomography::*;
use qrouter::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn analytic_coherence(p: &RoutingParams) -> C64 {
    let control = (p.omega_c / 2.0).powi(2) / C64::new(p.gamma_gs, p.two_photon_detuning());
    C64::i() / (C64::new(p.gamma / 2.0, p.delta_p) + control)
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for &oc in &[0.5, 1.0, 2.0] {
        for &delta in &[0.0, 0.1] {
            for k in 0..41 {
                let dp = -5.0 + 0.25 * k as f64;
                let p = RoutingParams {
                    delta_p: dp,
                    delta_c: dp - delta,
                    omega_p: 0.01,
                    omega_c: oc,
                    omega_diss: 0.0,
                    gamma: 1.0,
                    gamma_gs: 1e-3,
                };
                let exact = analytic_coherence(&p);
                let num = match steady_coherence(&p, C64::new(0.0, 0.0)) {
                    Ok(c) => c,
                    Err(e) => return outcome(false, format!("solver error {e}")),
                };
                worst = worst.max((num - exact).norm() / exact.norm());
            }
        }
    }
    outcome(
        worst < 1e-4,
        format!("max relative error {worst:.2e} over 246 points"),
    )
}

fn spectra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut herm, mut sum_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let dp = rng.random_range(-5.0..5.0);
        let p = RoutingParams {
            delta_p: dp,
            delta_c: dp - rng.random_range(-1.0..1.0),
            omega_p: rng.random_range(1e-3..0.1),
            omega_c: rng.random_range(0.0..3.0),
            omega_diss: rng.random_range(0.1..3.0),
            gamma: 1.0,
            gamma_gs: rng.random_range(0.0..0.05),
        };
        let g = p.gamma_eff();
        let e0 = eigenvalues(&build_h_eff(&p, C64::new(0.0, 0.0)).unwrap());
        herm = e0.iter().fold(herm, |m, z| m.max(z.im.abs()));
        let e1 = eigenvalues(&build_h_eff(&p, C64::new(0.0, -g / 2.0)).unwrap());
        let s: f64 = e1.iter().map(|z| z.im).sum();
        sum_err = sum_err.max((s + g / 2.0).abs());
    }
    outcome(
        herm < 1e-12 && sum_err < 1e-12,
        format!("max|Im λ| (Λ=0) {herm:.1e}, max|Σ Im λ + γ/2| {sum_err:.1e}"),
    )
}

fn transparency() -> Outcome {
    let s = ZeemanScheme::default();
    let p = RoutingParams {
        gamma_gs: 0.0,
        ..RoutingParams::default()
    };
    let f = susceptibility(Direction::Forward, &s, &p, Helicity::Plus)
        .unwrap()
        .total();
    let b = susceptibility(Direction::Backward, &s, &p, Helicity::Plus)
        .unwrap()
        .total();
    let mut far = 0.0f64;
    for delta in [-100.0, -50.0, 50.0, 100.0] {
        let q = RoutingParams::default().with_two_photon_detuning(delta);
        let f = susceptibility(Direction::Forward, &s, &q, Helicity::Plus)
            .unwrap()
            .total();
        let b = susceptibility(Direction::Backward, &s, &q, Helicity::Plus)
            .unwrap()
            .total();
        far = far.max((f - b).norm() / f.norm());
    }
    outcome(
        f.im < 1e-6 && b.im > 0.0 && far < 0.05,
        format!(
            "Im χ fwd {:.1e}, Im χ bwd {:.3}, far-detuned mismatch {:.2}%",
            f.im,
            b.im,
            100.0 * far
        ),
    )
}

fn figure_arithmetic() -> Outcome {
    // (label, T forward, T backward, isolation, insertion loss)
    let rows = [
        ("H", 0.93, 0.019, 16.80, 0.36),
        ("V", 0.96, 0.032, 14.77, 0.18),
        ("R", 0.94, 0.034, 14.43, 0.27),
        ("D", 0.94, 0.022, 16.29, 0.27),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, tf, tb, iso, il) in rows {
        let i = isolation_db(tf, tb, 0.0).unwrap();
        let l = insertion_loss_db(tf).unwrap();
        pass &= (i - iso).abs() <= 0.15 && (l - il).abs() <= 0.05;
        parts.push(format!("{label} {i:.2}/{l:.2}"));
    }
    outcome(pass, format!("isolation/IL dB: {}", parts.join(", ")))
}

fn calibrated_point() -> Outcome {
    let scheme = ZeemanScheme::default();
    let start = RoutingParams {
        omega_c: 0.3,
        omega_diss: 1.67,
        gamma_gs: 2.4e-4,
        ..RoutingParams::default()
    };
    let cal = match calibrate_m1(
        &start,
        0.008,
        &scheme,
        &M1Targets::default(),
        &FitOptions::default(),
    ) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("fit failed: {e}")),
    };
    let t = |dir, d| {
        directional_transmission(dir, &scheme, &cal.params, Helicity::Plus, d)
            .unwrap()
            .power
    };
    let (tf, tb) = (t(Direction::Forward, 14.0), t(Direction::Backward, 14.0));
    let iso = isolation_db(
        t(Direction::Forward, 40.0),
        t(Direction::Backward, 40.0),
        cal.noise_floor,
    )
    .unwrap();
    outcome(
        (0.91..=0.95).contains(&tf)
            && (0.022..=0.030).contains(&tb)
            && (19.0..=21.0).contains(&iso),
        format!(
            "T_f {tf:.4}, T_b {tb:.4}, I(40) {iso:.2} dB with b = {:.2e} ({} iterations)",
            cal.noise_floor, cal.iterations
        ),
    )
}

fn depth_scaling() -> Outcome {
    let p = RoutingParams::default();
    let s = ZeemanScheme::default();
    let iso = |d| {
        let t = |dir| {
            directional_transmission(dir, &s, &p, Helicity::Plus, d)
                .unwrap()
                .power
        };
        isolation_db(t(Direction::Forward), t(Direction::Backward), 0.0).unwrap()
    };
    let ratio = iso(28.0) / iso(14.0);
    outcome(
        (ratio - 2.0).abs() < 1e-9,
        format!("I(28)/I(14) = {ratio:.12}"),
    )
}

fn helicity_reversal() -> Outcome {
    let s = ZeemanScheme::default();
    let mut worst = 0.0f64;
    for i in 0..10 {
        let p = RoutingParams::default().with_two_photon_detuning(-5.0 + 10.0 * i as f64 / 9.0);
        for j in 0..10 {
            let d = 40.0 * j as f64 / 9.0;
            let t = |dir, h| directional_transmission(dir, &s, &p, h, d).unwrap().power;
            worst = worst
                .max(
                    (t(Direction::Forward, Helicity::Plus)
                        - t(Direction::Backward, Helicity::Minus))
                    .abs(),
                )
                .max(
                    (t(Direction::Backward, Helicity::Plus)
                        - t(Direction::Forward, Helicity::Minus))
                    .abs(),
                );
        }
    }
    outcome(
        worst < 1e-9,
        format!("max |ΔT| {worst:.1e} over 10×10 grid"),
    )
}

fn tomography_suite() -> Outcome {
    let mle = |r: &[MeasurementRecord]| mle_reconstruct(r, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_phys = 0.0f64;
    for _ in 0..1000 {
        let records: Vec<MeasurementRecord> = Basis::ALL
            .iter()
            .map(|&b| {
                let n = rng.random_range(1..=10_000u64);
                MeasurementRecord::new(b, rng.random_range(0..=n), n).unwrap()
            })
            .collect();
        let r = mle(&records).rho_hat;
        worst_phys = worst_phys
            .max((r.trace() - 1.0).abs())
            .max(-r.min_eigenvalue());
    }

    let noiseless = Basis::ALL
        .iter()
        .map(|b| {
            let q = b.state();
            fidelity(
                &mle(&expected_records(&q.density(), 1_000_000).unwrap()).rho_hat,
                &q,
            )
        })
        .fold(1.0, f64::min);

    let p = RoutingParams::default();
    let scheme = ZeemanScheme::default();
    let rails = RailImbalance::calibrated(&p, &scheme, 14.0).unwrap();
    let ch = DualRailChannel::from_model(
        Direction::Forward,
        &scheme,
        &p,
        Helicity::Plus,
        14.0,
        &rails,
    )
    .unwrap();
    let targets = [
        ("H", PolarizationQubit::h(), 0.92),
        ("V", PolarizationQubit::v(), 0.97),
        ("D", PolarizationQubit::d(), 0.93),
        ("R", PolarizationQubit::r(), 0.94),
    ];
    let seeds = 20;
    let mut within = true;
    let mut parts = Vec::new();
    for (label, q, target) in targets {
        let out = apply_channel(&q, &ch).unwrap().rho_out;
        let mean = (0..seeds)
            .map(|seed| {
                fidelity(
                    &mle(&simulate_counts(&out, 10_000, seed).unwrap()).rho_hat,
                    &q,
                )
            })
            .sum::<f64>()
            / seeds as f64;
        within &= (mean - target).abs() <= 0.03;
        parts.push(format!("{label} {mean:.3}"));
    }
    outcome(
        worst_phys < 1e-12 && noiseless >= 0.999 && within,
        format!(
            "physicality defect {worst_phys:.1e}, noiseless min F {noiseless:.6}, mean F {}",
            parts.join(", ")
        ),
    )
}

fn spin_wave_diode() -> Outcome {
    let seq = PulseSequence::default();
    let opts = StorageOptions::default();
    let input = SignalWaveform::default_input(&seq, opts.sample_step).unwrap();
    let scheme = ZeemanScheme::default();
    let run = |dir, p: &RoutingParams| {
        simulate_storage(dir, Helicity::Plus, &seq, p, &scheme, &input, &opts).unwrap()
    };
    let p = RoutingParams::default();
    let f = run(Direction::Forward, &p);
    let b = run(Direction::Backward, &p);
    let contrast = diode_contrast(&f, &b).unwrap();

    let (d0, d1) = seq.dark_window();
    let mut decay_err = 0.0f64;
    for g in [p.gamma_gs, 0.02] {
        let r = run(Direction::Forward, &RoutingParams { gamma_gs: g, ..p });
        let t = r.output.time();
        let i0 = t.iter().position(|&x| x >= d0 + 5.0).unwrap();
        let i1 = t.iter().rposition(|&x| x <= d1).unwrap();
        let ratio = r.spin_wave[i1] / r.spin_wave[i0];
        let expected = (-g * (t[i1] - t[i0])).exp();
        decay_err = decay_err.max((ratio / expected - 1.0).abs());
    }
    let (ef, eb) = (f.retrieval_efficiency, b.retrieval_efficiency);
    outcome(
        ef >= 0.1 && eb <= 0.02 * ef && contrast >= 17.0 && decay_err < 0.01,
        format!(
            "η_f {ef:.4}, η_b {eb:.2e}, contrast {contrast:.1} dB, dark decay error {:.2e}",
            decay_err
        ),
    )
}

fn run_all(config: &Path, out: &Path, workers: &str) -> Result<(), String> {
    for cmd in [
        "spectrum",
        "map",
        "isolation",
        "flip",
        "qubits",
        "storage",
        "calibrate",
    ] {
        let code = qrouter_sweep::cli::main_with_args([
            "qrouter",
            cmd,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.join(cmd).to_str().unwrap(),
            "--workers",
            workers,
        ]);
        if code != 0 {
            return Err(format!("{cmd} exited with {code}"));
        }
    }
    Ok(())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in fs::read_dir(dir).unwrap() {
        let sub = sub.unwrap().path();
        for f in fs::read_dir(&sub).unwrap() {
            let f = f.unwrap().path();
            let name = f.strip_prefix(dir).unwrap().display().to_string();
            files.push((name, fs::read(&f).unwrap()));
        }
    }
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let config = tmp.path().join("config.json");
    fs::write(
        &config,
        r#"{"detuning_unit": "mhz", "delta_range": {"min": -30, "max": 30, "steps": 61},
            "depth_range": {"min": 0, "max": 40, "steps": 21}, "shots": 10000, "seed": 17,
            "noise_floor": "calibrated"}"#,
    )
    .unwrap();
    let mut snaps = Vec::new();
    for (i, workers) in ["1", "8", "1", "8"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        if let Err(e) = run_all(&config, &out, workers) {
            return outcome(false, e);
        }
        snaps.push(snapshot(&out));
    }
    let same = snaps.iter().all(|s| *s == snaps[0]);
    outcome(
        same,
        format!(
            "{} files × 4 runs (workers 1, 8, 1, 8) byte-identical: {same}",
            snaps[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence, Some(10)),
        ("non-Hermitian spectra", spectra, None),
        ("EIT transparency and dissipation", transparency, None),
        (
            "isolation and insertion-loss arithmetic",
            figure_arithmetic,
            Some(1),
        ),
        ("calibrated operating point", calibrated_point, Some(60)),
        ("depth scaling", depth_scaling, None),
        ("helicity reversal", helicity_reversal, None),
        ("tomography", tomography_suite, Some(120)),
        ("spin-wave diode", spin_wave_diode, Some(60)),
        ("determinism", determinism, None),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = limit.map(|s| format!(" / {s} s")).unwrap_or_default();
        println!(
            "{} {:>2} {name}: {} [{:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
