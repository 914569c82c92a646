use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::SweepSpec;
use crate::error::RunError;
use crate::manifest::RunManifest;
use crate::runs;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Forward/backward transmission against two-photon detuning.
    Spectrum,
    /// Transmission over the (depth, detuning) grid.
    Map,
    /// Isolation against optical depth at zero detuning.
    Isolation,
    /// Qubit transmission for both control helicities.
    Flip,
    /// Per-state transmission, isolation, fidelity and tomography.
    Qubits,
    /// Spin-wave storage and retrieval in each direction.
    Storage,
    /// Fit the model to the M1 operating point.
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Map => "map",
            Command::Isolation => "isolation",
            Command::Flip => "flip",
            Command::Qubits => "qubits",
            Command::Storage => "storage",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qrouter", version, about = "Chiral atom-photon router sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

struct Output {
    name: String,
    contents: String,
}

fn table_output(stem: &str, t: &Table, format: Format) -> Output {
    match format {
        Format::Csv => Output {
            name: format!("{stem}.csv"),
            contents: t.to_csv(),
        },
        Format::Json => Output {
            name: format!("{stem}.json"),
            contents: json_text(&t.to_json_value()),
        },
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

fn produce(cmd: Command, spec: &SweepSpec, format: Format) -> Result<Vec<Output>, RunError> {
    let mut out = Vec::new();
    match cmd {
        Command::Spectrum => out.push(table_output("spectrum", &runs::run_spectrum(spec)?, format)),
        Command::Map => {
            for (dir, t) in runs::run_map(spec)? {
                out.push(table_output(&format!("map_{dir}"), &t, format));
            }
        }
        Command::Isolation => out.push(table_output(
            "isolation",
            &runs::run_isolation_vs_depth(spec)?,
            format,
        )),
        Command::Flip => out.push(table_output(
            "flip",
            &runs::run_helicity_flip(spec)?,
            format,
        )),
        Command::Qubits => {
            let r = runs::run_qubit_report(spec)?;
            out.push(table_output("qubits", &r.summary, format));
            out.push(Output {
                name: "qubits_detail.json".into(),
                contents: json_text(&r.details),
            });
        }
        Command::Storage => {
            let r = runs::run_storage(spec)?;
            out.push(table_output("storage", &r.summary, format));
            for (dir, w) in &r.waveforms {
                out.push(table_output(&format!("storage_{dir}_waveform"), w, format));
            }
            if let Some(c) = r.contrast_db {
                out.push(Output {
                    name: "storage_contrast.json".into(),
                    contents: json_text(&json!({ "diode_contrast_db": c })),
                });
            }
        }
        Command::Calibrate => {
            let c = runs::run_calibrate(spec)?;
            out.push(Output {
                name: "calibration.json".into(),
                contents: json_text(&serde_json::to_value(&c).expect("calibration serializes")),
            });
        }
    }
    Ok(out)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| RunError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs one subcommand and writes its outputs plus `manifest.json`.
/// Returns the names of the files written.
pub fn execute(cli: &Cli) -> Result<Vec<String>, RunError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        crate::error::ConfigError::invalid("--config", "a configuration file is required")
    })?;
    let mut spec = SweepSpec::from_path(path)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if cli.workers == 0 {
        return Err(crate::error::ConfigError::invalid("--workers", "must be at least 1").into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| crate::error::ConfigError::invalid("--workers", e.to_string()))?;
    let outputs = pool.install(|| produce(cli.command, &spec, cli.format))?;

    fs::create_dir_all(&cli.out).map_err(|e| RunError::Output {
        path: cli.out.display().to_string(),
        message: e.to_string(),
    })?;
    let mut names = Vec::new();
    for o in &outputs {
        write(&cli.out, &o.name, &o.contents)?;
        names.push(o.name.clone());
    }
    let manifest = RunManifest::new(cli.command.name(), &spec, names.clone());
    write(
        &cli.out,
        "manifest.json",
        &json_text(&serde_json::to_value(&manifest).expect("manifest serializes")),
    )?;
    names.push("manifest.json".into());
    Ok(names)
}

/// Parses arguments, runs, and maps failures to exit codes
/// (2 config, 3 solver, 1 output).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
