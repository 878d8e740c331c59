use clap::{Args, Parser, Subcommand};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use swipt_core::detectors::DetectorKind;
use swipt_core::harness::{
    emit_csv, parse_config_text, run_figure, sweep_with, write_csv, HarnessError, RunSpec, SweepRow,
};

const USAGE_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

enum Status {
    Ok,
    Usage,
    Runtime,
}

#[derive(Parser, Debug)]
#[command(
    name = "swipt-sim",
    version,
    about = "SER simulator for noncoherent energy-harvesting AF relay networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// Parsed once per process, so the size gap between variants is irrelevant.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand, Debug)]
enum Command {
    /// Run one sweep described by a config file and/or flags.
    Run {
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Reproduce a figure scenario at desk scale.
    Figure {
        /// fig2, fig3a, fig3b, fig4, fig5a, fig5b, fig6a, fig6b, fig7, fig8 or fig10.
        preset: String,
        /// Output directory for the CSV files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long = "min-errors")]
        min_errors: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = ["mld", "gld"])]
        detector: Option<String>,
    },
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Relay protocol: power splitting, time switching or grid powered.
    #[arg(long, value_parser = ["ps", "ts", "grid"])]
    protocol: Option<String>,
    /// Noncoherent modulation.
    #[arg(long = "mod", value_parser = ["dpsk", "fsk"])]
    modulation: Option<String>,
    /// Alphabet size.
    #[arg(short = 'M')]
    alphabet: Option<usize>,
    /// Number of relays.
    #[arg(short = 'K')]
    relays: Option<usize>,
    /// Comma-separated SNR grid in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Power-splitting factor in (0, 1).
    #[arg(long)]
    rho: Option<f64>,
    /// Time-switching coefficient in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Information rate R in bit/s/Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Energy-harvesting efficiency in (0, 1].
    #[arg(long)]
    eta: Option<f64>,
    /// Source-destination distance.
    #[arg(long)]
    d0d: Option<f64>,
    /// Comma-separated source-relay distances.
    #[arg(long)]
    d0r: Option<String>,
    /// Path-loss model.
    #[arg(long, value_parser = ["bounded", "indoor"])]
    pathloss: Option<String>,
    /// Path-loss exponent.
    #[arg(long)]
    exponent: Option<f64>,
    /// Maximum-likelihood or Gauss-Legendre approximated detector.
    #[arg(long, value_parser = ["mld", "gld"])]
    detector: Option<String>,
    /// Trial cap per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a point once this many errors are seen.
    #[arg(long = "min-errors")]
    min_errors: Option<u64>,
    /// Trials per batch (the unit of parallel work and of seeding).
    #[arg(long)]
    batch: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep axis: snr, rho, alpha, position or M.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated values for the sweep axis.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k, val));
            }
        };
        put("protocol", self.protocol.clone());
        put("mod", self.modulation.clone());
        put("M", self.alphabet.map(|x| x.to_string()));
        put("K", self.relays.map(|x| x.to_string()));
        put("snr-db", self.snr_db.clone());
        put("rho", self.rho.map(|x| x.to_string()));
        put("alpha", self.alpha.map(|x| x.to_string()));
        put("rate", self.rate.map(|x| x.to_string()));
        put("eta", self.eta.map(|x| x.to_string()));
        put("d0d", self.d0d.map(|x| x.to_string()));
        put("d0r", self.d0r.clone());
        put("pathloss", self.pathloss.clone());
        put("exponent", self.exponent.map(|x| x.to_string()));
        put("detector", self.detector.clone());
        put("trials", self.trials.map(|x| x.to_string()));
        put("min-errors", self.min_errors.map(|x| x.to_string()));
        put("batch", self.batch.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put("sweep", self.sweep.clone());
        put("values", self.values.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        v
    }
}

fn progress(label: &str, row: &SweepRow) {
    match &row.outcome {
        Ok(e) => eprintln!(
            "{label} snr={} trials={} errors={} ser={:.3e} ({:.1}s)",
            row.snr_db, e.trials, e.errors, e.ser, e.wall_time
        ),
        Err(msg) => eprintln!("{label} snr={} failed: {msg}", row.snr_db),
    }
}

fn run(config: Option<PathBuf>, overrides: Overrides) -> Result<Status, HarnessError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        pairs = parse_config_text(&text)?;
    }
    pairs.extend(
        overrides
            .pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v)),
    );
    let spec = RunSpec::from_pairs(pairs)?;
    let label = format!(
        "{}/{}",
        spec.scenario.protocol.name(),
        spec.scenario.modulation
    );
    let rows = sweep_with(&spec.scenario, spec.axis, &spec.values, |row| {
        progress(&label, row)
    })?;
    match &spec.out {
        Some(path) => emit_csv(&spec.scenario, &rows, path)?,
        None => write_csv(&spec.scenario, &rows, io::stdout().lock())?,
    }
    Ok(summarize(rows.iter()))
}

/// Exit status implied by the sweep rows: usage problems win over runtime ones.
fn summarize<'a>(rows: impl Iterator<Item = &'a SweepRow>) -> Status {
    let mut status = Status::Ok;
    for row in rows {
        match &row.outcome {
            Err(e) if e.usage => return Status::Usage,
            Err(_) => status = Status::Runtime,
            Ok(_) => {}
        }
    }
    status
}

fn figure(
    preset: &str,
    out: PathBuf,
    trials: Option<u64>,
    min_errors: Option<u64>,
    seed: Option<u64>,
    detector: Option<String>,
) -> Result<Status, HarnessError> {
    let detector = detector.map(|d| {
        if d == "mld" {
            DetectorKind::mld()
        } else {
            DetectorKind::Gld
        }
    });
    let mut rows = Vec::new();
    let files = run_figure(
        preset,
        &out,
        |sc| {
            if let Some(t) = trials {
                sc.trials.max_trials = t;
                sc.trials.batch = sc.trials.batch.min(t.max(1));
            }
            if let Some(m) = min_errors {
                sc.trials.min_errors = m;
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(d) = detector {
                sc.detector = d;
            }
        },
        |name, row| {
            rows.push(row.clone());
            progress(name, row)
        },
    )?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(summarize(rows.iter()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run { config, overrides } => run(config, overrides),
        Command::Figure {
            preset,
            out,
            trials,
            min_errors,
            seed,
            detector,
        } => figure(&preset, out, trials, min_errors, seed, detector),
    };
    let _ = io::stdout().flush();
    match outcome {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Usage) => {
            eprintln!("error: at least one sweep point is invalid");
            ExitCode::from(USAGE_ERROR)
        }
        Ok(Status::Runtime) => {
            eprintln!("error: at least one sweep point failed");
            ExitCode::from(RUNTIME_ERROR)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::from(RUNTIME_ERROR)
            }
        }
    }
}
