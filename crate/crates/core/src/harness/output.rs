//! CSV output of sweep rows.

use super::{HarnessError, ScenarioConfig, SweepRow};
use crate::channel::PathLossModel;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CSV_COLUMNS: [&str; 18] = [
    "protocol",
    "modulation",
    "M",
    "K",
    "detector",
    "snr_db",
    "rho",
    "alpha",
    "rate",
    "pathloss",
    "exponent",
    "d0d",
    "d0r_list",
    "trials",
    "errors",
    "ser",
    "stderr",
    "seed",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record(row: &SweepRow) -> Vec<String> {
    let sc: &ScenarioConfig = &row.scenario;
    let d0r = sc
        .geometry
        .d_sr()
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let pathloss = match sc.pathloss {
        PathLossModel::Bounded { .. } => "bounded".to_string(),
        PathLossModel::Indoor { .. } => "indoor".to_string(),
    };
    let (trials, errors, ser, stderr) = match &row.outcome {
        Ok(e) => (
            e.trials.to_string(),
            e.errors.to_string(),
            e.ser.to_string(),
            e.stderr.to_string(),
        ),
        Err(_) => Default::default(),
    };
    vec![
        sc.protocol.name().to_string(),
        sc.modulation.name().to_string(),
        sc.alphabet.to_string(),
        sc.relays().to_string(),
        sc.detector.name().to_string(),
        row.snr_db.to_string(),
        opt(sc.protocol.rho()),
        opt(sc.protocol.alpha()),
        sc.rate.to_string(),
        pathloss,
        sc.pathloss.exponent().to_string(),
        sc.geometry.d_sd().to_string(),
        d0r,
        trials,
        errors,
        ser,
        stderr,
        sc.seed.to_string(),
    ]
}

fn io_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Output(e.to_string())
}

/// Writes the header, then for the row group a provenance comment line
/// (version, master seed, scenario hash) followed by one line per row. Rows
/// whose point failed get empty result fields and an `# error` comment.
pub fn write_csv<W: Write>(
    base: &ScenarioConfig,
    rows: &[SweepRow],
    out: W,
) -> Result<(), HarnessError> {
    let mut out = out;
    writeln!(out, "{}", CSV_COLUMNS.join(",")).map_err(io_err)?;
    if !rows.is_empty() {
        writeln!(
            out,
            "# swipt-sim {} seed={} scenario={}",
            env!("CARGO_PKG_VERSION"),
            base.seed,
            base.hash()
        )
        .map_err(io_err)?;
    }
    for (i, row) in rows.iter().enumerate() {
        if let Err(msg) = &row.outcome {
            writeln!(
                out,
                "# error at point {i}: {}",
                msg.message.replace('\n', " ")
            )
            .map_err(io_err)?;
        }
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut out);
        w.write_record(record(row)).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// [`write_csv`] to a file, creating parent directories as needed.
pub fn emit_csv(base: &ScenarioConfig, rows: &[SweepRow], path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| HarnessError::Output(format!("{}: {e}", dir.display())))?;
    }
    let file =
        File::create(path).map_err(|e| HarnessError::Output(format!("{}: {e}", path.display())))?;
    write_csv(base, rows, BufWriter::new(file))
}
