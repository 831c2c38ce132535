//! Configuration, orchestration, rate fits and report emission.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod plot;
pub mod report;

use std::path::Path;

pub use config::{ExperimentConfig, ExperimentId};
pub use fit::{fit_rate, RateFit};
pub use report::{csv_string, write_csv, Report, ReportRow, CSV_HEADER};

use crate::error::{Error, Result};

/// Worker count from `QMLAB_THREADS`; `0` or unset means one per core.
pub fn thread_count() -> Result<usize> {
    match std::env::var("QMLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("QMLAB_THREADS must be a non-negative integer, got '{v}'"))),
        _ => Ok(0),
    }
}

/// Runs one experiment on a pool capped by `QMLAB_THREADS`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| experiments::dispatch(cfg))?;
    if report.rows.is_empty() {
        return Err(Error::Consistency("experiment produced no rows".into()));
    }
    Ok(report)
}

/// Writes the CSV to `out`, or returns it as text when no path is given.
pub fn emit_csv(report: &Report, out: Option<&Path>) -> Result<Option<String>> {
    let rows = report.sorted_rows();
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_csv(&rows, std::io::BufWriter::new(file))?;
            Ok(None)
        }
        None => Ok(Some(csv_string(&rows)?)),
    }
}

/// Writes the log-log plot of the report's fits; errors when there are none.
pub fn emit_svg(report: &Report, path: &Path) -> Result<()> {
    if report.fits.is_empty() {
        return Err(Error::Config(format!("experiment {} has no fitted sweep to plot", report.experiment)));
    }
    let svg = plot::render_svg(report.experiment.as_str(), &report.fits);
    std::fs::write(path, svg)?;
    Ok(())
}
