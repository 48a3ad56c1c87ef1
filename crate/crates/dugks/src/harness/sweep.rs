//! Runs every configured case in order and writes the combined summary
//! table. A failing case is recorded in its row and does not stop the
//! remaining cases.

use std::fmt::Write as _;
use std::path::Path;

use crate::benchmarks::CaseReport;
use crate::harness::case::run_case;
use crate::harness::config::{ResolvedCase, RunConfig};
use crate::{Error, Result};

#[derive(Debug)]
pub struct SweepRow {
    pub case: ResolvedCase,
    pub outcome: Result<CaseReport>,
}

/// Runs all cases sequentially (each case already parallelizes over grid
/// rows internally) and writes `summary.csv` into the output directory.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    if cfg.cases.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut rows = Vec::with_capacity(cfg.cases.len());
    for case in &cfg.cases {
        let outcome = run_case(cfg, case).map(|out| out.report);
        rows.push(SweepRow {
            case: *case,
            outcome,
        });
    }
    write_summary_csv(&cfg.out_dir.join("summary.csv"), cfg.scheme.name(), &rows)?;
    Ok(rows)
}

fn write_summary_csv(path: &Path, scheme: &str, rows: &[SweepRow]) -> Result<()> {
    let mut text = String::from("# summary csv v1\n");
    text.push_str("scheme,epsilon,mesh,delta_x,delta_t,l2_error,nu_fit,nu_expected,wall_seconds,status\n");
    for row in rows {
        match &row.outcome {
            Ok(r) => {
                let _ = writeln!(
                    text,
                    "{},{:e},{},{:e},{:e},{:e},{:e},{:e},{:.3},ok",
                    r.scheme.name(),
                    r.epsilon,
                    r.mesh,
                    r.delta_x,
                    r.delta_t,
                    r.l2_velocity_error,
                    r.fitted_viscosity,
                    r.expected_viscosity,
                    r.wall_seconds,
                );
            }
            Err(e) => {
                // keep the table parseable: one row per case, errors
                // flattened into the status column
                let status = e.to_string().replace([',', '\n'], "; ");
                let _ = writeln!(
                    text,
                    "{scheme},{:e},{},,,,,,,{status}",
                    row.case.epsilon, row.case.mesh,
                );
            }
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
