//! Mesh-refinement study at a fixed relaxation parameter: run the same
//! case on a geometric ladder of meshes and fit the observed order of
//! accuracy from the error decay.

use std::fmt::Write as _;

use crate::harness::case::run_case;
use crate::harness::config::{ResolvedCase, RunConfig};
use crate::scheme::SchemeVariant;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceLevel {
    pub mesh: usize,
    pub dx: f64,
    pub l2_error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub scheme: SchemeVariant,
    pub epsilon: f64,
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `ln(error)` against `ln(dx)`.
    pub observed_order: f64,
    /// Whether every refinement strictly reduced the error.
    pub monotone: bool,
}

/// Runs the configured refinement ladder (meshes `base * 2^k`) and
/// writes `convergence_{scheme}.csv` into the output directory.
pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let conv = cfg.convergence.as_ref().ok_or_else(|| {
        Error::Config("convergence study requested but no [convergence] table configured".into())
    })?;
    let mut levels = Vec::with_capacity(conv.levels as usize);
    for k in 0..conv.levels {
        let mesh = (conv.base_mesh as usize) << k;
        let case = ResolvedCase {
            epsilon: conv.epsilon,
            mesh,
        };
        let out = run_case(cfg, &case)?;
        let err = out.report.l2_velocity_error;
        if !err.is_finite() || err <= 0.0 {
            return Err(Error::Config(format!(
                "mesh {mesh} produced error {err:e}; cannot fit an order through it"
            )));
        }
        levels.push(ConvergenceLevel {
            mesh,
            dx: 1.0 / mesh as f64,
            l2_error: err,
        });
    }

    let observed_order = log_log_slope(&levels);
    let monotone = levels.windows(2).all(|w| w[1].l2_error < w[0].l2_error);
    let report = ConvergenceReport {
        scheme: cfg.scheme,
        epsilon: conv.epsilon,
        levels,
        observed_order,
        monotone,
    };
    write_convergence_csv(cfg, &report)?;
    Ok(report)
}

fn log_log_slope(levels: &[ConvergenceLevel]) -> f64 {
    let n = levels.len() as f64;
    let xs = levels.iter().map(|l| l.dx.ln());
    let ys = levels.iter().map(|l| l.l2_error.ln());
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.clone().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn write_convergence_csv(cfg: &RunConfig, report: &ConvergenceReport) -> Result<()> {
    let path = cfg
        .out_dir
        .join(format!("convergence_{}.csv", report.scheme.name()));
    let mut text = String::from("# convergence csv v1\n");
    let _ = writeln!(text, "# epsilon = {:e}", report.epsilon);
    text.push_str("mesh,dx,l2_error\n");
    for l in &report.levels {
        let _ = writeln!(text, "{},{:e},{:e}", l.mesh, l.dx, l.l2_error);
    }
    let _ = writeln!(
        text,
        "# observed_order = {:.6} (monotone = {})",
        report.observed_order, report.monotone
    );
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
