//! Command-line entry point for the solver harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dugks::benchmarks::CaseReport;
use dugks::harness::{
    run_case, run_convergence, run_resume, run_sweep, ConvergenceReport, Overrides, RunConfig,
};
use dugks::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dugks",
    version,
    about = "Finite-volume kinetic flow solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// TOML configuration file; omitted fields fall back to defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV, SVG, and checkpoint files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scheme variant: dugks, clr, or lw
    #[arg(long)]
    scheme: Option<String>,
    /// Relaxation parameter; with --mesh this defines the case to run
    #[arg(long)]
    eps: Option<f64>,
    /// Cells per direction; with --eps this defines the case to run
    #[arg(long)]
    mesh: Option<u32>,
    /// Advective CFL number in (0, 1)
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configured case
    Run(CommonOpts),
    /// Run every configured case and write the summary table
    Sweep(CommonOpts),
    /// Run the configured mesh-refinement ladder and fit the order
    Convergence(CommonOpts),
    /// Continue a single case from a checkpoint file
    Resume {
        #[command(flatten)]
        common: CommonOpts,
        /// Checkpoint written by an earlier run of the same case
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(common: &CommonOpts) -> Result<RunConfig> {
    let overrides = Overrides {
        scheme: common.scheme.clone(),
        eps: common.eps,
        mesh: common.mesh,
        eta: common.eta,
        out: common.out.clone(),
    };
    RunConfig::load(common.config.as_deref(), &overrides)
}

fn single_case(cfg: &RunConfig) -> Result<dugks::harness::ResolvedCase> {
    match cfg.cases.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::Config(
            "no case to run; pass --eps and --mesh or provide a config with one [[cases]] entry"
                .into(),
        )),
        many => Err(Error::Config(format!(
            "{} cases configured; `run` takes exactly one (use `sweep` for all of them)",
            many.len()
        ))),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let case = single_case(&cfg)?;
            let out = run_case(&cfg, &case)?;
            print_report(&out.report, &cfg);
            Ok(())
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let rows = run_sweep(&cfg)?;
            let mut failed = 0usize;
            for row in &rows {
                match &row.outcome {
                    Ok(report) => print_report(report, &cfg),
                    Err(e) => {
                        failed += 1;
                        println!(
                            "case eps {:e} mesh {}: FAILED: {e}",
                            row.case.epsilon, row.case.mesh
                        );
                    }
                }
            }
            println!(
                "sweep finished: {}/{} cases ok, summary in {}",
                rows.len() - failed,
                rows.len(),
                cfg.out_dir.join("summary.csv").display()
            );
            if failed > 0 {
                // surface the first failure's class as the exit code
                for row in rows {
                    row.outcome?;
                }
            }
            Ok(())
        }
        Command::Convergence(common) => {
            let cfg = load(&common)?;
            let report = run_convergence(&cfg)?;
            print_convergence(&report, &cfg);
            Ok(())
        }
        Command::Resume { common, checkpoint } => {
            let cfg = load(&common)?;
            let case = single_case(&cfg)?;
            let out = run_resume(&cfg, &case, &checkpoint)?;
            print_report(&out.report, &cfg);
            Ok(())
        }
    }
}

fn print_report(r: &CaseReport, cfg: &RunConfig) {
    println!(
        "case {} eps {:e} mesh {} (eta {}): {} steps to t = {:.6}",
        r.scheme.name(),
        r.epsilon,
        r.mesh,
        r.cfl,
        r.steps,
        r.end_time
    );
    println!("  relative L2 velocity error  {:.6e}", r.l2_velocity_error);
    if r.fitted_viscosity.is_nan() {
        println!(
            "  viscosity fit               skipped (sampled span shorter than one half-decay)"
        );
    } else {
        println!(
            "  viscosity fit               {:.6e} (expected {:.6e}, off by {:.2}%)",
            r.fitted_viscosity,
            r.expected_viscosity,
            100.0 * (r.fitted_viscosity / r.expected_viscosity - 1.0).abs()
        );
    }
    println!(
        "  conservation drift          mass {:.2e}, momentum {:.2e}",
        r.mass_drift, r.momentum_drift
    );
    println!("  wall time                   {:.2} s", r.wall_seconds);
    println!("  outputs in {}", cfg.out_dir.display());
}

fn print_convergence(report: &ConvergenceReport, cfg: &RunConfig) {
    println!(
        "convergence of {} at eps {:e}:",
        report.scheme.name(),
        report.epsilon
    );
    println!("  {:>6}  {:>12}  {:>14}", "mesh", "dx", "L2 error");
    for l in &report.levels {
        println!("  {:>6}  {:>12.6e}  {:>14.6e}", l.mesh, l.dx, l.l2_error);
    }
    println!(
        "  observed order {:.3} ({})",
        report.observed_order,
        if report.monotone {
            "errors decrease monotonically"
        } else {
            "NOT monotone"
        }
    );
    println!("  outputs in {}", cfg.out_dir.display());
}
