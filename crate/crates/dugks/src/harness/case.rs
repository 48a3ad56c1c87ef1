//! Single-case execution: initialize, advance to the end time, sample the
//! decay, and write the per-case outputs.
//!
//! All sampling is keyed to step indices, never to floating-point time
//! comparisons, so a resumed run revisits exactly the schedule the
//! uninterrupted run would have followed and finishes bitwise identical.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::benchmarks::{max_speed, relative_l2_error, CaseReport, TaylorVortexSpec};
use crate::grid::DistributionField;
use crate::harness::checkpoint::{read_checkpoint, write_checkpoint};
use crate::harness::config::{ResolvedCase, RunConfig};
use crate::harness::plot::{write_profile_svg, Series};
use crate::kinetics::{initialize_near_equilibrium, RelaxationModel};
use crate::scheme::{conserved_totals, SchemeConfig, Stepper};
use crate::velocity_set::DiscreteVelocitySet;
use crate::{Error, Result};

/// Runs that blow past this multiple of the initial peak speed are
/// aborted as diverged; physically meaningful runs only decay.
const RUNAWAY_FACTOR: f64 = 1e3;

/// A finished case: the report row plus the raw material tests and
/// plots are built from.
#[derive(Debug)]
pub struct CaseOutput {
    pub report: CaseReport,
    pub decay_samples: Vec<(f64, f64)>,
    pub final_field: DistributionField,
}

struct CaseContext {
    id: String,
    spec: TaylorVortexSpec,
    model: RelaxationModel,
    scheme: SchemeConfig,
    steps_total: u64,
    sample_every: u64,
}

fn build_context(cfg: &RunConfig, case: &ResolvedCase) -> Result<(CaseContext, DistributionField)> {
    let v = &cfg.vortex;
    let model = RelaxationModel::with_tau(case.epsilon, cfg.tau)?;
    let nu = model.viscosity(v.rt0);
    let spec = TaylorVortexSpec::new(v.a, v.b, v.u0, v.rho0, v.rt0, nu)?;
    let grid = crate::grid::UniformPeriodicGrid::new(2, case.mesh)?;
    let set = DiscreteVelocitySet::d2q9(v.rt0)?;
    let field = DistributionField::new(grid, set)?;
    let scheme = SchemeConfig::new(model, cfg.eta, cfg.scheme)?;
    let dt = scheme.dt(field.grid(), field.set());
    let end_time = cfg.end_time_half_decays * spec.t_half();
    // first step count whose time reaches the end time; the small slack
    // keeps an exact multiple from rounding up one extra step
    let steps_total = ((end_time / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let sample_every = (spec.t_half() / cfg.samples_per_half_decay as f64 / dt)
        .round()
        .max(1.0) as u64;
    let id = format!("{}_eps{:e}_n{}", cfg.scheme.name(), case.epsilon, case.mesh);
    Ok((
        CaseContext {
            id,
            spec,
            model,
            scheme,
            steps_total,
            sample_every,
        },
        field,
    ))
}

/// Runs one case from its initial condition.
pub fn run_case(cfg: &RunConfig, case: &ResolvedCase) -> Result<CaseOutput> {
    let (ctx, mut field) = build_context(cfg, case)?;
    initialize_near_equilibrium(&mut field, &ctx.spec, &ctx.model)?;
    advance(cfg, case, ctx, field, 0)
}

/// Continues a case from a checkpoint file. The checkpoint must match
/// the configuration it is resumed under.
pub fn run_resume(cfg: &RunConfig, case: &ResolvedCase, checkpoint: &Path) -> Result<CaseOutput> {
    let (ctx, fresh) = build_context(cfg, case)?;
    let data = read_checkpoint(checkpoint)?;
    let model_matches = data.model == ctx.model;
    let shape_matches =
        data.field.grid() == fresh.grid() && data.field.set() == fresh.set();
    if !model_matches || !shape_matches {
        return Err(Error::Config(format!(
            "checkpoint {} does not match the configured case (eps {:e}, mesh {}, rt0 {}, tau {})",
            checkpoint.display(),
            case.epsilon,
            case.mesh,
            cfg.vortex.rt0,
            cfg.tau
        )));
    }
    if data.step >= ctx.steps_total {
        return Err(Error::Config(format!(
            "checkpoint is at step {} but the run ends at step {}",
            data.step, ctx.steps_total
        )));
    }
    advance(cfg, case, ctx, data.field, data.step)
}

fn advance(
    cfg: &RunConfig,
    case: &ResolvedCase,
    ctx: CaseContext,
    mut field: DistributionField,
    start_step: u64,
) -> Result<CaseOutput> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let started = Instant::now();
    let mut stepper = Stepper::new(ctx.scheme, &field)?;
    let dt = stepper.dt();
    let runaway = RUNAWAY_FACTOR * ctx.spec.peak_speed(0.0);
    let before = conserved_totals(&field);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let sample = |field: &DistributionField, samples: &mut Vec<(f64, f64)>| -> Result<()> {
        let v = max_speed(field)?;
        if !v.is_finite() || v > runaway {
            return Err(Error::Diverged {
                time: field.time(),
                detail: format!("peak speed {v:e} against initial {:e}", ctx.spec.peak_speed(0.0)),
            });
        }
        samples.push((field.time(), v));
        Ok(())
    };

    for step in start_step..ctx.steps_total {
        if step % ctx.sample_every == 0 {
            sample(&field, &mut samples)?;
        }
        stepper.step(&mut field)?;
        let done = step + 1;
        if cfg.checkpoint_every_steps > 0
            && done % cfg.checkpoint_every_steps == 0
            && done < ctx.steps_total
        {
            let path = cfg.out_dir.join(format!("ckpt_{}_step{done}.bin", ctx.id));
            write_checkpoint(&path, &field, &ctx.model, done)?;
        }
    }
    sample(&field, &mut samples)?;

    let l2 = relative_l2_error(&field, &ctx.spec, field.time())?;
    let fitted = match ctx.spec.fit_decay_viscosity(&samples) {
        Ok(nu) => nu,
        // a segment shorter than one half-decay cannot support the fit;
        // the report carries NaN rather than a fabricated value
        Err(Error::InsufficientSamples { .. }) | Err(Error::Config(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    let after = conserved_totals(&field);
    let p_scale = before.density.abs() * ctx.spec.peak_speed(0.0);
    let report = CaseReport {
        scheme: cfg.scheme,
        epsilon: case.epsilon,
        mesh: case.mesh,
        cfl: cfg.eta,
        steps: ctx.steps_total,
        end_time: field.time(),
        l2_velocity_error: l2,
        fitted_viscosity: fitted,
        expected_viscosity: ctx.spec.nu(),
        delta_x: field.grid().dx() / case.epsilon,
        delta_t: dt / case.epsilon,
        mass_drift: (after.density - before.density).abs() / before.density.abs(),
        momentum_drift: ((after.momentum[0] - before.momentum[0]).abs())
            .max((after.momentum[1] - before.momentum[1]).abs())
            / p_scale,
        wall_seconds: started.elapsed().as_secs_f64(),
    };

    if cfg.checkpoint_every_steps > 0 {
        let path = cfg.out_dir.join(format!("ckpt_{}_final.bin", ctx.id));
        write_checkpoint(&path, &field, &ctx.model, ctx.steps_total)?;
    }
    write_decay_csv(&decay_path(&cfg.out_dir, &ctx.id), &ctx.id, &samples)?;
    write_profile_outputs(cfg, &ctx, &field)?;

    Ok(CaseOutput {
        report,
        decay_samples: samples,
        final_field: field,
    })
}

pub(crate) fn decay_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("decay_{id}.csv"))
}

pub(crate) fn profile_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("profile_{id}.csv"))
}

fn write_decay_csv(path: &Path, id: &str, samples: &[(f64, f64)]) -> Result<()> {
    let mut text = String::new();
    text.push_str("# decay csv v1\n");
    text.push_str(&format!("# case {id}\n"));
    text.push_str("t,max_speed\n");
    for (t, v) in samples {
        text.push_str(&format!("{t},{v}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Centerline profiles: `u_x` sampled up the vertical line nearest
/// `x = 1/2` and `u_y` along the horizontal line nearest `y = 1/2`,
/// each against the analytic value at the same coordinate and time. A
/// third section compares pressure (`rho * rt0` in this isothermal
/// model) along the vertical line; it is informational only and enters
/// no error norm.
fn write_profile_outputs(cfg: &RunConfig, ctx: &CaseContext, field: &DistributionField) -> Result<()> {
    let n = field.grid().n();
    let nv = field.set().len();
    let dx = field.grid().dx();
    let t = field.time();
    let mid = n / 2;
    let x0 = (mid as f64 + 0.5) * dx;
    let rt0 = ctx.spec.rt0();
    let moments_at = |cell: usize| field.set().moments(&field.current()[cell * nv..(cell + 1) * nv]);
    let u_at = |cell: usize| {
        let m = moments_at(cell);
        [m.momentum[0] / m.density, m.momentum[1] / m.density]
    };

    let mut vertical: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for iy in 0..n {
        let y = (iy as f64 + 0.5) * dx;
        let num = u_at(iy * n + mid)[0];
        let (ua, _) = ctx.spec.evaluate(x0, y, t);
        vertical.push((y, num, ua[0]));
    }
    let mut horizontal: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for ix in 0..n {
        let x = (ix as f64 + 0.5) * dx;
        let num = u_at(mid * n + ix)[1];
        let (ua, _) = ctx.spec.evaluate(x, x0, t);
        horizontal.push((x, num, ua[1]));
    }
    let mut pressure: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for iy in 0..n {
        let y = (iy as f64 + 0.5) * dx;
        let num = moments_at(iy * n + mid).density * rt0;
        let (_, pa) = ctx.spec.evaluate(x0, y, t);
        pressure.push((y, num, pa));
    }

    let path = profile_path(&cfg.out_dir, &ctx.id);
    let mut text = String::new();
    text.push_str("# profile csv v1\n");
    text.push_str(&format!("# case {}, t = {t}\n", ctx.id));
    text.push_str(&format!("# u_x along x = {x0}\n"));
    text.push_str("coordinate,u_numeric,u_analytic\n");
    for (c, num, ana) in &vertical {
        text.push_str(&format!("{c},{num},{ana}\n"));
    }
    text.push_str(&format!("# u_y along y = {x0}\n"));
    text.push_str("coordinate,u_numeric,u_analytic\n");
    for (c, num, ana) in &horizontal {
        text.push_str(&format!("{c},{num},{ana}\n"));
    }
    text.push_str(&format!("# p along x = {x0}\n"));
    text.push_str("coordinate,p_numeric,p_analytic\n");
    for (c, num, ana) in &pressure {
        text.push_str(&format!("{c},{num},{ana}\n"));
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    if cfg.emit_profile_plot {
        let svg_path = cfg.out_dir.join(format!("profile_{}.svg", ctx.id));
        let panels = [
            Series {
                title: format!("u_x along x = {x0:.4}"),
                x_label: "y",
                y_label: "u_x",
                numeric: vertical.iter().map(|(c, v, _)| (*c, *v)).collect(),
                analytic: vertical.iter().map(|(c, _, a)| (*c, *a)).collect(),
            },
            Series {
                title: format!("u_y along y = {x0:.4}"),
                x_label: "x",
                y_label: "u_y",
                numeric: horizontal.iter().map(|(c, v, _)| (*c, *v)).collect(),
                analytic: horizontal.iter().map(|(c, _, a)| (*c, *a)).collect(),
            },
        ];
        write_profile_svg(&svg_path, &ctx.id, &panels)?;
    }
    Ok(())
}
