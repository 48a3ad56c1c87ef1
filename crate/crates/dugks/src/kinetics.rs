//! Local kinetic closures: equilibrium, BGK collision, and the first-order
//! Chapman-Enskog correction used for consistent initialization.
//!
//! The relaxation model is nondimensional: the collision term is
//! `-(f - f_eq) / (eps * tau)` with `tau` fixed at 1, so the stiffness knob
//! is `eps` alone and the kinematic viscosity is `eps * tau * rt0`. All
//! operations that derive bulk velocity guard density against a floor and
//! abort instead of clamping.

use crate::grid::DistributionField;
use crate::velocity_set::DiscreteVelocitySet;
use crate::{Error, Result};

/// Densities below this are treated as a solver failure, not rescued.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Bulk density and velocity at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    pub rho: f64,
    pub u: [f64; 2],
}

/// Space and time derivatives of the bulk fields at a point.
/// `grad_u[a][b]` is `d u_a / d x_b`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowDerivatives {
    pub dt_rho: f64,
    pub dt_u: [f64; 2],
    pub grad_rho: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
}

/// Relaxation parameters. `tau` is the O(1) nondimensional relaxation
/// time (1 by construction); `eps` scales it into the stiff regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationModel {
    epsilon: f64,
    tau: f64,
}

impl RelaxationModel {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_tau(epsilon, 1.0)
    }

    pub fn with_tau(epsilon: f64, tau: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "relaxation scale eps must be positive and finite, got {epsilon}"
            )));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!(
                "relaxation time tau must be positive and finite, got {tau}"
            )));
        }
        Ok(Self { epsilon, tau })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Effective relaxation time `eps * tau`; the collision rate divides
    /// by exactly this product.
    pub fn tau_eff(&self) -> f64 {
        self.epsilon * self.tau
    }

    /// Kinematic viscosity recovered in the hydrodynamic limit.
    pub fn viscosity(&self, rt0: f64) -> f64 {
        self.tau_eff() * rt0
    }
}

/// Single-velocity low-Mach equilibrium value. `cx_rt`/`cy_rt` are the
/// velocity components divided by `rt0` and `half_usq_rt` is
/// `|u|^2 / (2 rt0)`; keeping the formula here keeps every caller, hot
/// loops included, on the same arithmetic.
#[inline(always)]
pub fn equilibrium_value(
    w: f64,
    cx_rt: f64,
    cy_rt: f64,
    rho: f64,
    ux: f64,
    uy: f64,
    half_usq_rt: f64,
) -> f64 {
    let t1 = cx_rt * ux + cy_rt * uy;
    w * rho * (1.0 + t1 + 0.5 * t1 * t1 - half_usq_rt)
}

/// Writes the equilibrium distribution for `(rho, u)` into `out`.
/// Quadrature exactness makes its density and momentum reproduce the
/// inputs to round-off.
pub fn equilibrium_into(set: &DiscreteVelocitySet, rho: f64, u: [f64; 2], out: &mut [f64]) {
    debug_assert_eq!(out.len(), set.len());
    let rt0 = set.rt0();
    let half_usq_rt = 0.5 * (u[0] * u[0] + u[1] * u[1]) / rt0;
    for ((o, xi), w) in out.iter_mut().zip(set.xi()).zip(set.weights()) {
        *o = equilibrium_value(*w, xi[0] / rt0, xi[1] / rt0, rho, u[0], u[1], half_usq_rt);
    }
}

pub fn equilibrium(set: &DiscreteVelocitySet, state: &MacroState) -> Result<Vec<f64>> {
    if !(state.rho > 0.0) {
        return Err(Error::NonPhysicalField {
            site: "equilibrium input".into(),
            rho: state.rho,
            floor: 0.0,
        });
    }
    let mut out = vec![0.0; set.len()];
    equilibrium_into(set, state.rho, state.u, &mut out);
    Ok(out)
}

/// BGK collision rate per unit `eps`: `-(f - f_eq(rho, u)) / (eps tau)`
/// with `(rho, u)` taken from `f` itself. The round-off residual of the
/// deviation in the invariant span is projected out before dividing by
/// the relaxation time, so the rate carries exactly zero density and
/// momentum instead of roundoff amplified by `1/(eps tau)`.
pub fn collision_rate(
    set: &DiscreteVelocitySet,
    f: &[f64],
    model: &RelaxationModel,
) -> Result<Vec<f64>> {
    let m = set.moments(f);
    if m.density < DENSITY_FLOOR {
        return Err(Error::NonPhysicalField {
            site: "collision input".into(),
            rho: m.density,
            floor: DENSITY_FLOOR,
        });
    }
    let u = [m.momentum[0] / m.density, m.momentum[1] / m.density];
    let mut dev = vec![0.0; set.len()];
    equilibrium_into(set, m.density, u, &mut dev);
    for (di, fi) in dev.iter_mut().zip(f) {
        *di -= fi;
    }
    let res = set.moments(&dev);
    let inv_rt0 = 1.0 / set.rt0();
    let inv_tau_eff = 1.0 / model.tau_eff();
    Ok(dev
        .iter()
        .zip(set.weights())
        .zip(set.xi())
        .map(|((di, wi), xi)| {
            let invariant = wi * (res.density + (xi[0] * res.momentum[0] + xi[1] * res.momentum[1]) * inv_rt0);
            (di - invariant) * inv_tau_eff
        })
        .collect())
}

/// First-order Chapman-Enskog correction
/// `f1 = -tau (d_t + xi . grad) f_eq`, expanded through the bulk-field
/// derivatives by the chain rule. The full distribution at
/// Navier-Stokes order is `f_eq + eps * f1`.
pub fn chapman_enskog_f1(
    set: &DiscreteVelocitySet,
    state: &MacroState,
    derivs: &FlowDerivatives,
    model: &RelaxationModel,
) -> Result<Vec<f64>> {
    if !(state.rho > 0.0) {
        return Err(Error::NonPhysicalField {
            site: "chapman-enskog input".into(),
            rho: state.rho,
            floor: 0.0,
        });
    }
    let rt0 = set.rt0();
    let [ux, uy] = state.u;
    let half_usq_rt = 0.5 * (ux * ux + uy * uy) / rt0;
    let tau = model.tau();
    let mut out = vec![0.0; set.len()];
    for ((o, xi), w) in out.iter_mut().zip(set.xi()).zip(set.weights()) {
        let feq = equilibrium_value(*w, xi[0] / rt0, xi[1] / rt0, state.rho, ux, uy, half_usq_rt);
        let t1 = (xi[0] * ux + xi[1] * uy) / rt0;
        let dfeq_drho = feq / state.rho;
        // d f_eq / d u_a = (w rho / rt0) (xi_a (1 + t1) - u_a)
        let dfeq_du = [
            w * state.rho / rt0 * (xi[0] * (1.0 + t1) - ux),
            w * state.rho / rt0 * (xi[1] * (1.0 + t1) - uy),
        ];
        let time_rate = dfeq_drho * derivs.dt_rho
            + dfeq_du[0] * derivs.dt_u[0]
            + dfeq_du[1] * derivs.dt_u[1];
        let mut transport = 0.0;
        for b in 0..2 {
            let space_rate = dfeq_drho * derivs.grad_rho[b]
                + dfeq_du[0] * derivs.grad_u[0][b]
                + dfeq_du[1] * derivs.grad_u[1][b];
            transport += xi[b] * space_rate;
        }
        *o = -tau * (time_rate + transport);
    }
    Ok(out)
}

/// Provides bulk fields and their derivatives for initialization.
pub trait InitialCondition {
    fn state(&self, x: [f64; 2], t: f64) -> MacroState;
    fn derivatives(&self, x: [f64; 2], t: f64) -> FlowDerivatives;
}

/// Fills the field with `f_eq + eps * f1` evaluated at each cell center,
/// so the run starts on the Navier-Stokes manifold instead of relaxing
/// onto it through an initial layer.
pub fn initialize_near_equilibrium(
    field: &mut DistributionField,
    ic: &(impl InitialCondition + ?Sized),
    model: &RelaxationModel,
) -> Result<()> {
    let set = field.set().clone();
    let grid = *field.grid();
    let t = field.time();
    let nv = set.len();
    let eps = model.epsilon();
    let mut eq = vec![0.0; nv];
    for cell in 0..grid.cell_count() {
        let x = grid.center(cell);
        let state = ic.state(x, t);
        if !(state.rho > 0.0) {
            return Err(Error::NonPhysicalField {
                site: format!("initial condition at cell {cell}"),
                rho: state.rho,
                floor: 0.0,
            });
        }
        equilibrium_into(&set, state.rho, state.u, &mut eq);
        let f1 = chapman_enskog_f1(&set, &state, &ic.derivatives(x, t), model)?;
        let dst = &mut field.current_mut()[cell * nv..(cell + 1) * nv];
        for ((d, e), c) in dst.iter_mut().zip(&eq).zip(&f1) {
            *d = e + eps * c;
        }
    }
    Ok(())
}
