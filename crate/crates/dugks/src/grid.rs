//! Uniform periodic mesh and the two-buffer distribution storage.
//!
//! The domain is the unit box discretized into `n` cells per axis. A field
//! owns two dense buffers; a step reads the current one, writes the next
//! one, and `swap_buffers` publishes the result. Face interpolation is
//! dimension-by-dimension: an x-face interpolates only along x between its
//! two adjacent cells, and the characteristic foot point must stay inside
//! those cells (CFL condition).

use crate::velocity_set::DiscreteVelocitySet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPeriodicGrid {
    dim: usize,
    n: usize,
    dx: f64,
}

impl UniformPeriodicGrid {
    /// `n` cells per axis on the unit box; at least 4 so the interface
    /// stencils never see the same cell twice.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 4 {
            return Err(Error::Config(format!("mesh size must be at least 4, got {n}")));
        }
        Ok(Self {
            dim,
            n,
            dx: 1.0 / n as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn cell_count(&self) -> usize {
        match self.dim {
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    /// Periodic neighbor one cell over along `axis` (`dir` is +1 or -1).
    pub fn neighbor(&self, cell: usize, axis: usize, dir: i32) -> usize {
        debug_assert!(axis < self.dim);
        let n = self.n;
        match axis {
            0 => {
                let ix = cell % n;
                let nx = if dir > 0 {
                    if ix + 1 == n { 0 } else { ix + 1 }
                } else if ix == 0 {
                    n - 1
                } else {
                    ix - 1
                };
                cell - ix + nx
            }
            _ => {
                let iy = cell / n;
                let ny = if dir > 0 {
                    if iy + 1 == n { 0 } else { iy + 1 }
                } else if iy == 0 {
                    n - 1
                } else {
                    iy - 1
                };
                cell - iy * n + ny * n
            }
        }
    }

    /// Cell center coordinates; the second component is 0 in one dimension.
    pub fn center(&self, cell: usize) -> [f64; 2] {
        match self.dim {
            1 => [(cell as f64 + 0.5) * self.dx, 0.0],
            _ => {
                let ix = cell % self.n;
                let iy = cell / self.n;
                [(ix as f64 + 0.5) * self.dx, (iy as f64 + 0.5) * self.dx]
            }
        }
    }
}

/// A face sits on the `+axis` side of `cell`, between `cell` and its
/// periodic neighbor. Faces are indexed by their owning cell, so each axis
/// has exactly one face per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceIndex {
    pub axis: usize,
    pub cell: usize,
}

/// Distribution values for every cell and discrete velocity, stored
/// cell-major, plus the write buffer for the next time level.
#[derive(Debug, Clone)]
pub struct DistributionField {
    grid: UniformPeriodicGrid,
    set: DiscreteVelocitySet,
    data: Vec<f64>,
    scratch: Vec<f64>,
    time: f64,
}

impl DistributionField {
    pub fn new(grid: UniformPeriodicGrid, set: DiscreteVelocitySet) -> Result<Self> {
        if grid.dim() != set.dim() {
            return Err(Error::Config(format!(
                "grid dimension {} does not match velocity set dimension {}",
                grid.dim(),
                set.dim()
            )));
        }
        let len = grid.cell_count() * set.len();
        Ok(Self {
            grid,
            set,
            data: vec![0.0; len],
            scratch: vec![0.0; len],
            time: 0.0,
        })
    }

    pub fn grid(&self) -> &UniformPeriodicGrid {
        &self.grid
    }

    pub fn set(&self) -> &DiscreteVelocitySet {
        &self.set
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// Current (read) buffer, cell-major.
    pub fn current(&self) -> &[f64] {
        &self.data
    }

    pub fn current_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Next (write) buffer; contents are unspecified until a full phase
    /// has written every cell.
    pub fn next_mut(&mut self) -> &mut [f64] {
        &mut self.scratch
    }

    /// Read and write buffers at once, for update phases that stream from
    /// the current level into the next.
    pub fn buffers_mut(&mut self) -> (&[f64], &mut [f64]) {
        (&self.data, &mut self.scratch)
    }

    pub fn cell_values(&self, cell: usize) -> &[f64] {
        let nv = self.set.len();
        &self.data[cell * nv..(cell + 1) * nv]
    }

    /// Publish the next buffer and advance time by `dt`.
    pub fn swap_buffers(&mut self, dt: f64) {
        std::mem::swap(&mut self.data, &mut self.scratch);
        self.time += dt;
    }
}

/// Central interface value and slope for velocity `i` at `face`:
/// the average of the two adjacent cells and their difference over `dx`.
pub fn interface_value_and_slope(field: &DistributionField, face: FaceIndex, i: usize) -> (f64, f64) {
    let nv = field.set().len();
    let left = face.cell;
    let right = field.grid().neighbor(left, face.axis, 1);
    let fl = field.current()[left * nv + i];
    let fr = field.current()[right * nv + i];
    (0.5 * (fl + fr), (fr - fl) / field.grid().dx())
}

/// Value at the characteristic foot point `x_face - xi_a dt/2` for
/// velocity `i`, linear in the face-normal direction:
/// `(1/2 - beta) f_right + (1/2 + beta) f_left` with
/// `beta = xi_a dt / (2 dx)`. Exact for fields linear along the axis.
pub fn foot_point_value(field: &DistributionField, face: FaceIndex, i: usize, dt: f64) -> Result<f64> {
    let dx = field.grid().dx();
    let xi_a = field.set().xi()[i][face.axis];
    let shift = xi_a.abs() * dt * 0.5;
    if shift > 0.5 * dx {
        return Err(Error::CflViolation {
            shift,
            half_dx: 0.5 * dx,
        });
    }
    let beta = xi_a * dt / (2.0 * dx);
    let nv = field.set().len();
    let left = face.cell;
    let right = field.grid().neighbor(left, face.axis, 1);
    let fl = field.current()[left * nv + i];
    let fr = field.current()[right * nv + i];
    Ok((0.5 - beta) * fr + (0.5 + beta) * fl)
}
