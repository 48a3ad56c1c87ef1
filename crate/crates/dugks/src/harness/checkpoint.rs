//! Checkpoint files: fixed little-endian layout with a magic string and
//! a format version byte.
//!
//! Layout: magic `DUGKSCKP`, version u8, dim u8, set code u8, one zero
//! pad byte, mesh u32, then rt0, epsilon, tau, time as f64, the step
//! count and value count as u64, then the raw cell-major values. Every
//! number is little-endian, so a file round-trips bitwise on any host
//! this builds for.

use std::path::Path;

use crate::grid::{DistributionField, UniformPeriodicGrid};
use crate::kinetics::RelaxationModel;
use crate::velocity_set::{DiscreteVelocitySet, SetKind};
use crate::{Error, Result};

const MAGIC: [u8; 8] = *b"DUGKSCKP";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: u64 = 8 + 4 + 4 + 4 * 8 + 2 * 8;

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug)]
pub struct CheckpointData {
    pub field: DistributionField,
    pub model: RelaxationModel,
    pub step: u64,
}

pub fn write_checkpoint(
    path: &Path,
    field: &DistributionField,
    model: &RelaxationModel,
    step: u64,
) -> Result<()> {
    let values = field.current();
    let mut bytes = Vec::with_capacity(HEADER_LEN as usize + values.len() * 8);
    bytes.extend_from_slice(&MAGIC);
    bytes.push(FORMAT_VERSION);
    bytes.push(field.grid().dim() as u8);
    bytes.push(field.set().kind().code());
    bytes.push(0);
    bytes.extend_from_slice(&(field.grid().n() as u32).to_le_bytes());
    bytes.extend_from_slice(&field.set().rt0().to_le_bytes());
    bytes.extend_from_slice(&model.epsilon().to_le_bytes());
    bytes.extend_from_slice(&model.tau().to_le_bytes());
    bytes.extend_from_slice(&field.time().to_le_bytes());
    bytes.extend_from_slice(&step.to_le_bytes());
    bytes.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<CheckpointData> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let got = bytes.len() as u64;
    if got < HEADER_LEN {
        return Err(Error::CheckpointTruncated {
            needed: HEADER_LEN,
            got,
        });
    }
    if bytes[0..8] != MAGIC {
        return Err(Error::CheckpointMagic);
    }
    let version = bytes[8];
    if version != FORMAT_VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let dim = bytes[9] as usize;
    let set_kind = SetKind::from_code(bytes[10])
        .ok_or_else(|| Error::CheckpointExtent(format!("unknown velocity set code {}", bytes[10])))?;
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let rt0 = f64_at(16);
    let epsilon = f64_at(24);
    let tau = f64_at(32);
    let time = f64_at(40);
    let step = u64::from_le_bytes(bytes[48..56].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[56..64].try_into().unwrap());

    let set = DiscreteVelocitySet::from_kind(set_kind, rt0)?;
    if set.dim() != dim {
        return Err(Error::CheckpointExtent(format!(
            "dimension {dim} does not match the {}-dimensional velocity set",
            set.dim()
        )));
    }
    let grid = UniformPeriodicGrid::new(dim, n)
        .map_err(|e| Error::CheckpointExtent(format!("bad mesh: {e}")))?;
    let expected = (grid.cell_count() * set.len()) as u64;
    if count != expected {
        return Err(Error::CheckpointExtent(format!(
            "value count {count} does not match mesh {n} with {} velocities (expected {expected})",
            set.len()
        )));
    }
    let needed = HEADER_LEN + count * 8;
    if got < needed {
        return Err(Error::CheckpointTruncated { needed, got });
    }
    let model = RelaxationModel::with_tau(epsilon, tau)?;
    let mut field = DistributionField::new(grid, set)?;
    for (k, v) in field.current_mut().iter_mut().enumerate() {
        let off = (HEADER_LEN as usize) + k * 8;
        *v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    }
    field.set_time(time);
    Ok(CheckpointData { field, model, step })
}
