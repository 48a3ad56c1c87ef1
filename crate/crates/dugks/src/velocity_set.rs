//! Discrete velocity sets with Gauss-Hermite weights.
//!
//! A set fixes the molecular velocities, their quadrature weights, and the
//! reference temperature `rt0` (the lattice R*T0). Moment identities up to
//! third order hold to round-off by construction, which is what makes the
//! low-Mach polynomial equilibrium reproduce density and momentum exactly.

use crate::{Error, Result};

/// Identifies the stencil family; stored in checkpoints so a resumed run
/// can rebuild the same set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    D1Q3,
    D2Q9,
}

impl SetKind {
    pub fn code(self) -> u8 {
        match self {
            SetKind::D1Q3 => 1,
            SetKind::D2Q9 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(SetKind::D1Q3),
            2 => Some(SetKind::D2Q9),
            _ => None,
        }
    }
}

/// Velocity density and momentum density of a distribution vector.
///
/// No division happens here; callers that need bulk velocity divide by
/// `density` themselves and own the near-vacuum handling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub density: f64,
    pub momentum: [f64; 2],
}

/// Immutable velocity set. One-dimensional sets keep the second velocity
/// component zero so the same storage serves both dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVelocitySet {
    kind: SetKind,
    dim: usize,
    xi: Vec<[f64; 2]>,
    weights: Vec<f64>,
    rt0: f64,
    xi_max: f64,
}

impl DiscreteVelocitySet {
    /// Nine-velocity two-dimensional set with lattice speed `c = sqrt(3 rt0)`.
    pub fn d2q9(rt0: f64) -> Result<Self> {
        let c = lattice_speed(rt0)?;
        let xi = vec![
            [0.0, 0.0],
            [c, 0.0],
            [0.0, c],
            [-c, 0.0],
            [0.0, -c],
            [c, c],
            [-c, c],
            [-c, -c],
            [c, -c],
        ];
        let w0 = 4.0 / 9.0;
        let ws = 1.0 / 9.0;
        let wd = 1.0 / 36.0;
        let weights = vec![w0, ws, ws, ws, ws, wd, wd, wd, wd];
        Ok(Self {
            kind: SetKind::D2Q9,
            dim: 2,
            xi,
            weights,
            rt0,
            xi_max: c,
        })
    }

    /// Three-velocity one-dimensional set `{0, +c, -c}`.
    pub fn d1q3(rt0: f64) -> Result<Self> {
        let c = lattice_speed(rt0)?;
        let xi = vec![[0.0, 0.0], [c, 0.0], [-c, 0.0]];
        let weights = vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        Ok(Self {
            kind: SetKind::D1Q3,
            dim: 1,
            xi,
            weights,
            rt0,
            xi_max: c,
        })
    }

    pub fn from_kind(kind: SetKind, rt0: f64) -> Result<Self> {
        match kind {
            SetKind::D1Q3 => Self::d1q3(rt0),
            SetKind::D2Q9 => Self::d2q9(rt0),
        }
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xi(&self) -> &[[f64; 2]] {
        &self.xi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rt0(&self) -> f64 {
        self.rt0
    }

    /// Largest per-component speed; the CFL time step divides by this.
    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    /// Density and momentum of `f`, summed in velocity order.
    pub fn moments(&self, f: &[f64]) -> Moments {
        assert_eq!(f.len(), self.len(), "distribution length != set size");
        let mut density = 0.0;
        let mut momentum = [0.0, 0.0];
        for (fi, xi) in f.iter().zip(&self.xi) {
            density += fi;
            momentum[0] += fi * xi[0];
            momentum[1] += fi * xi[1];
        }
        Moments { density, momentum }
    }
}

fn lattice_speed(rt0: f64) -> Result<f64> {
    if !(rt0 > 0.0) || !rt0.is_finite() {
        return Err(Error::Config(format!(
            "reference temperature rt0 must be positive and finite, got {rt0}"
        )));
    }
    Ok((3.0 * rt0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: f64 = 1.224744871391589; // sqrt(1.5)

    fn second_moment(set: &DiscreteVelocitySet, a: usize, b: usize) -> f64 {
        set.weights()
            .iter()
            .zip(set.xi())
            .map(|(w, xi)| w * xi[a] * xi[b])
            .sum()
    }

    fn third_moment(set: &DiscreteVelocitySet, a: usize, b: usize, c: usize) -> f64 {
        set.weights()
            .iter()
            .zip(set.xi())
            .map(|(w, xi)| w * xi[a] * xi[b] * xi[c])
            .sum()
    }

    fn check_invariants(set: &DiscreteVelocitySet, rt0: f64) {
        let wsum: f64 = set.weights().iter().sum();
        assert!((wsum - 1.0).abs() <= 1e-15, "weight sum {wsum}");
        for a in 0..2 {
            let m1: f64 = set
                .weights()
                .iter()
                .zip(set.xi())
                .map(|(w, xi)| w * xi[a])
                .sum();
            assert!(m1.abs() <= 1e-15);
            for b in 0..2 {
                let want = if a == b && a < set.dim() { rt0 } else { 0.0 };
                assert!(
                    (second_moment(set, a, b) - want).abs() <= 1e-14 * rt0.max(1.0),
                    "second moment ({a},{b})"
                );
                for c in 0..2 {
                    assert!(
                        third_moment(set, a, b, c).abs() <= 1e-14 * rt0.max(1.0).powf(1.5),
                        "third moment ({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn d2q9_matches_reference_values() {
        let set = DiscreteVelocitySet::d2q9(0.5).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.kind(), SetKind::D2Q9);
        assert!((set.xi()[1][0] - C).abs() < 1e-15);
        assert_eq!(set.xi()[0], [0.0, 0.0]);
        assert_eq!(set.xi()[6], [-C, C]);
        assert_eq!(set.weights()[0], 4.0 / 9.0);
        assert_eq!(set.weights()[3], 1.0 / 9.0);
        assert_eq!(set.weights()[8], 1.0 / 36.0);
        assert!((set.xi_max() - C).abs() < 1e-15);
        // opposite pairs
        for (i, j) in [(1, 3), (2, 4), (5, 7), (6, 8)] {
            assert_eq!(set.xi()[i][0], -set.xi()[j][0]);
            assert_eq!(set.xi()[i][1], -set.xi()[j][1]);
        }
    }

    #[test]
    fn d2q9_invariants_at_reference_temperature() {
        let set = DiscreteVelocitySet::d2q9(0.5).unwrap();
        check_invariants(&set, 0.5);
        assert!((second_moment(&set, 0, 0) - 0.5).abs() <= 1e-14);
    }

    #[test]
    fn d1q3_matches_reference_values() {
        let set = DiscreteVelocitySet::d1q3(0.5).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.dim(), 1);
        assert_eq!(set.weights(), &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert!((set.xi()[1][0] - C).abs() < 1e-15);
        assert!((set.xi()[2][0] + C).abs() < 1e-15);
        assert!((second_moment(&set, 0, 0) - 0.5).abs() <= 1e-14);
        check_invariants(&set, 0.5);
    }

    #[test]
    fn rejects_non_positive_temperature() {
        assert!(DiscreteVelocitySet::d2q9(0.0).is_err());
        assert!(DiscreteVelocitySet::d2q9(-1.0).is_err());
        assert!(DiscreteVelocitySet::d1q3(f64::NAN).is_err());
    }

    #[test]
    fn moments_sum_without_dividing() {
        let set = DiscreteVelocitySet::d2q9(0.5).unwrap();
        // f = weights is the unit-density rest state
        let m = set.moments(set.weights());
        assert!((m.density - 1.0).abs() <= 1e-15);
        assert!(m.momentum[0].abs() <= 1e-16);
        assert!(m.momentum[1].abs() <= 1e-16);
        // all-zero distribution has zero moments, no division by density
        let z = set.moments(&[0.0; 9]);
        assert_eq!(z.density, 0.0);
        assert_eq!(z.momentum, [0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn invariants_hold_for_any_temperature(rt0 in 0.05f64..4.0) {
            check_invariants(&DiscreteVelocitySet::d2q9(rt0).unwrap(), rt0);
            check_invariants(&DiscreteVelocitySet::d1q3(rt0).unwrap(), rt0);
        }
    }
}
