//! Topographic Hamiltonian `H(q, p) = U_top(q) + ½(qᵀq + pᵀp)` built from an
//! elevation grid over `[−1, 1]²`.

mod grid;
mod spline;

use std::sync::Arc;

pub use grid::{format_grid, load_grid, parse_grid, synth_grid, write_grid, ElevationGrid, MIN_GRID_SIZE};

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::scalar::Scalar;
use crate::systems::{Hamiltonian, SkewMatrix};
use spline::BicubicSpline;

/// Default excess allowed over `H₀` before a state counts as a violation.
pub const CONTAINMENT_TOL: f64 = 1e-6;

/// Normalized, interpolated altitude `U_top`.
///
/// Values are mapped to `(v − min)/(max − min)` before interpolation; a
/// constant grid gives `U_top ≡ 0`. Between nodes the spline may overshoot
/// `[0, 1]` slightly; no clamping is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainPotential {
    spline: BicubicSpline,
    min: f64,
    max: f64,
}

pub fn build_potential(grid: &ElevationGrid) -> TerrainPotential {
    let (min, max) = grid.min_max();
    let span = max - min;
    let normalized: Vec<f64> = if span > 0.0 {
        grid.values().iter().map(|v| (v - min) / span).collect()
    } else {
        vec![0.0; grid.values().len()]
    };
    TerrainPotential { spline: BicubicSpline::new(grid.rows(), &normalized), min, max }
}

fn check_domain(q1: f64, q2: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&q1) || !(-1.0..=1.0).contains(&q2) {
        return Err(Error::Domain(format!("point ({q1}, {q2}) outside [-1, 1]^2")));
    }
    Ok(())
}

impl TerrainPotential {
    /// Raw grid minimum and maximum used for normalization.
    pub fn normalization(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    pub fn u_top<T: Scalar>(&self, q1: T, q2: T) -> Result<T> {
        check_domain(q1.value(), q2.value())?;
        Ok(self.spline.eval(q1, q2))
    }

    /// `U(q) = U_top(q) + ½qᵀq`.
    pub fn total<T: Scalar>(&self, q1: T, q2: T) -> Result<T> {
        Ok(self.u_top(q1, q2)? + (q1 * q1 + q2 * q2) * 0.5)
    }
}

pub fn total_potential(potential: &TerrainPotential, q: [f64; 2]) -> Result<f64> {
    potential.total(q[0], q[1])
}

/// Four-dimensional system `[q₁, q₂, p₁, p₂]` with canonical `S`.
#[derive(Debug, Clone)]
pub struct TopographicHamiltonian {
    potential: Arc<TerrainPotential>,
    structure: SkewMatrix,
}

impl TopographicHamiltonian {
    pub fn new(potential: TerrainPotential) -> Self {
        TopographicHamiltonian {
            potential: Arc::new(potential),
            structure: SkewMatrix::canonical(4).expect("n = 4 is even"),
        }
    }

    pub fn from_grid(grid: &ElevationGrid) -> Self {
        Self::new(build_potential(grid))
    }

    pub fn potential(&self) -> &TerrainPotential {
        &self.potential
    }
}

impl Hamiltonian for TopographicHamiltonian {
    fn dim(&self) -> usize {
        4
    }

    fn energy<T: Scalar>(&self, x: &[T]) -> Result<T> {
        let u = self.potential.total(x[0], x[1])?;
        Ok(u + (x[2] * x[2] + x[3] * x[3]) * 0.5)
    }

    fn structure(&self) -> &SkewMatrix {
        &self.structure
    }
}

/// One row per trajectory state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentRow {
    pub index: usize,
    /// `U(qₙ)`.
    pub potential: f64,
    /// `U(qₙ) − H₀`; negative inside the sublevel set.
    pub excess: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub h0: f64,
    pub tolerance: f64,
    pub rows: Vec<ContainmentRow>,
    pub violations: usize,
    /// Largest `U(qₙ) − H₀`, or `−∞` for an empty trajectory.
    pub max_excess: f64,
    /// `max |H(xₙ) − H(x₀)|`.
    pub energy_drift: f64,
}

impl ContainmentReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Checks `U(qₙ) ≤ H₀ + tolerance` along a trajectory.
pub fn containment_check(
    trajectory: &Trajectory,
    h0: f64,
    potential: &TerrainPotential,
    tolerance: f64,
) -> Result<ContainmentReport> {
    let mut rows = Vec::with_capacity(trajectory.states.len());
    for (index, x) in trajectory.states.iter().enumerate() {
        if x.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 4, got: x.len() });
        }
        let u = potential.total(x[0], x[1])?;
        let excess = u - h0;
        rows.push(ContainmentRow { index, potential: u, excess, violated: excess > tolerance });
    }
    let violations = rows.iter().filter(|r| r.violated).count();
    let max_excess = rows.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
    let energy_drift = match trajectory.energies.first() {
        Some(&e0) => trajectory.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(ContainmentReport { h0, tolerance, rows, violations, max_excess, energy_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::MethodKind;

    #[test]
    fn constant_grid_is_flat() {
        let g = ElevationGrid::new(5, 5, vec![3.0; 25]).unwrap();
        let p = build_potential(&g);
        assert_eq!(p.u_top(0.3, -0.2).unwrap(), 0.0);
        assert_eq!(total_potential(&p, [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(total_potential(&p, [1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn outside_domain_rejected() {
        let p = build_potential(&synth_grid(1, 8, 3).unwrap());
        assert!(matches!(total_potential(&p, [1.01, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(total_potential(&p, [0.0, f64::NAN]), Err(Error::Domain(_))));
    }

    #[test]
    fn normalized_nodes() {
        let g = synth_grid(5, 12, 5).unwrap();
        let p = build_potential(&g);
        let (lo, hi) = g.min_max();
        for i in 0..12 {
            for j in 0..12 {
                let (x, y) = g.node(i, j);
                let expected = (g.get(i, j) - lo) / (hi - lo);
                assert!((p.u_top(x, y).unwrap() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn empty_trajectory_gives_empty_report() {
        let t = Trajectory {
            method: MethodKind::SiaDf,
            h: 0.02,
            times: vec![],
            states: vec![],
            iterations: vec![],
            residuals: vec![],
            evals_cum: vec![],
            energies: vec![],
            converged: vec![],
        };
        let p = build_potential(&synth_grid(1, 8, 3).unwrap());
        let r = containment_check(&t, 0.5, &p, CONTAINMENT_TOL).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.violations, 0);
    }
}
