//! Frequency grids for kernel and density evaluation.
//!
//! Two modes exist: a cw line (1D in `ws` with `wi = pump_omega - ws`) and a
//! full rectangular 2D grid. Spacing is uniform; nodes are addressed by a
//! flat index so workers can partition them arbitrarily.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// One uniformly sampled frequency axis, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max > min) {
            return Err(Error::InvalidSpec(format!(
                "axis range must satisfy 0 < min < max, got [{min}, {max}]"
            )));
        }
        if count < MIN_NODES {
            return Err(Error::InvalidSpec(format!(
                "axis needs at least {MIN_NODES} nodes, got {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.value(i))
    }

    /// Same span with twice as many intervals (original nodes persist at
    /// even indices).
    pub fn refined(&self) -> Axis {
        Axis {
            min: self.min,
            max: self.max,
            count: 2 * self.count - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrequencyGrid {
    /// cw pump: signal axis plus the energy-conservation line.
    CwLine { pump_omega: f64, signal: Axis },
    /// Pulsed pump: rectangular signal x idler grid (row-major, signal outer).
    Full2D { signal: Axis, idler: Axis },
}

impl FrequencyGrid {
    pub fn cw_line(pump_omega: f64, signal: Axis) -> Result<Self> {
        if pump_omega <= signal.max {
            return Err(Error::InvalidSpec(format!(
                "cw pump frequency {pump_omega} must exceed the signal-axis maximum {}",
                signal.max
            )));
        }
        Ok(FrequencyGrid::CwLine { pump_omega, signal })
    }

    pub fn full_2d(signal: Axis, idler: Axis) -> Self {
        FrequencyGrid::Full2D { signal, idler }
    }

    pub fn node_count(&self) -> usize {
        match self {
            FrequencyGrid::CwLine { signal, .. } => signal.count,
            FrequencyGrid::Full2D { signal, idler } => signal.count * idler.count,
        }
    }

    /// (omega_s, omega_i) of flat node `idx`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        match self {
            FrequencyGrid::CwLine { pump_omega, signal } => {
                let ws = signal.value(idx);
                (ws, pump_omega - ws)
            }
            FrequencyGrid::Full2D { signal, idler } => {
                let (row, col) = (idx / idler.count, idx % idler.count);
                (signal.value(row), idler.value(col))
            }
        }
    }

    pub fn signal_axis(&self) -> &Axis {
        match self {
            FrequencyGrid::CwLine { signal, .. } => signal,
            FrequencyGrid::Full2D { signal, .. } => signal,
        }
    }

    pub fn idler_axis(&self) -> Option<&Axis> {
        match self {
            FrequencyGrid::CwLine { .. } => None,
            FrequencyGrid::Full2D { idler, .. } => Some(idler),
        }
    }

    /// Grid with both axes refined (node doubling for convergence checks).
    pub fn refined(&self) -> FrequencyGrid {
        match self {
            FrequencyGrid::CwLine { pump_omega, signal } => FrequencyGrid::CwLine {
                pump_omega: *pump_omega,
                signal: signal.refined(),
            },
            FrequencyGrid::Full2D { signal, idler } => FrequencyGrid::Full2D {
                signal: signal.refined(),
                idler: idler.refined(),
            },
        }
    }

    /// Frequencies every node touches must lie inside all media windows;
    /// callers check the extremes returned here.
    pub fn omega_extremes(&self) -> (f64, f64) {
        match self {
            FrequencyGrid::CwLine { pump_omega, signal } => {
                let lo = signal.min.min(pump_omega - signal.max);
                let hi = signal.max.max(pump_omega - signal.min);
                (lo, hi)
            }
            FrequencyGrid::Full2D { signal, idler } => {
                (signal.min.min(idler.min), signal.max.max(idler.max))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn axis_rejects_degenerate_ranges_and_tiny_counts() {
        assert!(Axis::new(1.0, 1.0, 64).is_err());
        assert!(Axis::new(-1.0, 1.0, 64).is_err());
        assert!(Axis::new(1.0, 2.0, 8).is_err());
    }

    #[test]
    fn cw_line_nodes_satisfy_energy_conservation() {
        let axis = Axis::new(1.0e15, 2.0e15, 17).unwrap();
        let grid = FrequencyGrid::cw_line(3.0e15, axis).unwrap();
        for i in 0..grid.node_count() {
            let (ws, wi) = grid.node(i);
            assert_relative_eq!(ws + wi, 3.0e15, max_relative = 1e-14);
        }
    }

    #[test]
    fn full_2d_indexing_is_row_major() {
        let s = Axis::new(1.0, 2.0, 16).unwrap();
        let i = Axis::new(3.0, 4.0, 17).unwrap();
        let grid = FrequencyGrid::full_2d(s, i);
        assert_eq!(grid.node_count(), 16 * 17);
        let (ws, wi) = grid.node(17 + 2);
        assert_relative_eq!(ws, s.value(1));
        assert_relative_eq!(wi, i.value(2));
    }

    #[test]
    fn refinement_preserves_existing_nodes() {
        let axis = Axis::new(1.0e15, 2.0e15, 33).unwrap();
        let fine = axis.refined();
        assert_eq!(fine.count, 65);
        for i in 0..axis.count {
            assert_relative_eq!(axis.value(i), fine.value(2 * i), max_relative = 1e-14);
        }
    }
}
