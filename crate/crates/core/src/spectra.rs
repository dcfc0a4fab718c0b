//! Observables: joint density maps, signal spectra, pair rates and the
//! relative surface contribution.
//!
//! Quadrature is composite trapezoidal on the uniform grids; reductions use
//! a fixed-order pairwise sum so results are independent of worker count
//! and partitioning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitudes::joint_density;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::kernel::KernelPair;

/// Which kernel parts enter the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityVariant {
    Volume,
    Surface,
    Total,
}

/// Real-valued joint photon-number density on a grid.
#[derive(Debug, Clone)]
pub struct SpectralDensityMap {
    pub grid: FrequencyGrid,
    pub variant: DensityVariant,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl SpectralDensityMap {
    pub fn invalid_nodes(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

/// Nodewise density from the selected parts of two kernel pairs sharing a
/// grid (signal kernel from the first, idler kernel from the second).
pub fn density_map_cross(
    signal_src: &KernelPair,
    idler_src: &KernelPair,
    variant: DensityVariant,
) -> Result<SpectralDensityMap> {
    signal_src.ensure_same_grid(idler_src)?;
    let n = signal_src.node_count();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (fs, fi) = match variant {
                DensityVariant::Volume => (signal_src.signal.volume[i], idler_src.idler.volume[i]),
                DensityVariant::Surface => {
                    (signal_src.signal.surface[i], idler_src.idler.surface[i])
                }
                DensityVariant::Total => (signal_src.signal.total(i), idler_src.idler.total(i)),
            };
            joint_density(fs, fi)
        })
        .collect();
    let valid = signal_src
        .valid
        .iter()
        .zip(&idler_src.valid)
        .map(|(a, b)| *a && *b)
        .collect();
    Ok(SpectralDensityMap {
        grid: signal_src.grid.clone(),
        variant,
        values,
        valid,
    })
}

/// Nodewise joint density of one kernel pair.
pub fn density_map(pair: &KernelPair, variant: DensityVariant) -> SpectralDensityMap {
    density_map_cross(pair, pair, variant).expect("a pair shares its own grid")
}

/// Deterministic pairwise summation (order fixed by index recursion).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Trapezoidal weight of node `i` on an `n`-node uniform axis with step `h`.
fn trapezoid_weight(i: usize, n: usize, h: f64) -> f64 {
    if i == 0 || i + 1 == n {
        0.5 * h
    } else {
        h
    }
}

/// Signal spectrum `S_s(ws) = hbar ws int dwi n(ws, wi)`.
///
/// On a cw line the idler integral degenerates to the line value; invalid
/// nodes contribute zero weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    /// Signal angular frequencies, rad/s.
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn signal_spectrum(map: &SpectralDensityMap) -> SpectralCurve {
    match &map.grid {
        FrequencyGrid::CwLine { signal, .. } => {
            let omegas: Vec<f64> = signal.values().collect();
            let values = omegas
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    if map.valid[i] {
                        HBAR * w * map.values[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            SpectralCurve { omegas, values }
        }
        FrequencyGrid::Full2D { signal, idler } => {
            let h = idler.step();
            let omegas: Vec<f64> = signal.values().collect();
            let values = omegas
                .iter()
                .enumerate()
                .map(|(row, &w)| {
                    let base = row * idler.count;
                    let weighted: Vec<f64> = (0..idler.count)
                        .map(|col| {
                            let idx = base + col;
                            if map.valid[idx] {
                                map.values[idx] * trapezoid_weight(col, idler.count, h)
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    HBAR * w * pairwise_sum(&weighted)
                })
                .collect();
            SpectralCurve { omegas, values }
        }
    }
}

/// Pair rate `N = int dws int dwi n` (single line integral on cw grids).
pub fn pair_rate(map: &SpectralDensityMap) -> f64 {
    match &map.grid {
        FrequencyGrid::CwLine { signal, .. } => {
            let h = signal.step();
            let weighted: Vec<f64> = (0..signal.count)
                .map(|i| {
                    if map.valid[i] {
                        map.values[i] * trapezoid_weight(i, signal.count, h)
                    } else {
                        0.0
                    }
                })
                .collect();
            pairwise_sum(&weighted)
        }
        FrequencyGrid::Full2D { signal, idler } => {
            let hs = signal.step();
            let hi = idler.step();
            let rows: Vec<f64> = (0..signal.count)
                .map(|row| {
                    let base = row * idler.count;
                    let weighted: Vec<f64> = (0..idler.count)
                        .map(|col| {
                            let idx = base + col;
                            if map.valid[idx] {
                                map.values[idx] * trapezoid_weight(col, idler.count, hi)
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    pairwise_sum(&weighted) * trapezoid_weight(row, signal.count, hs)
                })
                .collect();
            pairwise_sum(&rows)
        }
    }
}

/// `N_total / N_vol - 1`.
pub fn relative_surface_contribution(n_total: f64, n_vol: f64) -> Result<f64> {
    if n_vol <= 0.0 {
        return Err(Error::Domain(format!(
            "relative surface contribution undefined for N_vol = {n_vol}"
        )));
    }
    Ok(n_total / n_vol - 1.0)
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn const_map(grid: FrequencyGrid, c: f64) -> SpectralDensityMap {
        let n = grid.node_count();
        SpectralDensityMap {
            grid,
            variant: DensityVariant::Total,
            values: vec![c; n],
            valid: vec![true; n],
        }
    }

    #[test]
    fn zero_maps_integrate_to_zero() {
        let grid = FrequencyGrid::full_2d(
            Axis::new(1.0e15, 2.0e15, 32).unwrap(),
            Axis::new(1.0e15, 2.0e15, 32).unwrap(),
        );
        let map = const_map(grid, 0.0);
        assert_eq!(pair_rate(&map), 0.0);
        assert!(signal_spectrum(&map).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_map_integrates_to_area() {
        let grid = FrequencyGrid::full_2d(
            Axis::new(1.0e15, 2.0e15, 64).unwrap(),
            Axis::new(1.5e15, 1.8e15, 48).unwrap(),
        );
        let map = const_map(grid, 3.0);
        let area = 1.0e15 * 0.3e15;
        assert_relative_eq!(pair_rate(&map), 3.0 * area, max_relative = 1e-12);
    }

    #[test]
    fn separable_gaussian_spectrum_matches_closed_form() {
        // n(ws, wi) = f(ws) g(wi) with g a Gaussian well contained in the
        // range: S_s = hbar ws f(ws) * sigma sqrt(2 pi) to high accuracy.
        let s_axis = Axis::new(1.0e15, 2.0e15, 64).unwrap();
        let i_axis = Axis::new(1.0e15, 2.0e15, 512).unwrap();
        let grid = FrequencyGrid::full_2d(s_axis, i_axis);
        let w0 = 1.5e15;
        let sigma = (i_axis.max - i_axis.min) / 12.0;
        let f = |ws: f64| 1.0 + 0.3 * (ws - w0) / 1e15;
        let g = |wi: f64| (-0.5 * ((wi - w0) / sigma).powi(2)).exp();
        let n = grid.node_count();
        let values: Vec<f64> = (0..n)
            .map(|idx| {
                let (ws, wi) = grid.node(idx);
                f(ws) * g(wi)
            })
            .collect();
        let map = SpectralDensityMap {
            grid: grid.clone(),
            variant: DensityVariant::Total,
            values,
            valid: vec![true; n],
        };
        let curve = signal_spectrum(&map);
        let gauss_integral = sigma * (2.0 * std::f64::consts::PI).sqrt();
        for (i, &w) in curve.omegas.iter().enumerate() {
            let expect = HBAR * w * f(w) * gauss_integral;
            assert_relative_eq!(curve.values[i], expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn pair_rate_self_converges_under_refinement() {
        // Smooth sinc^2-like line density.
        let mk = |count: usize| {
            let axis = Axis::new(1.0e15, 2.0e15, count).unwrap();
            let grid = FrequencyGrid::cw_line(3.5e15, axis).unwrap();
            let values: Vec<f64> = (0..grid.node_count())
                .map(|i| {
                    let (ws, _) = grid.node(i);
                    let x = (ws - 1.5e15) / 2e14;
                    crate::amplitudes::sinc(x).powi(2)
                })
                .collect();
            let n = grid.node_count();
            SpectralDensityMap {
                grid,
                variant: DensityVariant::Total,
                values,
                valid: vec![true; n],
            }
        };
        let coarse = pair_rate(&mk(257));
        let fine = pair_rate(&mk(513));
        assert!((fine - coarse).abs() / fine.abs() < 1e-3);
    }

    #[test]
    fn relative_surface_contribution_cases() {
        assert_eq!(relative_surface_contribution(5.0, 5.0).unwrap(), 0.0);
        assert_relative_eq!(relative_surface_contribution(1.5, 1.0).unwrap(), 0.5);
        assert!(relative_surface_contribution(1.0, 0.0).is_err());
    }

    #[test]
    fn pairwise_sum_matches_sequential_and_is_split_invariant() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.25 - 10.0).collect();
        let seq: f64 = v.iter().sum();
        assert_abs_diff_eq!(pairwise_sum(&v), seq, epsilon = 1e-9);
        // Determinism: same input, same bits.
        assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v).to_bits());
    }

    #[test]
    fn pearson_of_linear_relation_is_one() {
        let x: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert_relative_eq!(pearson_correlation(&x, &y), 1.0, max_relative = 1e-12);
    }
}
