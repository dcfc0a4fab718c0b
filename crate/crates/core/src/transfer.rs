//! s-polarization transfer matrices for 1D multilayers.
//!
//! Fields in every region are written `A exp(i k_z (z - z_ref)) + B exp(-i k_z (z - z_ref))`
//! with the reference plane at the region's left edge (the structure's input
//! plane for the left external medium, the output plane for the right one).
//! Two boundary-value solutions are provided:
//!
//! * [`solve_from_left`] - a wave incident from the left (pump feed),
//! * [`solve_from_right`] - unit amplitude incoming from the right, no feed
//!   from the left. Conjugated, this is the output mode a forward-exiting
//!   photon is detected in, so its per-layer coefficients are exactly the
//!   weights with which locally forward/backward generated photons reach
//!   the forward output port.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 2x2 complex matrix acting on (A, B) coefficient vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Mat2 {
    pub fn identity() -> Self {
        Self {
            m11: 1.0.into(),
            m12: 0.0.into(),
            m21: 0.0.into(),
            m22: 1.0.into(),
        }
    }

    /// Interface matrix taking coefficients on side 1 (evaluated at the
    /// interface) to coefficients on side 2, from continuity of E and dE/dz.
    pub fn interface(k1: f64, k2: f64) -> Self {
        let (k1, k2) = (Complex64::from(k1), Complex64::from(k2));
        let half = Complex64::from(0.5) / k2;
        Self {
            m11: half * (k2 + k1),
            m12: half * (k2 - k1),
            m21: half * (k2 - k1),
            m22: half * (k2 + k1),
        }
    }

    /// Propagation across a layer of thickness `d`: moves the reference
    /// plane from the left edge to the right edge.
    pub fn propagation(k: f64, d: f64) -> Self {
        Self {
            m11: Complex64::from_polar(1.0, k * d),
            m12: 0.0.into(),
            m21: 0.0.into(),
            m22: Complex64::from_polar(1.0, -k * d),
        }
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * other.m11 + self.m12 * other.m21,
            m12: self.m11 * other.m12 + self.m12 * other.m22,
            m21: self.m21 * other.m11 + self.m22 * other.m21,
            m22: self.m21 * other.m12 + self.m22 * other.m22,
        }
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }
}

/// Longitudinal wave-vector magnitudes of one frequency through the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct StackKz {
    pub k_in: f64,
    pub layers: Vec<f64>,
    pub k_out: f64,
}

/// Linear boundary-value solution across a stack.
#[derive(Debug, Clone)]
pub struct StackSolution {
    /// (A, B) per internal layer, referenced to each layer's left edge.
    pub layer_coefficients: Vec<(Complex64, Complex64)>,
    /// (A, B) in the left external medium at the input plane.
    pub left: (Complex64, Complex64),
    /// (A, B) in the right external medium at the output plane.
    pub right: (Complex64, Complex64),
}

/// Per-interface matrices and their left-to-right cumulative product.
#[derive(Debug, Clone)]
pub struct TransferChain {
    /// Alternating interface/propagation factors in application order.
    pub factors: Vec<Mat2>,
    pub total: Mat2,
}

fn chain(kz: &StackKz, thicknesses: &[f64]) -> TransferChain {
    assert_eq!(kz.layers.len(), thicknesses.len());
    let mut factors = Vec::with_capacity(2 * kz.layers.len() + 1);
    let mut prev_k = kz.k_in;
    for (i, (&k, &d)) in kz.layers.iter().zip(thicknesses).enumerate() {
        let _ = i;
        factors.push(Mat2::interface(prev_k, k));
        factors.push(Mat2::propagation(k, d));
        prev_k = k;
    }
    factors.push(Mat2::interface(prev_k, kz.k_out));
    let mut total = Mat2::identity();
    for f in &factors {
        total = f.mul(&total);
    }
    TransferChain { factors, total }
}

fn march(kz: &StackKz, left: (Complex64, Complex64), ch: &TransferChain) -> StackSolution {
    let mut coeffs = Vec::with_capacity(kz.layers.len());
    let mut v = left;
    let mut fi = 0;
    for _ in 0..kz.layers.len() {
        v = ch.factors[fi].apply(v); // interface into this layer
        coeffs.push(v);
        v = ch.factors[fi + 1].apply(v); // propagate to its right edge
        fi += 2;
    }
    let right = ch.factors[fi].apply(v);
    StackSolution {
        layer_coefficients: coeffs,
        left,
        right,
    }
}

/// Scattering solution for a wave of amplitude `amplitude` incident from the
/// left; returns the solution plus (t, r) amplitudes for unit input.
pub fn solve_from_left(
    kz: &StackKz,
    thicknesses: &[f64],
    amplitude: Complex64,
) -> Result<(StackSolution, Complex64, Complex64)> {
    let ch = chain(kz, thicknesses);
    let t22 = ch.total.m22;
    if t22.norm() == 0.0 {
        return Err(Error::Domain("singular transfer chain (T22 = 0)".into()));
    }
    let b_left = -ch.total.m21 / t22;
    let sol = march(kz, (amplitude, b_left * amplitude), &ch);
    let t = sol.right.0 / amplitude;
    Ok((sol, t, b_left))
}

/// Solution with unit amplitude incoming from the right at the output plane
/// and nothing incident from the left.
pub fn solve_from_right(kz: &StackKz, thicknesses: &[f64]) -> Result<StackSolution> {
    let ch = chain(kz, thicknesses);
    let t22 = ch.total.m22;
    if t22.norm() == 0.0 {
        return Err(Error::Domain("singular transfer chain (T22 = 0)".into()));
    }
    let b_left = Complex64::from(1.0) / t22;
    Ok(march(kz, (Complex64::from(0.0), b_left), &ch))
}

/// Per-interface/cumulative matrices for inspection or factorization.
pub fn transfer_chain(kz: &StackKz, thicknesses: &[f64]) -> TransferChain {
    chain(kz, thicknesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn single_vacuum_layer_is_a_pure_phase() {
        let kz = StackKz {
            k_in: 2.0e6,
            layers: vec![2.0e6],
            k_out: 2.0e6,
        };
        let (sol, t, r) = solve_from_left(&kz, &[1.3e-6], Complex64::from(1.0)).unwrap();
        assert_abs_diff_eq!(r.norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(t.norm(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.arg(), 2.0e6 * 1.3e-6, max_relative = 1e-12);
        assert_abs_diff_eq!(sol.layer_coefficients[0].1.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lossless_stack_conserves_energy_flux() {
        let kz = StackKz {
            k_in: 5.0e6,
            layers: vec![11.0e6, 7.5e6, 13.2e6, 9.9e6],
            k_out: 6.5e6,
        };
        let d = [0.21e-6, 0.34e-6, 0.11e-6, 0.27e-6];
        let (_, t, r) = solve_from_left(&kz, &d, Complex64::from(1.0)).unwrap();
        let flux = (kz.k_out / kz.k_in) * t.norm_sqr() + r.norm_sqr();
        assert_abs_diff_eq!(flux, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_interface_slab_matches_airy_closed_form() {
        let (k1, k2, k3) = (6.0e6, 14.5e6, 8.0e6);
        let d = 0.42e-6;
        let kz = StackKz {
            k_in: k1,
            layers: vec![k2],
            k_out: k3,
        };
        let (_, t, r) = solve_from_left(&kz, &[d], Complex64::from(1.0)).unwrap();

        // Airy formulas with interface amplitudes in terms of k_z.
        let r12 = (k1 - k2) / (k1 + k2);
        let r23 = (k2 - k3) / (k2 + k3);
        let t12 = 2.0 * k1 / (k1 + k2);
        let t23 = 2.0 * k2 / (k2 + k3);
        let phase = Complex64::from_polar(1.0, 2.0 * k2 * d);
        let denom = Complex64::from(1.0) + r12 * r23 * phase;
        let r_airy = (Complex64::from(r12) + r23 * phase) / denom;
        let t_airy = t12 * t23 * Complex64::from_polar(1.0, k2 * d) / denom;
        assert_relative_eq!((r - r_airy).norm(), 0.0, epsilon = 1e-10 * r_airy.norm().max(1.0));
        assert_relative_eq!((t - t_airy).norm(), 0.0, epsilon = 1e-10 * t_airy.norm());
    }

    #[test]
    fn from_right_solution_has_no_left_feed_and_unit_right_input() {
        let kz = StackKz {
            k_in: 5.0e6,
            layers: vec![11.0e6, 7.5e6],
            k_out: 6.5e6,
        };
        let d = [0.21e-6, 0.34e-6];
        let sol = solve_from_right(&kz, &d).unwrap();
        assert_abs_diff_eq!(sol.left.0.norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(sol.right.1.norm(), 1.0, max_relative = 1e-12);
        // Index-matched degenerate case: field is a plane wave everywhere.
        let kzm = StackKz {
            k_in: 9.0e6,
            layers: vec![9.0e6],
            k_out: 9.0e6,
        };
        let l = 0.5e-6;
        let sol = solve_from_right(&kzm, &[l]).unwrap();
        // D coefficient at layer left edge: exp(+i k (z_out - z_layer)).
        let expect = Complex64::from_polar(1.0, 9.0e6 * l);
        assert_relative_eq!((sol.layer_coefficients[0].1 - expect).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.layer_coefficients[0].0.norm(), 0.0, epsilon = 1e-15);
    }
}
