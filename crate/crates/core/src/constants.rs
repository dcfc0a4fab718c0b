//! Physical constants (CODATA 2018).
//!
//! `MU_0` is derived from `1/(EPSILON_0 c^2)` rather than quoted independently so
//! that the identity `epsilon_0 mu_0 c^2 = 1` holds to machine precision; the
//! derived value agrees with the CODATA recommendation within its stated
//! uncertainty. Several closed-form kernel identities rely on that identity
//! being exact.

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant, J s (exact since 2019 SI).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Vacuum permeability, H/m, derived as 1/(eps0 c^2).
pub const MU_0: f64 = 1.0 / (EPSILON_0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

/// Immutable bundle of the constants used by kernel normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub hbar: f64,
    pub epsilon_0: f64,
    pub mu_0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c: SPEED_OF_LIGHT,
            hbar: HBAR,
            epsilon_0: EPSILON_0,
            mu_0: MU_0,
        }
    }
}

impl PhysicalConstants {
    pub const fn new() -> Self {
        Self {
            c: SPEED_OF_LIGHT,
            hbar: HBAR,
            epsilon_0: EPSILON_0,
            mu_0: MU_0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu0_eps0_c2_is_one() {
        let k = PhysicalConstants::default();
        assert_eq!(k.epsilon_0 * k.mu_0 * k.c * k.c, 1.0);
    }

    #[test]
    fn mu0_matches_codata_within_uncertainty() {
        // CODATA 2018: mu0 = 1.256 637 062 12(19) e-6 H/m
        let codata = 1.256_637_062_12e-6;
        let sigma = 0.000_000_000_19e-6;
        assert!((MU_0 - codata).abs() < 2.0 * sigma);
    }
}
