//! Material dispersion models, signed wave vectors, phase mismatch and
//! interface coefficients.
//!
//! Wave vectors are the longitudinal (z) components for s-polarized fields:
//! `k_z = s (omega/c) sqrt(n^2 - sin^2 theta_ext)` with `s = +1` for forward
//! and `s = -1` for backward propagation. The external angle is measured in
//! the surrounding medium of index 1, so `sin theta_ext` is the conserved
//! transverse direction cosine.

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

/// One resonance term of a Sellmeier expansion.
///
/// With `lambda_weighted = true` the term reads `strength * l2 / (l2 - center_um_sq)`,
/// otherwise `strength / (l2 - center_um_sq)`; `l2` is the squared vacuum
/// wavelength in um^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerm {
    pub strength: f64,
    pub center_um_sq: f64,
    #[serde(default = "default_true")]
    pub lambda_weighted: bool,
}

fn default_true() -> bool {
    true
}

/// Refractive-index model of a medium. Sellmeier coefficients follow the
/// lambda-in-micrometers convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IndexModel {
    Constant {
        n0: f64,
    },
    Sellmeier {
        constant: f64,
        #[serde(default)]
        terms: Vec<SellmeierTerm>,
        /// Optional `coeff * l2` correction term (um^2 convention).
        #[serde(default)]
        lambda_sq_coeff: f64,
    },
}

impl IndexModel {
    /// n^2 at vacuum wavelength `lambda_um` (validity not checked here).
    fn n_squared(&self, lambda_um: f64) -> f64 {
        match self {
            IndexModel::Constant { n0 } => n0 * n0,
            IndexModel::Sellmeier {
                constant,
                terms,
                lambda_sq_coeff,
            } => {
                let l2 = lambda_um * lambda_um;
                let mut acc = constant + lambda_sq_coeff * l2;
                for t in terms {
                    let num = if t.lambda_weighted {
                        t.strength * l2
                    } else {
                        t.strength
                    };
                    acc += num / (l2 - t.center_um_sq);
                }
                acc
            }
        }
    }
}

/// A dispersive optical material with its effective nonlinearity.
///
/// `d_eff = 0` marks a linear medium; every nonlinear amplitude generated in
/// such a medium is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalMedium {
    pub name: String,
    pub index_model: IndexModel,
    /// Effective nonlinear coefficient, m/V.
    pub d_eff: f64,
    /// Transparency window `[lambda_min, lambda_max]`, vacuum wavelength in m.
    pub transparency_window: [f64; 2],
}

impl OpticalMedium {
    /// Constant-index medium, convenient for tests and index-matched setups.
    pub fn constant(name: &str, n0: f64, d_eff: f64) -> Self {
        Self {
            name: name.to_string(),
            index_model: IndexModel::Constant { n0 },
            d_eff,
            transparency_window: [1e-9, 1.0],
        }
    }

    pub fn vacuum() -> Self {
        Self::constant("vacuum", 1.0, 0.0)
    }

    pub fn is_linear(&self) -> bool {
        self.d_eff == 0.0
    }

    fn check_window(&self, omega: f64) -> Result<f64> {
        let lambda = vacuum_wavelength(omega);
        if !(lambda >= self.transparency_window[0] && lambda <= self.transparency_window[1]) {
            return Err(Error::OutOfWindow {
                medium: self.name.clone(),
                lambda_m: lambda,
            });
        }
        Ok(lambda)
    }
}

/// Vacuum wavelength (m) of angular frequency `omega` (rad/s).
pub fn vacuum_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}

/// Angular frequency (rad/s) of vacuum wavelength `lambda` (m).
pub fn angular_frequency(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda
}

/// Propagation direction along the structure axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Forward, +z.
    F,
    /// Backward, -z.
    B,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::F => 1.0,
            Direction::B => -1.0,
        }
    }
}

/// Which interacting field a mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldRole {
    Pump,
    Signal,
    Idler,
}

/// One monochromatic plane-wave mode of a named field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMode {
    pub role: FieldRole,
    pub direction: Direction,
    /// Angular frequency, rad/s (> 0).
    pub angular_frequency: f64,
    /// Angle outside the structure, rad; 0 for collinear propagation.
    pub external_angle: f64,
}

impl FieldMode {
    pub fn collinear(role: FieldRole, direction: Direction, omega: f64) -> Self {
        Self {
            role,
            direction,
            angular_frequency: omega,
            external_angle: 0.0,
        }
    }
}

/// Propagation-direction triple (pump, signal, idler); eight channels exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectionChannel {
    pub pump: Direction,
    pub signal: Direction,
    pub idler: Direction,
}

impl DirectionChannel {
    pub const FFF: DirectionChannel = DirectionChannel {
        pump: Direction::F,
        signal: Direction::F,
        idler: Direction::F,
    };

    /// All eight channels in a fixed order (pump outermost, idler innermost).
    pub fn all() -> [DirectionChannel; 8] {
        let dirs = [Direction::F, Direction::B];
        let mut out = [DirectionChannel::FFF; 8];
        let mut idx = 0;
        for &p in &dirs {
            for &s in &dirs {
                for &i in &dirs {
                    out[idx] = DirectionChannel {
                        pump: p,
                        signal: s,
                        idler: i,
                    };
                    idx += 1;
                }
            }
        }
        out
    }

    pub fn flipped(self) -> Self {
        let flip = |d: Direction| match d {
            Direction::F => Direction::B,
            Direction::B => Direction::F,
        };
        DirectionChannel {
            pump: flip(self.pump),
            signal: flip(self.signal),
            idler: flip(self.idler),
        }
    }
}

impl std::fmt::Display for DirectionChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = |d: Direction| match d {
            Direction::F => 'F',
            Direction::B => 'B',
        };
        write!(f, "{}{}{}", c(self.pump), c(self.signal), c(self.idler))
    }
}

/// Refractive index of `medium` at angular frequency `omega`.
pub fn refractive_index(medium: &OpticalMedium, omega: f64) -> Result<f64> {
    medium.check_window(omega)?;
    let lambda_um = vacuum_wavelength(omega) * 1e6;
    let n2 = medium.index_model.n_squared(lambda_um);
    if !(n2.is_finite() && n2 >= 1.0) {
        return Err(Error::Domain(format!(
            "index model of '{}' returned n^2 = {n2} at lambda = {lambda_um} um",
            medium.name
        )));
    }
    Ok(n2.sqrt())
}

/// Signed longitudinal wave vector of `mode` inside `medium`, rad/m.
pub fn wave_vector(medium: &OpticalMedium, mode: &FieldMode) -> Result<f64> {
    let n = refractive_index(medium, mode.angular_frequency)?;
    let s = mode.external_angle.sin();
    let arg = n * n - s * s;
    if arg <= 0.0 {
        return Err(Error::Evanescent {
            medium: medium.name.clone(),
            n,
            theta_ext_rad: mode.external_angle,
        });
    }
    Ok(mode.direction.sign() * mode.angular_frequency / SPEED_OF_LIGHT * arg.sqrt())
}

/// External angles of the three fields, for oblique-incidence setups.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExternalAngles {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

/// Phase mismatch `dk = k_p(ws+wi) - k_s(ws) - k_i(wi)` with signed wave
/// vectors selected by `channel`.
pub fn phase_mismatch(
    medium: &OpticalMedium,
    omega_s: f64,
    omega_i: f64,
    channel: DirectionChannel,
    angles: ExternalAngles,
) -> Result<f64> {
    let k_p = wave_vector(
        medium,
        &FieldMode {
            role: FieldRole::Pump,
            direction: channel.pump,
            angular_frequency: omega_s + omega_i,
            external_angle: angles.pump,
        },
    )?;
    let k_s = wave_vector(
        medium,
        &FieldMode {
            role: FieldRole::Signal,
            direction: channel.signal,
            angular_frequency: omega_s,
            external_angle: angles.signal,
        },
    )?;
    let k_i = wave_vector(
        medium,
        &FieldMode {
            role: FieldRole::Idler,
            direction: channel.idler,
            angular_frequency: omega_i,
            external_angle: angles.idler,
        },
    )?;
    Ok(k_p - k_s - k_i)
}

/// Coherence length of a mismatched interaction: an explicit signal rather
/// than an infinity when `dk` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoherenceLength {
    /// pi / |dk|, in meters.
    Finite(f64),
    /// Phase matched: the interaction never slips by pi.
    Infinite,
}

pub fn coherence_length(delta_k: f64) -> CoherenceLength {
    if delta_k == 0.0 {
        CoherenceLength::Infinite
    } else {
        CoherenceLength::Finite(std::f64::consts::PI / delta_k.abs())
    }
}

/// s-polarization Fresnel amplitude coefficients (t, r) for a wave going from
/// index `n1` into `n2` at incidence angle `theta1`.
pub fn fresnel_interface(n1: f64, n2: f64, theta1: f64) -> Result<(f64, f64)> {
    if n1 < 1.0 || n2 < 1.0 {
        return Err(Error::Domain(format!(
            "fresnel_interface requires n >= 1, got n1 = {n1}, n2 = {n2}"
        )));
    }
    let c1 = theta1.cos();
    let s1 = theta1.sin();
    // Snell: n1 sin(theta1) = n2 sin(theta2)
    let s2 = n1 * s1 / n2;
    if s2.abs() >= 1.0 {
        return Err(Error::Evanescent {
            medium: format!("interface {n1} -> {n2}"),
            n: n2,
            theta_ext_rad: theta1,
        });
    }
    let c2 = (1.0 - s2 * s2).sqrt();
    let a = n1 * c1;
    let b = n2 * c2;
    Ok((2.0 * a / (a + b), (a - b) / (a + b)))
}
