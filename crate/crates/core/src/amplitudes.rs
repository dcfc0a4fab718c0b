//! Two-photon kernel building blocks: coupling constant, slab volume
//! amplitude, surface factor and surface amplitude, output transmission,
//! joint spectral density and the boundary-correction kernel.
//!
//! Everything here is a c-number kernel: at first order in the coupling the
//! output operators are `a_free + integral(K a_free^dagger)` and only `K`
//! matters for pair observables, so no operator algebra is carried around.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Classical undepleted pump spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpSpectrum {
    /// Monochromatic pump. The spectral line is handled as the constraint
    /// `wi = pump_omega - ws` by the cw-line grid, never as a sampled spike.
    Cw { omega: f64, amplitude: Complex64 },
    /// Gaussian spectral amplitude, normalized so the peak equals `peak`.
    Pulsed {
        center_omega: f64,
        /// Spectral standard deviation, rad/s.
        sigma_omega: f64,
        peak: Complex64,
    },
}

impl PumpSpectrum {
    pub fn cw(omega: f64, amplitude: f64) -> Self {
        PumpSpectrum::Cw {
            omega,
            amplitude: Complex64::new(amplitude, 0.0),
        }
    }

    /// Spectral amplitude at pump frequency `omega_p`.
    pub fn amplitude_at(&self, omega_p: f64) -> Complex64 {
        match self {
            PumpSpectrum::Cw { amplitude, .. } => *amplitude,
            PumpSpectrum::Pulsed {
                center_omega,
                sigma_omega,
                peak,
            } => {
                let d = (omega_p - center_omega) / sigma_omega;
                peak * (-0.5 * d * d).exp()
            }
        }
    }

    pub fn central_omega(&self) -> f64 {
        match self {
            PumpSpectrum::Cw { omega, .. } => *omega,
            PumpSpectrum::Pulsed { center_omega, .. } => *center_omega,
        }
    }
}

/// Coupling constant `g = 2 i d_eff sqrt(ws wi) / (c sqrt(2 pi) sqrt(ns ni))`.
pub fn coupling_constant(d_eff: f64, omega_s: f64, omega_i: f64, n_s: f64, n_i: f64) -> Complex64 {
    let c = crate::constants::SPEED_OF_LIGHT;
    let mag = 2.0 * d_eff * (omega_s * omega_i).sqrt()
        / (c * (2.0 * std::f64::consts::PI).sqrt() * (n_s * n_i).sqrt());
    Complex64::new(0.0, mag)
}

/// Volume two-photon amplitude of a homogeneous slab occupying
/// `[z0, z0 + length]`.
///
/// Returns `g E_p exp(i k_p (z0 + L)) exp(-i dk L/2) L sinc(dk L/2)`. The
/// pump phase is referenced to the structure origin through `z0`; linear
/// propagation of the generated photons from the slab to the structure
/// output is owned by the structure assembly, so with `z0 = 0` this is the
/// bare single-slab kernel.
pub fn volume_amplitude(
    g: Complex64,
    pump_amplitude: Complex64,
    k_p: f64,
    delta_k: f64,
    length: f64,
    z0: f64,
) -> Complex64 {
    if length == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let half = 0.5 * delta_k * length;
    let phase = Complex64::from_polar(1.0, k_p * (z0 + length) - half);
    g * pump_amplitude * phase * length * sinc(half)
}

/// Plain slab integral `int_0^L exp(i dk u) du = L exp(i dk L/2) sinc(dk L/2)`.
///
/// Used by the layered-stack assembly where propagation to the output port is
/// carried by the linear mode weights instead of the Eq-style pump phase.
pub fn segment_integral(delta_k: f64, length: f64) -> Complex64 {
    let half = 0.5 * delta_k * length;
    Complex64::from_polar(length * sinc(half), half)
}

/// Surface factor `V = dk / k_m` for the tagged field (`k_m > 0` is the
/// magnitude of the forward wave vector of that field in the nonlinear
/// medium).
pub fn surface_factor(delta_k: f64, k_m: f64) -> Result<f64> {
    if k_m <= 0.0 {
        return Err(Error::Domain(format!(
            "surface factor needs a positive wave-vector magnitude, got k_m = {k_m}"
        )));
    }
    Ok(delta_k / k_m)
}

/// Surface amplitude `F_surf = V F_vol`.
pub fn surface_amplitude(volume: Complex64, surface_factor: f64) -> Complex64 {
    volume * surface_factor
}

/// Total kernel: volume plus surface contribution.
pub fn total_amplitude(volume: Complex64, surface: Complex64) -> Complex64 {
    volume + surface
}

/// Output-boundary transmission `F~ = t_s t_i F`.
pub fn transmitted_amplitude(amplitude: Complex64, t_s: f64, t_i: f64) -> Complex64 {
    amplitude * (t_s * t_i)
}

/// Joint signal-idler photon-number density at one grid node:
/// `n = Re{ F_s^* F_i }`. The imaginary residue of the conjugate product is
/// discarded, never folded in.
pub fn joint_density(f_signal: Complex64, f_idler: Complex64) -> f64 {
    (f_signal.conj() * f_idler).re
}

/// Scaled bulk kernel `sqrt(1+V_s) sqrt(1+V_i) F_vol`.
///
/// Fails when either factor is negative: the first-order surface treatment
/// has broken down and the result would be uninterpretable.
pub fn bulk_substitution(volume: Complex64, v_signal: f64, v_idler: f64) -> Result<Complex64> {
    for (field, v) in [("signal", v_signal), ("idler", v_idler)] {
        if 1.0 + v < 0.0 {
            return Err(Error::PerturbativeBreakdown {
                field: field.to_string(),
                factor: 1.0 + v,
            });
        }
    }
    Ok(volume * ((1.0 + v_signal).sqrt() * (1.0 + v_idler).sqrt()))
}

/// Boundary-correction kernel `(i / k_s) g E_p`, identical for the forward
/// and backward corrections at the input face.
pub fn surface_correction_kernel(g: Complex64, pump_amplitude: Complex64, k_s: f64) -> Complex64 {
    debug_assert!(k_s > 0.0);
    Complex64::new(0.0, 1.0 / k_s) * g * pump_amplitude
}

/// c-number kernel of the purely nonlinear part of the magnetic field at
/// position `z`:
/// `sqrt(hbar c / (2 mu0 ws A ns)) g E_p exp(i k_p z) exp(-i k_i z)`.
///
/// The square-root prefactor is fixed by requiring `H = -i/(w mu0) dE/dz`
/// applied to the first-order field solution; it carries `1/sqrt(ns)`, which
/// also makes the boundary system close onto the `(i/k_s) g E_p` correction
/// kernel. Independent of the channel direction of the signal field.
pub fn nonlinear_magnetic_kernel(
    g: Complex64,
    pump_amplitude: Complex64,
    omega_s: f64,
    n_s: f64,
    k_p: f64,
    k_i: f64,
    z: f64,
    area: f64,
    constants: &PhysicalConstants,
) -> Complex64 {
    let pref =
        (constants.hbar * constants.c / (2.0 * constants.mu_0 * omega_s * area * n_s)).sqrt();
    g * pump_amplitude * pref * Complex64::from_polar(1.0, (k_p - k_i) * z)
}
