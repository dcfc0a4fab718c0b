//! Photon-pair generation in structured nonlinear media.
//!
//! Computes complex two-photon spectral amplitudes for parametric
//! down-conversion, keeping the boundary (surface) contribution that arises
//! at every discontinuity of the second-order nonlinearity separate from
//! the familiar volume term. Supported structures: bulk crystal slabs,
//! periodically poled crystals and 1D nonlinear layered stacks.
//!
//! All observables are reported in arbitrary units or as ratios; the
//! interesting quantities (spectral shapes, surface-to-volume ratios,
//! pair-rate enhancements) are normalization-free.

pub mod amplitudes;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod media;
pub mod oracle;
pub mod spectra;
pub mod structures;
pub mod transfer;

pub use error::{Error, Result};
