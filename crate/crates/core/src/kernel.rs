//! Kernel containers: complex two-photon amplitudes per grid node with the
//! volume and surface parts kept separate.

use num_complex::Complex64;

use crate::dispersion::DirectionChannel;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Which generated field a kernel describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Signal,
    Idler,
}

/// Per-node complex amplitudes of one field's kernel.
#[derive(Debug, Clone)]
pub struct TwoPhotonKernel {
    pub field: FieldTag,
    pub volume: Vec<Complex64>,
    pub surface: Vec<Complex64>,
}

impl TwoPhotonKernel {
    pub fn zeros(field: FieldTag, nodes: usize) -> Self {
        Self {
            field,
            volume: vec![Complex64::new(0.0, 0.0); nodes],
            surface: vec![Complex64::new(0.0, 0.0); nodes],
        }
    }

    pub fn total(&self, idx: usize) -> Complex64 {
        self.volume[idx] + self.surface[idx]
    }

    pub fn all_finite(&self) -> bool {
        self.volume
            .iter()
            .chain(self.surface.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Diagnostics accumulated while assembling kernels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KernelDiagnostics {
    /// Nodes excluded because linear propagation turned evanescent.
    pub invalid_nodes: usize,
    /// Nodes where |V| >= 1 for either field: the first-order surface
    /// treatment is strained there and downstream numbers deserve suspicion.
    pub validity_warning_nodes: usize,
    /// Human-readable notices (e.g. closed-form fallback decisions).
    pub notices: Vec<String>,
}

/// Signal and idler kernels over a shared grid.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub grid: FrequencyGrid,
    pub signal: TwoPhotonKernel,
    pub idler: TwoPhotonKernel,
    /// Direction channels included in the coherent sum.
    pub channels: Vec<DirectionChannel>,
    /// Nodes that remain usable for quadrature (false = excluded).
    pub valid: Vec<bool>,
    pub diagnostics: KernelDiagnostics,
    /// Hash of the structure description that produced this pair.
    pub provenance: u64,
}

impl KernelPair {
    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn ensure_same_grid(&self, other: &KernelPair) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "kernel pairs were computed on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// FNV-1a over the serialized structure description; stable across runs.
pub fn provenance_hash(description: &impl serde::Serialize) -> u64 {
    let bytes = serde_json::to_vec(description).unwrap_or_default();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
