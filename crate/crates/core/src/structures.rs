//! Kernel assembly for the three structure families: a bulk crystal slab, a
//! periodically poled crystal (sign-alternating domains, every domain wall a
//! nonlinearity discontinuity), and a 1D layered stack driven through
//! transfer-matrix linear propagation with all eight direction channels.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{
    coupling_constant, segment_integral, surface_factor, transmitted_amplitude, volume_amplitude,
    PumpSpectrum,
};
use crate::dispersion::{
    fresnel_interface, phase_mismatch, refractive_index, wave_vector, Direction, DirectionChannel,
    ExternalAngles, FieldMode, FieldRole, OpticalMedium,
};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::kernel::{provenance_hash, FieldTag, KernelDiagnostics, KernelPair, TwoPhotonKernel};
use crate::transfer::{solve_from_left, solve_from_right, StackKz, StackSolution, TransferChain};

/// Homogeneous nonlinear slab surrounded by a linear medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkCrystalSpec {
    pub medium: OpticalMedium,
    /// Crystal length, m.
    pub length: f64,
    pub surround: OpticalMedium,
}

impl BulkCrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "bulk crystal length must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

/// Periodically poled crystal: domains of alternating d_eff sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoledCrystalSpec {
    pub medium: OpticalMedium,
    pub total_length: f64,
    /// Poling period (two domains per period), m.
    pub poling_period: f64,
    /// Fraction of the period occupied by the +d_eff domain.
    pub duty_cycle: f64,
}

impl PoledCrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.poling_period > 0.0) {
            return Err(Error::InvalidSpec("poling period must be positive".into()));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "duty cycle must lie in (0, 1), got {}",
                self.duty_cycle
            )));
        }
        if self.total_length < 0.5 * self.poling_period {
            return Err(Error::InvalidSpec(
                "total length must cover at least half a poling period".into(),
            ));
        }
        Ok(())
    }
}

/// One layer of a stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub medium: OpticalMedium,
    /// Thickness, m.
    pub thickness: f64,
    /// Sign applied to the layer's d_eff (+1/-1).
    pub sign: f64,
}

/// 1D nonlinear layered stack with linear external media on both sides.
/// All angles are external (vacuum-side); s-polarization only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredStackSpec {
    pub layers: Vec<Layer>,
    pub external_in: OpticalMedium,
    pub external_out: OpticalMedium,
    pub pump_incidence: f64,
    pub signal_emission: f64,
    pub idler_emission: f64,
}

impl LayeredStackSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidSpec("stack needs at least one layer".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "layer {i} has non-positive thickness {}",
                    l.thickness
                )));
            }
            if l.sign != 1.0 && l.sign != -1.0 {
                return Err(Error::InvalidSpec(format!(
                    "layer {i} sign must be +1 or -1, got {}",
                    l.sign
                )));
            }
        }
        if !self.external_in.is_linear() || !self.external_out.is_linear() {
            return Err(Error::InvalidSpec(
                "external media must be linear (d_eff = 0)".into(),
            ));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }
}

/// Tagged union of the supported structure families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StructureSpec {
    Bulk(BulkCrystalSpec),
    Poled(PoledCrystalSpec),
    Stack(LayeredStackSpec),
}

/// Contiguous tile of a decomposed structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSegment {
    pub z_start: f64,
    pub length: f64,
    /// d_eff sign carried by this segment.
    pub sign: f64,
    /// Index into the owning structure's layer/media list (0 for poled).
    pub medium_index: usize,
}

/// Decompose a poled crystal into signed domains tiling `[0, total_length]`.
/// Signs alternate starting with +; the final domain is truncated if the
/// total length is not a whole number of domains.
pub fn segment_decomposition(spec: &PoledCrystalSpec) -> Result<Vec<DomainSegment>> {
    spec.validate()?;
    let a = spec.duty_cycle * spec.poling_period;
    let b = (1.0 - spec.duty_cycle) * spec.poling_period;
    let mut out = Vec::new();
    let mut z = 0.0_f64;
    let mut positive = true;
    while z < spec.total_length {
        let nominal = if positive { a } else { b };
        let remaining = spec.total_length - z;
        let len = nominal.min(remaining);
        // Guard against a sliver produced by accumulated rounding.
        if len <= 1e-9 * spec.poling_period {
            break;
        }
        out.push(DomainSegment {
            z_start: z,
            length: len,
            sign: if positive { 1.0 } else { -1.0 },
            medium_index: 0,
        });
        z += nominal;
        positive = !positive;
    }
    Ok(out)
}

/// The layer list of a stack as a segment tiling (diagnostic view).
pub fn stack_segments(spec: &LayeredStackSpec) -> Vec<DomainSegment> {
    let mut out = Vec::with_capacity(spec.layers.len());
    let mut z = 0.0;
    for (i, l) in spec.layers.iter().enumerate() {
        out.push(DomainSegment {
            z_start: z,
            length: l.thickness,
            sign: l.sign,
            medium_index: i,
        });
        z += l.thickness;
    }
    out
}

/// Summation strategy for poled structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoledMethod {
    /// Loop over domains.
    DirectSum,
    /// Closed-form geometric series over whole periods; falls back to the
    /// direct loop (with a notice) when the decomposition is non-uniform.
    GeometricSum,
}

/// Options shared by kernel assembly entry points.
#[derive(Debug, Clone)]
pub struct KernelOptions {
    pub include_surface: bool,
    /// Direction channels included in stack sums (bulk/poled use FFF only).
    pub channels: Vec<DirectionChannel>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            include_surface: true,
            channels: DirectionChannel::all().to_vec(),
        }
    }
}

fn check_window(medium: &OpticalMedium, omega_lo: f64, omega_hi: f64) -> Result<()> {
    refractive_index(medium, omega_lo)?;
    refractive_index(medium, omega_hi)?;
    Ok(())
}

fn pump_omega_extremes(grid: &FrequencyGrid) -> (f64, f64) {
    match grid {
        FrequencyGrid::CwLine { pump_omega, .. } => (*pump_omega, *pump_omega),
        FrequencyGrid::Full2D { signal, idler } => {
            (signal.min + idler.min, signal.max + idler.max)
        }
    }
}

struct NodeAmplitudes {
    volume: Complex64,
    surface_signal: Complex64,
    surface_idler: Complex64,
    valid: bool,
    validity_warning: bool,
}

impl NodeAmplitudes {
    fn invalid() -> Self {
        Self {
            volume: Complex64::default(),
            surface_signal: Complex64::default(),
            surface_idler: Complex64::default(),
            valid: false,
            validity_warning: false,
        }
    }
}

fn assemble(
    grid: &FrequencyGrid,
    channels: Vec<DirectionChannel>,
    provenance: u64,
    notices: Vec<String>,
    nodes: Vec<NodeAmplitudes>,
) -> KernelPair {
    let n = nodes.len();
    let mut signal = TwoPhotonKernel::zeros(FieldTag::Signal, n);
    let mut idler = TwoPhotonKernel::zeros(FieldTag::Idler, n);
    let mut valid = vec![true; n];
    let mut diagnostics = KernelDiagnostics {
        notices,
        ..KernelDiagnostics::default()
    };
    for (i, node) in nodes.into_iter().enumerate() {
        signal.volume[i] = node.volume;
        idler.volume[i] = node.volume;
        signal.surface[i] = node.surface_signal;
        idler.surface[i] = node.surface_idler;
        valid[i] = node.valid;
        if !node.valid {
            diagnostics.invalid_nodes += 1;
        }
        if node.validity_warning {
            diagnostics.validity_warning_nodes += 1;
        }
    }
    KernelPair {
        grid: grid.clone(),
        signal,
        idler,
        channels,
        valid,
        diagnostics,
        provenance,
    }
}

/// Kernels of a bulk crystal slab: forward pump, both photons forward.
/// Stored parts already carry the output-boundary transmission, so the
/// per-node totals are `t_s t_i (1 + V_m) F_vol`.
pub fn bulk_kernel(
    spec: &BulkCrystalSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
) -> Result<KernelPair> {
    spec.validate()?;
    let (w_lo, w_hi) = grid.omega_extremes();
    check_window(&spec.medium, w_lo, w_hi)?;
    check_window(&spec.surround, w_lo, w_hi)?;
    let (p_lo, p_hi) = pump_omega_extremes(grid);
    check_window(&spec.medium, p_lo, p_hi)?;

    let nodes: Vec<NodeAmplitudes> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| bulk_node(spec, pump, grid, options, idx))
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(
        grid,
        vec![DirectionChannel::FFF],
        provenance_hash(spec),
        Vec::new(),
        nodes,
    ))
}

fn bulk_node(
    spec: &BulkCrystalSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
    idx: usize,
) -> Result<NodeAmplitudes> {
    let (ws, wi) = grid.node(idx);
    let wp = ws + wi;
    let m = &spec.medium;
    let n_s = refractive_index(m, ws)?;
    let n_i = refractive_index(m, wi)?;
    let k_p = wave_vector(m, &FieldMode::collinear(FieldRole::Pump, Direction::F, wp))?;
    let k_s = wave_vector(m, &FieldMode::collinear(FieldRole::Signal, Direction::F, ws))?;
    let k_i = wave_vector(m, &FieldMode::collinear(FieldRole::Idler, Direction::F, wi))?;
    let delta_k = k_p - k_s - k_i;

    let g = coupling_constant(m.d_eff, ws, wi, n_s, n_i);
    let f_vol = volume_amplitude(g, pump.amplitude_at(wp), k_p, delta_k, spec.length, 0.0);

    let (t_s, _) = fresnel_interface(n_s, refractive_index(&spec.surround, ws)?, 0.0)?;
    let (t_i, _) = fresnel_interface(n_i, refractive_index(&spec.surround, wi)?, 0.0)?;
    let volume = transmitted_amplitude(f_vol, t_s, t_i);

    let v_s = surface_factor(delta_k, k_s.abs())?;
    let v_i = surface_factor(delta_k, k_i.abs())?;
    let (surface_signal, surface_idler) = if options.include_surface {
        (volume * v_s, volume * v_i)
    } else {
        (Complex64::default(), Complex64::default())
    };
    Ok(NodeAmplitudes {
        volume,
        surface_signal,
        surface_idler,
        valid: true,
        validity_warning: v_s.abs() >= 1.0 || v_i.abs() >= 1.0,
    })
}

/// Signed structure factor `sum_j sign_j exp(i dk z_j) S(dk, l_j)` where `S`
/// is the single-segment integral, evaluated by a literal loop.
pub fn structure_factor_direct(segments: &[DomainSegment], delta_k: f64) -> Complex64 {
    let mut acc = Complex64::default();
    for s in segments {
        acc += Complex64::from_polar(s.sign, delta_k * s.z_start) * segment_integral(delta_k, s.length);
    }
    acc
}

/// `sum_{m=0}^{count-1} exp(i m theta)` via the Dirichlet closed form,
/// stable near theta = 2 pi q where the naive ratio cancels.
fn geometric_phase_sum(theta: f64, count: usize) -> Complex64 {
    if count == 0 {
        return Complex64::default();
    }
    let m = count as f64;
    let q = (theta / std::f64::consts::TAU).round();
    let delta = theta - std::f64::consts::TAU * q;
    let half = 0.5 * delta;
    let den = half.sin();
    if den == 0.0 {
        return Complex64::from(m);
    }
    let ratio = (m * half).sin() / den;
    Complex64::from_polar(ratio, (m - 1.0) * half)
}

/// Closed-form structure factor over whole periods; `None` when the
/// decomposition is not an integer number of periods plus at most one
/// complete positive domain.
pub fn structure_factor_geometric(
    spec: &PoledCrystalSpec,
    segments: &[DomainSegment],
    delta_k: f64,
) -> Option<Complex64> {
    let a = spec.duty_cycle * spec.poling_period;
    let b = (1.0 - spec.duty_cycle) * spec.poling_period;
    let tol = 1e-6 * spec.poling_period;
    for (j, s) in segments.iter().enumerate() {
        let nominal = if j % 2 == 0 { a } else { b };
        let expected_sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if (s.length - nominal).abs() > tol || s.sign != expected_sign {
            return None;
        }
    }
    let pairs = segments.len() / 2;
    let trailing = segments.len() % 2 == 1;

    let period_term = segment_integral(delta_k, a)
        - Complex64::from_polar(1.0, delta_k * a) * segment_integral(delta_k, b);
    let mut acc = period_term * geometric_phase_sum(delta_k * spec.poling_period, pairs);
    if trailing {
        let z = pairs as f64 * spec.poling_period;
        acc += Complex64::from_polar(1.0, delta_k * z) * segment_integral(delta_k, a);
    }
    Some(acc)
}

/// Output-referenced poled amplitude: the structure factor dressed with the
/// coupling, pump amplitude and the linear propagation of both photons from
/// the segments to the crystal exit.
pub fn poled_amplitude(
    g: Complex64,
    pump_amplitude: Complex64,
    k_s: f64,
    k_i: f64,
    total_length: f64,
    structure_factor: Complex64,
) -> Complex64 {
    g * pump_amplitude
        * Complex64::from_polar(1.0, (k_s + k_i) * total_length)
        * structure_factor
}

/// Kernels of a periodically poled crystal (collinear, forward channel).
/// Each domain wall is a nonlinearity discontinuity; every domain carries
/// its slab surface factor, and since V is domain-independent the totals
/// satisfy `F_surf = V F_vol` exactly like a single slab.
pub fn poled_kernel(
    spec: &PoledCrystalSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    method: PoledMethod,
    options: &KernelOptions,
) -> Result<KernelPair> {
    spec.validate()?;
    let (w_lo, w_hi) = grid.omega_extremes();
    check_window(&spec.medium, w_lo, w_hi)?;
    let (p_lo, p_hi) = pump_omega_extremes(grid);
    check_window(&spec.medium, p_lo, p_hi)?;

    let segments = segment_decomposition(spec)?;
    let uniform = structure_factor_geometric(spec, &segments, 0.0).is_some();
    let mut notices = Vec::new();
    let effective = match method {
        PoledMethod::GeometricSum if !uniform => {
            notices.push(
                "geometric_sum: non-uniform decomposition (truncated final domain); \
                 falling back to direct_sum"
                    .to_string(),
            );
            PoledMethod::DirectSum
        }
        other => other,
    };

    let total_length = spec.total_length;
    let nodes: Vec<NodeAmplitudes> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| poled_node(spec, pump, grid, options, &segments, effective, total_length, idx))
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(
        grid,
        vec![DirectionChannel::FFF],
        provenance_hash(spec),
        notices,
        nodes,
    ))
}

#[allow(clippy::too_many_arguments)]
fn poled_node(
    spec: &PoledCrystalSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
    segments: &[DomainSegment],
    method: PoledMethod,
    total_length: f64,
    idx: usize,
) -> Result<NodeAmplitudes> {
    let (ws, wi) = grid.node(idx);
    let wp = ws + wi;
    let m = &spec.medium;
    let n_s = refractive_index(m, ws)?;
    let n_i = refractive_index(m, wi)?;
    let k_p = wave_vector(m, &FieldMode::collinear(FieldRole::Pump, Direction::F, wp))?;
    let k_s = wave_vector(m, &FieldMode::collinear(FieldRole::Signal, Direction::F, ws))?;
    let k_i = wave_vector(m, &FieldMode::collinear(FieldRole::Idler, Direction::F, wi))?;
    let delta_k = k_p - k_s - k_i;

    let g = coupling_constant(m.d_eff, ws, wi, n_s, n_i);
    // Output referencing: every segment kernel is propagated linearly to the
    // crystal exit, which contributes exp(i (k_s + k_i) L_tot) overall.
    let factor = match method {
        PoledMethod::DirectSum => structure_factor_direct(segments, delta_k),
        PoledMethod::GeometricSum => structure_factor_geometric(spec, segments, delta_k)
            .expect("uniformity was checked before dispatch"),
    };
    let volume = poled_amplitude(g, pump.amplitude_at(wp), k_s, k_i, total_length, factor);

    let v_s = surface_factor(delta_k, k_s.abs())?;
    let v_i = surface_factor(delta_k, k_i.abs())?;
    let (surface_signal, surface_idler) = if options.include_surface {
        (volume * v_s, volume * v_i)
    } else {
        (Complex64::default(), Complex64::default())
    };
    Ok(NodeAmplitudes {
        volume,
        surface_signal,
        surface_idler,
        valid: true,
        validity_warning: v_s.abs() >= 1.0 || v_i.abs() >= 1.0,
    })
}

/// First-order quasi-phase-matching period for degenerate collinear
/// operation at pump frequency `2 pi c / lambda_p`.
pub fn optimum_poling_period(medium: &OpticalMedium, lambda_p: f64) -> Result<f64> {
    let wp = crate::dispersion::angular_frequency(lambda_p);
    let ws = 0.5 * wp;
    let dk = phase_mismatch(medium, ws, ws, DirectionChannel::FFF, ExternalAngles::default())?;
    optimum_period_from_mismatch(dk)
}

/// `Lambda = 2 pi / |dk|`, with dk = 0 reported as "no poling needed".
pub fn optimum_period_from_mismatch(delta_k: f64) -> Result<f64> {
    if delta_k == 0.0 {
        return Err(Error::AlreadyPhaseMatched);
    }
    Ok(std::f64::consts::TAU / delta_k.abs())
}

/// Spectral support window around degeneracy for a poled run: the signal
/// band spanning the central quasi-phase-matching lobe plus `side_lobes`
/// further lobes on each side, found by bisection on the accumulated phase
/// slip `|dk(ws) - dk(w0)| L / 2 = (side_lobes + 1) pi`.
///
/// Falls back to the largest window keeping signal and idler inside the
/// medium's transparency range when the lobes extend past it.
pub fn poled_support_window(
    medium: &OpticalMedium,
    lambda_p: f64,
    total_length: f64,
    side_lobes: usize,
) -> Result<(f64, f64)> {
    let wp = crate::dispersion::angular_frequency(lambda_p);
    let w0 = 0.5 * wp;
    let angles = ExternalAngles::default();
    let dk0 = phase_mismatch(medium, w0, w0, DirectionChannel::FFF, angles)?;
    let target = (side_lobes as f64 + 1.0) * std::f64::consts::PI;
    let slip = |d: f64| -> Result<f64> {
        let dk = phase_mismatch(medium, w0 + d, w0 - d, DirectionChannel::FFF, angles)?;
        Ok((dk - dk0).abs() * 0.5 * total_length - target)
    };
    // Largest symmetric detuning keeping both photons inside the window.
    let [lam_min, lam_max] = medium.transparency_window;
    let w_hi_limit = crate::dispersion::angular_frequency(lam_min);
    let w_lo_limit = crate::dispersion::angular_frequency(lam_max);
    let d_cap = (w_hi_limit - w0).min(w0 - w_lo_limit).min(0.45 * w0) * (1.0 - 1e-9);
    if d_cap <= 0.0 {
        return Err(Error::InvalidSpec(
            "degenerate frequency too close to the transparency edge".into(),
        ));
    }
    let mut hi = d_cap;
    if slip(d_cap)? < 0.0 {
        return Ok((w0 - d_cap, w0 + d_cap));
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slip(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((w0 - hi, w0 + hi))
}

/// Longitudinal wave-vector magnitudes of one field through the stack.
fn stack_kz(spec: &LayeredStackSpec, omega: f64, theta_ext: f64) -> Result<StackKz> {
    let mode = |medium: &OpticalMedium| -> Result<f64> {
        wave_vector(
            medium,
            &FieldMode {
                role: FieldRole::Signal,
                direction: Direction::F,
                angular_frequency: omega,
                external_angle: theta_ext,
            },
        )
    };
    Ok(StackKz {
        k_in: mode(&spec.external_in)?,
        layers: spec
            .layers
            .iter()
            .map(|l| mode(&l.medium))
            .collect::<Result<Vec<_>>>()?,
        k_out: mode(&spec.external_out)?,
    })
}

/// Linear scattering solution of the stack at one frequency/angle for a
/// unit wave incident from the left: per-layer (forward, backward)
/// amplitudes plus the output (t, r) coefficients.
pub fn stack_linear_solution(
    spec: &LayeredStackSpec,
    omega: f64,
    theta_ext: f64,
) -> Result<(StackSolution, Complex64, Complex64)> {
    spec.validate()?;
    let kz = stack_kz(spec, omega, theta_ext)?;
    let thicknesses: Vec<f64> = spec.layers.iter().map(|l| l.thickness).collect();
    solve_from_left(&kz, &thicknesses, Complex64::from(1.0))
}

/// Per-interface and cumulative transfer matrices at one frequency/angle.
pub fn stack_transfer_chain(
    spec: &LayeredStackSpec,
    omega: f64,
    theta_ext: f64,
) -> Result<TransferChain> {
    spec.validate()?;
    let kz = stack_kz(spec, omega, theta_ext)?;
    let thicknesses: Vec<f64> = spec.layers.iter().map(|l| l.thickness).collect();
    Ok(crate::transfer::transfer_chain(&kz, &thicknesses))
}

/// One layer's kernel contribution for one direction channel (exposed for
/// audits: the surface part of each contribution is exactly V times its
/// volume part).
#[derive(Debug, Clone, Copy)]
pub struct StackContribution {
    pub layer: usize,
    pub channel: DirectionChannel,
    pub volume: Complex64,
    pub v_signal: f64,
    pub v_idler: f64,
}

struct StackNodeEnv<'a> {
    spec: &'a LayeredStackSpec,
    pump: &'a PumpSpectrum,
    options: &'a KernelOptions,
    thicknesses: Vec<f64>,
    /// Pump solution reused across nodes when the pump is monochromatic.
    cw_pump: Option<StackSolution>,
}

fn stack_pump_solution(
    spec: &LayeredStackSpec,
    thicknesses: &[f64],
    omega_p: f64,
    amplitude: Complex64,
) -> Result<StackSolution> {
    let kz = stack_kz(spec, omega_p, spec.pump_incidence)?;
    let (sol, _, _) = solve_from_left(&kz, thicknesses, amplitude)?;
    Ok(sol)
}

fn stack_node(env: &StackNodeEnv, grid: &FrequencyGrid, idx: usize) -> Result<NodeAmplitudes> {
    let spec = env.spec;
    let (ws, wi) = grid.node(idx);
    let wp = ws + wi;

    let kz_s = match stack_kz(spec, ws, spec.signal_emission) {
        Ok(v) => v,
        Err(Error::Evanescent { .. }) => return Ok(NodeAmplitudes::invalid()),
        Err(e) => return Err(e),
    };
    let kz_i = match stack_kz(spec, wi, spec.idler_emission) {
        Ok(v) => v,
        Err(Error::Evanescent { .. }) => return Ok(NodeAmplitudes::invalid()),
        Err(e) => return Err(e),
    };

    let pump_sol_storage;
    let pump_sol = match &env.cw_pump {
        Some(sol) => sol,
        None => {
            pump_sol_storage = match stack_pump_solution(
                spec,
                &env.thicknesses,
                wp,
                env.pump.amplitude_at(wp),
            ) {
                Ok(v) => v,
                Err(Error::Evanescent { .. }) => return Ok(NodeAmplitudes::invalid()),
                Err(e) => return Err(e),
            };
            &pump_sol_storage
        }
    };
    let kz_p = match stack_kz(spec, wp, spec.pump_incidence) {
        Ok(v) => v,
        Err(Error::Evanescent { .. }) => return Ok(NodeAmplitudes::invalid()),
        Err(e) => return Err(e),
    };

    let sig_sol = solve_from_right(&kz_s, &env.thicknesses)?;
    let idl_sol = solve_from_right(&kz_i, &env.thicknesses)?;

    let mut volume = Complex64::default();
    let mut surface_signal = Complex64::default();
    let mut surface_idler = Complex64::default();

    for (j, layer) in spec.layers.iter().enumerate() {
        if layer.medium.is_linear() {
            continue;
        }
        let n_sj = refractive_index(&layer.medium, ws)?;
        let n_ij = refractive_index(&layer.medium, wi)?;
        let g = coupling_constant(layer.sign * layer.medium.d_eff, ws, wi, n_sj, n_ij);
        let (a_p, b_p) = pump_sol.layer_coefficients[j];
        let (c_s, d_s) = sig_sol.layer_coefficients[j];
        let (c_i, d_i) = idl_sol.layer_coefficients[j];
        let (kp, ks, ki) = (kz_p.layers[j], kz_s.layers[j], kz_i.layers[j]);

        for ch in &env.options.channels {
            // Pump weight: local forward/backward amplitude at the layer
            // entrance. Signal/idler weights come from the output-mode
            // solution: its backward component weights locally forward
            // generation and vice versa.
            let w_p = match ch.pump {
                Direction::F => a_p,
                Direction::B => b_p,
            };
            let w_s = match ch.signal {
                Direction::F => d_s,
                Direction::B => c_s,
            };
            let w_i = match ch.idler {
                Direction::F => d_i,
                Direction::B => c_i,
            };
            let weight = w_p * w_s * w_i;
            if weight.norm_sqr() == 0.0 {
                continue;
            }
            let dk = ch.pump.sign() * kp - ch.signal.sign() * ks - ch.idler.sign() * ki;
            let vol = g * weight * segment_integral(dk, layer.thickness);
            volume += vol;
            if env.options.include_surface {
                surface_signal += vol * (dk / ks);
                surface_idler += vol * (dk / ki);
            }
        }
    }

    Ok(NodeAmplitudes {
        volume,
        surface_signal,
        surface_idler,
        valid: true,
        validity_warning: false,
    })
}

/// Per-layer, per-channel contributions at a single grid node, for audit and
/// tests. The summed parts equal what `stack_kernel` stores at that node.
pub fn stack_contributions(
    spec: &LayeredStackSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
    idx: usize,
) -> Result<Vec<StackContribution>> {
    spec.validate()?;
    let thicknesses: Vec<f64> = spec.layers.iter().map(|l| l.thickness).collect();
    let (ws, wi) = grid.node(idx);
    let wp = ws + wi;
    let kz_s = stack_kz(spec, ws, spec.signal_emission)?;
    let kz_i = stack_kz(spec, wi, spec.idler_emission)?;
    let kz_p = stack_kz(spec, wp, spec.pump_incidence)?;
    let pump_sol = stack_pump_solution(spec, &thicknesses, wp, pump.amplitude_at(wp))?;
    let sig_sol = solve_from_right(&kz_s, &thicknesses)?;
    let idl_sol = solve_from_right(&kz_i, &thicknesses)?;

    let mut out = Vec::new();
    for (j, layer) in spec.layers.iter().enumerate() {
        if layer.medium.is_linear() {
            continue;
        }
        let n_sj = refractive_index(&layer.medium, ws)?;
        let n_ij = refractive_index(&layer.medium, wi)?;
        let g = coupling_constant(layer.sign * layer.medium.d_eff, ws, wi, n_sj, n_ij);
        let (a_p, b_p) = pump_sol.layer_coefficients[j];
        let (c_s, d_s) = sig_sol.layer_coefficients[j];
        let (c_i, d_i) = idl_sol.layer_coefficients[j];
        let (kp, ks, ki) = (kz_p.layers[j], kz_s.layers[j], kz_i.layers[j]);
        for ch in &options.channels {
            let w_p = match ch.pump {
                Direction::F => a_p,
                Direction::B => b_p,
            };
            let w_s = match ch.signal {
                Direction::F => d_s,
                Direction::B => c_s,
            };
            let w_i = match ch.idler {
                Direction::F => d_i,
                Direction::B => c_i,
            };
            let dk = ch.pump.sign() * kp - ch.signal.sign() * ks - ch.idler.sign() * ki;
            out.push(StackContribution {
                layer: j,
                channel: *ch,
                volume: g * w_p * w_s * w_i * segment_integral(dk, layer.thickness),
                v_signal: dk / ks,
                v_idler: dk / ki,
            });
        }
    }
    Ok(out)
}

/// Kernels of a layered stack: per-layer volume and surface amplitudes for
/// every direction channel, weighted by linear propagation to the forward
/// output port and summed coherently. The output-mode normalization embeds
/// the output-boundary transmission, so no extra Fresnel factors apply.
pub fn stack_kernel(
    spec: &LayeredStackSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
) -> Result<KernelPair> {
    spec.validate()?;
    let (w_lo, w_hi) = grid.omega_extremes();
    let (p_lo, p_hi) = pump_omega_extremes(grid);
    for m in spec
        .layers
        .iter()
        .map(|l| &l.medium)
        .chain([&spec.external_in, &spec.external_out])
    {
        check_window(m, w_lo, w_hi)?;
        check_window(m, p_lo, p_hi)?;
    }

    let thicknesses: Vec<f64> = spec.layers.iter().map(|l| l.thickness).collect();
    let cw_pump = match grid {
        FrequencyGrid::CwLine { pump_omega, .. } => Some(stack_pump_solution(
            spec,
            &thicknesses,
            *pump_omega,
            pump.amplitude_at(*pump_omega),
        )?),
        FrequencyGrid::Full2D { .. } => None,
    };
    let env = StackNodeEnv {
        spec,
        pump,
        options,
        thicknesses,
        cw_pump,
    };

    let nodes: Vec<NodeAmplitudes> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| stack_node(&env, grid, idx))
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(
        grid,
        options.channels.clone(),
        provenance_hash(spec),
        Vec::new(),
        nodes,
    ))
}
