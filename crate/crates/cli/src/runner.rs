//! Scenario execution: resolve a validated config against the media fixture,
//! compute kernels and observables, and render the deterministic outputs.

use num_complex::Complex64;
use pairgen_core::amplitudes::PumpSpectrum;
use pairgen_core::dispersion::{angular_frequency, vacuum_wavelength, DirectionChannel};
use pairgen_core::grid::{Axis, FrequencyGrid};
use pairgen_core::kernel::KernelPair;
use pairgen_core::media::{builtin_media, MediaSet};
use pairgen_core::spectra::{
    density_map, pair_rate, relative_surface_contribution, signal_spectrum, DensityVariant,
    SpectralCurve,
};
use pairgen_core::structures::{
    bulk_kernel, optimum_poling_period, poled_kernel, poled_support_window, stack_kernel,
    BulkCrystalSpec, KernelOptions, Layer, LayeredStackSpec, PoledCrystalSpec, PoledMethod,
    StructureSpec,
};

use crate::config::{
    ChannelsConfig, GridMode, PolingConfig, PumpConfig, PumpKind, ScenarioConfig, StructureConfig,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] pairgen_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Everything one scenario evaluation produces before rendering.
pub struct Products {
    pub grid: FrequencyGrid,
    pub pair: KernelPair,
    pub s_vol: SpectralCurve,
    pub s_surf: SpectralCurve,
    pub s_total: SpectralCurve,
    pub density_rows: Option<Vec<(f64, f64, f64, f64, f64)>>,
    pub n_vol: f64,
    pub n_total: f64,
    pub relative_surface: Option<f64>,
    pub resolved_poling_period: Option<f64>,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Convergence {
    /// |N(refined) - N| / N for the volume and total rates.
    pub n_vol_rel_delta: f64,
    pub n_total_rel_delta: f64,
    /// max over shared nodes of the relative change of S_total (nodes above
    /// 1e-3 of the peak).
    pub s_total_max_rel_delta: f64,
}

fn resolve_media(cfg: &ScenarioConfig) -> RunResult<MediaSet> {
    let mut media = builtin_media()?;
    for m in &cfg.inline_media {
        media.insert(m.to_medium())?;
    }
    Ok(media)
}

fn pump_spectrum(pump: &PumpConfig) -> PumpSpectrum {
    let w0 = angular_frequency(pump.wavelength_m);
    match pump.kind {
        PumpKind::Cw => PumpSpectrum::Cw {
            omega: w0,
            amplitude: Complex64::new(pump.amplitude, 0.0),
        },
        PumpKind::Pulsed => {
            let bw = pump.bandwidth_m.expect("validated");
            // Wavelength width -> angular-frequency width at the carrier.
            let sigma = w0 * bw / pump.wavelength_m;
            PumpSpectrum::Pulsed {
                center_omega: w0,
                sigma_omega: sigma,
                peak: Complex64::new(pump.amplitude, 0.0),
            }
        }
    }
}

struct ResolvedStructure {
    spec: StructureSpec,
    resolved_poling_period: Option<f64>,
}

fn resolve_structure(cfg: &ScenarioConfig, media: &MediaSet) -> RunResult<ResolvedStructure> {
    match &cfg.structure {
        StructureConfig::Bulk {
            medium,
            length_m,
            surround,
        } => Ok(ResolvedStructure {
            spec: StructureSpec::Bulk(BulkCrystalSpec {
                medium: media.get(medium)?.clone(),
                length: *length_m,
                surround: media.get(surround)?.clone(),
            }),
            resolved_poling_period: None,
        }),
        StructureConfig::Poled {
            medium,
            total_length_m,
            poling,
            duty_cycle,
        } => {
            let medium = media.get(medium)?.clone();
            let period = match poling {
                PolingConfig::Optimal => optimum_poling_period(&medium, cfg.pump.wavelength_m)?,
                PolingConfig::Period(p) => *p,
            };
            Ok(ResolvedStructure {
                spec: StructureSpec::Poled(PoledCrystalSpec {
                    medium,
                    total_length: *total_length_m,
                    poling_period: period,
                    duty_cycle: *duty_cycle,
                }),
                resolved_poling_period: Some(period),
            })
        }
        StructureConfig::Stack {
            external_in,
            external_out,
            pump_incidence_rad,
            signal_emission_rad,
            idler_emission_rad,
            layers,
        } => {
            let layers = layers
                .iter()
                .map(|l| {
                    Ok(Layer {
                        medium: media.get(&l.medium)?.clone(),
                        thickness: l.thickness_m,
                        sign: l.sign,
                    })
                })
                .collect::<RunResult<Vec<_>>>()?;
            Ok(ResolvedStructure {
                spec: StructureSpec::Stack(LayeredStackSpec {
                    layers,
                    external_in: media.get(external_in)?.clone(),
                    external_out: media.get(external_out)?.clone(),
                    pump_incidence: *pump_incidence_rad,
                    signal_emission: *signal_emission_rad,
                    idler_emission: *idler_emission_rad,
                }),
                resolved_poling_period: None,
            })
        }
    }
}

fn resolve_grid(
    cfg: &ScenarioConfig,
    structure: &StructureSpec,
) -> RunResult<FrequencyGrid> {
    let g = &cfg.grid;
    match g.mode {
        GridMode::CwLine => {
            let wp = angular_frequency(cfg.pump.wavelength_m);
            let (w_lo, w_hi) = match (&g.lambda_s_range, g.auto_window_lobes) {
                (Some((lam_min, lam_max)), None) => {
                    (angular_frequency(*lam_max), angular_frequency(*lam_min))
                }
                (None, Some(lobes)) => match structure {
                    StructureSpec::Poled(spec) => poled_support_window(
                        &spec.medium,
                        cfg.pump.wavelength_m,
                        spec.total_length,
                        lobes,
                    )?,
                    _ => {
                        return Err(RunError::Config(
                            "auto_window_lobes needs a poled_crystal structure".into(),
                        ))
                    }
                },
                _ => unreachable!("validated"),
            };
            Ok(FrequencyGrid::cw_line(wp, Axis::new(w_lo, w_hi, g.nodes)?)?)
        }
        GridMode::Full2D => {
            let (s_min, s_max) = g.lambda_s_range.expect("validated");
            let (i_min, i_max) = g.lambda_i_range.expect("validated");
            Ok(FrequencyGrid::full_2d(
                Axis::new(angular_frequency(s_max), angular_frequency(s_min), g.nodes)?,
                Axis::new(
                    angular_frequency(i_max),
                    angular_frequency(i_min),
                    g.idler_nodes.expect("validated"),
                )?,
            ))
        }
    }
}

fn kernel_options(cfg: &ScenarioConfig) -> KernelOptions {
    KernelOptions {
        include_surface: cfg.toggles.surface,
        channels: match &cfg.toggles.channels {
            ChannelsConfig::All => DirectionChannel::all().to_vec(),
            ChannelsConfig::Subset(list) => list.clone(),
        },
    }
}

fn compute_pair(
    structure: &StructureSpec,
    pump: &PumpSpectrum,
    grid: &FrequencyGrid,
    options: &KernelOptions,
) -> RunResult<KernelPair> {
    Ok(match structure {
        StructureSpec::Bulk(spec) => bulk_kernel(spec, pump, grid, options)?,
        StructureSpec::Poled(spec) => {
            poled_kernel(spec, pump, grid, PoledMethod::GeometricSum, options)?
        }
        StructureSpec::Stack(spec) => stack_kernel(spec, pump, grid, options)?,
    })
}

struct Observables {
    s_vol: SpectralCurve,
    s_surf: SpectralCurve,
    s_total: SpectralCurve,
    n_vol: f64,
    n_total: f64,
    density_rows: Option<Vec<(f64, f64, f64, f64, f64)>>,
}

fn observables(pair: &KernelPair, want_density: bool) -> Observables {
    let vol = density_map(pair, DensityVariant::Volume);
    let surf = density_map(pair, DensityVariant::Surface);
    let total = density_map(pair, DensityVariant::Total);
    let density_rows = if want_density {
        let grid = &pair.grid;
        let rows = (0..grid.node_count())
            .map(|i| {
                let (ws, wi) = grid.node(i);
                (
                    vacuum_wavelength(ws) * 1e9,
                    vacuum_wavelength(wi) * 1e9,
                    vol.values[i],
                    surf.values[i],
                    total.values[i],
                )
            })
            .collect();
        Some(rows)
    } else {
        None
    };
    Observables {
        s_vol: signal_spectrum(&vol),
        s_surf: signal_spectrum(&surf),
        s_total: signal_spectrum(&total),
        n_vol: pair_rate(&vol),
        n_total: pair_rate(&total),
        density_rows,
    }
}

/// Evaluate one scenario, including the node-doubling convergence metrics.
pub fn simulate(cfg: &ScenarioConfig) -> RunResult<Products> {
    let media = resolve_media(cfg)?;
    let resolved = resolve_structure(cfg, &media)?;
    let grid = resolve_grid(cfg, &resolved.spec)?;
    let pump = pump_spectrum(&cfg.pump);
    let options = kernel_options(cfg);

    let pair = compute_pair(&resolved.spec, &pump, &grid, &options)?;
    let obs = observables(&pair, matches!(grid, FrequencyGrid::Full2D { .. }));

    // Node-doubling self-convergence.
    let fine_grid = grid.refined();
    let fine_pair = compute_pair(&resolved.spec, &pump, &fine_grid, &options)?;
    let fine_obs = observables(&fine_pair, false);
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            0.0
        } else {
            ((a - b) / b).abs()
        }
    };
    let peak = obs
        .s_total
        .values
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    let mut s_delta = 0.0_f64;
    for (i, &v) in obs.s_total.values.iter().enumerate() {
        if v > 1e-3 * peak {
            s_delta = s_delta.max(rel(fine_obs.s_total.values[2 * i], v));
        }
    }
    let convergence = Convergence {
        n_vol_rel_delta: rel(fine_obs.n_vol, obs.n_vol),
        n_total_rel_delta: rel(fine_obs.n_total, obs.n_total),
        s_total_max_rel_delta: s_delta,
    };

    let relative_surface = relative_surface_contribution(obs.n_total, obs.n_vol).ok();

    Ok(Products {
        grid,
        pair,
        s_vol: obs.s_vol,
        s_surf: obs.s_surf,
        s_total: obs.s_total,
        density_rows: obs.density_rows,
        n_vol: obs.n_vol,
        n_total: obs.n_total,
        relative_surface,
        resolved_poling_period: resolved.resolved_poling_period,
        convergence,
    })
}

/// One row of a pump-wavelength sweep.
pub struct SweepPoint {
    pub lambda_p_nm: f64,
    pub poling_period_m: f64,
    pub n_vol: f64,
    pub n_total: f64,
    pub relative_surface: f64,
    pub convergence: Convergence,
}

/// Sweep the cw pump wavelength of a poled scenario, re-deriving the optimum
/// poling period and QPM support window at every point.
pub fn sweep_pump(
    cfg: &ScenarioConfig,
    from_nm: f64,
    to_nm: f64,
    points: usize,
) -> RunResult<Vec<SweepPoint>> {
    if points < 2 {
        return Err(RunError::Config("sweep needs at least 2 points".into()));
    }
    match &cfg.structure {
        StructureConfig::Poled {
            poling: PolingConfig::Optimal,
            ..
        } => {}
        StructureConfig::Poled { .. } => {
            return Err(RunError::Config(
                "sweep-pump requires 'poling: \"optimal\"' so each point can be re-matched".into(),
            ))
        }
        _ => {
            return Err(RunError::Config(
                "sweep-pump requires a poled_crystal structure".into(),
            ))
        }
    }
    if cfg.pump.kind != PumpKind::Cw {
        return Err(RunError::Config("sweep-pump requires a cw pump".into()));
    }
    if cfg.grid.auto_window_lobes.is_none() {
        return Err(RunError::Config(
            "sweep-pump requires grid.auto_window_lobes (explicit ranges cannot follow the sweep)"
                .into(),
        ));
    }

    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let lambda_p_nm = from_nm + (to_nm - from_nm) * i as f64 / (points - 1) as f64;
        let mut point_cfg = cfg.clone();
        point_cfg.pump.wavelength_m = lambda_p_nm * 1e-9;
        let products = simulate(&point_cfg)?;
        let relative_surface = products.relative_surface.ok_or_else(|| {
            RunError::Config("sweep point produced zero volume rate".into())
        })?;
        out.push(SweepPoint {
            lambda_p_nm,
            poling_period_m: products
                .resolved_poling_period
                .expect("poled structure resolves a period"),
            n_vol: products.n_vol,
            n_total: products.n_total,
            relative_surface,
            convergence: products.convergence,
        });
    }
    Ok(out)
}

/// Run a closure inside a rayon pool of the requested size (`None` = the
/// global pool). Results must not depend on the choice; the acceptance
/// suite enforces that.
pub fn with_thread_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
