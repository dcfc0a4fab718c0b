//! End-to-end command implementations shared by the binary and the tests.

use std::path::Path;
use std::time::Instant;

use pairgen_core::oracle::{run_all_suites, OracleReport};

use crate::config::{parse_config, ScenarioConfig};
use crate::output::{
    render_density_csv, render_spectrum_csv, render_summary_csv, render_sweep_summary_csv,
    write_atomic, write_outputs, Manifest, ManifestConvergence,
};
use crate::runner::{simulate, sweep_pump, with_thread_pool, Products, RunError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Run(#[from] RunError),
    #[error("validation failed: {failed} of {total} oracle cases exceeded tolerance")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(e) => e.exit_code(),
            CliError::ValidationFailed { .. } => 3,
        }
    }
}

fn resolved_block(cfg: &ScenarioConfig, products: &Products) -> serde_json::Value {
    let (w_lo, w_hi) = products.grid.omega_extremes();
    serde_json::json!({
        "poling_period_um": products.resolved_poling_period.map(|p| p * 1e6),
        "grid_nodes": products.grid.node_count(),
        "omega_min_rad_per_s": w_lo,
        "omega_max_rad_per_s": w_hi,
        "surface_enabled": cfg.toggles.surface,
    })
}

/// `simulate --config <path> --out <dir> [--threads N] [--no-surface]`
pub fn cmd_simulate(
    config_path: &Path,
    out_dir: &Path,
    threads: Option<usize>,
    no_surface: bool,
) -> Result<(), CliError> {
    let started = Instant::now();
    let mut cfg = parse_config(config_path)?;
    if no_surface {
        cfg.toggles.surface = false;
    }
    let products = with_thread_pool(threads, || simulate(&cfg))?;
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        media_fixture_version: pairgen_core::media::builtin_media()
            .map(|m| m.version)
            .unwrap_or_default(),
        config: cfg.raw.clone(),
        resolved: resolved_block(&cfg, &products),
        convergence: ManifestConvergence::Single(products.convergence.clone()),
        invalid_nodes: products.pair.diagnostics.invalid_nodes,
        validity_warning_nodes: products.pair.diagnostics.validity_warning_nodes,
        notices: products.pair.diagnostics.notices.clone(),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let spectrum = render_spectrum_csv(&products);
    let density = render_density_csv(&products);
    let summary = render_summary_csv(&products);
    write_outputs(
        out_dir,
        Some(&spectrum),
        density.as_deref(),
        &summary,
        &manifest,
    )?;
    Ok(())
}

/// `sweep-pump --config <path> --out <dir> --from-nm A --to-nm B --points N`
pub fn cmd_sweep_pump(
    config_path: &Path,
    out_dir: &Path,
    from_nm: f64,
    to_nm: f64,
    points: usize,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = parse_config(config_path)?;
    if !(from_nm > 0.0 && to_nm > from_nm) {
        return Err(CliError::Run(RunError::Config(
            "sweep range must satisfy 0 < from-nm < to-nm".into(),
        )));
    }
    let sweep = with_thread_pool(threads, || sweep_pump(&cfg, from_nm, to_nm, points))?;
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        media_fixture_version: pairgen_core::media::builtin_media()
            .map(|m| m.version)
            .unwrap_or_default(),
        config: cfg.raw.clone(),
        resolved: serde_json::json!({
            "points": sweep
                .iter()
                .map(|p| serde_json::json!({
                    "lambda_p_nm": p.lambda_p_nm,
                    "lambda_nl_um": p.poling_period_m * 1e6,
                }))
                .collect::<Vec<_>>(),
        }),
        convergence: ManifestConvergence::Sweep(
            sweep.iter().map(|p| p.convergence.clone()).collect(),
        ),
        invalid_nodes: 0,
        validity_warning_nodes: 0,
        notices: Vec::new(),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let summary = render_sweep_summary_csv(&sweep);
    write_outputs(out_dir, None, None, &summary, &manifest)?;
    Ok(())
}

/// Text table plus CSV for the oracle validation suites.
pub fn render_validation(reports: &[OracleReport]) -> (String, String) {
    let mut text = String::new();
    let mut csv = String::from("case_id,analytic_re,analytic_im,oracle_re,oracle_im,relative_error,tolerance,pass\n");
    let mut failures = Vec::new();
    for r in reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.case_id,
            r.analytic.re,
            r.analytic.im,
            r.oracle.re,
            r.oracle.im,
            r.relative_error,
            r.tolerance,
            r.pass
        ));
        if !r.pass {
            failures.push(r);
        }
    }
    for prefix in ["volume", "boundary", "poled"] {
        let in_suite: Vec<&OracleReport> = reports
            .iter()
            .filter(|r| r.case_id.starts_with(prefix))
            .collect();
        if in_suite.is_empty() {
            continue;
        }
        let worst = in_suite
            .iter()
            .map(|r| r.relative_error)
            .fold(0.0_f64, f64::max);
        let passed = in_suite.iter().filter(|r| r.pass).count();
        text.push_str(&format!(
            "suite {prefix:9} {passed:5}/{:<5} pass   worst rel err {worst:.3e}   tolerance {:.1e}\n",
            in_suite.len(),
            in_suite[0].tolerance,
        ));
    }
    if failures.is_empty() {
        text.push_str(&format!("all {} oracle cases pass\n", reports.len()));
    } else {
        text.push_str(&format!("{} FAILING cases:\n", failures.len()));
        for r in failures.iter().take(50) {
            text.push_str(&format!(
                "  {}  rel err {:.3e} > {:.1e}\n",
                r.case_id, r.relative_error, r.tolerance
            ));
        }
        if failures.len() > 50 {
            text.push_str(&format!("  ... and {} more\n", failures.len() - 50));
        }
    }
    (text, csv)
}

/// `validate [--seed S] [--tolerance-scale F] [--out <dir>]`
pub fn cmd_validate(
    seed: u64,
    tolerance_scale: f64,
    out_dir: Option<&Path>,
) -> Result<Vec<OracleReport>, CliError> {
    let reports = run_all_suites(seed, tolerance_scale);
    let (text, csv) = render_validation(&reports);
    print!("{text}");
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(RunError::from)?;
        write_atomic(&dir.join("oracle_report.csv"), csv.as_bytes()).map_err(RunError::from)?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::ValidationFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(reports)
}
