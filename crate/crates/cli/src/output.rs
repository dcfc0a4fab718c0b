//! Deterministic CSV and manifest rendering. Floats use Rust's shortest
//! round-trip formatting, so identical values give identical bytes.

use std::io::Write;
use std::path::Path;

use pairgen_core::dispersion::vacuum_wavelength;

use crate::runner::{Convergence, Products, RunResult, SweepPoint};

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Scientific notation keeps the many-orders-of-magnitude columns short;
/// both forms are shortest round-trip decimal representations.
fn fmt_sci(v: f64) -> String {
    format!("{v:e}")
}

/// spectrum.csv: one row per signal node.
pub fn render_spectrum_csv(p: &Products) -> String {
    let mut out = String::from("lambda_s_nm,S_vol,S_surf,S_total,ratio_total_over_vol\n");
    for (i, &w) in p.s_vol.omegas.iter().enumerate() {
        let lam = vacuum_wavelength(w) * 1e9;
        let (sv, ss, st) = (p.s_vol.values[i], p.s_surf.values[i], p.s_total.values[i]);
        let ratio = if sv > 0.0 { st / sv } else { f64::NAN };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(lam),
            fmt_sci(sv),
            fmt_sci(ss),
            fmt_sci(st),
            fmt(ratio)
        ));
    }
    out
}

/// density_map.csv for full-2D grids.
pub fn render_density_csv(p: &Products) -> Option<String> {
    let rows = p.density_rows.as_ref()?;
    let mut out = String::from("lambda_s_nm,lambda_i_nm,n_vol,n_surf,n_total\n");
    for (ls, li, nv, ns, nt) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(*ls),
            fmt(*li),
            fmt_sci(*nv),
            fmt_sci(*ns),
            fmt_sci(*nt)
        ));
    }
    Some(out)
}

/// summary.csv for a single scenario.
pub fn render_summary_csv(p: &Products) -> String {
    let rel = p.relative_surface.unwrap_or(f64::NAN);
    format!(
        "N_vol,N_total,relative_surface_contribution\n{},{},{}\n",
        fmt_sci(p.n_vol),
        fmt_sci(p.n_total),
        fmt(rel)
    )
}

/// summary.csv for a pump-wavelength sweep: one row per point.
pub fn render_sweep_summary_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "lambda_p_nm,lambda_nl_um,inv_lambda_nl_per_um,N_vol,N_total,relative_surface_contribution\n",
    );
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(pt.lambda_p_nm),
            fmt(pt.poling_period_m * 1e6),
            fmt(1e-6 / pt.poling_period_m),
            fmt_sci(pt.n_vol),
            fmt_sci(pt.n_total),
            fmt(pt.relative_surface)
        ));
    }
    out
}

#[derive(serde::Serialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub media_fixture_version: String,
    pub config: serde_json::Value,
    pub resolved: serde_json::Value,
    pub convergence: ManifestConvergence,
    pub invalid_nodes: usize,
    pub validity_warning_nodes: usize,
    pub notices: Vec<String>,
    pub wall_time_ms: u128,
}

#[derive(serde::Serialize)]
#[serde(untagged)]
pub enum ManifestConvergence {
    Single(Convergence),
    Sweep(Vec<Convergence>),
}

/// Write a file atomically (temp file in the same directory, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

pub fn write_outputs(
    dir: &Path,
    spectrum: Option<&str>,
    density: Option<&str>,
    summary: &str,
    manifest: &Manifest,
) -> RunResult<()> {
    std::fs::create_dir_all(dir)?;
    if let Some(s) = spectrum {
        write_atomic(&dir.join("spectrum.csv"), s.as_bytes())?;
    }
    if let Some(d) = density {
        write_atomic(&dir.join("density_map.csv"), d.as_bytes())?;
    }
    write_atomic(&dir.join("summary.csv"), summary.as_bytes())?;
    let manifest_json =
        serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    write_atomic(&dir.join("manifest.json"), manifest_json.as_bytes())?;
    Ok(())
}
