//! End-to-end checks of the shipped configs, the schema validator, output
//! determinism and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::Command;

use pairgen_cli::commands::{cmd_simulate, cmd_sweep_pump, render_validation};
use pairgen_cli::config::{parse_config, StructureConfig};
use pairgen_core::oracle::run_all_suites;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "pairgen_it_{}_{}_{tag}",
        std::process::id(),
        std::thread::current().name().unwrap_or("t").replace("::", "_")
    ));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn shipped_fig2_config_resolves_25_plus_24_layers() {
    let cfg = parse_config(&config_path("fig2_gan_aln.json")).unwrap();
    match cfg.structure {
        StructureConfig::Stack { ref layers, .. } => {
            assert_eq!(layers.len(), 49);
            let gan = layers.iter().filter(|l| l.medium == "GaN_o_film").count();
            let aln = layers.iter().filter(|l| l.medium == "AlN_o_film").count();
            assert_eq!(gan, 25);
            assert_eq!(aln, 24);
            assert_eq!(layers.first().unwrap().medium, "GaN_o_film");
            assert_eq!(layers.last().unwrap().medium, "GaN_o_film");
        }
        _ => panic!("fig2 config should be a layered stack"),
    }
}

#[test]
fn shipped_configs_all_parse() {
    for name in ["fig2_gan_aln.json", "fig3_linbo3.json", "bulk_pulsed_linbo3.json"] {
        parse_config(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn surface_toggle_off_gives_unit_ratio_column() {
    let out = temp_dir("nosurf");
    cmd_simulate(&config_path("fig2_gan_aln.json"), &out, None, true).unwrap();
    let spectrum = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    for line in spectrum.lines().skip(1) {
        let ratio = line.split(',').nth(4).unwrap();
        assert_eq!(ratio, "1", "ratio column should be exactly 1, got {ratio}");
    }
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn rerun_produces_byte_identical_outputs() {
    let (out1, out2) = (temp_dir("rerun1"), temp_dir("rerun2"));
    let cfg = config_path("bulk_pulsed_linbo3.json");
    cmd_simulate(&cfg, &out1, Some(2), false).unwrap();
    cmd_simulate(&cfg, &out2, Some(2), false).unwrap();
    for name in ["spectrum.csv", "density_map.csv", "summary.csv"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
    let _ = std::fs::remove_dir_all(&out1);
    let _ = std::fs::remove_dir_all(&out2);
}

#[test]
fn sweep_summary_has_decreasing_relative_contribution() {
    let out = temp_dir("sweep");
    cmd_sweep_pump(&config_path("fig3_linbo3.json"), &out, 500.0, 900.0, 3, None).unwrap();
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let rels: Vec<f64> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').last().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rels.len(), 3);
    assert!(rels.windows(2).all(|w| w[1] < w[0]), "rels: {rels:?}");
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn validation_report_row_count_matches_case_count() {
    let reports = run_all_suites(11, 1.0);
    let (_, csv) = render_validation(&reports);
    assert_eq!(csv.lines().count(), reports.len() + 1); // header + one row per case
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn zero_tolerance_lists_failures_with_case_ids() {
    let reports = run_all_suites(11, 0.0);
    let (text, _) = render_validation(&reports);
    assert!(reports.iter().any(|r| !r.pass));
    assert!(text.contains("FAILING"));
    assert!(text.contains("volume/") || text.contains("boundary/") || text.contains("poled/"));
}

#[test]
fn binary_exit_codes_follow_the_contract() {
    let bin = env!("CARGO_BIN_EXE_pairgen");
    let out = temp_dir("exitcodes");

    // 0: successful run.
    let ok = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(config_path("bulk_pulsed_linbo3.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&ok.stderr));

    // 1: config error (missing file).
    let missing = Command::new(bin)
        .args(["simulate", "--config", "/nonexistent/nope.json", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    // 1: schema violations, all reported.
    let bad = out.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"pump": {"kind": "cw", "wavelength_nm": -1.0}, "grid": {"mode": "cw_line", "nodes": 4}, "structure": {"type": "bulk_crystal", "medium": "LiNbO3_e"}, "mystery": 1}"#,
    )
    .unwrap();
    let schema = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(schema.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&schema.stderr);
    assert!(stderr.contains("unknown key 'mystery'"), "stderr: {stderr}");
    assert!(stderr.contains("wavelength_nm"), "stderr: {stderr}");
    assert!(stderr.contains("nodes"), "stderr: {stderr}");

    // 2: numerical/domain error (wavelengths outside the medium window).
    let domain = out.join("domain.json");
    std::fs::write(
        &domain,
        r#"{"pump": {"kind": "cw", "wavelength_nm": 700.0}, "grid": {"mode": "cw_line", "lambda_s_min_nm": 780.0, "lambda_s_max_nm": 820.0, "nodes": 64}, "structure": {"type": "bulk_crystal", "medium": "GaN_o", "length_um": 10.0}}"#,
    )
    .unwrap();
    // Signal at ~800 nm forces idler wavelengths beyond GaN's 5 um window.
    let num = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&domain)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        num.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&num.stderr)
    );

    // 3: validation failure under a zeroed tolerance.
    let val = Command::new(bin)
        .args(["validate", "--tolerance-scale", "0"])
        .output()
        .unwrap();
    assert_eq!(val.status.code(), Some(3));

    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn manifest_echoes_config_and_versions() {
    let out = temp_dir("manifest");
    cmd_simulate(&config_path("fig3_linbo3.json"), &out, None, false).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["artifact_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["media_fixture_version"], "1.0.0");
    assert_eq!(manifest["config"]["pump"]["wavelength_nm"], 350.0);
    assert!(manifest["resolved"]["poling_period_um"].as_f64().unwrap() > 1.0);
    assert!(manifest["convergence"]["n_total_rel_delta"].as_f64().unwrap() < 1e-3);
    // The shipped 5 mm crystal is not a whole number of domains, so the
    // closed-form path reports its fallback.
    assert!(manifest["notices"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("direct_sum")));
    let _ = std::fs::remove_dir_all(&out);
}
