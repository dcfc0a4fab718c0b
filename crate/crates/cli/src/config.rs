//! Scenario configuration: a single JSON file, schema-validated before any
//! computation. Validation collects every violation (not just the first)
//! and rejects unknown keys anywhere in the document. Wavelengths are given
//! in nm; lengths carry an explicit unit suffix key (`_nm`, `_um`, `_mm`).

use std::collections::BTreeSet;
use std::fmt;

use pairgen_core::dispersion::{Direction, DirectionChannel, OpticalMedium};
use serde_json::Value;

#[derive(Debug)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration invalid ({} problem(s)):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpKind {
    Cw,
    Pulsed,
}

#[derive(Debug, Clone)]
pub struct PumpConfig {
    pub kind: PumpKind,
    pub wavelength_m: f64,
    pub amplitude: f64,
    /// Spectral standard deviation as a wavelength width, pulsed only.
    pub bandwidth_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    CwLine,
    Full2D,
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub mode: GridMode,
    /// Signal wavelength range (m); absent when auto-windowed.
    pub lambda_s_range: Option<(f64, f64)>,
    pub nodes: usize,
    /// Poled cw runs may ask for the QPM window (central lobe + N side lobes).
    pub auto_window_lobes: Option<usize>,
    /// Idler axis for full-2D grids.
    pub lambda_i_range: Option<(f64, f64)>,
    pub idler_nodes: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum ChannelsConfig {
    All,
    Subset(Vec<DirectionChannel>),
}

#[derive(Debug, Clone)]
pub struct Toggles {
    pub surface: bool,
    pub channels: ChannelsConfig,
}

#[derive(Debug, Clone)]
pub enum PolingConfig {
    Optimal,
    Period(f64),
}

#[derive(Debug, Clone)]
pub struct LayerConfig {
    pub medium: String,
    pub thickness_m: f64,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub enum StructureConfig {
    Bulk {
        medium: String,
        length_m: f64,
        surround: String,
    },
    Poled {
        medium: String,
        total_length_m: f64,
        poling: PolingConfig,
        duty_cycle: f64,
    },
    Stack {
        external_in: String,
        external_out: String,
        pump_incidence_rad: f64,
        signal_emission_rad: f64,
        idler_emission_rad: f64,
        layers: Vec<LayerConfig>,
    },
}

/// Inline constant-index medium defined by a config.
#[derive(Debug, Clone)]
pub struct InlineMedium {
    pub name: String,
    pub n0: f64,
    pub d_eff_pm_per_v: f64,
}

impl InlineMedium {
    pub fn to_medium(&self) -> OpticalMedium {
        OpticalMedium::constant(&self.name, self.n0, self.d_eff_pm_per_v * 1e-12)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub pump: PumpConfig,
    pub grid: GridConfig,
    pub toggles: Toggles,
    pub structure: StructureConfig,
    pub inline_media: Vec<InlineMedium>,
    /// Original document, echoed into the run manifest.
    pub raw: Value,
}

struct Validator {
    violations: Vec<String>,
}

impl Validator {
    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }

    fn object<'a>(
        &mut self,
        v: &'a Value,
        path: &str,
        allowed: &[&str],
    ) -> Option<&'a serde_json::Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.push(format!("{path}: expected an object"));
            return None;
        };
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for key in map.keys() {
            if !allowed.contains(key.as_str()) {
                self.push(format!("{path}: unknown key '{key}'"));
            }
        }
        Some(map)
    }

    fn number(&mut self, map: &serde_json::Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        match map.get(key) {
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.push(format!("{path}.{key}: expected a finite number"));
                    None
                }
            },
            None => {
                self.push(format!("{path}.{key}: missing required field"));
                None
            }
        }
    }

    fn number_opt(
        &mut self,
        map: &serde_json::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<f64> {
        match map.get(key) {
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.push(format!("{path}.{key}: expected a finite number"));
                    None
                }
            },
            None => None,
        }
    }

    fn string<'a>(
        &mut self,
        map: &'a serde_json::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<&'a str> {
        match map.get(key) {
            Some(Value::String(s)) => Some(s.as_str()),
            Some(_) => {
                self.push(format!("{path}.{key}: expected a string"));
                None
            }
            None => {
                self.push(format!("{path}.{key}: missing required field"));
                None
            }
        }
    }

    fn positive(&mut self, value: Option<f64>, path: &str, key: &str) -> Option<f64> {
        match value {
            Some(x) if x > 0.0 => Some(x),
            Some(x) => {
                self.push(format!("{path}.{key}: must be positive, got {x}"));
                None
            }
            None => None,
        }
    }

    /// Read a length with an explicit unit-suffix key (`<base>_nm|_um|_mm`),
    /// exactly one of which must be present. Returns meters.
    fn length(&mut self, map: &serde_json::Map<String, Value>, path: &str, base: &str) -> Option<f64> {
        let units = [("_nm", 1e-9), ("_um", 1e-6), ("_mm", 1e-3)];
        let present: Vec<(&str, f64)> = units
            .iter()
            .filter(|(suffix, _)| map.contains_key(&format!("{base}{suffix}")))
            .copied()
            .collect();
        match present.as_slice() {
            [] => {
                self.push(format!(
                    "{path}: missing length '{base}' (use {base}_nm, {base}_um or {base}_mm)"
                ));
                None
            }
            [(suffix, scale)] => {
                let key = format!("{base}{suffix}");
                let v = self.number(map, path, &key)?;
                let v = self.positive(Some(v), path, &key)?;
                Some(v * scale)
            }
            _ => {
                self.push(format!("{path}: length '{base}' given in more than one unit"));
                None
            }
        }
    }
}

fn parse_channels(v: &Value, path: &str, val: &mut Validator) -> ChannelsConfig {
    match v {
        Value::String(s) if s == "all" => ChannelsConfig::All,
        Value::Array(items) => {
            let mut subset = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let Some(s) = item.as_str() else {
                    val.push(format!("{path}[{i}]: expected a string like \"FFF\""));
                    continue;
                };
                let chars: Vec<char> = s.chars().collect();
                let dir = |c: char| match c {
                    'F' => Some(Direction::F),
                    'B' => Some(Direction::B),
                    _ => None,
                };
                if chars.len() == 3 {
                    if let (Some(p), Some(sg), Some(id)) =
                        (dir(chars[0]), dir(chars[1]), dir(chars[2]))
                    {
                        subset.push(DirectionChannel {
                            pump: p,
                            signal: sg,
                            idler: id,
                        });
                        continue;
                    }
                }
                val.push(format!(
                    "{path}[{i}]: '{s}' is not a direction triple over {{F,B}}"
                ));
            }
            if subset.is_empty() {
                val.push(format!("{path}: channel subset is empty"));
            }
            ChannelsConfig::Subset(subset)
        }
        _ => {
            val.push(format!("{path}: expected \"all\" or an array of triples"));
            ChannelsConfig::All
        }
    }
}

fn parse_layers(v: &Value, path: &str, val: &mut Validator, out: &mut Vec<LayerConfig>) {
    let Some(items) = v.as_array() else {
        val.push(format!("{path}: expected an array of layers"));
        return;
    };
    for (i, item) in items.iter().enumerate() {
        let ipath = format!("{path}[{i}]");
        let Some(map) = item.as_object() else {
            val.push(format!("{ipath}: expected an object"));
            continue;
        };
        if map.contains_key("repeat") {
            let Some(obj) = val.object(item, &ipath, &["repeat", "layers"]) else {
                continue;
            };
            let count = match obj.get("repeat").and_then(Value::as_u64) {
                Some(n) if n >= 1 => n as usize,
                _ => {
                    val.push(format!("{ipath}.repeat: expected a positive integer"));
                    continue;
                }
            };
            let Some(inner) = obj.get("layers") else {
                val.push(format!("{ipath}.layers: missing required field"));
                continue;
            };
            let mut block = Vec::new();
            parse_layers(inner, &format!("{ipath}.layers"), val, &mut block);
            for _ in 0..count {
                out.extend(block.iter().cloned());
            }
        } else {
            let Some(obj) = val.object(
                item,
                &ipath,
                &[
                    "medium",
                    "thickness_nm",
                    "thickness_um",
                    "thickness_mm",
                    "sign",
                ],
            ) else {
                continue;
            };
            let medium = val.string(obj, &ipath, "medium").map(str::to_string);
            let thickness = val.length(obj, &ipath, "thickness");
            let sign = match val.number_opt(obj, &ipath, "sign") {
                Some(s) if s == 1.0 || s == -1.0 => s,
                Some(s) => {
                    val.push(format!("{ipath}.sign: must be 1 or -1, got {s}"));
                    1.0
                }
                None => 1.0,
            };
            if let (Some(medium), Some(thickness_m)) = (medium, thickness) {
                out.push(LayerConfig {
                    medium,
                    thickness_m,
                    sign,
                });
            }
        }
    }
}

/// Validate and resolve a configuration document.
pub fn parse_config_value(raw: Value) -> Result<ScenarioConfig, ConfigError> {
    let mut val = Validator {
        violations: Vec::new(),
    };
    let root = val.object(
        &raw,
        "config",
        &["seed", "pump", "grid", "toggles", "structure", "media"],
    );

    let mut seed = 0_u64;
    let mut pump = None;
    let mut grid = None;
    let mut toggles = Toggles {
        surface: true,
        channels: ChannelsConfig::All,
    };
    let mut structure = None;
    let mut inline_media = Vec::new();

    if let Some(root) = root {
        if let Some(v) = root.get("seed") {
            match v.as_u64() {
                Some(s) => seed = s,
                None => val.push("config.seed: expected a non-negative integer".into()),
            }
        }

        if let Some(v) = root.get("pump") {
            if let Some(obj) = val.object(
                v,
                "pump",
                &["kind", "wavelength_nm", "amplitude", "bandwidth_nm"],
            ) {
                let kind = match val.string(obj, "pump", "kind") {
                    Some("cw") => Some(PumpKind::Cw),
                    Some("pulsed") => Some(PumpKind::Pulsed),
                    Some(other) => {
                        val.push(format!("pump.kind: expected 'cw' or 'pulsed', got '{other}'"));
                        None
                    }
                    None => None,
                };
                let wavelength = val.number(obj, "pump", "wavelength_nm");
                let wavelength = val.positive(wavelength, "pump", "wavelength_nm");
                let amplitude = val.number_opt(obj, "pump", "amplitude").unwrap_or(1.0);
                let bandwidth = val.number_opt(obj, "pump", "bandwidth_nm");
                if let (Some(kind), Some(w)) = (kind, wavelength) {
                    let bandwidth_m = bandwidth.map(|b| b * 1e-9);
                    match kind {
                        PumpKind::Pulsed if bandwidth_m.is_none() => {
                            val.push("pump.bandwidth_nm: required for pulsed pumps".into())
                        }
                        PumpKind::Cw if bandwidth_m.is_some() => {
                            val.push("pump.bandwidth_nm: not allowed for cw pumps".into())
                        }
                        _ => {}
                    }
                    pump = Some(PumpConfig {
                        kind,
                        wavelength_m: w * 1e-9,
                        amplitude,
                        bandwidth_m,
                    });
                }
            }
        } else {
            val.push("config.pump: missing required section".into());
        }

        if let Some(v) = root.get("grid") {
            if let Some(obj) = val.object(
                v,
                "grid",
                &[
                    "mode",
                    "lambda_s_min_nm",
                    "lambda_s_max_nm",
                    "nodes",
                    "auto_window_lobes",
                    "lambda_i_min_nm",
                    "lambda_i_max_nm",
                    "idler_nodes",
                ],
            ) {
                let mode = match val.string(obj, "grid", "mode") {
                    Some("cw_line") => Some(GridMode::CwLine),
                    Some("full_2d") => Some(GridMode::Full2D),
                    Some(other) => {
                        val.push(format!(
                            "grid.mode: expected 'cw_line' or 'full_2d', got '{other}'"
                        ));
                        None
                    }
                    None => None,
                };
                let nodes = match obj.get("nodes").and_then(Value::as_u64) {
                    Some(n) if n >= 16 => Some(n as usize),
                    Some(n) => {
                        val.push(format!("grid.nodes: need at least 16 nodes, got {n}"));
                        None
                    }
                    None => {
                        val.push("grid.nodes: missing or not an integer".into());
                        None
                    }
                };
                let lam_min = val.number_opt(obj, "grid", "lambda_s_min_nm");
                let lam_max = val.number_opt(obj, "grid", "lambda_s_max_nm");
                let lobes = obj.get("auto_window_lobes").and_then(Value::as_u64);
                let lambda_s_range = match (lam_min, lam_max) {
                    (Some(a), Some(b)) if a > 0.0 && b > a => Some((a * 1e-9, b * 1e-9)),
                    (Some(_), Some(_)) => {
                        val.push("grid: lambda_s_min_nm must be positive and below lambda_s_max_nm".into());
                        None
                    }
                    (None, None) => None,
                    _ => {
                        val.push("grid: lambda_s_min_nm and lambda_s_max_nm must be given together".into());
                        None
                    }
                };
                if lambda_s_range.is_none() && lobes.is_none() {
                    val.push(
                        "grid: either an explicit lambda_s range or auto_window_lobes is required"
                            .into(),
                    );
                }
                if lambda_s_range.is_some() && lobes.is_some() {
                    val.push("grid: explicit lambda_s range and auto_window_lobes are mutually exclusive".into());
                }
                let lam_i_min = val.number_opt(obj, "grid", "lambda_i_min_nm");
                let lam_i_max = val.number_opt(obj, "grid", "lambda_i_max_nm");
                let idler_nodes = obj.get("idler_nodes").and_then(Value::as_u64).map(|n| n as usize);
                let lambda_i_range = match (lam_i_min, lam_i_max) {
                    (Some(a), Some(b)) if a > 0.0 && b > a => Some((a * 1e-9, b * 1e-9)),
                    (None, None) => None,
                    _ => {
                        val.push("grid: invalid idler wavelength range".into());
                        None
                    }
                };
                if mode == Some(GridMode::Full2D) && (lambda_i_range.is_none() || idler_nodes.is_none())
                {
                    val.push("grid: full_2d mode needs lambda_i_min_nm, lambda_i_max_nm and idler_nodes".into());
                }
                if mode == Some(GridMode::CwLine) && (lambda_i_range.is_some() || idler_nodes.is_some())
                {
                    val.push("grid: idler axis fields are not allowed in cw_line mode".into());
                }
                if let (Some(mode), Some(nodes)) = (mode, nodes) {
                    grid = Some(GridConfig {
                        mode,
                        lambda_s_range,
                        nodes,
                        auto_window_lobes: lobes.map(|l| l as usize),
                        lambda_i_range,
                        idler_nodes,
                    });
                }
            }
        } else {
            val.push("config.grid: missing required section".into());
        }

        if let Some(v) = root.get("toggles") {
            if let Some(obj) = val.object(v, "toggles", &["surface", "channels"]) {
                if let Some(s) = obj.get("surface") {
                    match s.as_bool() {
                        Some(b) => toggles.surface = b,
                        None => val.push("toggles.surface: expected a boolean".into()),
                    }
                }
                if let Some(c) = obj.get("channels") {
                    toggles.channels = parse_channels(c, "toggles.channels", &mut val);
                }
            }
        }

        if let Some(v) = root.get("media") {
            if let Some(items) = v.as_array() {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("media[{i}]");
                    if let Some(obj) =
                        val.object(item, &path, &["name", "n0", "d_eff_pm_per_v"])
                    {
                        let name = val.string(obj, &path, "name").map(str::to_string);
                        let n0 = val.number(obj, &path, "n0");
                        let d = val.number_opt(obj, &path, "d_eff_pm_per_v").unwrap_or(0.0);
                        if let (Some(name), Some(n0)) = (name, n0) {
                            if n0 < 1.0 {
                                val.push(format!("{path}.n0: refractive index must be >= 1"));
                            } else {
                                inline_media.push(InlineMedium {
                                    name,
                                    n0,
                                    d_eff_pm_per_v: d,
                                });
                            }
                        }
                    }
                }
            } else {
                val.push("config.media: expected an array".into());
            }
        }

        if let Some(v) = root.get("structure") {
            if let Some(map) = v.as_object() {
                match map.get("type").and_then(Value::as_str) {
                    Some("bulk_crystal") => {
                        if let Some(obj) = val.object(
                            v,
                            "structure",
                            &[
                                "type", "medium", "surround", "length_nm", "length_um",
                                "length_mm",
                            ],
                        ) {
                            let medium = val.string(obj, "structure", "medium").map(str::to_string);
                            let length = val.length(obj, "structure", "length");
                            let surround = obj
                                .get("surround")
                                .and_then(Value::as_str)
                                .unwrap_or("vacuum")
                                .to_string();
                            if let (Some(medium), Some(length_m)) = (medium, length) {
                                structure = Some(StructureConfig::Bulk {
                                    medium,
                                    length_m,
                                    surround,
                                });
                            }
                        }
                    }
                    Some("poled_crystal") => {
                        if let Some(obj) = val.object(
                            v,
                            "structure",
                            &[
                                "type",
                                "medium",
                                "total_length_nm",
                                "total_length_um",
                                "total_length_mm",
                                "poling",
                                "poling_period_nm",
                                "poling_period_um",
                                "duty_cycle",
                            ],
                        ) {
                            let medium = val.string(obj, "structure", "medium").map(str::to_string);
                            let total = val.length(obj, "structure", "total_length");
                            let duty = val.number_opt(obj, "structure", "duty_cycle").unwrap_or(0.5);
                            if !(duty > 0.0 && duty < 1.0) {
                                val.push(format!(
                                    "structure.duty_cycle: must lie strictly between 0 and 1, got {duty}"
                                ));
                            }
                            let has_period = obj.contains_key("poling_period_nm")
                                || obj.contains_key("poling_period_um");
                            let poling = match (obj.get("poling").and_then(Value::as_str), has_period)
                            {
                                (Some("optimal"), false) => Some(PolingConfig::Optimal),
                                (Some("optimal"), true) => {
                                    val.push("structure: 'poling: optimal' and an explicit poling_period are mutually exclusive".into());
                                    None
                                }
                                (Some(other), _) => {
                                    val.push(format!(
                                        "structure.poling: expected 'optimal', got '{other}'"
                                    ));
                                    None
                                }
                                (None, true) => val
                                    .length(obj, "structure", "poling_period")
                                    .map(PolingConfig::Period),
                                (None, false) => {
                                    val.push("structure: needs 'poling: \"optimal\"' or an explicit poling_period".into());
                                    None
                                }
                            };
                            if let (Some(medium), Some(total_length_m), Some(poling)) =
                                (medium, total, poling)
                            {
                                structure = Some(StructureConfig::Poled {
                                    medium,
                                    total_length_m,
                                    poling,
                                    duty_cycle: duty,
                                });
                            }
                        }
                    }
                    Some("layered_stack") => {
                        if let Some(obj) = val.object(
                            v,
                            "structure",
                            &[
                                "type",
                                "external_in",
                                "external_out",
                                "pump_incidence_deg",
                                "signal_emission_deg",
                                "idler_emission_deg",
                                "layers",
                            ],
                        ) {
                            let ext_in = obj
                                .get("external_in")
                                .and_then(Value::as_str)
                                .unwrap_or("vacuum")
                                .to_string();
                            let ext_out = obj
                                .get("external_out")
                                .and_then(Value::as_str)
                                .unwrap_or("vacuum")
                                .to_string();
                            let pump_deg =
                                val.number_opt(obj, "structure", "pump_incidence_deg").unwrap_or(0.0);
                            let sig_deg = val
                                .number_opt(obj, "structure", "signal_emission_deg")
                                .unwrap_or(0.0);
                            let idl_deg = val
                                .number_opt(obj, "structure", "idler_emission_deg")
                                .unwrap_or(sig_deg);
                            let mut layers = Vec::new();
                            match obj.get("layers") {
                                Some(v) => parse_layers(v, "structure.layers", &mut val, &mut layers),
                                None => val.push("structure.layers: missing required field".into()),
                            }
                            if layers.is_empty() {
                                val.push("structure.layers: no layers resolved".into());
                            }
                            structure = Some(StructureConfig::Stack {
                                external_in: ext_in,
                                external_out: ext_out,
                                pump_incidence_rad: pump_deg.to_radians(),
                                signal_emission_rad: sig_deg.to_radians(),
                                idler_emission_rad: idl_deg.to_radians(),
                                layers,
                            });
                        }
                    }
                    Some(other) => val.push(format!(
                        "structure.type: unknown structure '{other}' (expected bulk_crystal, poled_crystal or layered_stack)"
                    )),
                    None => val.push("structure.type: missing required field".into()),
                }
            } else {
                val.push("config.structure: expected an object".into());
            }
        } else {
            val.push("config.structure: missing required section".into());
        }
    }

    // Cross-section consistency.
    if let (Some(p), Some(g)) = (&pump, &grid) {
        match (p.kind, g.mode) {
            (PumpKind::Cw, GridMode::Full2D) => {
                val.push("grid: full_2d mode requires a pulsed pump (cw pumps live on the energy-conservation line)".into())
            }
            (PumpKind::Pulsed, GridMode::CwLine) => {
                val.push("grid: cw_line mode requires a cw pump".into())
            }
            _ => {}
        }
        if g.auto_window_lobes.is_some() {
            match &structure {
                Some(StructureConfig::Poled { .. }) | None => {}
                _ => val.push(
                    "grid.auto_window_lobes: only meaningful for poled_crystal structures".into(),
                ),
            }
        }
    }

    if val.violations.is_empty() {
        Ok(ScenarioConfig {
            seed,
            pump: pump.expect("validated"),
            grid: grid.expect("validated"),
            toggles,
            structure: structure.expect("validated"),
            inline_media,
            raw,
        })
    } else {
        Err(ConfigError {
            violations: val.violations,
        })
    }
}

/// Read and validate a configuration file.
pub fn parse_config(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        violations: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| ConfigError {
        violations: vec![format!("{} is not valid JSON: {e}", path.display())],
    })?;
    parse_config_value(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base_bulk() -> Value {
        json!({
            "seed": 1,
            "pump": {"kind": "cw", "wavelength_nm": 700.0, "amplitude": 1.0},
            "grid": {"mode": "cw_line", "lambda_s_min_nm": 1300.0, "lambda_s_max_nm": 1500.0, "nodes": 64},
            "structure": {"type": "bulk_crystal", "medium": "LiNbO3_e", "length_mm": 1.0}
        })
    }

    #[test]
    fn valid_bulk_config_parses() {
        let cfg = parse_config_value(base_bulk()).unwrap();
        assert_eq!(cfg.seed, 1);
        assert!(matches!(cfg.structure, StructureConfig::Bulk { .. }));
        assert!(cfg.toggles.surface);
    }

    #[test]
    fn unknown_keys_are_listed_by_path() {
        let mut raw = base_bulk();
        raw["grid"]["extra_knob"] = json!(3);
        raw["bogus"] = json!(true);
        let err = parse_config_value(raw).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("grid: unknown key 'extra_knob'")));
        assert!(err.violations.iter().any(|v| v.contains("config: unknown key 'bogus'")));
    }

    #[test]
    fn negative_thickness_is_named() {
        let raw = json!({
            "pump": {"kind": "cw", "wavelength_nm": 664.5},
            "grid": {"mode": "cw_line", "lambda_s_min_nm": 1200.0, "lambda_s_max_nm": 1500.0, "nodes": 64},
            "structure": {
                "type": "layered_stack",
                "layers": [
                    {"medium": "GaN_o_film", "thickness_nm": -117.0, "sign": 1}
                ]
            }
        });
        let err = parse_config_value(raw).unwrap_err();
        assert!(
            err.violations
                .iter()
                .any(|v| v.contains("structure.layers[0].thickness_nm") && v.contains("positive")),
            "violations: {:?}",
            err.violations
        );
    }

    #[test]
    fn all_violations_are_collected() {
        let raw = json!({
            "pump": {"kind": "nope", "wavelength_nm": -3.0},
            "grid": {"mode": "cw_line", "nodes": 4},
            "structure": {"type": "bulk_crystal", "medium": "LiNbO3_e"}
        });
        let err = parse_config_value(raw).unwrap_err();
        assert!(err.violations.len() >= 4, "got {:?}", err.violations);
    }

    #[test]
    fn repeat_blocks_expand() {
        let raw = json!({
            "pump": {"kind": "cw", "wavelength_nm": 664.5},
            "grid": {"mode": "cw_line", "lambda_s_min_nm": 1200.0, "lambda_s_max_nm": 1500.0, "nodes": 64},
            "structure": {
                "type": "layered_stack",
                "signal_emission_deg": 14.0,
                "layers": [
                    {"repeat": 24, "layers": [
                        {"medium": "GaN_o_film", "thickness_nm": 117.0},
                        {"medium": "AlN_o_film", "thickness_nm": 180.0}
                    ]},
                    {"medium": "GaN_o_film", "thickness_nm": 117.0}
                ]
            }
        });
        let cfg = parse_config_value(raw).unwrap();
        match cfg.structure {
            StructureConfig::Stack { ref layers, .. } => assert_eq!(layers.len(), 49),
            _ => panic!("expected a stack"),
        }
    }

    #[test]
    fn dual_units_are_rejected() {
        let mut raw = base_bulk();
        raw["structure"]["length_um"] = json!(1000.0);
        let err = parse_config_value(raw).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("more than one unit")));
    }
}
