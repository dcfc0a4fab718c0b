//! Versioned media fixture: named materials with dispersion model,
//! effective nonlinearity and literature source.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dispersion::{IndexModel, OpticalMedium};
use crate::error::{Error, Result};

/// Raw fixture entry as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumRecord {
    pub name: String,
    pub index_model: IndexModel,
    pub d_eff_pm_per_v: f64,
    pub transparency_window_um: [f64; 2],
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaFixture {
    pub version: String,
    #[serde(default)]
    pub lambda_convention: String,
    pub media: Vec<MediumRecord>,
}

/// Resolved set of media, addressable by name.
#[derive(Debug, Clone)]
pub struct MediaSet {
    pub version: String,
    media: BTreeMap<String, OpticalMedium>,
}

impl MediaSet {
    pub fn get(&self, name: &str) -> Result<&OpticalMedium> {
        self.media
            .get(name)
            .ok_or_else(|| Error::UnknownMedium(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.media.keys().map(|s| s.as_str())
    }

    /// Register an extra medium (e.g. a constant-index material defined
    /// inline by a scenario config). Rejects duplicate names.
    pub fn insert(&mut self, medium: OpticalMedium) -> Result<()> {
        if self.media.contains_key(&medium.name) {
            return Err(Error::InvalidSpec(format!(
                "medium '{}' is already defined",
                medium.name
            )));
        }
        self.media.insert(medium.name.clone(), medium);
        Ok(())
    }
}

fn resolve(fixture: MediaFixture) -> Result<MediaSet> {
    let mut media = BTreeMap::new();
    for rec in fixture.media {
        let w = rec.transparency_window_um;
        if !(w[0] > 0.0 && w[1] > w[0]) {
            return Err(Error::MediaFixture(format!(
                "medium '{}' has invalid transparency window {w:?}",
                rec.name
            )));
        }
        let medium = OpticalMedium {
            name: rec.name.clone(),
            index_model: rec.index_model,
            d_eff: rec.d_eff_pm_per_v * 1e-12,
            transparency_window: [w[0] * 1e-6, w[1] * 1e-6],
        };
        if media.insert(rec.name.clone(), medium).is_some() {
            return Err(Error::MediaFixture(format!(
                "duplicate medium '{}' in fixture",
                rec.name
            )));
        }
    }
    Ok(MediaSet {
        version: fixture.version,
        media,
    })
}

/// Parse a fixture from JSON text.
pub fn parse_media_fixture(text: &str) -> Result<MediaSet> {
    let fixture: MediaFixture =
        serde_json::from_str(text).map_err(|e| Error::MediaFixture(e.to_string()))?;
    resolve(fixture)
}

/// Load a fixture from a file path.
pub fn load_media_fixture(path: &std::path::Path) -> Result<MediaSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MediaFixture(format!("{}: {e}", path.display())))?;
    parse_media_fixture(&text)
}

/// The fixture shipped with the crate (GaN, AlN, LiNbO3, vacuum).
pub fn builtin_media() -> Result<MediaSet> {
    parse_media_fixture(include_str!("../data/media.json"))
}
