//! Reading star tables from disk.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use starid_core::catalog::{parse_catalog_text, ParsedSource, SourceFormat};

use crate::Error;

/// Picks a layout from the file name: `.dat` files are read as the raw
/// whitespace separated table, everything else as the headed CSV.
pub fn format_for(path: &Path) -> SourceFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("dat") => SourceFormat::hip2_dat(),
        _ => SourceFormat::hip_csv(),
    }
}

#[derive(Debug)]
pub struct LoadedSource {
    pub parsed: ParsedSource,
    /// Hex SHA-256 of the file bytes.
    pub sha256: String,
}

pub fn load_source(path: &Path, format: &SourceFormat, magnitude_cutoff: f64) -> Result<LoadedSource, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8_lossy(&bytes);
    let parsed = parse_catalog_text(&text, format, magnitude_cutoff)?;
    if parsed.malformed > 0 {
        log::warn!("{}: skipped {} malformed rows", path.display(), parsed.malformed);
    }
    if parsed.missing_position > 0 {
        log::info!("{}: skipped {} rows without a position", path.display(), parsed.missing_position);
    }
    Ok(LoadedSource { parsed, sha256 })
}
