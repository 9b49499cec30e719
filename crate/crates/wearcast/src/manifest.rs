//! JSON-lines dataset manifests, one `{week, side, file, denoised}` object
//! per line. `file` is relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wearcast_core::train::ImpressionRecord;
use wearcast_core::Side;

use crate::error::{Error, Result};
use crate::pgm;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub week: u32,
    pub side: String,
    pub file: String,
    pub denoised: bool,
}

impl ManifestEntry {
    pub fn new(week: u32, side: Side, file: impl Into<String>, denoised: bool) -> Self {
        ManifestEntry {
            week,
            side: side.as_str().to_string(),
            file: file.into(),
            denoised,
        }
    }

    pub fn side(&self) -> wearcast_core::Result<Side> {
        self.side.parse()
    }
}

pub fn to_string(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("manifest entries serialize"));
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> std::result::Result<Vec<ManifestEntry>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let e: ManifestEntry = serde_json::from_str(l).map_err(|err| format!("line {}: {err}", i + 1))?;
            if e.week % 2 != 0 {
                return Err(format!("line {}: week {} is odd", i + 1, e.week));
            }
            e.side().map_err(|err| format!("line {}: {err}", i + 1))?;
            Ok(e)
        })
        .collect()
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(entries)).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(|reason| Error::format(path, reason))
}

pub fn resolve(manifest: &Path, entry: &ManifestEntry) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(&entry.file)
}

/// Loads the images of every entry accepted by `keep`, sorted by week and
/// side.
pub fn load_records(manifest: impl AsRef<Path>, keep: impl Fn(&ManifestEntry) -> bool) -> Result<Vec<ImpressionRecord>> {
    let manifest = manifest.as_ref();
    let mut out = Vec::new();
    for e in read_manifest(manifest)?.iter().filter(|e| keep(e)) {
        let img = pgm::read_pgm(resolve(manifest, e))?;
        out.push(ImpressionRecord::new(e.week, e.side()?, img, e.denoised));
    }
    out.sort_by_key(|r| (r.week, r.side));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_round_trip() {
        let entries = vec![
            ManifestEntry::new(0, Side::Left, "clean/left_w00.pgm", true),
            ManifestEntry::new(52, Side::Right, "noisy/right_w52.pgm", false),
        ];
        let text = to_string(&entries);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(r#"{"week":0,"side":"left","file":"clean/left_w00.pgm","denoised":true}"#));
        assert_eq!(parse(&text).unwrap(), entries);
    }

    #[test]
    fn bad_lines_name_their_position() {
        let err = parse("{\"week\":3,\"side\":\"left\",\"file\":\"a\",\"denoised\":true}").unwrap_err();
        assert!(err.contains("line 1") && err.contains("odd"));
        assert!(parse("\n{\"week\":2,\"side\":\"up\",\"file\":\"a\",\"denoised\":true}").unwrap_err().contains("line 2"));
        assert!(parse("{\"week\":2}").is_err());
    }
}
