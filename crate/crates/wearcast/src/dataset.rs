//! Datasets on disk: emission of synthetic series and batch denoising.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use wearcast_core::denoise::{denoise_image, DenoiseParams};
use wearcast_core::synth::{generate_series, NoiseSpec, OutsoleSpec};
use wearcast_core::train::ImpressionRecord;
use wearcast_core::{Image, Side};

use crate::error::{Error, Result};
use crate::manifest::{self, ManifestEntry};
use crate::pgm;
use crate::register;

pub const MANIFEST: &str = "manifest.jsonl";

fn file_name(side: Side, week: u32) -> String {
    format!("{side}_w{week:02}.pgm")
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `clean/` and `noisy/` impressions of both shoes at every series
/// week plus `manifest.jsonl`. Clean renders are listed with
/// `denoised: true`, noisy ones with `denoised: false`.
pub fn emit_dataset(spec: &OutsoleSpec, noise: &NoiseSpec, downsample: usize, out: &Path) -> Result<Vec<ManifestEntry>> {
    let series = generate_series(spec, noise, downsample)?;
    create_dir(&out.join("clean"))?;
    create_dir(&out.join("noisy"))?;
    let mut entries = Vec::with_capacity(2 * series.len());
    for r in &series {
        let name = file_name(r.side, r.week);
        pgm::write_pgm(out.join("clean").join(&name), &r.clean)?;
        pgm::write_pgm(out.join("noisy").join(&name), &r.noisy)?;
        entries.push(ManifestEntry::new(r.week, r.side, format!("clean/{name}"), true));
        entries.push(ManifestEntry::new(r.week, r.side, format!("noisy/{name}"), false));
    }
    manifest::write_manifest(out.join(MANIFEST), &entries)?;
    Ok(entries)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DenoiseSummary {
    pub images: usize,
    pub mean_coverage: f64,
    pub repaired: usize,
    pub unrepaired: usize,
    /// Shifts applied by registration, per file.
    pub shifts: Vec<(String, isize, isize)>,
}

/// Denoises every `denoised: false` entry of `manifest` and writes the
/// results to `out/denoised/` with a new manifest.
///
/// With `register = Some(max_shift)` each image is first translated onto the
/// earliest week of its side. `downsample` is applied after denoising.
pub fn denoise_dataset(
    manifest_path: &Path,
    out: &Path,
    params: &DenoiseParams,
    register: Option<usize>,
    downsample: usize,
) -> Result<(Vec<ManifestEntry>, DenoiseSummary)> {
    let mut raw: Vec<ManifestEntry> = manifest::read_manifest(manifest_path)?
        .into_iter()
        .filter(|e| !e.denoised)
        .collect();
    if raw.is_empty() {
        return Err(Error::format(manifest_path, "no entries with denoised: false"));
    }
    raw.sort_by_key(|e| (e.side().ok(), e.week));
    create_dir(&out.join("denoised"))?;

    let mut references: BTreeMap<Side, Image> = BTreeMap::new();
    let mut summary = DenoiseSummary::default();
    let mut entries = Vec::with_capacity(raw.len());
    for e in &raw {
        let side = e.side()?;
        let mut img = pgm::read_pgm(manifest::resolve(manifest_path, e))?.with_provenance(e.week, side);
        if let Some(max_shift) = register {
            match references.get(&side) {
                None => {
                    references.insert(side, img.clone());
                }
                Some(reference) => {
                    let (dx, dy) = register::estimate_shift(reference, &img, max_shift)?;
                    if (dx, dy) != (0, 0) {
                        let fill = img.pixels().iter().copied().fold(f32::INFINITY, f32::min);
                        img = register::translate(&img, dx, dy, fill);
                    }
                    summary.shifts.push((e.file.clone(), dx, dy));
                }
            }
        }
        let (outcome, map) = denoise_image(&img, params)?;
        summary.images += 1;
        summary.mean_coverage += map.coverage();
        summary.repaired += outcome.repaired;
        summary.unrepaired += outcome.unrepaired;
        let clean = outcome.image.downsample(downsample)?.quantized();
        let name = file_name(side, e.week);
        pgm::write_pgm(out.join("denoised").join(&name), &clean)?;
        entries.push(ManifestEntry::new(e.week, side, format!("denoised/{name}"), true));
    }
    summary.mean_coverage /= summary.images as f64;
    entries.sort_by_key(|e| (e.week, e.side().ok()));
    manifest::write_manifest(out.join(MANIFEST), &entries)?;
    Ok((entries, summary))
}

/// Brings every record to `width × height` by integer box downsampling.
pub fn fit_records(records: Vec<ImpressionRecord>, width: usize, height: usize) -> Result<Vec<ImpressionRecord>> {
    records
        .into_iter()
        .map(|mut r| {
            r.image = fit_image(&r.image, width, height)?;
            Ok(r)
        })
        .collect()
}

pub fn fit_image(img: &Image, width: usize, height: usize) -> Result<Image> {
    let (w, h) = img.dims();
    if (w, h) == (width, height) {
        return Ok(img.clone());
    }
    let factor = w / width;
    if factor == 0 || w != factor * width || h != factor * height {
        return Err(Error::Usage(format!(
            "a {w}×{h} image cannot be reduced to the network input {width}×{height}"
        )));
    }
    Ok(img.downsample(factor)?.quantized())
}

/// Nearest-neighbour enlargement back to `width × height`.
pub fn enlarge(img: &Image, width: usize, height: usize) -> Image {
    let (w, h) = img.dims();
    if (w, h) == (width, height) {
        return img.clone();
    }
    let mut out = Image::from_fn(width, height, |x, y| img.get(x * w / width, y * h / height));
    out.week = img.week;
    out.side = img.side;
    out
}

pub fn manifest_path(dir_or_file: &Path) -> PathBuf {
    if dir_or_file.is_dir() {
        dir_or_file.join(MANIFEST)
    } else {
        dir_or_file.to_path_buf()
    }
}
