//! Structural similarity, peak signal-to-noise ratio and evaluation reports.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::image::{Image, Side};
use crate::net::{DeltaEncoding, ModelParams, Variant};
use crate::train::TrainingSample;

/// Dynamic range of `[0, 1]` images.
pub const DYNAMIC_RANGE: f64 = 1.0;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;
pub const DEFAULT_WINDOW: usize = 8;
const C1: f64 = (K1 * DYNAMIC_RANGE) * (K1 * DYNAMIC_RANGE);
const C2: f64 = (K2 * DYNAMIC_RANGE) * (K2 * DYNAMIC_RANGE);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsimWindow {
    /// Uniform square window of this side, stride 1, averaged over every
    /// position. Falls back to [`SsimWindow::Global`] for smaller images.
    Sliding(usize),
    /// One window covering the whole image.
    Global,
}

impl Default for SsimWindow {
    fn default() -> Self {
        SsimWindow::Sliding(DEFAULT_WINDOW)
    }
}

/// First and second moments of a pair of patches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchStats {
    pub mean_f: f64,
    pub mean_g: f64,
    pub var_f: f64,
    pub var_g: f64,
    pub covariance: f64,
}

impl PatchStats {
    /// Luminance, contrast and structure terms with `C3 = C2 / 2`.
    pub fn terms(&self) -> (f64, f64, f64) {
        let (sf, sg) = (num_traits::Float::sqrt(self.var_f.max(0.0)), num_traits::Float::sqrt(self.var_g.max(0.0)));
        let c3 = C2 / 2.0;
        let l = (2.0 * self.mean_f * self.mean_g + C1) / (self.mean_f * self.mean_f + self.mean_g * self.mean_g + C1);
        let c = (2.0 * sf * sg + C2) / (self.var_f + self.var_g + C2);
        let s = (self.covariance + c3) / (sf * sg + c3);
        (l, c, s)
    }

    /// `l·c·s`, evaluated in the closed form that cancels `σ_f σ_g`, so that
    /// identical patches give exactly 1 and swapping the images is exact.
    pub fn ssim(&self) -> f64 {
        let num = (2.0 * self.mean_f * self.mean_g + C1) * (2.0 * self.covariance + C2);
        let den = (self.mean_f * self.mean_f + self.mean_g * self.mean_g + C1) * (self.var_f + self.var_g + C2);
        num / den
    }
}

fn stats(sums: [f64; 5], n: f64) -> PatchStats {
    let [sf, sg, sff, sgg, sfg] = sums;
    let (mf, mg) = (sf / n, sg / n);
    PatchStats {
        mean_f: mf,
        mean_g: mg,
        var_f: sff / n - mf * mf,
        var_g: sgg / n - mg * mg,
        covariance: sfg / n - mf * mg,
    }
}

fn global_stats(f: &Image, g: &Image) -> PatchStats {
    let n = f.pixels().len() as f64;
    let (mf, mg) = (f.mean(), g.mean());
    let mut acc = [0.0f64; 3];
    for (&a, &b) in f.pixels().iter().zip(g.pixels()) {
        let (da, db) = (a as f64 - mf, b as f64 - mg);
        acc[0] += da * da;
        acc[1] += db * db;
        acc[2] += da * db;
    }
    PatchStats {
        mean_f: mf,
        mean_g: mg,
        var_f: acc[0] / n,
        var_g: acc[1] / n,
        covariance: acc[2] / n,
    }
}

/// Structural similarity of two equally sized images, clamped to `[0, 1]`.
pub fn ssim(f: &Image, g: &Image, window: SsimWindow) -> Result<f64> {
    f.ensure_same_dims(g, "ssim")?;
    let (w, h) = f.dims();
    let raw = match window {
        SsimWindow::Sliding(0) => return Err(Error::InvalidArgument("SSIM window must be positive".into())),
        SsimWindow::Sliding(k) if k <= w && k <= h => {
            // Summed-area tables of f, g, f², g², fg, with a zero border.
            let stride = w + 1;
            let mut tables = [(); 5].map(|_| alloc::vec![0.0f64; (w + 1) * (h + 1)]);
            for y in 0..h {
                for x in 0..w {
                    let (a, b) = (f.get(x, y) as f64, g.get(x, y) as f64);
                    let vals = [a, b, a * a, b * b, a * b];
                    let i = (y + 1) * stride + x + 1;
                    for (t, v) in tables.iter_mut().zip(vals) {
                        t[i] = v + t[i - 1] + t[i - stride] - t[i - stride - 1];
                    }
                }
            }
            let n = (k * k) as f64;
            let mut total = 0.0;
            let mut count = 0usize;
            for y in 0..=h - k {
                for x in 0..=w - k {
                    let (x1, y1) = (x + k, y + k);
                    let sums = tables.each_ref().map(|t| {
                        t[y1 * stride + x1] - t[y * stride + x1] - t[y1 * stride + x] + t[y * stride + x]
                    });
                    total += stats(sums, n).ssim();
                    count += 1;
                }
            }
            total / count as f64
        }
        SsimWindow::Sliding(_) | SsimWindow::Global => global_stats(f, g).ssim(),
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// PSNR on 8-bit levels, `10·log10(255² / MSE)`. Identical images give
/// `f64::INFINITY`.
pub fn psnr(f: &Image, g: &Image) -> Result<f64> {
    f.ensure_same_dims(g, "psnr")?;
    let (a, b) = (f.to_levels(), g.to_levels());
    let se: u64 = a
        .iter()
        .zip(&b)
        .map(|(&p, &q)| {
            let d = p as i64 - q as i64;
            (d * d) as u64
        })
        .sum();
    if se == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = se as f64 / a.len() as f64;
    Ok(10.0 * libm::log10(255.0 * 255.0 / mse))
}

/// Something that maps `(X, Δt)` to a predicted impression.
pub trait Predictor {
    fn variant(&self) -> Variant;
    fn predict(&self, x: &Image, delta: &DeltaEncoding) -> Result<Image>;
}

impl Predictor for ModelParams<f32> {
    fn variant(&self) -> Variant {
        self.config().variant
    }

    fn predict(&self, x: &Image, delta: &DeltaEncoding) -> Result<Image> {
        self.forward(x, delta)
    }
}

/// Returns the input unchanged: the "no further wear" baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Persistence(pub Variant);

impl Predictor for Persistence {
    fn variant(&self) -> Variant {
        self.0
    }

    fn predict(&self, x: &Image, _delta: &DeltaEncoding) -> Result<Image> {
        Ok(x.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricEntry {
    pub side: Side,
    pub x_week: u32,
    pub y_week: u32,
    pub ssim: f64,
    pub ssim_global: f64,
    pub psnr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(Summary {
            mean,
            std: num_traits::Float::sqrt(var),
            count: v.len(),
        })
    }
}

/// Per-image metrics of one model on one evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub label: String,
    pub variant: Variant,
    pub entries: Vec<MetricEntry>,
}

impl MetricReport {
    pub fn ssim(&self) -> Summary {
        Summary::of(self.entries.iter().map(|e| e.ssim)).expect("reports are never empty")
    }

    pub fn ssim_global(&self) -> Summary {
        Summary::of(self.entries.iter().map(|e| e.ssim_global)).expect("reports are never empty")
    }

    /// Over finite values only; `None` if every pair was identical.
    pub fn psnr(&self) -> Option<Summary> {
        Summary::of(self.entries.iter().map(|e| e.psnr).filter(|p| p.is_finite()))
    }

    pub fn infinite_psnr_count(&self) -> usize {
        self.entries.iter().filter(|e| e.psnr.is_infinite()).count()
    }

    /// Mean windowed SSIM restricted to pairs at least `min_weeks` apart.
    pub fn ssim_for_gap(&self, min_weeks: u32) -> Option<Summary> {
        Summary::of(
            self.entries
                .iter()
                .filter(|e| e.y_week.abs_diff(e.x_week) >= min_weeks)
                .map(|e| e.ssim),
        )
    }

    /// One row per image pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,variant,side,x_week,y_week,ssim,ssim_global,psnr\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{}",
                self.label,
                self.variant,
                e.side,
                e.x_week,
                e.y_week,
                e.ssim,
                e.ssim_global,
                fmt_psnr(e.psnr)
            );
        }
        out
    }
}

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() {
        String::from("inf")
    } else {
        alloc::format!("{p:.4}")
    }
}

/// Aligned text table with mean and standard deviation rows per metric and
/// one column per report.
pub fn format_table(reports: &[MetricReport]) -> String {
    let width = reports.iter().map(|r| r.label.len()).max().unwrap_or(0).max(10);
    let mut out = String::new();
    let header = |out: &mut String, metric: &str| {
        let _ = write!(out, "{metric:<8}");
        for r in reports {
            let _ = write!(out, "  {:>width$}", r.label);
        }
        out.push('\n');
    };
    let row = |out: &mut String, name: &str, values: &mut dyn Iterator<Item = Option<f64>>| {
        let _ = write!(out, "{name:<8}");
        for v in values {
            match v {
                Some(v) => {
                    let _ = write!(out, "  {v:>width$.4}");
                }
                None => {
                    let _ = write!(out, "  {:>width$}", "n/a");
                }
            }
        }
        out.push('\n');
    };

    header(&mut out, "SSIM");
    row(&mut out, "Mean", &mut reports.iter().map(|r| Some(r.ssim().mean)));
    row(&mut out, "STD", &mut reports.iter().map(|r| Some(r.ssim().std)));
    out.push('\n');
    header(&mut out, "PSNR");
    row(&mut out, "Mean", &mut reports.iter().map(|r| r.psnr().map(|s| s.mean)));
    row(&mut out, "STD", &mut reports.iter().map(|r| r.psnr().map(|s| s.std)));
    let infinite: usize = reports.iter().map(MetricReport::infinite_psnr_count).sum();
    if infinite > 0 {
        let _ = writeln!(out, "({infinite} identical pairs with infinite PSNR excluded)");
    }
    out
}

/// Scores `model` on every sample.
pub fn evaluate(model: &impl Predictor, samples: &[TrainingSample], label: &str) -> Result<MetricReport> {
    if samples.is_empty() {
        return Err(Error::Dataset("no evaluation samples".into()));
    }
    let mut entries = Vec::with_capacity(samples.len());
    for s in samples {
        if s.delta.variant() != model.variant() {
            return Err(Error::VariantMismatch {
                expected: model.variant().as_str(),
                found: s.delta.variant().as_str(),
            });
        }
        let pred = model.predict(&s.x, &s.delta)?.quantized();
        entries.push(MetricEntry {
            side: s.side,
            x_week: s.x_week,
            y_week: s.y_week,
            ssim: ssim(&pred, &s.y, SsimWindow::default())?,
            ssim_global: ssim(&pred, &s.y, SsimWindow::Global)?,
            psnr: psnr(&pred, &s.y)?,
        });
    }
    Ok(MetricReport {
        label: label.into(),
        variant: model.variant(),
        entries,
    })
}
