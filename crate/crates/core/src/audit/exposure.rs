use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureConfig {
    /// 8-bit luminance counted as clipped.
    pub bright_level: u8,
    /// Share of clipped pixels that makes a frame overexposed.
    pub bright_fraction: f64,
    pub over_mean: f64,
    pub under_mean: f64,
}

impl Default for ExposureConfig {
    fn default() -> Self {
        Self {
            bright_level: 250,
            bright_fraction: 0.5,
            over_mean: 240.0,
            under_mean: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exposure {
    Ok,
    Overexposed,
    Underexposed,
}

impl Exposure {
    pub fn as_str(self) -> &'static str {
        match self {
            Exposure::Ok => "ok",
            Exposure::Overexposed => "overexposed",
            Exposure::Underexposed => "underexposed",
        }
    }
}

/// Classifies an 8-bit luminance buffer.
pub fn classify_exposure(luma: &[u8], cfg: &ExposureConfig) -> Exposure {
    if luma.is_empty() {
        return Exposure::Underexposed;
    }
    let n = luma.len() as f64;
    let mean = luma.iter().map(|&v| v as f64).sum::<f64>() / n;
    let bright = luma.iter().filter(|&&v| v >= cfg.bright_level).count() as f64 / n;
    if bright >= cfg.bright_fraction || mean >= cfg.over_mean {
        Exposure::Overexposed
    } else if mean <= cfg.under_mean {
        Exposure::Underexposed
    } else {
        Exposure::Ok
    }
}

pub fn classify_image_file(path: &Path, cfg: &ExposureConfig) -> Result<Exposure> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(classify_exposure(img.to_luma8().as_raw(), cfg))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExposureReport {
    pub frames: Vec<(PathBuf, Exposure)>,
    /// Frames that could not be decoded; they are skipped.
    pub undecodable: Vec<PathBuf>,
}

impl ExposureReport {
    pub fn count(&self, e: Exposure) -> usize {
        self.frames.iter().filter(|f| f.1 == e).count()
    }

    pub fn fraction(&self, e: Exposure) -> f64 {
        if self.frames.is_empty() {
            0.0
        } else {
            self.count(e) as f64 / self.frames.len() as f64
        }
    }
}

/// Classifies frame images in parallel on the current rayon pool.
pub fn exposure_audit(paths: &[PathBuf], cfg: &ExposureConfig) -> ExposureReport {
    let results: Vec<Result<Exposure>> = paths.par_iter().map(|p| classify_image_file(p, cfg)).collect();
    let mut report = ExposureReport::default();
    for (p, r) in paths.iter().zip(results) {
        match r {
            Ok(e) => report.frames.push((p.clone(), e)),
            Err(e) => {
                log::warn!("skipping frame: {e}");
                report.undecodable.push(p.clone());
            }
        }
    }
    report
}
