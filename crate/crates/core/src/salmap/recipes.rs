use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::homography::Homography;
use crate::map::SaliencyMap;
use crate::model::Fixation;
use crate::scalar::Scalar;

/// Kernels are truncated at this many standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// Several observers, spatio-temporal Gaussian, summed (in-lab recordings).
    MultiObserver,
    /// One observer, fixations of a ±window remapped into the key frame, pixelwise max.
    TemporalWindow,
    /// One fixation per frame smoothed by a wide kernel.
    SingleFixation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Sum,
    Max,
}

/// What to do with a fixation outside the frame in the single-fixation recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffFramePolicy {
    Clamp,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeConfig {
    pub recipe: Recipe,
    pub sigma_spatial: f64,
    pub sigma_temporal: f64,
    /// Frames on each side of the target frame that contribute.
    pub window_halfwidth: u32,
    pub combine: Combine,
    pub off_frame: OffFramePolicy,
}

impl RecipeConfig {
    pub fn multi_observer() -> Self {
        Self {
            recipe: Recipe::MultiObserver,
            sigma_spatial: 25.0,
            sigma_temporal: 4.0,
            window_halfwidth: 16,
            combine: Combine::Sum,
            off_frame: OffFramePolicy::Reject,
        }
    }

    pub fn temporal_window() -> Self {
        Self {
            recipe: Recipe::TemporalWindow,
            sigma_spatial: 25.0,
            sigma_temporal: 1.0,
            window_halfwidth: 12,
            combine: Combine::Max,
            off_frame: OffFramePolicy::Reject,
        }
    }

    pub fn single_fixation() -> Self {
        Self {
            recipe: Recipe::SingleFixation,
            sigma_spatial: 60.0,
            sigma_temporal: 1.0,
            window_halfwidth: 0,
            combine: Combine::Sum,
            off_frame: OffFramePolicy::Clamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_spatial > 0.0 && self.sigma_spatial.is_finite())
            || !(self.sigma_temporal > 0.0 && self.sigma_temporal.is_finite())
        {
            return Err(Error::InvalidParameter("sigmas must be positive".into()));
        }
        match (self.recipe, self.combine) {
            (Recipe::MultiObserver, Combine::Max) => Err(Error::InvalidParameter(
                "multi-observer maps combine by sum".into(),
            )),
            (Recipe::TemporalWindow, Combine::Sum) => Err(Error::InvalidParameter(
                "temporal-window maps combine by max".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Adds (or maxes in) `weight * exp(-d²/2σ²)` centred at `(cx, cy)` within the truncation radius.
fn splat<T: Scalar>(
    values: &mut [T],
    width: usize,
    height: usize,
    (cx, cy): (T, T),
    sigma: T,
    weight: T,
    combine: Combine,
) {
    let r = sigma * T::lit(TRUNCATION_SIGMAS);
    let r2 = r * r;
    let lo = |c: T| (c - r).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let hi = |c: T, n: usize| {
        let v = (c + r).floor();
        if v < T::zero() {
            None
        } else {
            Some(v.to_usize().unwrap_or(usize::MAX).min(n - 1))
        }
    };
    let (Some(x1), Some(y1)) = (hi(cx, width), hi(cy, height)) else {
        return;
    };
    let (x0, y0) = (lo(cx), lo(cy));
    let denom = T::lit(2.0) * sigma * sigma;
    for y in y0..=y1 {
        let dy = T::from_usize_lossy(y) - cy;
        let row = &mut values[y * width..(y + 1) * width];
        for (x, cell) in (x0..=x1).zip(&mut row[x0..=x1]) {
            let dx = T::from_usize_lossy(x) - cx;
            let d2 = dx * dx + dy * dy;
            if d2 > r2 {
                continue;
            }
            let g = weight * (-d2 / denom).exp();
            match combine {
                Combine::Sum => *cell = *cell + g,
                Combine::Max => *cell = cell.max(g),
            }
        }
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("map size must be non-zero".into()));
    }
    Ok(())
}

/// Sum of unit-peak Gaussians at the in-frame fixations, before normalization.
pub fn spatial_gaussian_response<T: Scalar>(
    fixations: &[Fixation<T>],
    sigma: T,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    check_size(width, height)?;
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    if fixations.is_empty() {
        return Err(Error::Empty("no fixations".into()));
    }
    let inside: Vec<_> = fixations.iter().filter(|f| f.is_in_frame(width, height)).collect();
    if inside.is_empty() {
        let f = fixations[0];
        return Err(Error::OffFrame {
            x: f.x.to_f64_lossy(),
            y: f.y.to_f64_lossy(),
            width,
            height,
        });
    }
    let mut values = vec![T::zero(); width * height];
    for f in inside {
        splat(&mut values, width, height, (f.x, f.y), sigma, T::one(), Combine::Sum);
    }
    Ok(SaliencyMap::from_parts(width, height, values))
}

/// Isotropic Gaussians at the fixations, normalized to sum 1. Off-frame fixations
/// are ignored; an all-off-frame set is an error.
pub fn spatial_gaussian_map<T: Scalar>(
    fixations: &[Fixation<T>],
    sigma: T,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    spatial_gaussian_response(fixations, sigma, width, height)?.normalized()
}

/// Unnormalized multi-observer map for `frame`: every fixation within
/// `window_halfwidth` frames contributes `exp(-Δ²/2σ_t²)` times its spatial kernel.
pub fn multi_observer_response<T: Scalar>(
    observers: &[Vec<Fixation<T>>],
    frame: u64,
    cfg: &RecipeConfig,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    cfg.validate()?;
    check_size(width, height)?;
    if observers.is_empty() {
        return Err(Error::Empty("no observers".into()));
    }
    let sigma = T::lit(cfg.sigma_spatial);
    let st2 = 2.0 * cfg.sigma_temporal * cfg.sigma_temporal;
    let mut values = vec![T::zero(); width * height];
    for f in observers.iter().flatten() {
        let delta = f.frame.abs_diff(frame);
        if delta > cfg.window_halfwidth as u64 || !f.is_in_frame(width, height) {
            continue;
        }
        let w = T::lit((-((delta * delta) as f64) / st2).exp());
        splat(&mut values, width, height, (f.x, f.y), sigma, w, Combine::Sum);
    }
    Ok(SaliencyMap::from_parts(width, height, values))
}

/// Multi-observer maps for each frame in `frames`, each normalized to sum 1.
pub fn multi_observer_maps<T: Scalar>(
    observers: &[Vec<Fixation<T>>],
    frames: std::ops::Range<u64>,
    cfg: &RecipeConfig,
    width: usize,
    height: usize,
) -> Result<Vec<SaliencyMap<T>>> {
    use rayon::prelude::*;
    let frames: Vec<u64> = frames.collect();
    frames
        .par_iter()
        .map(|&t| {
            multi_observer_response(observers, t, cfg, width, height)?
                .normalized()
                .map_err(|_| Error::ZeroMass(format!("frame {t} has no gaze mass")))
        })
        .collect()
}

/// Pixelwise max of unit-peak Gaussians at the window's fixations remapped into
/// `key_frame`, before normalization.
///
/// `homographies` maps each non-key frame into the key frame; the key frame itself
/// uses the identity.
pub fn temporal_window_response<T: Scalar>(
    key_frame: u64,
    fixations: &[Fixation<T>],
    homographies: &BTreeMap<u64, Homography<T>>,
    cfg: &RecipeConfig,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    cfg.validate()?;
    check_size(width, height)?;
    let hw = cfg.window_halfwidth as u64;
    let in_window: Vec<_> = fixations.iter().filter(|f| f.frame.abs_diff(key_frame) <= hw).collect();
    if in_window.is_empty() {
        return Err(Error::Empty(format!("no fixations within ±{hw} of frame {key_frame}")));
    }
    let sigma = T::lit(cfg.sigma_spatial);
    let mut values = vec![T::zero(); width * height];
    for f in in_window {
        let p = if f.frame == key_frame {
            (f.x, f.y)
        } else {
            let h = homographies
                .get(&f.frame)
                .ok_or_else(|| Error::MissingReference(format!("homography for frame {}", f.frame)))?;
            h.project((f.x, f.y))?
        };
        splat(&mut values, width, height, p, sigma, T::one(), Combine::Max);
    }
    Ok(SaliencyMap::from_parts(width, height, values))
}

/// [`temporal_window_response`] normalized to a maximum of 1.
pub fn temporal_window_map<T: Scalar>(
    key_frame: u64,
    fixations: &[Fixation<T>],
    homographies: &BTreeMap<u64, Homography<T>>,
    cfg: &RecipeConfig,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    temporal_window_response(key_frame, fixations, homographies, cfg, width, height)?.normalized_max()
}

/// One wide Gaussian, normalized to sum 1.
pub fn single_fixation_map<T: Scalar>(
    fixation: &Fixation<T>,
    sigma_large: T,
    policy: OffFramePolicy,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    check_size(width, height)?;
    let mut f = *fixation;
    if !f.x.is_finite() || !f.y.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if !f.is_in_frame(width, height) {
        match policy {
            OffFramePolicy::Reject => {
                return Err(Error::OffFrame {
                    x: f.x.to_f64_lossy(),
                    y: f.y.to_f64_lossy(),
                    width,
                    height,
                })
            }
            OffFramePolicy::Clamp => {
                f.x = f.x.max(T::zero()).min(T::from_usize_lossy(width - 1));
                f.y = f.y.max(T::zero()).min(T::from_usize_lossy(height - 1));
            }
        }
    }
    spatial_gaussian_map(&[f], sigma_large, width, height)
}
