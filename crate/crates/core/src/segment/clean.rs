use crate::error::{Error, Result};
use crate::model::{TelemetrySample, KMH_PER_MS};
use crate::scalar::{mad, median, Scalar};

/// MAD-to-sigma factor for Gaussian noise.
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `3 ln(n) sigma^2`, with sigma estimated from the MAD of first differences.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    /// Moving-median window in samples.
    pub median_window: usize,
    /// Acceleration threshold in m/s^2.
    pub accel_threshold: f64,
    /// Stop threshold in km/h.
    pub stop_threshold_kmh: f64,
    pub penalty: Penalty,
    /// Minimum run of sub-threshold frames labeled `Stopped`; `None` means one second of frames.
    pub min_stop_run: Option<usize>,
    /// Outlier rule: `|v - median| > max(k * 1.4826 * MAD, floor)`.
    pub outlier_mad_k: f64,
    /// Outlier floor in m/s.
    pub outlier_floor_ms: f64,
    /// Lower bound on the noise sigma used by [`Penalty::Auto`], in m/s.
    pub noise_floor_ms: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            median_window: 20,
            accel_threshold: 0.4,
            stop_threshold_kmh: 1.0,
            penalty: Penalty::Auto,
            min_stop_run: None,
            outlier_mad_k: 3.0,
            outlier_floor_ms: 5.0,
            noise_floor_ms: 0.05,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        if self.median_window == 0 {
            return Err(Error::InvalidParameter("median_window must be >= 1".into()));
        }
        positive("accel_threshold", self.accel_threshold)?;
        positive("stop_threshold_kmh", self.stop_threshold_kmh)?;
        positive("outlier_mad_k", self.outlier_mad_k)?;
        positive("outlier_floor_ms", self.outlier_floor_ms)?;
        if let Penalty::Fixed(b) = self.penalty {
            positive("penalty", b)?;
        }
        if self.min_stop_run == Some(0) {
            return Err(Error::InvalidParameter("min_stop_run must be >= 1".into()));
        }
        Ok(())
    }

    pub fn stop_threshold_ms(&self) -> f64 {
        self.stop_threshold_kmh / KMH_PER_MS
    }

    pub fn stop_run_frames(&self, fps: f64) -> usize {
        self.min_stop_run.unwrap_or_else(|| (fps.round() as usize).max(1))
    }
}

/// Speed in m/s for every frame of a contiguous range.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSeries<T> {
    pub first_frame: u64,
    pub v: Vec<T>,
    pub fps: f64,
}

impl<T: Scalar> SpeedSeries<T> {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn frame(&self, index: usize) -> u64 {
        self.first_frame + index as u64
    }

    pub fn last_frame(&self) -> u64 {
        self.first_frame + self.v.len() as u64 - 1
    }
}

// Centred window for an even or odd length: `len / 2` samples before, the rest after,
// truncated at the series ends.
fn window_bounds(i: usize, n: usize, len: usize) -> (usize, usize) {
    let before = len / 2;
    let after = len - 1 - before;
    (i.saturating_sub(before), (i + after).min(n - 1))
}

/// Centred moving median with shrinking windows at the ends; length is preserved.
pub fn moving_median<T: Scalar>(values: &[T], window: usize) -> Vec<T> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = window_bounds(i, n, window.max(1));
            median(&values[lo..=hi]).expect("window is non-empty")
        })
        .collect()
}

/// Replaces outliers by their local median, then applies the moving median.
pub fn clean_speed_values<T: Scalar>(raw_ms: &[T], cfg: &SegmentationConfig) -> Result<Vec<T>> {
    if raw_ms.is_empty() {
        return Err(Error::Empty("speed series".into()));
    }
    if let Some(index) = raw_ms.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let n = raw_ms.len();
    let k = T::lit(cfg.outlier_mad_k * MAD_SCALE);
    let floor = T::lit(cfg.outlier_floor_ms);
    let replaced: Vec<T> = (0..n)
        .map(|i| {
            let (lo, hi) = window_bounds(i, n, cfg.median_window);
            let w = &raw_ms[lo..=hi];
            let m = median(w).expect("non-empty");
            let spread = mad(w).expect("non-empty");
            if (raw_ms[i] - m).abs() > (k * spread).max(floor) {
                m
            } else {
                raw_ms[i]
            }
        })
        .collect();
    Ok(moving_median(&replaced, cfg.median_window)
        .into_iter()
        .map(|v| v.max(T::zero()))
        .collect())
}

/// Builds a contiguous m/s series from telemetry (linear interpolation over missing
/// frames) and cleans it.
pub fn clean_speed<T: Scalar>(
    samples: &[TelemetrySample],
    fps: f64,
    cfg: &SegmentationConfig,
) -> Result<SpeedSeries<T>> {
    cfg.validate()?;
    let first = samples.first().ok_or_else(|| Error::Empty("telemetry".into()))?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidParameter(format!("fps must be > 0, got {fps}")));
    }
    let mut raw: Vec<T> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let v = T::lit(s.speed_ms());
        if let Some(prev) = i.checked_sub(1).map(|j| &samples[j]) {
            if s.frame <= prev.frame {
                return Err(Error::Unsorted(format!(
                    "telemetry frame {} after {}",
                    s.frame, prev.frame
                )));
            }
            let gap = s.frame - prev.frame;
            let v0 = T::lit(prev.speed_ms());
            for step in 1..gap {
                let u = T::lit(step as f64 / gap as f64);
                raw.push(v0 + (v - v0) * u);
            }
        }
        raw.push(v);
    }
    Ok(SpeedSeries {
        first_frame: first.frame,
        v: clean_speed_values(&raw, cfg)?,
        fps,
    })
}

/// Penalty `3 ln(n) sigma^2` with `sigma = max(1.4826 MAD(diff) / sqrt(2), noise_floor)`.
pub fn auto_penalty<T: Scalar>(v: &[T], cfg: &SegmentationConfig) -> T {
    let n = v.len().max(2);
    let diffs: Vec<T> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let sigma = mad(&diffs).unwrap_or(T::zero()) * T::lit(MAD_SCALE) / T::lit(2f64.sqrt());
    let sigma = sigma.max(T::lit(cfg.noise_floor_ms));
    T::lit(3.0) * T::lit((n as f64).ln()) * sigma * sigma
}
