use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{ActionLabel, LateralAction, Longitudinal, TelemetrySample};
use crate::scalar::Scalar;
use crate::segment::clean::{auto_penalty, clean_speed, Penalty, SegmentationConfig, SpeedSeries};
use crate::segment::pelt::detect_change_points;

/// A labeled run of frames; frame numbers are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub start_frame: u64,
    pub end_frame: u64,
    /// Endpoint acceleration in m/s^2.
    pub mean_accel: T,
    pub longitudinal: Longitudinal,
}

impl<T> Segment<T> {
    pub fn len(&self) -> usize {
        (self.end_frame - self.start_frame + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn label_for<T: Scalar>(accel: T, threshold: T) -> Longitudinal {
    if accel >= threshold {
        Longitudinal::SpeedUp
    } else if accel <= -threshold {
        Longitudinal::SlowDown
    } else {
        Longitudinal::Maintain
    }
}

/// Labels the segments delimited by `change_points`.
///
/// Acceleration uses the speed at the segment start and at the next change point
/// (the last sample for the final segment). Runs of at least
/// [`SegmentationConfig::stop_run_frames`] frames at or below the stop threshold
/// are split out and labeled `Stopped`.
pub fn classify_segments<T: Scalar>(
    series: &SpeedSeries<T>,
    change_points: &[usize],
    cfg: &SegmentationConfig,
) -> Result<Vec<Segment<T>>> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Empty("speed series".into()));
    }
    if change_points.windows(2).any(|w| w[0] >= w[1])
        || change_points.first().is_some_and(|&c| c == 0)
        || change_points.last().is_some_and(|&c| c >= n)
    {
        return Err(Error::InvalidParameter(format!(
            "change points must be strictly increasing inside (0, {n})"
        )));
    }
    let threshold = T::lit(cfg.accel_threshold);
    let mut bounds = Vec::with_capacity(change_points.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(change_points);
    bounds.push(n);

    let mut raw = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (start, end) = (w[0], w[1] - 1);
        let endpoint = if w[1] < n { w[1] } else { end };
        if endpoint == start {
            return Err(Error::ZeroDuration { start, end });
        }
        let dt = T::lit((endpoint - start) as f64 / series.fps);
        let accel = (series.v[endpoint] - series.v[start]) / dt;
        raw.push((start, end, accel, label_for(accel, threshold)));
    }

    // Stopped override on sufficiently long sub-threshold runs.
    let stop = T::lit(cfg.stop_threshold_ms());
    let min_run = cfg.stop_run_frames(series.fps);
    let mut stopped = vec![false; n];
    let mut i = 0;
    while i < n {
        if series.v[i] <= stop {
            let j = (i..n).find(|&k| series.v[k] > stop).unwrap_or(n);
            if j - i >= min_run {
                stopped[i..j].iter_mut().for_each(|s| *s = true);
            }
            i = j;
        } else {
            i += 1;
        }
    }

    let mut out: Vec<Segment<T>> = Vec::new();
    for (start, end, accel, label) in raw {
        let mut k = start;
        while k <= end {
            let is_stop = stopped[k];
            let run_end = (k..=end).find(|&m| stopped[m] != is_stop).map_or(end, |m| m - 1);
            out.push(Segment {
                start_frame: series.frame(k),
                end_frame: series.frame(run_end),
                mean_accel: accel,
                longitudinal: if is_stop { Longitudinal::Stopped } else { label },
            });
            k = run_end + 1;
        }
    }
    Ok(out)
}

/// Combines one frame's longitudinal label with its lateral annotation.
pub fn fuse_label(longitudinal: Longitudinal, lateral: Option<LateralAction>) -> ActionLabel {
    match (lateral, longitudinal) {
        (Some(LateralAction::UTurn | LateralAction::Reverse), _) => ActionLabel::Excluded,
        (_, Longitudinal::Stopped) => ActionLabel::Stopped,
        (Some(_), Longitudinal::Maintain) => ActionLabel::Lateral,
        (Some(_), Longitudinal::SpeedUp | Longitudinal::SlowDown) => ActionLabel::LatLon,
        (None, lon) => lon.into(),
    }
}

/// Per-frame longitudinal labels covered by `segments`.
pub fn per_frame_longitudinal<T>(segments: &[Segment<T>]) -> Vec<Longitudinal> {
    segments
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.longitudinal, s.len()))
        .collect()
}

/// Per-frame six-way labels. `lateral` must cover exactly the frames of `segments`.
pub fn fuse_actions<T>(
    segments: &[Segment<T>],
    lateral: &[Option<LateralAction>],
) -> Result<Vec<ActionLabel>> {
    let longitudinal = per_frame_longitudinal(segments);
    if longitudinal.len() != lateral.len() {
        return Err(Error::RangeMismatch(format!(
            "segments cover {} frames, lateral annotations {}",
            longitudinal.len(),
            lateral.len()
        )));
    }
    Ok(longitudinal
        .into_iter()
        .zip(lateral)
        .map(|(lon, &lat)| fuse_label(lon, lat))
        .collect())
}

/// Frame counts and percentages per reported category; excluded frames are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStats {
    pub counts: BTreeMap<ActionLabel, u64>,
    pub excluded: u64,
    pub included: u64,
}

impl ActionStats {
    pub fn percent(&self, label: ActionLabel) -> f64 {
        if label == ActionLabel::Excluded || self.included == 0 {
            return 0.0;
        }
        100.0 * self.counts.get(&label).copied().unwrap_or(0) as f64 / self.included as f64
    }

    /// Rows in benchmark order: `(label, frames, percent)`.
    pub fn rows(&self) -> Vec<(ActionLabel, u64, f64)> {
        ActionLabel::REPORTED
            .iter()
            .map(|&l| (l, self.counts.get(&l).copied().unwrap_or(0), self.percent(l)))
            .collect()
    }
}

pub fn action_statistics<L: AsRef<[ActionLabel]>>(videos: &[L]) -> Result<ActionStats> {
    let mut counts: BTreeMap<ActionLabel, u64> =
        ActionLabel::REPORTED.iter().map(|&l| (l, 0)).collect();
    let mut excluded = 0;
    let mut total = 0;
    for labels in videos {
        for &l in labels.as_ref() {
            total += 1;
            if l == ActionLabel::Excluded {
                excluded += 1;
            } else {
                *counts.get_mut(&l).expect("reported label") += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Empty("no labeled frames".into()));
    }
    if excluded == total {
        return Err(Error::AllExcluded);
    }
    Ok(ActionStats {
        counts,
        excluded,
        included: total - excluded,
    })
}

/// Full longitudinal segmentation of one video's telemetry.
#[derive(Debug, Clone)]
pub struct Segmentation<T> {
    pub series: SpeedSeries<T>,
    pub penalty: T,
    pub change_points: Vec<usize>,
    pub segments: Vec<Segment<T>>,
}

impl<T: Scalar> Segmentation<T> {
    /// Longitudinal labels for frames `0..num_frames`; frames outside the telemetry
    /// range take the nearest labeled frame.
    pub fn labels_for_video(&self, num_frames: u64) -> Vec<Longitudinal> {
        let per_frame = per_frame_longitudinal(&self.segments);
        let first = self.series.first_frame;
        (0..num_frames)
            .map(|f| {
                let idx = f.saturating_sub(first).min(per_frame.len() as u64 - 1);
                per_frame[idx as usize]
            })
            .collect()
    }
}

/// Clean, detect change points, classify. A one-sample trailing segment is merged into
/// its predecessor, since its endpoint acceleration is undefined.
pub fn segment_speed<T: Scalar>(
    samples: &[TelemetrySample],
    fps: f64,
    cfg: &SegmentationConfig,
) -> Result<Segmentation<T>> {
    let series: SpeedSeries<T> = clean_speed(samples, fps, cfg)?;
    let penalty = match cfg.penalty {
        Penalty::Auto => auto_penalty(&series.v, cfg),
        Penalty::Fixed(b) => T::lit(b),
    };
    let mut change_points = if series.len() >= 2 {
        detect_change_points(&series.v, penalty)?
    } else {
        Vec::new()
    };
    if change_points.last() == Some(&(series.len() - 1)) {
        change_points.pop();
    }
    let segments = if series.len() >= 2 {
        classify_segments(&series, &change_points, cfg)?
    } else {
        let stopped = series.v[0] <= T::lit(cfg.stop_threshold_ms());
        vec![Segment {
            start_frame: series.first_frame,
            end_frame: series.first_frame,
            mean_accel: T::zero(),
            longitudinal: if stopped { Longitudinal::Stopped } else { Longitudinal::Maintain },
        }]
    };
    Ok(Segmentation {
        series,
        penalty,
        change_points,
        segments,
    })
}
