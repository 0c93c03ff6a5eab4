use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Fixation, GazeEvent, GazeSample};
use crate::scalar::Scalar;

/// Per-class sample counts of a gaze stream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Composition {
    pub total: usize,
    pub counts: BTreeMap<GazeEvent, usize>,
    pub retained: usize,
}

impl Composition {
    pub fn from_samples(samples: &[GazeSample]) -> Self {
        let mut counts: BTreeMap<GazeEvent, usize> = GazeEvent::ALL.iter().map(|&e| (e, 0)).collect();
        for s in samples {
            *counts.entry(s.event).or_default() += 1;
        }
        Composition {
            total: samples.len(),
            counts,
            retained: samples.len(),
        }
    }

    /// Fraction of all samples in class `event`; 0 for an empty stream.
    pub fn fraction(&self, event: GazeEvent) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts.get(&event).copied().unwrap_or(0) as f64 / self.total as f64
        }
    }

    pub fn dropped_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.total - self.retained) as f64 / self.total as f64
        }
    }
}

/// Classes excluded from ground truth unless configured otherwise.
pub fn default_drop_set() -> BTreeSet<GazeEvent> {
    [GazeEvent::Saccade, GazeEvent::Blink, GazeEvent::InVehicle, GazeEvent::Offscreen].into()
}

/// Keeps samples whose class is not in `drop` and reports the stream composition.
pub fn filter_gaze<T: Scalar>(
    samples: &[GazeSample],
    drop: &BTreeSet<GazeEvent>,
) -> (Vec<Fixation<T>>, Composition) {
    let mut report = Composition::from_samples(samples);
    let kept: Vec<Fixation<T>> = samples
        .iter()
        .filter(|s| !drop.contains(&s.event))
        .map(|s| Fixation::new(s.frame, T::lit(s.x), T::lit(s.y)))
        .collect();
    report.retained = kept.len();
    (kept, report)
}

/// Raw eye-tracker point with a timestamp in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawGaze<T> {
    pub t_ms: T,
    pub frame: u64,
    pub x: T,
    pub y: T,
}

fn dispersion<T: Scalar>(points: &[RawGaze<T>]) -> T {
    let (mut x0, mut x1, mut y0, mut y1) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0) + (y1 - y0)
}

/// Dispersion-threshold fixation identification.
///
/// Dispersion is `(max x - min x) + (max y - min y)`. Each fixation is placed at the
/// centroid of its window, stamped with the frame of its first point.
pub fn detect_fixations_idt<T: Scalar>(
    points: &[RawGaze<T>],
    dispersion_threshold: T,
    min_duration_ms: T,
) -> Result<Vec<Fixation<T>>> {
    if let Some(i) = points.windows(2).position(|w| !(w[1].t_ms > w[0].t_ms)) {
        return Err(Error::Unsorted(format!("gaze timestamp at index {} does not increase", i + 1)));
    }
    if !(dispersion_threshold >= T::zero()) || !(min_duration_ms >= T::zero()) {
        return Err(Error::InvalidParameter("thresholds must be non-negative".into()));
    }
    let mut out = Vec::new();
    let n = points.len();
    let mut i = 0;
    while i < n {
        let Some(mut j) = (i..n).find(|&j| points[j].t_ms - points[i].t_ms >= min_duration_ms) else {
            break;
        };
        if dispersion(&points[i..=j]) > dispersion_threshold {
            i += 1;
            continue;
        }
        while j + 1 < n && dispersion(&points[i..=j + 1]) <= dispersion_threshold {
            j += 1;
        }
        let w = &points[i..=j];
        let k = T::from_usize_lossy(w.len());
        let cx = w.iter().map(|p| p.x).sum::<T>() / k;
        let cy = w.iter().map(|p| p.y).sum::<T>() / k;
        out.push(Fixation {
            frame: points[i].frame,
            x: cx,
            y: cy,
            duration_ms: Some(points[j].t_ms - points[i].t_ms),
        });
        i = j + 1;
    }
    Ok(out)
}
