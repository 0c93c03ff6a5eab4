use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ActionLabel;

/// Missing frames between the first and last present index.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub first: u64,
    pub last: u64,
    pub present: u64,
    /// Maximal runs of present frames, inclusive bounds.
    pub segments: Vec<(u64, u64)>,
    pub fps: f64,
}

impl GapReport {
    pub fn span(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn missing(&self) -> u64 {
        self.span() - self.present
    }

    pub fn missing_fraction(&self) -> f64 {
        self.missing() as f64 / self.span() as f64
    }

    pub fn segment_lengths(&self) -> Vec<u64> {
        self.segments.iter().map(|(a, b)| b - a + 1).collect()
    }

    pub fn span_seconds(&self) -> f64 {
        self.span() as f64 / self.fps
    }

    pub fn is_present(&self, frame: u64) -> bool {
        let i = self.segments.partition_point(|s| s.1 < frame);
        self.segments.get(i).is_some_and(|s| s.0 <= frame)
    }
}

/// Infers the span from the first and last index and enumerates contiguous segments.
pub fn detect_frame_gaps(indices: &[u64], fps: f64) -> Result<GapReport> {
    if indices.is_empty() {
        return Err(Error::Empty("no frame indices".into()));
    }
    if !(fps > 0.0) {
        return Err(Error::InvalidParameter("fps must be positive".into()));
    }
    if let Some(i) = indices.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Unsorted(format!(
            "frame index {} at position {} does not increase",
            indices[i + 1],
            i + 1
        )));
    }
    let mut segments = Vec::new();
    let mut start = indices[0];
    for w in indices.windows(2) {
        if w[1] != w[0] + 1 {
            segments.push((start, w[0]));
            start = w[1];
        }
    }
    segments.push((start, *indices.last().expect("non-empty")));
    Ok(GapReport {
        first: indices[0],
        last: *indices.last().expect("non-empty"),
        present: indices.len() as u64,
        segments,
        fps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapShare {
    pub frames: u64,
    pub missing: u64,
}

impl GapShare {
    pub fn fraction(&self) -> Option<f64> {
        (self.frames > 0).then(|| self.missing as f64 / self.frames as f64)
    }
}

/// Fills unlabeled frames from the nearest labeled frame; a gap between two labels
/// is split at its midpoint, with the middle frame of an odd gap going left.
pub fn fill_nearest(labels: &[Option<ActionLabel>]) -> Result<Vec<ActionLabel>> {
    let known: Vec<(usize, ActionLabel)> =
        labels.iter().enumerate().filter_map(|(i, l)| l.map(|l| (i, l))).collect();
    if known.is_empty() {
        return Err(Error::Empty("no labeled frames".into()));
    }
    let mut out = Vec::with_capacity(labels.len());
    let mut k = 0;
    for i in 0..labels.len() {
        while k + 1 < known.len() && known[k + 1].0 <= i {
            k += 1;
        }
        let (li, ll) = known[k];
        let label = if li >= i || k + 1 == known.len() {
            ll
        } else {
            let (ri, rl) = known[k + 1];
            if i - li <= ri - i {
                ll
            } else {
                rl
            }
        };
        out.push(label);
    }
    Ok(out)
}

/// Missing-frame fraction per action category. `labels[i]` labels frame
/// `report.first + i`; `None` entries are filled by [`fill_nearest`].
pub fn per_action_gap_fractions(
    report: &GapReport,
    labels: &[Option<ActionLabel>],
) -> Result<BTreeMap<ActionLabel, GapShare>> {
    if labels.len() as u64 != report.span() {
        return Err(Error::RangeMismatch(format!(
            "{} labels for a span of {} frames",
            labels.len(),
            report.span()
        )));
    }
    let filled = fill_nearest(labels)?;
    let mut out: BTreeMap<ActionLabel, GapShare> = BTreeMap::new();
    let mut seg = report.segments.iter().peekable();
    for (i, &label) in filled.iter().enumerate() {
        let frame = report.first + i as u64;
        while seg.peek().is_some_and(|s| s.1 < frame) {
            seg.next();
        }
        let present = seg.peek().is_some_and(|s| s.0 <= frame);
        let share = out.entry(label).or_insert(GapShare { frames: 0, missing: 0 });
        share.frames += 1;
        if !present {
            share.missing += 1;
        }
    }
    Ok(out)
}
