//! Per-video annotation document.
//!
//! JSON object with these stable fields:
//!
//! ```text
//! schema_version  integer (currently 1)
//! video_id        string
//! revision        integer, bumped by the service on every accepted write
//! num_frames      integer, frames are 0..num_frames-1
//! longitudinal    [{start_frame, end_frame, label}]     automatic speed labels, partition of the video
//! lateral         [{start_frame, end_frame, action}]    manual turn/lane_change/u_turn/reverse spans
//! category        [{start_frame, end_frame, category}]  fused six-way label, partition of the video
//! events          [{crossing_frame, intersection_type, priority, yield_onset_frame}]
//! ```
//!
//! Span bounds are inclusive.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_file, write_atomic};
use crate::model::{ActionLabel, ContextEvent, LateralAction, Longitudinal};
use crate::segment::fuse_label;

pub const ANNOTATIONS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongitudinalSpan {
    pub start_frame: u64,
    pub end_frame: u64,
    pub label: Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LateralSpan {
    pub start_frame: u64,
    pub end_frame: u64,
    pub action: LateralAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpan {
    pub start_frame: u64,
    pub end_frame: u64,
    pub category: ActionLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotations {
    pub schema_version: u32,
    pub video_id: String,
    #[serde(default)]
    pub revision: u64,
    pub num_frames: u64,
    #[serde(default)]
    pub longitudinal: Vec<LongitudinalSpan>,
    #[serde(default)]
    pub lateral: Vec<LateralSpan>,
    #[serde(default)]
    pub category: Vec<CategorySpan>,
    #[serde(default)]
    pub events: Vec<ContextEvent>,
}

/// Collapses a per-frame sequence into inclusive `(start, end, value)` runs.
pub(crate) fn runs<T: Copy + PartialEq>(per_frame: &[T]) -> Vec<(u64, u64, T)> {
    let mut out: Vec<(u64, u64, T)> = Vec::new();
    for (i, &v) in per_frame.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.2 == v => last.1 = i as u64,
            _ => out.push((i as u64, i as u64, v)),
        }
    }
    out
}

fn check_partition(name: &str, spans: impl Iterator<Item = (u64, u64)>, num_frames: u64) -> Result<()> {
    let mut next = 0u64;
    for (i, (s, e)) in spans.enumerate() {
        if s != next || e < s {
            return Err(Error::RangeMismatch(format!(
                "{name}[{i}] = [{s}, {e}] does not continue the partition at frame {next}"
            )));
        }
        next = e + 1;
    }
    if next != num_frames {
        return Err(Error::RangeMismatch(format!(
            "{name} covers frames up to {next}, video has {num_frames}"
        )));
    }
    Ok(())
}

impl Annotations {
    pub fn new(video_id: impl Into<String>, num_frames: u64) -> Self {
        Annotations {
            schema_version: ANNOTATIONS_SCHEMA_VERSION,
            video_id: video_id.into(),
            revision: 0,
            num_frames,
            longitudinal: Vec::new(),
            lateral: Vec::new(),
            category: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Structural validation: partitions, ranges, non-overlapping lateral spans, event bounds.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != ANNOTATIONS_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.num_frames == 0 {
            return Err(Error::RangeMismatch("num_frames must be > 0".into()));
        }
        if !self.longitudinal.is_empty() {
            check_partition(
                "longitudinal",
                self.longitudinal.iter().map(|s| (s.start_frame, s.end_frame)),
                self.num_frames,
            )?;
        }
        if !self.category.is_empty() {
            check_partition(
                "category",
                self.category.iter().map(|s| (s.start_frame, s.end_frame)),
                self.num_frames,
            )?;
        }
        let mut prev_end: Option<u64> = None;
        for (i, s) in self.lateral.iter().enumerate() {
            if s.end_frame < s.start_frame || s.end_frame >= self.num_frames {
                return Err(Error::RangeMismatch(format!(
                    "lateral[{i}] = [{}, {}] outside video of {} frames",
                    s.start_frame, s.end_frame, self.num_frames
                )));
            }
            if prev_end.is_some_and(|p| s.start_frame <= p) {
                return Err(Error::RangeMismatch(format!(
                    "lateral[{i}] overlaps or precedes the previous span"
                )));
            }
            prev_end = Some(s.end_frame);
        }
        for ev in &self.events {
            ev.validate(self.num_frames)?;
        }
        Ok(())
    }

    pub fn longitudinal_per_frame(&self) -> Option<Vec<Longitudinal>> {
        if self.longitudinal.is_empty() {
            return None;
        }
        let mut out = Vec::with_capacity(self.num_frames as usize);
        for s in &self.longitudinal {
            out.extend(std::iter::repeat_n(s.label, (s.end_frame - s.start_frame + 1) as usize));
        }
        Some(out)
    }

    pub fn lateral_per_frame(&self) -> Vec<Option<LateralAction>> {
        let mut out = vec![None; self.num_frames as usize];
        for s in &self.lateral {
            for f in s.start_frame..=s.end_frame.min(self.num_frames.saturating_sub(1)) {
                out[f as usize] = Some(s.action);
            }
        }
        out
    }

    /// Recomputes `category` from `longitudinal` and `lateral`. Without longitudinal
    /// labels (e.g. manually labeled datasets) the stored categories are kept.
    pub fn refresh_categories(&mut self) {
        let Some(lon) = self.longitudinal_per_frame() else {
            return;
        };
        let lat = self.lateral_per_frame();
        let fused: Vec<ActionLabel> = lon.iter().zip(&lat).map(|(&l, &a)| fuse_label(l, a)).collect();
        self.category = runs(&fused)
            .into_iter()
            .map(|(start_frame, end_frame, category)| CategorySpan {
                start_frame,
                end_frame,
                category,
            })
            .collect();
    }

    pub fn set_longitudinal(&mut self, per_frame: &[Longitudinal]) {
        self.longitudinal = runs(per_frame)
            .into_iter()
            .map(|(start_frame, end_frame, label)| LongitudinalSpan {
                start_frame,
                end_frame,
                label,
            })
            .collect();
    }

    /// Per-frame six-way labels from the `category` partition.
    pub fn frame_labels(&self) -> Result<Vec<ActionLabel>> {
        if self.category.is_empty() {
            return Err(Error::Empty(format!("video {} has no category labels", self.video_id)));
        }
        check_partition(
            "category",
            self.category.iter().map(|s| (s.start_frame, s.end_frame)),
            self.num_frames,
        )?;
        let mut out = Vec::with_capacity(self.num_frames as usize);
        for s in &self.category {
            out.extend(std::iter::repeat_n(s.category, (s.end_frame - s.start_frame + 1) as usize));
        }
        Ok(out)
    }

    /// Canonical serialization: pretty JSON plus trailing newline.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("annotations serialize");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            Error::schema(origin, field, e.into_inner().to_string())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let doc = Self::from_json_bytes(&read_file(path)?, path)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_json_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntersectionType, Priority};

    fn sample() -> Annotations {
        let mut a = Annotations::new("v1", 10);
        let mut lon = vec![Longitudinal::Maintain; 10];
        lon[0] = Longitudinal::Stopped;
        lon[1] = Longitudinal::Stopped;
        lon[6] = Longitudinal::SlowDown;
        lon[7] = Longitudinal::SlowDown;
        a.set_longitudinal(&lon);
        a.lateral.push(LateralSpan {
            start_frame: 4,
            end_frame: 7,
            action: LateralAction::Turn,
        });
        a.events.push(ContextEvent {
            crossing_frame: 8,
            intersection_type: IntersectionType::Unsignalized,
            priority: Some(Priority::Yield),
            yield_onset_frame: Some(3),
        });
        a.refresh_categories();
        a
    }

    #[test]
    fn fused_categories() {
        let a = sample();
        a.validate().unwrap();
        use ActionLabel::*;
        assert_eq!(
            a.frame_labels().unwrap(),
            vec![Stopped, Stopped, Maintain, Maintain, Lateral, Lateral, LatLon, LatLon, Maintain, Maintain]
        );
    }

    #[test]
    fn json_round_trip_with_stable_field_names() {
        let a = sample();
        let bytes = a.to_json_bytes();
        let text = String::from_utf8(bytes.clone()).unwrap();
        for key in ["category", "intersection_type", "priority", "crossing_frame", "yield_onset_frame"] {
            assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
        }
        let back = Annotations::from_json_bytes(&bytes, Path::new("mem")).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json_bytes(), bytes);
    }

    #[test]
    fn validation_catches_gaps_overlaps_and_range() {
        let mut a = sample();
        a.longitudinal[1].start_frame += 1;
        assert!(a.validate().is_err());

        let mut a = sample();
        a.lateral.push(LateralSpan {
            start_frame: 6,
            end_frame: 9,
            action: LateralAction::LaneChange,
        });
        assert!(a.validate().is_err());

        let mut a = sample();
        a.lateral[0].end_frame = 10;
        assert!(a.validate().is_err());

        let mut a = sample();
        a.events[0].crossing_frame = 10;
        assert!(a.validate().is_err());
    }
}
