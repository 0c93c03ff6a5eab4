//! Data-quality audits: frame gaps, exposure, telemetry validity, gaze composition.

mod exposure;
mod gaps;
mod telemetry;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use exposure::{classify_exposure, classify_image_file, exposure_audit, Exposure, ExposureConfig, ExposureReport};
pub use gaps::{detect_frame_gaps, fill_nearest, per_action_gap_fractions, GapReport, GapShare};
pub use telemetry::{validate_telemetry, TelemetryGap, TelemetryReport};

use crate::error::{Error, Result};
use crate::io::{read_gaze_observers, read_telemetry_csv, Annotations, VideoEntry};
use crate::model::{ActionLabel, GazeEvent, GazeSample};
use crate::salmap::Composition;

/// Per-class fractions of a non-empty gaze stream.
pub fn gaze_composition(samples: &[GazeSample]) -> Result<Composition> {
    if samples.is_empty() {
        return Err(Error::Empty("empty gaze stream".into()));
    }
    Ok(Composition::from_samples(samples))
}

const FRAME_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

/// Frame images in `dir` whose file stem is a frame number.
pub fn list_frame_images(dir: &Path) -> Result<BTreeMap<u64, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| FRAME_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        if let Some(f) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok()) {
            out.insert(f, path);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VideoAudit {
    pub video_id: String,
    pub gaps: Option<GapReport>,
    pub action_gaps: Option<BTreeMap<ActionLabel, GapShare>>,
    pub exposure: Option<ExposureReport>,
    pub telemetry: Option<TelemetryReport>,
    pub gaze: Option<Composition>,
}

/// Runs every audit the video's manifest entry has inputs for.
pub fn audit_video(v: &VideoEntry, exposure_cfg: &ExposureConfig) -> Result<VideoAudit> {
    let mut out = VideoAudit {
        video_id: v.id.clone(),
        ..Default::default()
    };
    if let Some(dir) = &v.frames {
        let frames = list_frame_images(dir)?;
        if !frames.is_empty() {
            let idx: Vec<u64> = frames.keys().copied().collect();
            let gaps = detect_frame_gaps(&idx, v.fps)?;
            if let Some(ann) = &v.annotations {
                if ann.is_file() {
                    let ann = Annotations::read(ann)?;
                    if let Ok(labels) = ann.frame_labels() {
                        let span: Vec<Option<ActionLabel>> =
                            (gaps.first..=gaps.last).map(|f| labels.get(f as usize).copied()).collect();
                        out.action_gaps = per_action_gap_fractions(&gaps, &span).ok();
                    }
                }
            }
            let paths: Vec<PathBuf> = frames.into_values().collect();
            out.exposure = Some(exposure_audit(&paths, exposure_cfg));
            out.gaps = Some(gaps);
        }
    }
    if let Some(p) = &v.telemetry {
        let samples = read_telemetry_csv(p)?;
        out.telemetry = validate_telemetry(&samples, v.fps).ok();
    }
    if let Some(p) = &v.gaze {
        let samples: Vec<GazeSample> = read_gaze_observers(p)?.into_iter().flatten().collect();
        out.gaze = gaze_composition(&samples).ok();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub videos: Vec<VideoAudit>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn frac(num: u64, den: u64) -> Option<String> {
    (den > 0).then(|| format!("{:.6}", num as f64 / den as f64))
}

impl AuditReport {
    pub fn header() -> String {
        let mut cols: Vec<String> = [
            "video_id",
            "span_frames",
            "missing_frames",
            "missing_fraction",
            "segments",
            "mean_segment_length",
            "overexposed",
            "overexposed_fraction",
            "underexposed",
            "underexposed_fraction",
            "undecodable",
            "telemetry_rate_hz",
            "telemetry_low_confidence",
            "telemetry_gaps",
            "gaze_samples",
            "fixation_fraction",
            "in_vehicle_fraction",
            "dropped_gaze_fraction",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend(ActionLabel::REPORTED.iter().map(|a| format!("missing_{}", a.as_str())));
        cols.join(",")
    }

    /// One row per video followed by an `ALL` summary row.
    pub fn to_csv(&self) -> String {
        let mut out = Self::header();
        out.push('\n');
        for v in &self.videos {
            out.push_str(&row(v));
            out.push('\n');
        }
        out.push_str(&row(&self.summary()));
        out.push('\n');
        out
    }

    /// Dataset-level totals; fractions are recomputed from summed counts.
    pub fn summary(&self) -> VideoAudit {
        let mut gaps: Option<GapReport> = None;
        let mut exposure: Option<ExposureReport> = None;
        let mut gaze: Option<Composition> = None;
        let mut action: Option<BTreeMap<ActionLabel, GapShare>> = None;
        let mut tele_gaps = Vec::new();
        let mut any_tele = false;
        for v in &self.videos {
            if let Some(g) = &v.gaps {
                let acc = gaps.get_or_insert(GapReport {
                    first: 0,
                    last: 0,
                    present: 0,
                    segments: Vec::new(),
                    fps: g.fps,
                });
                // Concatenate spans so that span and missing counts add up.
                let offset = if acc.present == 0 && acc.segments.is_empty() { 0 } else { acc.last + 1 };
                acc.segments
                    .extend(g.segments.iter().map(|s| (s.0 - g.first + offset, s.1 - g.first + offset)));
                acc.last = offset + g.span() - 1;
                acc.present += g.present;
            }
            if let Some(e) = &v.exposure {
                let acc = exposure.get_or_insert_with(ExposureReport::default);
                acc.frames.extend(e.frames.iter().cloned());
                acc.undecodable.extend(e.undecodable.iter().cloned());
            }
            if let Some(c) = &v.gaze {
                let acc = gaze.get_or_insert_with(Composition::default);
                acc.total += c.total;
                acc.retained += c.retained;
                for (&k, &n) in &c.counts {
                    *acc.counts.entry(k).or_default() += n;
                }
            }
            if let Some(a) = &v.action_gaps {
                let acc = action.get_or_insert_with(BTreeMap::new);
                for (&k, s) in a {
                    let e = acc.entry(k).or_insert(GapShare { frames: 0, missing: 0 });
                    e.frames += s.frames;
                    e.missing += s.missing;
                }
            }
            if let Some(t) = &v.telemetry {
                any_tele = true;
                tele_gaps.extend(t.gaps.iter().cloned());
            }
        }
        VideoAudit {
            video_id: "ALL".into(),
            gaps,
            action_gaps: action,
            exposure,
            telemetry: any_tele.then_some(TelemetryReport {
                rate_estimate: f64::NAN,
                low_confidence: false,
                gaps: tele_gaps,
            }),
            gaze,
        }
    }
}

fn row(v: &VideoAudit) -> String {
    let mut cells = vec![v.video_id.clone()];
    match &v.gaps {
        Some(g) => {
            let lengths = g.segment_lengths();
            cells.extend([
                g.span().to_string(),
                g.missing().to_string(),
                format!("{:.6}", g.missing_fraction()),
                g.segments.len().to_string(),
                format!("{:.3}", lengths.iter().sum::<u64>() as f64 / lengths.len() as f64),
            ]);
        }
        None => cells.extend(std::iter::repeat_n(String::new(), 5)),
    }
    match &v.exposure {
        Some(e) => {
            let n = e.frames.len() as u64;
            let over = e.count(Exposure::Overexposed) as u64;
            let under = e.count(Exposure::Underexposed) as u64;
            cells.extend([
                over.to_string(),
                opt(frac(over, n)),
                under.to_string(),
                opt(frac(under, n)),
                e.undecodable.len().to_string(),
            ]);
        }
        None => cells.extend(std::iter::repeat_n(String::new(), 5)),
    }
    match &v.telemetry {
        Some(t) => cells.extend([
            if t.rate_estimate.is_finite() { format!("{:.3}", t.rate_estimate) } else { String::new() },
            t.low_confidence.to_string(),
            t.gaps.len().to_string(),
        ]),
        None => cells.extend(std::iter::repeat_n(String::new(), 3)),
    }
    match &v.gaze {
        Some(c) => cells.extend([
            c.total.to_string(),
            format!("{:.6}", c.fraction(GazeEvent::Fixation)),
            format!("{:.6}", c.fraction(GazeEvent::InVehicle)),
            format!("{:.6}", 1.0 - c.fraction(GazeEvent::Fixation)),
        ]),
        None => cells.extend(std::iter::repeat_n(String::new(), 4)),
    }
    for a in ActionLabel::REPORTED {
        let share = v.action_gaps.as_ref().and_then(|m| m.get(&a)).and_then(|s| s.fraction());
        cells.push(share.map(|f| format!("{f:.6}")).unwrap_or_default());
    }
    cells.join(",")
}
