use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::report::{stratify, FrameEval, StratifiedReport, Stratum};
use super::saliency::{cc, kld, nss, sim, Metric, KLD_EPS};
use super::windows::build_scenario_windows;
use crate::error::{Error, Result};
use crate::io::{list_map_files, read_gaze_observers, read_saliency_map, Annotations, DatasetManifest, VideoEntry};
use crate::map::SaliencyMap;
use crate::model::{ActionLabel, Fixation, GazeSample};
use crate::salmap::{default_drop_set, filter_gaze};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub metrics: Vec<Metric>,
    pub strata: Vec<Stratum>,
    pub kld_eps: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            strata: vec![Stratum::Action, Stratum::Context],
            kld_eps: KLD_EPS,
        }
    }
}

/// Values of the requested metrics for one frame; undefined values become `None`.
pub fn frame_metrics(
    pred: &SaliencyMap<f64>,
    gt: &SaliencyMap<f64>,
    fixations: &[(usize, usize)],
    metrics: &[Metric],
    eps: f64,
) -> Result<BTreeMap<Metric, Option<f64>>> {
    pred.check_same_dims(gt)?;
    if !(gt.sum() > 0.0) {
        return Err(Error::ZeroMass("ground-truth map has no mass".into()));
    }
    let mut out = BTreeMap::new();
    for &m in metrics {
        let v = match m {
            Metric::Kld => kld(pred, gt, eps),
            Metric::Cc => cc(pred, gt),
            Metric::Sim => sim(pred, gt),
            Metric::Nss => nss(pred, fixations),
        };
        let v = match v {
            Ok(v) if !v.degenerate => Some(v.value),
            Ok(_) | Err(Error::UndefinedMetric(_) | Error::ZeroMass(_)) => None,
            Err(e) => return Err(e),
        };
        out.insert(m, v);
    }
    Ok(out)
}

fn video_dir(override_root: Option<&Path>, from_manifest: Option<&PathBuf>, v: &VideoEntry, what: &str) -> Result<PathBuf> {
    match (override_root, from_manifest) {
        (Some(root), _) => {
            let nested = root.join(&v.id);
            Ok(if nested.is_dir() { nested } else { root.to_path_buf() })
        }
        (None, Some(p)) => Ok(p.clone()),
        (None, None) => Err(Error::MissingReference(format!("{what} directory for video {}", v.id))),
    }
}

/// Fixation pixels per frame from the gaze file, if the video has one.
fn gaze_pixels(v: &VideoEntry) -> Result<BTreeMap<u64, Vec<(usize, usize)>>> {
    let mut out: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    let Some(path) = &v.gaze else {
        return Ok(out);
    };
    let (w, h) = v.image_size();
    let samples: Vec<GazeSample> = read_gaze_observers(path)?.into_iter().flatten().collect();
    let (fix, _) = filter_gaze::<f64>(&samples, &default_drop_set());
    for f in fix {
        if let Some(p) = Fixation::pixel(&f, w, h) {
            out.entry(f.frame).or_default().push(p);
        }
    }
    Ok(out)
}

struct Job {
    video: usize,
    frame: u64,
    action: ActionLabel,
    pred: PathBuf,
    gt: PathBuf,
}

/// Evaluates every ground-truth frame of every video against its prediction and
/// stratifies by action label and scenario window.
///
/// Prediction and ground-truth maps are looked up in `<root>/<video id>/` (or `<root>`
/// itself when that subdirectory does not exist) when a root is given, else in the
/// directories named by the manifest. NSS uses the frame's gaze fixations, falling
/// back to the ground-truth maximum when the frame has none.
pub fn stratified_eval(
    manifest: &DatasetManifest,
    pred_root: Option<&Path>,
    gt_root: Option<&Path>,
    cfg: &EvalConfig,
) -> Result<StratifiedReport> {
    if cfg.metrics.is_empty() {
        return Err(Error::InvalidParameter("no metrics requested".into()));
    }
    let mut jobs = Vec::new();
    let mut missing = Vec::new();
    let mut contexts = Vec::new();
    let mut gaze = Vec::new();
    for (vi, v) in manifest.videos.iter().enumerate() {
        let gt_dir = video_dir(gt_root, v.ground_truth.as_ref(), v, "ground-truth")?;
        let pred_dir = video_dir(pred_root, v.predictions.as_ref(), v, "prediction")?;
        let ann_path = v
            .annotations
            .as_ref()
            .ok_or_else(|| Error::MissingReference(format!("annotations for video {}", v.id)))?;
        let ann = Annotations::read(ann_path)?;
        let labels = ann.frame_labels()?;
        let windows = build_scenario_windows(&v.id, &ann.events, v.fps, ann.num_frames)?;
        contexts.push(windows);
        gaze.push(gaze_pixels(v)?);
        let gts = list_map_files(&gt_dir)?;
        let preds = if pred_dir.is_dir() {
            list_map_files(&pred_dir)?
        } else {
            return Err(Error::MissingFiles(vec![pred_dir]));
        };
        for (&frame, gt) in &gts {
            let action = *labels.get(frame as usize).ok_or_else(|| {
                Error::RangeMismatch(format!(
                    "video {}: ground-truth frame {frame} beyond {} labeled frames",
                    v.id,
                    labels.len()
                ))
            })?;
            if action == ActionLabel::Excluded {
                continue;
            }
            match preds.get(&frame) {
                Some(p) => jobs.push(Job {
                    video: vi,
                    frame,
                    action,
                    pred: p.clone(),
                    gt: gt.clone(),
                }),
                None => missing.push(pred_dir.join(crate::io::map_file_name(frame))),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    let evals: Vec<Result<FrameEval>> = jobs
        .par_iter()
        .map(|j| {
            let v = &manifest.videos[j.video];
            let pred: SaliencyMap<f64> = read_saliency_map(&j.pred)?;
            let gt: SaliencyMap<f64> = read_saliency_map(&j.gt)?;
            let fixations = match gaze[j.video].get(&j.frame) {
                Some(px) if !px.is_empty() => px.clone(),
                _ => vec![gt.argmax()],
            };
            let values = frame_metrics(&pred, &gt, &fixations, &cfg.metrics, cfg.kld_eps).map_err(|e| match e {
                Error::ZeroMass(m) => Error::ZeroMass(format!("{}: {m}", j.gt.display())),
                Error::DimensionMismatch { .. } => {
                    Error::Schema {
                        path: j.pred.clone(),
                        field: "dimensions".into(),
                        message: e.to_string(),
                    }
                }
                other => other,
            })?;
            let ctx = contexts[j.video]
                .iter()
                .filter(|w| w.contains(j.frame))
                .map(|w| (w.priority, w.intersection_type))
                .collect();
            Ok(FrameEval {
                video_id: v.id.clone(),
                frame: j.frame,
                action: j.action,
                contexts: ctx,
                values,
            })
        })
        .collect();
    let evals: Vec<FrameEval> = evals.into_iter().collect::<Result<_>>()?;
    Ok(stratify(&evals, &cfg.metrics, &cfg.strata))
}
