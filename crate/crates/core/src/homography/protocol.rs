use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::estimate::{estimate_homography_dlt, Correspondence, Homography};
use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

/// Driver-view/scene-view frame pair with matched features and reference fixations.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair<T> {
    pub id: String,
    pub correspondences: Vec<Correspondence<T>>,
    /// Fixation location in the driver view (`src`) and the scene view (`dst`).
    pub references: Vec<Correspondence<T>>,
}

/// Correspondences from a frame at `offset` to its key frame, plus a probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample<T> {
    pub key_id: String,
    pub offset: i32,
    pub correspondences: Vec<Correspondence<T>>,
    pub probe: (T, T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub runs: usize,
    /// Pairs drawn per video when more are supplied.
    pub pairs_per_video: usize,
    pub subset_fraction: f64,
    pub min_subset: usize,
    /// Scene frame width used for eccentricity binning.
    pub scene_width: f64,
    pub eccentricity_bins: usize,
    /// Temporal window half-width in frames.
    pub half_window: i32,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            runs: 10,
            pairs_per_video: 1000,
            subset_fraction: 0.5,
            min_subset: 8,
            scene_width: 1920.0,
            eccentricity_bins: 5,
            half_window: 12,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.pairs_per_video == 0 || self.eccentricity_bins == 0 {
            return Err(Error::InvalidParameter(
                "runs, pairs and eccentricity bins must be positive".into(),
            ));
        }
        if !(self.subset_fraction > 0.0 && self.subset_fraction <= 1.0) {
            return Err(Error::InvalidParameter("subset fraction must be in (0, 1]".into()));
        }
        if !(self.scene_width > 0.0) || self.half_window < 0 {
            return Err(Error::InvalidParameter(
                "scene width must be positive and half window non-negative".into(),
            ));
        }
        Ok(())
    }

    fn subset_size(&self, n: usize) -> usize {
        ((n as f64 * self.subset_fraction).ceil() as usize)
            .max(self.min_subset)
            .max(4)
            .min(n)
    }

    fn eccentricity_bin(&self, x: f64) -> usize {
        let half = self.scene_width / 2.0;
        let e = ((x - half).abs() / half).max(0.0);
        ((e * self.eccentricity_bins as f64).floor() as usize).min(self.eccentricity_bins - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinSummary {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSummary {
    pub offset: i32,
    pub count: usize,
    pub median: f64,
}

/// Projection-error summary in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub errors: Vec<f64>,
    pub median: f64,
    pub outlier_fraction_gt100: f64,
    pub outlier_fraction_gt200: f64,
    pub eccentricity: Vec<BinSummary>,
    pub per_offset: Vec<OffsetSummary>,
}

impl ErrorReport {
    fn build(samples: &[(f64, usize)], cfg: &ProtocolConfig) -> Result<Self> {
        let errors: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let median = median(&errors).ok_or_else(|| Error::Empty("no projection errors".into()))?;
        let n = errors.len() as f64;
        let frac = |t: f64| errors.iter().filter(|&&e| e > t).count() as f64 / n;
        let width = 1.0 / cfg.eccentricity_bins as f64;
        let eccentricity = (0..cfg.eccentricity_bins)
            .map(|b| {
                let in_bin: Vec<f64> = samples.iter().filter(|s| s.1 == b).map(|s| s.0).collect();
                BinSummary {
                    lo: b as f64 * width,
                    hi: (b + 1) as f64 * width,
                    count: in_bin.len(),
                    median: crate::scalar::median(&in_bin),
                }
            })
            .collect();
        Ok(Self {
            median,
            outlier_fraction_gt100: frac(100.0),
            outlier_fraction_gt200: frac(200.0),
            errors,
            eccentricity,
            per_offset: Vec::new(),
        })
    }

    /// CSV with header `kind,key,count,median,gt100,gt200`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,key,count,median,gt100,gt200\n");
        out.push_str(&format!(
            "overall,all,{},{},{},{}\n",
            self.errors.len(),
            self.median,
            self.outlier_fraction_gt100,
            self.outlier_fraction_gt200
        ));
        for b in &self.eccentricity {
            let m = b.median.map(|m| m.to_string()).unwrap_or_default();
            out.push_str(&format!("eccentricity,{:.1}-{:.1},{},{},,\n", b.lo, b.hi, b.count, m));
        }
        for o in &self.per_offset {
            out.push_str(&format!("offset,{},{},{},,\n", o.offset, o.count, o.median));
        }
        out
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const MAX_DRAWS: usize = 64;

/// Fits a homography on a random subset, redrawing degenerate subsets.
fn subset_fit<T: Scalar>(
    corrs: &[Correspondence<T>],
    k: usize,
    rng: &mut ChaCha8Rng,
    id: &str,
) -> Result<Homography<T>> {
    let mut last = None;
    for _ in 0..MAX_DRAWS {
        let subset: Vec<_> = index::sample(rng, corrs.len(), k).iter().map(|i| corrs[i]).collect();
        match estimate_homography_dlt(&subset) {
            Ok(h) => return Ok(h),
            Err(e) => last = Some(e),
        }
        if k == corrs.len() {
            break;
        }
    }
    Err(Error::Degenerate(format!(
        "{id}: no non-degenerate subset ({})",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Driver-to-scene protocol: each pair is re-estimated `runs` times from random
/// correspondence subsets and every reference fixation is projected and compared to
/// its scene-view location.
pub fn sd_error_protocol<T: Scalar>(pairs: &[FramePair<T>], cfg: &ProtocolConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Empty("no frame pairs".into()));
    }
    for p in pairs {
        if p.references.is_empty() {
            return Err(Error::MissingReference(p.id.clone()));
        }
        if p.correspondences.len() < 4 {
            return Err(Error::TooFewCorrespondences {
                got: p.correspondences.len(),
                need: 4,
            });
        }
    }
    let chosen: Vec<usize> = if pairs.len() > cfg.pairs_per_video {
        let mut rng = rng_for(cfg.seed, u64::MAX);
        let mut idx = index::sample(&mut rng, pairs.len(), cfg.pairs_per_video).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..pairs.len()).collect()
    };
    let per_pair: Vec<Result<Vec<(f64, usize)>>> = chosen
        .par_iter()
        .map(|&i| {
            let pair = &pairs[i];
            let mut rng = rng_for(cfg.seed, i as u64);
            let k = cfg.subset_size(pair.correspondences.len());
            let mut out = Vec::with_capacity(cfg.runs * pair.references.len());
            for _ in 0..cfg.runs {
                let h = subset_fit(&pair.correspondences, k, &mut rng, &pair.id)?;
                for r in &pair.references {
                    let e = h.reprojection_error(r).to_f64_lossy();
                    out.push((e, cfg.eccentricity_bin(r.dst.0.to_f64_lossy())));
                }
            }
            Ok(out)
        })
        .collect();
    let mut samples = Vec::new();
    for r in per_pair {
        samples.extend(r?);
    }
    ErrorReport::build(&samples, cfg)
}

/// Temporal-window protocol: the probe is projected `runs` times into the key frame;
/// errors are distances to the mean projection. Offset 0 maps by identity.
pub fn temporal_window_error<T: Scalar>(
    samples: &[WindowSample<T>],
    cfg: &ProtocolConfig,
) -> Result<ErrorReport> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("no window samples".into()));
    }
    for s in samples {
        if s.offset.abs() > cfg.half_window {
            return Err(Error::InvalidParameter(format!(
                "{}: offset {} outside ±{}",
                s.key_id, s.offset, cfg.half_window
            )));
        }
        if s.offset != 0 && s.correspondences.len() < 4 {
            return Err(Error::TooFewCorrespondences {
                got: s.correspondences.len(),
                need: 4,
            });
        }
    }
    let per_sample: Vec<Result<Vec<(f64, usize)>>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.offset == 0 {
                let bin = cfg.eccentricity_bin(s.probe.0.to_f64_lossy());
                return Ok(vec![(0.0, bin); cfg.runs]);
            }
            let mut rng = rng_for(cfg.seed, i as u64);
            let k = cfg.subset_size(s.correspondences.len());
            let mut proj = Vec::with_capacity(cfg.runs);
            for _ in 0..cfg.runs {
                let h = subset_fit(&s.correspondences, k, &mut rng, &s.key_id)?;
                let (x, y) = h.project(s.probe)?;
                proj.push((x.to_f64_lossy(), y.to_f64_lossy()));
            }
            let n = proj.len() as f64;
            let mx = proj.iter().map(|p| p.0).sum::<f64>() / n;
            let my = proj.iter().map(|p| p.1).sum::<f64>() / n;
            let bin = cfg.eccentricity_bin(mx);
            Ok(proj.iter().map(|p| ((p.0 - mx).hypot(p.1 - my), bin)).collect())
        })
        .collect();
    let mut all = Vec::new();
    let mut by_offset: std::collections::BTreeMap<i32, Vec<f64>> = Default::default();
    for (s, r) in samples.iter().zip(per_sample) {
        let errs = r?;
        by_offset.entry(s.offset).or_default().extend(errs.iter().map(|e| e.0));
        all.extend(errs);
    }
    let mut report = ErrorReport::build(&all, cfg)?;
    report.per_offset = by_offset
        .into_iter()
        .map(|(offset, errs)| OffsetSummary {
            offset,
            count: errs.len(),
            median: median(&errs).expect("non-empty offset group"),
        })
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, h: &Homography<f64>) -> FramePair<f64> {
        let correspondences = (0..20)
            .map(|i| {
                let p = ((i % 5) as f64 * 300.0 + 40.0, (i / 5) as f64 * 200.0 + 30.0 + (i % 2) as f64 * 11.0);
                Correspondence::new(p, h.project(p).unwrap())
            })
            .collect();
        let r = (700.0, 400.0);
        FramePair {
            id: id.into(),
            correspondences,
            references: vec![Correspondence::new(r, h.project(r).unwrap())],
        }
    }

    #[test]
    fn exact_geometry_gives_zero_error() {
        let h = Homography::from_rows([[1.02, 0.01, 30.0], [0.0, 0.98, -12.0], [1e-5, 0.0, 1.0]]).unwrap();
        let pairs: Vec<_> = (0..5).map(|i| pair(&i.to_string(), &h)).collect();
        let r = sd_error_protocol(&pairs, &ProtocolConfig::default()).unwrap();
        assert_eq!(r.errors.len(), 50);
        assert!(r.median < 1e-6);
        assert_eq!(r.outlier_fraction_gt100, 0.0);
        assert!(r.outlier_fraction_gt200 <= r.outlier_fraction_gt100);
        assert_eq!(r.eccentricity.len(), 5);
        assert_eq!(r.eccentricity.iter().map(|b| b.count).sum::<usize>(), 50);
    }

    #[test]
    fn missing_reference_is_an_error() {
        let mut p = pair("a", &Homography::identity());
        p.references.clear();
        assert!(matches!(
            sd_error_protocol(&[p], &ProtocolConfig::default()),
            Err(Error::MissingReference(id)) if id == "a"
        ));
    }

    #[test]
    fn offset_zero_is_exact() {
        let s = WindowSample {
            key_id: "k".into(),
            offset: 0,
            correspondences: vec![],
            probe: (10.0, 10.0),
        };
        let r = temporal_window_error(&[s], &ProtocolConfig::default()).unwrap();
        assert_eq!(r.per_offset, vec![OffsetSummary { offset: 0, count: 10, median: 0.0 }]);
    }

    #[test]
    fn offset_outside_window_rejected() {
        let s = WindowSample {
            key_id: "k".into(),
            offset: 13,
            correspondences: vec![],
            probe: (10.0, 10.0),
        };
        assert!(temporal_window_error(&[s], &ProtocolConfig::default()).is_err());
    }

    #[test]
    fn eccentricity_binning() {
        let cfg = ProtocolConfig { scene_width: 100.0, ..Default::default() };
        assert_eq!(cfg.eccentricity_bin(50.0), 0);
        assert_eq!(cfg.eccentricity_bin(59.9), 0);
        assert_eq!(cfg.eccentricity_bin(60.0), 1);
        assert_eq!(cfg.eccentricity_bin(0.0), 4);
        assert_eq!(cfg.eccentricity_bin(-500.0), 4);
    }

    #[test]
    fn csv_layout() {
        let h = Homography::identity();
        let r = sd_error_protocol(&[pair("a", &h)], &ProtocolConfig::default()).unwrap();
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "kind,key,count,median,gt100,gt200");
        assert!(lines[1].starts_with("overall,all,10,"));
        assert_eq!(lines.len(), 7);
    }
}
