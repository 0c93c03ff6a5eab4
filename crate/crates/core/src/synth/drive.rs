use crate::error::{Error, Result};
use crate::model::{Longitudinal, TelemetrySample, KMH_PER_MS};

/// One piece of a planted speed profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// Constant speed for `frames` frames.
    Hold { frames: usize },
    /// Linear change to `target_ms` over `frames` frames; the first frame of the
    /// ramp already differs from the previous speed.
    Ramp { target_ms: f64, frames: usize },
}

/// Planted speed profile with its per-frame ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDrive {
    pub fps: f64,
    pub speed_ms: Vec<f64>,
    pub truth: Vec<Longitudinal>,
}

/// Builds a profile from `start_ms` and labels each frame: holds are `Maintain`,
/// ramps are `SpeedUp`/`SlowDown` when their slope reaches `accel_threshold` and
/// `Maintain` otherwise, and runs of at least `min_stop_run` frames at or below
/// `stop_threshold_kmh` become `Stopped`.
pub fn planted_drive(
    fps: f64,
    start_ms: f64,
    phases: &[Phase],
    accel_threshold: f64,
    stop_threshold_kmh: f64,
    min_stop_run: usize,
) -> Result<PlantedDrive> {
    let mut v = start_ms;
    let mut speed = Vec::new();
    let mut truth = Vec::new();
    for p in phases {
        match *p {
            Phase::Hold { frames } => {
                speed.extend(std::iter::repeat_n(v, frames));
                truth.extend(std::iter::repeat_n(Longitudinal::Maintain, frames));
            }
            Phase::Ramp { target_ms, frames } => {
                if frames == 0 || target_ms < 0.0 {
                    return Err(Error::InvalidParameter("ramp needs frames and a non-negative target".into()));
                }
                let step = (target_ms - v) / frames as f64;
                let accel = step * fps;
                let label = if accel >= accel_threshold {
                    Longitudinal::SpeedUp
                } else if accel <= -accel_threshold {
                    Longitudinal::SlowDown
                } else {
                    Longitudinal::Maintain
                };
                for k in 1..=frames {
                    speed.push(if k == frames { target_ms } else { v + step * k as f64 });
                    truth.push(label);
                }
                v = target_ms;
            }
        }
    }
    let stop = stop_threshold_kmh / KMH_PER_MS;
    let mut i = 0;
    while i < speed.len() {
        if speed[i] <= stop {
            let j = (i..speed.len()).find(|&k| speed[k] > stop).unwrap_or(speed.len());
            if j - i >= min_stop_run {
                truth[i..j].iter_mut().for_each(|t| *t = Longitudinal::Stopped);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    Ok(PlantedDrive {
        fps,
        speed_ms: speed,
        truth,
    })
}

impl PlantedDrive {
    pub fn len(&self) -> usize {
        self.speed_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speed_ms.is_empty()
    }

    /// Telemetry samples; positions advance north from `origin` at the planted speed.
    pub fn telemetry(&self, origin: (f64, f64)) -> Vec<TelemetrySample> {
        let mut along = 0.0;
        self.speed_ms
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i > 0 {
                    along += v / self.fps;
                }
                let (lat, lon) = north_of(origin, along);
                TelemetrySample {
                    frame: i as u64,
                    t_sec: i as f64 / self.fps,
                    speed_kmh: v * KMH_PER_MS,
                    lat,
                    lon,
                    heading_deg: 0.0,
                }
            })
            .collect()
    }

    /// Distance driven by `frame`, in metres.
    pub fn distance_at(&self, frame: usize) -> f64 {
        self.speed_ms[1..=frame].iter().map(|v| v / self.fps).sum()
    }
}

/// Point `metres` due north of `origin` on the haversine sphere.
pub fn north_of(origin: (f64, f64), metres: f64) -> (f64, f64) {
    (origin.0 + (metres / crate::context::EARTH_RADIUS_M).to_degrees(), origin.1)
}

/// Point `metres` due east of `origin`, to first order.
pub fn east_of(origin: (f64, f64), metres: f64) -> (f64, f64) {
    let r = crate::context::EARTH_RADIUS_M * origin.0.to_radians().cos();
    (origin.0, origin.1 + (metres / r).to_degrees())
}
