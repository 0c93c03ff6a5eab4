use crate::error::{Error, Result};
use crate::model::TelemetrySample;
use crate::scalar::median;

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryGap {
    pub start_frame: u64,
    pub end_frame: u64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryReport {
    /// Median of the per-interval rates, in Hz.
    pub rate_estimate: f64,
    /// Estimated from a single interval.
    pub low_confidence: bool,
    pub gaps: Vec<TelemetryGap>,
}

/// Estimates the sampling rate and flags intervals longer than twice the declared period.
pub fn validate_telemetry(samples: &[TelemetrySample], declared_rate: f64) -> Result<TelemetryReport> {
    if samples.len() < 2 {
        return Err(Error::Empty("telemetry needs at least two samples".into()));
    }
    if !(declared_rate > 0.0) {
        return Err(Error::InvalidParameter("declared rate must be positive".into()));
    }
    let mut rates = Vec::with_capacity(samples.len() - 1);
    let mut gaps = Vec::new();
    for w in samples.windows(2) {
        let dt = w[1].t_sec - w[0].t_sec;
        if !(dt > 0.0) {
            return Err(Error::Unsorted(format!(
                "telemetry time does not increase at frame {}",
                w[1].frame
            )));
        }
        rates.push(1.0 / dt);
        if dt > 2.0 / declared_rate {
            gaps.push(TelemetryGap {
                start_frame: w[0].frame,
                end_frame: w[1].frame,
                duration_s: dt,
            });
        }
    }
    Ok(TelemetryReport {
        rate_estimate: median(&rates).expect("at least one interval"),
        low_confidence: rates.len() == 1,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(frame: u64, t: f64) -> TelemetrySample {
        TelemetrySample {
            frame,
            t_sec: t,
            speed_kmh: 0.0,
            lat: f64::NAN,
            lon: f64::NAN,
            heading_deg: f64::NAN,
        }
    }

    #[test]
    fn uniform_25hz() {
        let v: Vec<_> = (0..250).map(|i| s(i, i as f64 / 25.0)).collect();
        let r = validate_telemetry(&v, 25.0).unwrap();
        assert!((r.rate_estimate - 25.0).abs() < 1e-9);
        assert!(r.gaps.is_empty());
        assert!(!r.low_confidence);
    }

    #[test]
    fn one_minute_hole() {
        let mut v: Vec<_> = (0..=100).map(|i| s(i, i as f64)).collect();
        v.extend((160..200).map(|i| s(i, i as f64)));
        let r = validate_telemetry(&v, 1.0).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert_eq!(r.gaps[0].duration_s, 60.0);
        assert_eq!((r.gaps[0].start_frame, r.gaps[0].end_frame), (100, 160));
    }

    #[test]
    fn boundaries() {
        let r = validate_telemetry(&[s(0, 0.0), s(1, 0.5)], 2.0).unwrap();
        assert!(r.low_confidence);
        assert_eq!(r.rate_estimate, 2.0);
        assert!(validate_telemetry(&[s(0, 0.0)], 2.0).is_err());
        assert!(validate_telemetry(&[s(0, 1.0), s(1, 1.0)], 2.0).is_err());
    }
}
