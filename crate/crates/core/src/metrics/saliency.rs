use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::map::SaliencyMap;
use crate::scalar::Scalar;

/// Guard added to the prediction and inside the logarithm of KLD.
pub const KLD_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Kld,
    Cc,
    Sim,
    Nss,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Kld, Metric::Cc, Metric::Sim, Metric::Nss];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Kld => "kld",
            Metric::Cc => "cc",
            Metric::Sim => "sim",
            Metric::Nss => "nss",
        }
    }

    pub fn lower_is_better(self) -> bool {
        self == Metric::Kld
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub metric: Metric,
    pub value: f64,
    /// Set when the value is a convention rather than a measurement (constant prediction).
    pub degenerate: bool,
}

impl MetricValue {
    fn new(metric: Metric, value: f64) -> Self {
        MetricValue {
            metric,
            value,
            degenerate: false,
        }
    }
}

fn mass<T: Scalar>(m: &SaliencyMap<T>, what: &str) -> Result<f64> {
    let s: f64 = m.values().iter().map(|v| v.to_f64_lossy()).sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ZeroMass(format!("{what} map has no mass")));
    }
    Ok(s)
}

/// `KL(gt ‖ pred) = Σ q·ln(q/(p+ε) + ε)` over sum-normalized maps.
///
/// The ε terms make `kld(p, p)` slightly negative, bounded in magnitude by `len · ε`.
pub fn kld<T: Scalar>(pred: &SaliencyMap<T>, gt: &SaliencyMap<T>, eps: f64) -> Result<MetricValue> {
    pred.check_same_dims(gt)?;
    let sq = mass(gt, "ground-truth")?;
    let sp = mass(pred, "prediction")?;
    let v = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(&p, &q)| {
            let p = p.to_f64_lossy() / sp;
            let q = q.to_f64_lossy() / sq;
            q * (q / (p + eps) + eps).ln()
        })
        .sum();
    Ok(MetricValue::new(Metric::Kld, v))
}

fn moments<T: Scalar>(m: &SaliencyMap<T>) -> (f64, f64) {
    let n = m.len() as f64;
    let mean = m.values().iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
    let var = m.values().iter().map(|v| (v.to_f64_lossy() - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Pearson correlation of the flattened maps; undefined for a constant map.
pub fn cc<T: Scalar>(pred: &SaliencyMap<T>, gt: &SaliencyMap<T>) -> Result<MetricValue> {
    pred.check_same_dims(gt)?;
    let (mp, sp) = moments(pred);
    let (mq, sq) = moments(gt);
    if !(sp > 0.0) || !(sq > 0.0) {
        return Err(Error::UndefinedMetric("CC of a constant map".into()));
    }
    let n = pred.len() as f64;
    let cov = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(&p, &q)| (p.to_f64_lossy() - mp) * (q.to_f64_lossy() - mq))
        .sum::<f64>()
        / n;
    Ok(MetricValue::new(Metric::Cc, (cov / (sp * sq)).clamp(-1.0, 1.0)))
}

/// Histogram intersection of the sum-normalized maps.
pub fn sim<T: Scalar>(pred: &SaliencyMap<T>, gt: &SaliencyMap<T>) -> Result<MetricValue> {
    pred.check_same_dims(gt)?;
    let sp = mass(pred, "prediction")?;
    let sq = mass(gt, "ground-truth")?;
    let v = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(&p, &q)| (p.to_f64_lossy() / sp).min(q.to_f64_lossy() / sq))
        .sum::<f64>();
    Ok(MetricValue::new(Metric::Sim, v.min(1.0)))
}

/// Mean z-score of the prediction at the fixation pixels. A constant prediction
/// yields 0 flagged as degenerate.
pub fn nss<T: Scalar>(pred: &SaliencyMap<T>, fixations: &[(usize, usize)]) -> Result<MetricValue> {
    if fixations.is_empty() {
        return Err(Error::Empty("no fixation pixels".into()));
    }
    let (w, h) = pred.dims();
    if let Some(&(x, y)) = fixations.iter().find(|&&(x, y)| x >= w || y >= h) {
        return Err(Error::OffFrame {
            x: x as f64,
            y: y as f64,
            width: w,
            height: h,
        });
    }
    let (mean, sd) = moments(pred);
    if !(sd > 0.0) {
        return Ok(MetricValue {
            metric: Metric::Nss,
            value: 0.0,
            degenerate: true,
        });
    }
    let total: f64 = fixations
        .iter()
        .map(|&(x, y)| (pred.get(x, y).to_f64_lossy() - mean) / sd)
        .sum();
    Ok(MetricValue::new(Metric::Nss, total / fixations.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(w: usize, h: usize, v: &[f64]) -> SaliencyMap<f64> {
        SaliencyMap::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn kld_closed_forms() {
        let q = m(2, 1, &[1.0, 0.0]);
        let p = m(2, 1, &[0.5, 0.5]);
        let v = kld(&p, &q, KLD_EPS).unwrap().value;
        assert!((v - 2f64.ln()).abs() < 1e-6);
        let n = 64;
        let mut point = vec![0.0; n];
        point[5] = 3.0;
        let v = kld(&m(8, 8, &vec![1.0; n]), &m(8, 8, &point), KLD_EPS).unwrap().value;
        assert!((v - (n as f64).ln()).abs() < 1e-4);
        assert!(kld(&p, &m(2, 1, &[0.0, 0.0]), KLD_EPS).is_err());
        assert!(matches!(kld(&p, &m(1, 2, &[1.0, 0.0]), KLD_EPS), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn identical_maps() {
        let p = m(3, 1, &[0.2, 0.5, 0.3]);
        assert!(kld(&p, &p, KLD_EPS).unwrap().value.abs() < 1e-6);
        assert!((cc(&p, &p).unwrap().value - 1.0).abs() < 1e-12);
        assert!((sim(&p, &p).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cc_affine_and_constant() {
        let g = m(3, 1, &[0.1, 0.7, 0.2]);
        let p = g.map_values(|v| 3.0 * v + 2.0);
        assert!((cc(&p, &g).unwrap().value - 1.0).abs() < 1e-12);
        assert!(matches!(cc(&m(3, 1, &[1.0; 3]), &g), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn sim_cases() {
        let p = m(2, 1, &[0.7, 0.3]);
        let q = m(2, 1, &[0.4, 0.6]);
        assert!((sim(&p, &q).unwrap().value - 0.7).abs() < 1e-12);
        let a = m(2, 1, &[1.0, 0.0]);
        let b = m(2, 1, &[0.0, 2.0]);
        assert_eq!(sim(&a, &b).unwrap().value, 0.0);
    }

    #[test]
    fn nss_cases() {
        let u = m(2, 2, &[1.0; 4]);
        let v = nss(&u, &[(0, 0)]).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.degenerate);
        let p = m(2, 2, &[0.0, 0.0, 0.0, 4.0]);
        // mean 1, population sd sqrt(3)
        let v = nss(&p, &[(1, 1)]).unwrap();
        assert!((v.value - 3.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(!v.degenerate);
        assert!(nss(&p, &[]).is_err());
        assert!(nss(&p, &[(2, 0)]).is_err());
    }

    #[test]
    fn metric_names() {
        assert_eq!("KLD".parse::<Metric>().unwrap(), Metric::Kld);
        assert!("auc".parse::<Metric>().is_err());
    }
}
