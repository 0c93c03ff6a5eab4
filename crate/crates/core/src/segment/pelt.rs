//! Pruned exact linear time (PELT) change-point search with an L2 mean-shift cost.
//!
//! Minimizes `sum_k C(segment_k) + penalty * (#segments - 1)` where `C` is the
//! within-segment sum of squared deviations from the segment mean.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

struct PrefixSums<T> {
    s1: Vec<T>,
    s2: Vec<T>,
}

impl<T: Scalar> PrefixSums<T> {
    fn new(x: &[T]) -> Self {
        // Centring keeps the cancellation in `s2 - s1^2 / n` small.
        let mean = x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len());
        let mut s1 = Vec::with_capacity(x.len() + 1);
        let mut s2 = Vec::with_capacity(x.len() + 1);
        s1.push(T::zero());
        s2.push(T::zero());
        for &v in x {
            let c = v - mean;
            s1.push(*s1.last().unwrap() + c);
            s2.push(*s2.last().unwrap() + c * c);
        }
        PrefixSums { s1, s2 }
    }

    /// Cost of the half-open segment `[start, end)`.
    #[inline]
    fn cost(&self, start: usize, end: usize) -> T {
        let n = T::from_usize_lossy(end - start);
        let sum = self.s1[end] - self.s1[start];
        let c = (self.s2[end] - self.s2[start]) - sum * sum / n;
        c.max(T::zero())
    }
}

fn validate<T: Scalar>(series: &[T], penalty: T) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "change-point search needs at least 2 samples, got {}",
            series.len()
        )));
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if !(penalty.is_finite() && penalty > T::zero()) {
        return Err(Error::InvalidParameter(format!("penalty must be > 0, got {penalty}")));
    }
    Ok(())
}

/// Returns change points as the first index of each new segment, strictly increasing and
/// excluding `0` and `len`. Among equal-cost partitions the one with the earliest last
/// change point wins.
pub fn detect_change_points<T: Scalar>(series: &[T], penalty: T) -> Result<Vec<usize>> {
    validate(series, penalty)?;
    let n = series.len();
    let sums = PrefixSums::new(series);
    let mut best = vec![T::zero(); n + 1];
    let mut last_change = vec![0usize; n + 1];
    best[0] = -penalty;
    let mut candidates: Vec<usize> = vec![0];
    let slack_scale = T::epsilon().sqrt();

    for t in 1..=n {
        let mut f_t = T::infinity();
        let mut arg = 0;
        for &s in &candidates {
            let v = best[s] + sums.cost(s, t) + penalty;
            if v < f_t {
                f_t = v;
                arg = s;
            }
        }
        best[t] = f_t;
        last_change[t] = arg;
        // A candidate whose cost already exceeds F(t) can never become optimal later
        // (the L2 cost is superadditive with K = 0). The slack absorbs rounding.
        let slack = slack_scale * (f_t.abs() + penalty);
        candidates.retain(|&s| best[s] + sums.cost(s, t) <= f_t + slack);
        candidates.push(t);
    }

    let mut cps = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last_change[t];
        if s > 0 {
            cps.push(s);
        }
        t = s;
    }
    cps.reverse();
    Ok(cps)
}

/// Objective value of a given partition: segment costs plus `penalty` per change point.
pub fn partition_cost<T: Scalar>(series: &[T], change_points: &[usize], penalty: T) -> T {
    let sums = PrefixSums::new(series);
    let mut bounds = Vec::with_capacity(change_points.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(change_points);
    bounds.push(series.len());
    bounds
        .windows(2)
        .map(|w| sums.cost(w[0], w[1]))
        .sum::<T>()
        + penalty * T::from_usize_lossy(change_points.len())
}
