use nalgebra::{DMatrix, Matrix3};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point pair `src -> dst` in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence<T> {
    pub src: (T, T),
    pub dst: (T, T),
}

impl<T: Scalar> Correspondence<T> {
    pub fn new(src: (T, T), dst: (T, T)) -> Self {
        Self { src, dst }
    }

    pub fn is_finite(&self) -> bool {
        self.src.0.is_finite() && self.src.1.is_finite() && self.dst.0.is_finite() && self.dst.1.is_finite()
    }
}

/// Planar projective transform, stored row-major with canonical scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    h: [[T; 3]; 3],
}

const SCALE_EPS: f64 = 1e-12;

impl<T: Scalar> Homography<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            h: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let mut h = Self::identity();
        h.h[0][2] = tx;
        h.h[1][2] = ty;
        h
    }

    /// Validates invertibility and rescales to `h[2][2] = 1` (or unit Frobenius norm
    /// when `h[2][2]` is numerically zero).
    pub fn from_rows(h: [[T; 3]; 3]) -> Result<Self> {
        if h.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("homography has non-finite entries".into()));
        }
        let m = to_f64(&h);
        let scale = m.norm();
        if scale == 0.0 || (m / scale).determinant().abs() < 1e-15 {
            return Err(Error::Degenerate("homography is singular".into()));
        }
        Ok(Self { h: from_f64(&canonical(m)) })
    }

    pub fn rows(&self) -> [[T; 3]; 3] {
        self.h
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.h[r][c]
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = to_f64(&self.h)
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("homography is singular".into()))?;
        Self::from_rows(from_f64(&inv))
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        Self::from_rows(from_f64(&(to_f64(&self.h) * to_f64(&first.h))))
    }

    pub fn project(&self, p: (T, T)) -> Result<(T, T)> {
        project_point(self, p)
    }

    pub fn cast<U: Scalar>(&self) -> Homography<U> {
        Homography {
            h: self.h.map(|r| r.map(|v| U::lit(v.to_f64_lossy()))),
        }
    }

    /// Euclidean distance between `H·src` and `dst`; infinite when `src` maps to infinity.
    pub fn reprojection_error(&self, c: &Correspondence<T>) -> T {
        match self.project(c.src) {
            Ok((x, y)) => (x - c.dst.0).hypot(y - c.dst.1),
            Err(_) => T::infinity(),
        }
    }
}

fn canonical(m: Matrix3<f64>) -> Matrix3<f64> {
    if m[(2, 2)].abs() > SCALE_EPS {
        m / m[(2, 2)]
    } else {
        m / m.norm()
    }
}

fn to_f64<T: Scalar>(h: &[[T; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| h[r][c].to_f64_lossy())
}

fn from_f64<T: Scalar>(m: &Matrix3<f64>) -> [[T; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| T::lit(m[(r, c)])))
}

/// Maps `p` through `h` with perspective division.
pub fn project_point<T: Scalar>(h: &Homography<T>, p: (T, T)) -> Result<(T, T)> {
    let m = &h.h;
    let x = m[0][0] * p.0 + m[0][1] * p.1 + m[0][2];
    let y = m[1][0] * p.0 + m[1][1] * p.1 + m[1][2];
    let w = m[2][0] * p.0 + m[2][1] * p.1 + m[2][2];
    if !(w.abs() >= T::lit(SCALE_EPS)) {
        return Err(Error::PointAtInfinity { w: w.to_f64_lossy() });
    }
    Ok((x / w, y / w))
}

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
fn normalizer(points: &[(f64, f64)]) -> Result<Matrix3<f64>> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
    if !(mean_dist > 0.0) || !mean_dist.is_finite() {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn apply(t: &Matrix3<f64>, p: (f64, f64)) -> (f64, f64) {
    (t[(0, 0)] * p.0 + t[(0, 2)], t[(1, 1)] * p.1 + t[(1, 2)])
}

fn has_collinear_triple(points: &[(f64, f64)]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                if area.abs() < 1e-9 {
                    return true;
                }
            }
        }
    }
    false
}

/// Normalized direct linear transform.
///
/// Solves `A h = 0` in Hartley-normalized coordinates by SVD and undoes the
/// normalization. Four-point inputs with three collinear points, and inputs whose
/// design matrix has a null space of dimension above one, are rejected.
pub fn estimate_homography_dlt<T: Scalar>(corrs: &[Correspondence<T>]) -> Result<Homography<T>> {
    let n = corrs.len();
    if n < 4 {
        return Err(Error::TooFewCorrespondences { got: n, need: 4 });
    }
    if let Some(i) = corrs.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let src: Vec<(f64, f64)> = corrs.iter().map(|c| (c.src.0.to_f64_lossy(), c.src.1.to_f64_lossy())).collect();
    let dst: Vec<(f64, f64)> = corrs.iter().map(|c| (c.dst.0.to_f64_lossy(), c.dst.1.to_f64_lossy())).collect();
    let ts = normalizer(&src)?;
    let td = normalizer(&dst)?;
    let src_n: Vec<_> = src.iter().map(|&p| apply(&ts, p)).collect();
    let dst_n: Vec<_> = dst.iter().map(|&p| apply(&td, p)).collect();
    if n == 4 && (has_collinear_triple(&src_n) || has_collinear_triple(&dst_n)) {
        return Err(Error::Degenerate("three of four points are collinear".into()));
    }

    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (&(x, y), &(u, v))) in src_n.iter().zip(&dst_n).enumerate() {
        let (r0, r1) = (2 * i, 2 * i + 1);
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let rank = sv.iter().filter(|&&s| s > 1e-10 * sv[0]).count();
    if rank < 8 {
        return Err(Error::Degenerate(format!("design matrix rank {rank} < 8")));
    }
    let h = v_t.row(8);
    let hn = Matrix3::from_fn(|r, c| h[3 * r + c]);
    let td_inv = td
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("normalization is singular".into()))?;
    Homography::from_rows(from_f64(&(td_inv * hn * ts)))
}

/// Result of [`estimate_homography_robust`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobustEstimate<T> {
    pub homography: Homography<T>,
    pub inliers: Vec<bool>,
}

impl<T> RobustEstimate<T> {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

fn consensus<T: Scalar>(h: &Homography<T>, corrs: &[Correspondence<T>], threshold: T) -> Vec<bool> {
    corrs.iter().map(|c| h.reprojection_error(c) <= threshold).collect()
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// RANSAC over minimal four-point DLT fits followed by a refit on the consensus set.
///
/// Stops early once the adaptive trial count for 99.9% confidence is reached.
/// Deterministic for a given `seed`.
pub fn estimate_homography_robust<T: Scalar>(
    corrs: &[Correspondence<T>],
    inlier_threshold: T,
    max_iters: usize,
    seed: u64,
) -> Result<RobustEstimate<T>> {
    let n = corrs.len();
    if n < 4 {
        return Err(Error::TooFewCorrespondences { got: n, need: 4 });
    }
    if !(inlier_threshold > T::zero()) || max_iters == 0 {
        return Err(Error::InvalidParameter(
            "inlier threshold must be positive and max_iters non-zero".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Homography<T>, Vec<bool>, usize)> = None;
    let mut needed = max_iters;
    let mut iter = 0;
    while iter < needed.min(max_iters) {
        iter += 1;
        let idx = index::sample(&mut rng, n, 4);
        let sample: Vec<Correspondence<T>> = idx.iter().map(|i| corrs[i]).collect();
        let Ok(h) = estimate_homography_dlt(&sample) else {
            continue;
        };
        let mask = consensus(&h, corrs, inlier_threshold);
        let c = count(&mask);
        if c >= 4 && best.as_ref().is_none_or(|b| c > b.2) {
            let w = c as f64 / n as f64;
            let p_fail = 1.0 - w.powi(4);
            needed = if p_fail <= f64::EPSILON {
                iter
            } else {
                ((1.0f64 - 0.999).ln() / p_fail.ln()).ceil() as usize
            };
            best = Some((h, mask, c));
        }
    }
    let (h, mask, c) = best.ok_or(Error::NoConsensus { need: 4 })?;
    let inlier_set: Vec<Correspondence<T>> =
        corrs.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| *c).collect();
    if let Ok(refit) = estimate_homography_dlt(&inlier_set) {
        let refit_mask = consensus(&refit, corrs, inlier_threshold);
        if count(&refit_mask) >= c {
            return Ok(RobustEstimate {
                homography: refit,
                inliers: refit_mask,
            });
        }
    }
    Ok(RobustEstimate {
        homography: h,
        inliers: mask,
    })
}
