//! Dense saliency maps.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Non-negative per-pixel field over the scene image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> SaliencyMap<T> {
    /// Builds a map, rejecting zero sizes, length mismatches and negative or non-finite values.
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MapFormat(format!("zero-size map {width}x{height}")));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::MapFormat(format!("size overflow {width}x{height}")))?;
        if values.len() != expected {
            return Err(Error::MapFormat(format!(
                "expected {expected} values for {width}x{height}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::MapFormat(format!(
                "value at index {i} is negative or non-finite"
            )));
        }
        Ok(SaliencyMap {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![T::zero(); width * height])
    }

    /// Map from a per-pixel function of `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    // Internal constructor for values already known to satisfy the invariants.
    pub(crate) fn from_parts(width: usize, height: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        SaliencyMap {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Position of the first maximum as `(x, y)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    /// Rescaled to sum 1. An all-zero map cannot be normalized.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.sum();
        if !(total > T::zero()) {
            return Err(Error::ZeroMass("cannot normalize an all-zero map".into()));
        }
        Ok(self.map_values(|v| v / total))
    }

    /// Rescaled so the maximum is 1.
    pub fn normalized_max(&self) -> Result<Self> {
        let peak = self.max();
        if !(peak > T::zero()) {
            return Err(Error::ZeroMass("cannot max-normalize an all-zero map".into()));
        }
        Ok(self.map_values(|v| v / peak))
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        SaliencyMap::from_parts(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Converts the scalar type.
    pub fn cast<U: Scalar>(&self) -> SaliencyMap<U> {
        SaliencyMap::from_parts(
            self.width,
            self.height,
            self.values.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        )
    }

    pub(crate) fn check_same_dims<U>(&self, other: &SaliencyMap<U>) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: (other.width, other.height),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(SaliencyMap::<f64>::new(0, 3, vec![]).is_err());
        assert!(SaliencyMap::new(2, 2, vec![1.0f64; 3]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![1.0f64, -0.5]).is_err());
        assert!(SaliencyMap::new(1, 2, vec![1.0f64, f64::NAN]).is_err());
    }

    #[test]
    fn normalization_conventions() {
        let m = SaliencyMap::new(2, 2, vec![0.0f64, 1.0, 2.0, 5.0]).unwrap();
        let n = m.normalized().unwrap();
        assert!((n.sum() - 1.0).abs() < 1e-12);
        assert_eq!(m.normalized_max().unwrap().max(), 1.0);
        assert_eq!(m.argmax(), (1, 1));
        let z = SaliencyMap::<f32>::zeros(3, 3).unwrap();
        assert!(matches!(z.normalized(), Err(Error::ZeroMass(_))));
    }
}
