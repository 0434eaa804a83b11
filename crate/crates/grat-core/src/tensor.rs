//! Row-major dense tensors.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape plus a row-major payload. Q, K, V, attention outputs, and attention
/// matrices are all carried as rank-2 tensors `[N, d]` or `[N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S = f32> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    /// Builds a tensor, checking that the payload length matches the shape.
    pub fn from_vec(shape: Vec<usize>, data: Vec<S>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::RankZero);
        }
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::OverflowDims)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "payload has {} elements, shape {:?} needs {}",
                data.len(),
                shape,
                len
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::OverflowDims)?;
        Self::from_vec(shape, vec![S::zero(); len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// Extent of the leading axis.
    pub fn leading(&self) -> usize {
        self.shape[0]
    }

    /// Product of all trailing extents (the per-row payload length).
    pub fn row_width(&self) -> usize {
        self.shape[1..].iter().product::<usize>()
    }

    /// Row `i` of the leading axis.
    pub fn row(&self, i: usize) -> &[S] {
        let w = self.row_width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest elementwise |a - b| against another tensor of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch in comparison");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.into_f64() - b.into_f64()).abs())
            .fold(0.0, f64::max)
    }
}
