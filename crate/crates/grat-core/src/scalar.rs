//! Scalar payload types: f32 or f64.

/// Floating-point payload of a [`Tensor`](crate::Tensor).
///
/// Kernels load scalars, accumulate in f64, and cast the result back, so the
/// trait only needs lossless f64 round-trips on top of the `num_traits`
/// float surface.
pub trait Scalar: num_traits::Float + std::fmt::Debug + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self;
    fn into_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn into_f64(self) -> f64 {
        self
    }
}
