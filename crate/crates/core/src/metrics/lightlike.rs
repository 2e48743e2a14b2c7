//! The Lorentzian metric for which Thurston's `X` is lightlike and geodesic.
//!
//! In the frame `(X, ∂u, V1, V2, 2∂t + ∂z)` the Gram matrix pairs `X` with
//! `∂u` and is a fixed symmetric block on the last three fields.

use nalgebra::DMatrix;

use crate::error::{GeoError, Result};
use crate::frame::{frame_to_coord, FrameMetric, MetricField};
use crate::scalar::Scalar;
use crate::thurston::{ThurstonField, DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct LightlikeModel {
    /// Gram block on `(V1, V2, 2∂t + ∂z)`; the identity by default.
    pub block: [[f64; 3]; 3],
}

impl Default for LightlikeModel {
    fn default() -> Self {
        Self {
            block: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }
}

impl LightlikeModel {
    /// Uses a custom symmetric, non-degenerate block.
    pub fn with_block(block: [[f64; 3]; 3]) -> Result<Self> {
        let m = crate::Matrix::from_fn(3, 3, |i, j| block[i][j]);
        let asym = crate::linalg::max_asymmetry(&m);
        if asym > 0.0 {
            return Err(GeoError::NonSymmetric { asym });
        }
        if crate::linalg::rcond(&m) < 1e-12 {
            return Err(GeoError::Construction(
                "lightlike block is degenerate".into(),
            ));
        }
        Ok(Self { block })
    }
}

impl MetricField for LightlikeModel {
    fn dim(&self) -> usize {
        DIM
    }
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        frame_to_coord(self, p)
    }
}

impl FrameMetric for LightlikeModel {
    type Field = ThurstonField;

    fn frame(&self, _p: &[f64]) -> Vec<ThurstonField> {
        use ThurstonField::*;
        vec![X, Du, V1, V2, Null]
    }

    fn gram<T: Scalar>(&self, _p: &[T]) -> DMatrix<T> {
        let mut g = DMatrix::from_element(DIM, DIM, T::zero());
        g[(0, 1)] = T::one();
        g[(1, 0)] = T::one();
        for i in 0..3 {
            for j in 0..3 {
                g[(2 + i, 2 + j)] = T::lit(self.block[i][j]);
            }
        }
        g
    }
}
