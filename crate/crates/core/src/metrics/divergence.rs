//! Divergence of a vector field, by the volume form and by the trace of
//! `∇X`. The two paths share nothing beyond the metric.

use crate::connection::covariant_deriv;
use crate::dual::{seed, Dual};
use crate::error::Result;
use crate::frame::{FrameMetric, MetricField, VectorField};
use crate::linalg::{self, Lu};
use crate::Matrix;
use num_traits::Float;

/// `(1/ρ) Σ_i ∂_i(ρ Xⁱ)` with `ρ = √|det g|`, differentiated exactly.
pub fn divergence_volume<M, X>(m: &M, x: &X, p: &[f64]) -> Result<f64>
where
    M: MetricField + ?Sized,
    X: VectorField + ?Sized,
{
    m.domain_check(p)?;
    x.domain_check(p)?;
    let g: Matrix = m.metric(p);
    if linalg::rcond(&g) < linalg::RCOND_FLOOR {
        return Err(crate::GeoError::Singular {
            what: "metric",
            point: p.to_vec(),
            cond: 1.0 / linalg::rcond(&g),
        });
    }
    let n = p.len();
    let rho = Lu::new(&g).det().abs().sqrt();
    let mut dir = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        dir[i] = 1.0;
        let q: Vec<Dual<f64>> = seed(p, &dir);
        dir[i] = 0.0;
        let r = Lu::new(&m.metric(&q)).det().abs().sqrt();
        acc += (r * x.eval(&q)[i]).eps;
    }
    Ok(acc / rho)
}

/// `tr ∇X = Σ_j (F⁻¹ ∇_{E_j} X)_j` over the frame of `m`, via Koszul.
pub fn divergence_trace<M, X>(m: &M, x: &X, p: &[f64]) -> Result<f64>
where
    M: FrameMetric + ?Sized,
    X: VectorField + ?Sized,
{
    let frame = m.frame(p);
    let f: Matrix = m.frame_matrix(p);
    let lu = Lu::new(&f);
    let mut acc = 0.0;
    for (j, e) in frame.iter().enumerate() {
        let d = covariant_deriv(m, e, x, p)?;
        acc += lu.solve(&d)[j];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::CoordFramed;
    use crate::scalar::Scalar;
    use nalgebra::{DMatrix, DVector};

    struct Plane;
    impl MetricField for Plane {
        fn dim(&self) -> usize {
            2
        }
        fn metric<T: Scalar>(&self, _p: &[T]) -> DMatrix<T> {
            DMatrix::identity(2, 2)
        }
    }

    struct Radial;
    impl VectorField for Radial {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T> {
            DVector::from_column_slice(p)
        }
    }

    #[test]
    fn radial_field_has_divergence_two() {
        let p = [0.3, -1.2];
        assert!((divergence_volume(&Plane, &Radial, &p).unwrap() - 2.0).abs() < 1e-14);
        assert!((divergence_trace(&CoordFramed(Plane), &Radial, &p).unwrap() - 2.0).abs() < 1e-12);
    }
}
