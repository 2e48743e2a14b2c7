//! Vector fields, moving frames, Lie brackets and musical isomorphisms.
//!
//! A vector field is a closed-form map from chart coordinates to coordinate
//! components, evaluated generically so the same expression yields values
//! (`f64`) and exact directional derivatives (`Dual`). Hand-written
//! Jacobians are the primary derivative; [`fd_jacobian`] only cross-checks.

use nalgebra::{DMatrix, DVector};

use crate::dual::{seed, Dual};
use crate::error::{GeoError, Result};
use crate::linalg::{self, Lu, Signature};
use crate::scalar::{lift, Scalar};
use crate::{Matrix, Vector};

/// Default floor on `|det F|` for a frame to count as a frame.
pub const FRAME_DET_FLOOR: f64 = 1e-12;

pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Coordinate components at `p`.
    fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T>;

    /// `J[i][j] = ∂_j X^i`. Defaults to forward-mode differentiation.
    fn jacobian(&self, p: &[f64]) -> Matrix {
        dual_jacobian(self, p)
    }

    /// Rejects points where the field is undefined.
    fn domain_check(&self, _p: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Checked evaluation in `f64`.
    fn at(&self, p: &[f64]) -> Result<Vector> {
        if p.len() != self.dim() {
            return Err(GeoError::Dimension {
                expected: self.dim(),
                got: p.len(),
            });
        }
        self.domain_check(p)?;
        Ok(self.eval(p))
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T> {
        (**self).eval(p)
    }
    fn jacobian(&self, p: &[f64]) -> Matrix {
        (**self).jacobian(p)
    }
    fn domain_check(&self, p: &[f64]) -> Result<()> {
        (**self).domain_check(p)
    }
}

/// Jacobian by forward-mode dual numbers, one column per coordinate.
pub fn dual_jacobian<F: VectorField + ?Sized, T: Scalar>(f: &F, p: &[T]) -> DMatrix<T> {
    let n = p.len();
    let mut j = DMatrix::from_element(f.dim(), n, T::zero());
    let mut dir = vec![T::zero(); n];
    for c in 0..n {
        dir[c] = T::one();
        let v = f.eval(&seed(p, &dir));
        for r in 0..f.dim() {
            j[(r, c)] = v[r].eps;
        }
        dir[c] = T::zero();
    }
    j
}

/// Value and derivative of `f` at `p` along `dir`.
pub fn directional<F: VectorField + ?Sized, T: Scalar>(
    f: &F,
    p: &[T],
    dir: &[T],
) -> (DVector<T>, DVector<T>) {
    let v = f.eval(&seed(p, dir));
    (v.map(|d| d.re), v.map(|d| d.eps))
}

/// Central differences with one Richardson step, `h_j = h·(1 + |p_j|)`.
pub fn fd_jacobian<F: VectorField + ?Sized>(f: &F, p: &[f64], h: f64) -> Matrix {
    let n = p.len();
    let mut j = Matrix::zeros(f.dim(), n);
    let mut q = p.to_vec();
    for c in 0..n {
        let hc = h * (1.0 + p[c].abs());
        let mut central = |step: f64| {
            q[c] = p[c] + step;
            let fp: Vector = f.eval(&q);
            q[c] = p[c] - step;
            let fm: Vector = f.eval(&q);
            q[c] = p[c];
            (fp - fm) / (2.0 * step)
        };
        let d1 = central(hc);
        let d2 = central(hc / 2.0);
        j.set_column(c, &((4.0 * d2 - d1) / 3.0));
    }
    j
}

/// `[A,B]^i = A^j ∂_j B^i − B^j ∂_j A^i` from the fields' Jacobians.
pub fn lie_bracket<A: VectorField + ?Sized, B: VectorField + ?Sized>(
    a: &A,
    b: &B,
    p: &[f64],
) -> Result<Vector> {
    if a.dim() != b.dim() {
        return Err(GeoError::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let va = a.at(p)?;
    let vb = b.at(p)?;
    Ok(b.jacobian(p) * va - a.jacobian(p) * vb)
}

/// [`lie_bracket`] together with `|J_B||A| + |J_A||B|` componentwise, the
/// size of the terms that cancel in each component.
pub fn lie_bracket_with_scale<A, B>(a: &A, b: &B, p: &[f64]) -> Result<(Vector, Vector)>
where
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    if a.dim() != b.dim() {
        return Err(GeoError::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (va, vb) = (a.at(p)?, b.at(p)?);
    let (ja, jb) = (a.jacobian(p), b.jacobian(p));
    let scale = jb.abs() * va.abs() + ja.abs() * vb.abs();
    Ok((jb * va - ja * vb, scale))
}

/// The bracket `[A,B]` as a field in its own right, differentiated exactly.
pub struct Bracket<A, B>(pub A, pub B);

impl<A: VectorField, B: VectorField> VectorField for Bracket<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T> {
        let va = self.0.eval(p);
        let vb = self.1.eval(p);
        let (_, db_a) = directional(&self.1, p, va.as_slice());
        let (_, da_b) = directional(&self.0, p, vb.as_slice());
        db_a - da_b
    }

    fn domain_check(&self, p: &[f64]) -> Result<()> {
        self.0.domain_check(p)?;
        self.1.domain_check(p)
    }
}

/// The coordinate field `∂_i` on an `n`-chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coord {
    pub index: usize,
    pub n: usize,
}

impl VectorField for Coord {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval<T: Scalar>(&self, _p: &[T]) -> DVector<T> {
        DVector::from_fn(
            self.n,
            |i, _| if i == self.index { T::one() } else { T::zero() },
        )
    }
    fn jacobian(&self, _p: &[f64]) -> Matrix {
        Matrix::zeros(self.n, self.n)
    }
}

/// A field with constant coordinate components.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant(pub Vec<f64>);

impl VectorField for Constant {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn eval<T: Scalar>(&self, _p: &[T]) -> DVector<T> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&v| T::lit(v)))
    }
    fn jacobian(&self, _p: &[f64]) -> Matrix {
        Matrix::zeros(self.0.len(), self.0.len())
    }
}

/// A metric given by its coordinate matrix.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    /// Coordinate-basis matrix `g_ij(p)`.
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T>;

    fn domain_check(&self, _p: &[f64]) -> Result<()> {
        Ok(())
    }

    /// `g(v,w)` in coordinates.
    fn inner(&self, p: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let g: Matrix = self.metric(p);
        let v = Vector::from_column_slice(v);
        let w = Vector::from_column_slice(w);
        v.dot(&(g * w))
    }

    /// Coordinate partial derivatives `∂_k g_ij`, one matrix per `k`.
    fn metric_partials(&self, p: &[f64]) -> Vec<Matrix> {
        let n = p.len();
        let mut dir = vec![0.0; n];
        (0..n)
            .map(|k| {
                dir[k] = 1.0;
                let g: DMatrix<Dual<f64>> = self.metric(&seed(p, &dir));
                dir[k] = 0.0;
                g.map(|d| d.eps)
            })
            .collect()
    }
}

/// The Euclidean metric on an `n`-chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Euclidean(pub usize);

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn metric<T: Scalar>(&self, _p: &[T]) -> DMatrix<T> {
        DMatrix::identity(self.0, self.0)
    }
}

impl<M: MetricField + ?Sized> MetricField for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        (**self).metric(p)
    }
    fn domain_check(&self, p: &[f64]) -> Result<()> {
        (**self).domain_check(p)
    }
}

/// A metric given by its Gram matrix in a moving frame.
pub trait FrameMetric: MetricField {
    type Field: VectorField;

    /// Frame fields active at `p` (models with several patches pick by `p`).
    fn frame(&self, p: &[f64]) -> Vec<Self::Field>;

    /// Gram matrix `G_ij = g(E_i, E_j)`.
    fn gram<T: Scalar>(&self, p: &[T]) -> DMatrix<T>;

    /// Column `j` holds the coordinate components of frame field `j`.
    fn frame_matrix<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let p0: Vec<f64> = p.iter().map(Scalar::re).collect();
        let fields = self.frame(&p0);
        let n = fields.len();
        let mut f = DMatrix::from_element(n, n, T::zero());
        for (j, e) in fields.iter().enumerate() {
            f.set_column(j, &e.eval(p));
        }
        f
    }
}

/// A coordinate metric viewed as a frame metric over `(∂_1, …, ∂_n)`, so
/// that the Koszul path can run on it.
#[derive(Clone, Debug)]
pub struct CoordFramed<M>(pub M);

impl<M: MetricField> MetricField for CoordFramed<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        self.0.metric(p)
    }
    fn domain_check(&self, p: &[f64]) -> Result<()> {
        self.0.domain_check(p)
    }
}

impl<M: MetricField> FrameMetric for CoordFramed<M> {
    type Field = Coord;
    fn frame(&self, _p: &[f64]) -> Vec<Coord> {
        let n = self.0.dim();
        (0..n).map(|index| Coord { index, n }).collect()
    }
    fn gram<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        self.0.metric(p)
    }
    fn frame_matrix<T: Scalar>(&self, _p: &[T]) -> DMatrix<T> {
        let n = self.0.dim();
        DMatrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

/// `F⁻ᵀ G F⁻¹`, the coordinate matrix of a frame metric.
pub fn frame_to_coord<M: FrameMetric + ?Sized, T: Scalar>(m: &M, p: &[T]) -> DMatrix<T> {
    let f = m.frame_matrix(p);
    let finv = Lu::new(&f).inverse();
    finv.transpose() * m.gram(p) * finv
}

/// Checks that the frame matrix at `p` is invertible above `floor`.
pub fn check_frame<M: FrameMetric + ?Sized>(m: &M, p: &[f64], floor: f64) -> Result<Matrix> {
    let f: Matrix = m.frame_matrix(p);
    let det = Lu::new(&f).det();
    if det.abs() < floor {
        return Err(GeoError::Singular {
            what: "frame matrix",
            point: p.to_vec(),
            cond: 1.0 / det.abs(),
        });
    }
    Ok(f)
}

/// Signature of a metric at `p` from its coordinate matrix.
pub fn metric_signature<M: MetricField + ?Sized>(m: &M, p: &[f64], tol: f64) -> Result<Signature> {
    linalg::signature(&m.metric(p), tol)
}

/// `X♭ = g(X, ·)` in the coordinate cobasis.
pub fn flat<M: MetricField + ?Sized, X: VectorField + ?Sized>(
    g: &M,
    x: &X,
    p: &[f64],
) -> Result<Vector> {
    g.domain_check(p)?;
    let gm: Matrix = g.metric(p);
    if linalg::rcond(&gm) < linalg::RCOND_FLOOR {
        return Err(GeoError::Singular {
            what: "metric",
            point: p.to_vec(),
            cond: 1.0 / linalg::rcond(&gm),
        });
    }
    Ok(gm * x.at(p)?)
}

/// `dω_ij = ∂_i ω_j − ∂_j ω_i` for `ω = X♭`, by central differences.
pub fn flat_exterior_derivative_fd<M, X>(g: &M, x: &X, p: &[f64], h: f64) -> Result<Matrix>
where
    M: MetricField + ?Sized,
    X: VectorField + ?Sized,
{
    let n = p.len();
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let mut q = p.to_vec();
        q[i] = p[i] + h;
        let fp = flat(g, x, &q)?;
        q[i] = p[i] - h;
        let fm = flat(g, x, &q)?;
        d.push((fp - fm) / (2.0 * h));
    }
    Ok(Matrix::from_fn(n, n, |i, j| d[i][j] - d[j][i]))
}

/// Inverse of [`flat`]: the vector `v` with `g(v, ·) = ω`.
pub fn sharp<M: MetricField + ?Sized>(g: &M, omega: &Vector, p: &[f64]) -> Result<Vector> {
    let gm: Matrix = g.metric(p);
    linalg::solve_guarded(&gm, omega, "metric", p)
}

/// Convenience: evaluate any field at `f64` coordinates without checks.
pub fn eval64<F: VectorField + ?Sized>(f: &F, p: &[f64]) -> Vector {
    f.eval(&lift::<f64>(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Radial;
    impl VectorField for Radial {
        fn dim(&self) -> usize {
            2
        }
        fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T> {
            DVector::from_vec(vec![p[0] * p[1], p[1].sin()])
        }
    }

    #[test]
    fn coordinate_fields_commute() {
        let dx = Coord { index: 0, n: 2 };
        let dy = Coord { index: 1, n: 2 };
        let b = lie_bracket(&dx, &dy, &[0.3, 0.4]).unwrap();
        assert_eq!(b.norm(), 0.0);
    }

    #[test]
    fn dual_and_fd_jacobians_agree() {
        let p = [0.7, -0.2];
        let j = Radial.jacobian(&p);
        let jf = fd_jacobian(&Radial, &p, 1e-5);
        assert!((j - jf).abs().max() < 1e-9);
    }

    #[test]
    fn bracket_field_matches_jacobian_formula() {
        let dx = Coord { index: 0, n: 2 };
        let p = [0.7, -0.2];
        let direct = lie_bracket(&dx, &Radial, &p).unwrap();
        let as_field: Vector = Bracket(dx, Radial).eval(&p[..]);
        assert!((direct - as_field).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Coord { index: 0, n: 2 };
        let b = Coord { index: 0, n: 3 };
        assert!(matches!(
            lie_bracket(&a, &b, &[0.0, 0.0]),
            Err(GeoError::Dimension { .. })
        ));
    }
}
