//! Levi-Civita connection: Koszul formula in moving frames and coordinate
//! Christoffel symbols. The two are independent code paths and are used to
//! cross-check each other.

use nalgebra::{DMatrix, DVector};

use crate::dual::{seed, Dual};
use crate::error::{GeoError, Result};
use crate::frame::{lie_bracket, FrameMetric, MetricField, VectorField};
use crate::linalg::{self, Lu};
use crate::scalar::Scalar;
use crate::{Matrix, Vector};

/// Frame components of `v`, i.e. `F⁻¹ v`.
fn frame_coeffs<M: FrameMetric + ?Sized, T: Scalar>(m: &M, p: &[T], v: &DVector<T>) -> DVector<T> {
    Lu::new(&m.frame_matrix(p)).solve(v)
}

/// `g(v, w)` computed through the frame: `(F⁻¹v)ᵀ G (F⁻¹w)`.
fn pair_generic<M: FrameMetric + ?Sized, T: Scalar>(
    m: &M,
    p: &[T],
    v: &DVector<T>,
    w: &DVector<T>,
) -> T {
    let b = frame_coeffs(m, p, v);
    let c = frame_coeffs(m, p, w);
    b.dot(&(m.gram(p) * c))
}

/// `g(v, w)` at `p` through the frame.
pub fn frame_inner<M: FrameMetric + ?Sized>(m: &M, p: &[f64], v: &Vector, w: &Vector) -> f64 {
    pair_generic(m, p, v, w)
}

/// `A·g(B, C)` at `p`, differentiating exactly along `A(p)`.
pub fn derive_pair<M, A, B, C>(m: &M, a: &A, b: &B, c: &C, p: &[f64]) -> f64
where
    M: FrameMetric + ?Sized,
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
    C: VectorField + ?Sized,
{
    let dir: Vector = a.eval(p);
    let q: Vec<Dual<f64>> = seed(p, dir.as_slice());
    let vb = b.eval(&q);
    let vc = c.eval(&q);
    pair_generic(m, &q, &vb, &vc).eps
}

/// `2 g(∇_A B, C)` by the Koszul formula.
pub fn koszul_pair<M, A, B, C>(m: &M, a: &A, b: &B, c: &C, p: &[f64]) -> Result<f64>
where
    M: FrameMetric + ?Sized,
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
    C: VectorField + ?Sized,
{
    let n = m.dim();
    for d in [a.dim(), b.dim(), c.dim()] {
        if d != n {
            return Err(GeoError::Dimension {
                expected: n,
                got: d,
            });
        }
    }
    m.domain_check(p)?;
    let (va, vb, vc) = (a.at(p)?, b.at(p)?, c.at(p)?);
    let ab = lie_bracket(a, b, p)?;
    let ac = lie_bracket(a, c, p)?;
    let bc = lie_bracket(b, c, p)?;
    let g = |v: &Vector, w: &Vector| frame_inner(m, p, v, w);
    Ok(
        derive_pair(m, a, b, c, p) + derive_pair(m, b, a, c, p) - derive_pair(m, c, a, b, p)
            + g(&ab, &vc)
            - g(&ac, &vb)
            - g(&bc, &va),
    )
}

/// `∇_A B` in coordinates, by solving the frame Gram system.
pub fn covariant_deriv<M, A, B>(m: &M, a: &A, b: &B, p: &[f64]) -> Result<Vector>
where
    M: FrameMetric + ?Sized,
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    let frame = m.frame(p);
    let mut k = Vector::zeros(frame.len());
    for (j, e) in frame.iter().enumerate() {
        k[j] = koszul_pair(m, a, b, e, p)? / 2.0;
    }
    let gram: Matrix = m.gram(p);
    let c = linalg::solve_guarded(&gram, &k, "frame Gram matrix", p)?;
    let f: Matrix = m.frame_matrix(p);
    Ok(f * c)
}

/// `‖∇_X X‖` in the Euclidean norm on chart components.
pub fn geodesic_residual<M, X>(m: &M, x: &X, p: &[f64]) -> Result<f64>
where
    M: FrameMetric + ?Sized,
    X: VectorField + ?Sized,
{
    Ok(covariant_deriv(m, x, x, p)?.norm())
}

/// Christoffel symbols `Γ^k_ij` at one point, stored as `gamma[k][(i, j)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub gamma: Vec<Matrix>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// `Γ^k_ij v^i w^j`.
    pub fn contract(&self, v: &[f64], w: &[f64]) -> Vector {
        let n = self.dim();
        let wv = Vector::from_column_slice(w);
        let vv = Vector::from_column_slice(v);
        Vector::from_fn(n, |k, _| vv.dot(&(&self.gamma[k] * &wv)))
    }

    /// `(Γ_v)^k_i = Γ^k_ij v^j`.
    pub fn along(&self, v: &[f64]) -> Matrix {
        let n = self.dim();
        let vv = Vector::from_column_slice(v);
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            m.set_row(k, &(&self.gamma[k] * &vv).transpose());
        }
        m
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.gamma
            .iter()
            .map(|g| (g - g.transpose()).abs().max())
            .fold(0.0, f64::max)
    }
}

fn christoffel_from_partials(g: &Matrix, dg: &[Matrix], p: &[f64]) -> Result<Christoffel> {
    let n = g.nrows();
    let ginv = linalg::inverse_guarded(g, "metric", p)?;
    let mut first = vec![Matrix::zeros(n, n); n];
    for (l, fl) in first.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                fl[(i, j)] = 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
            }
        }
    }
    let gamma = (0..n)
        .map(|k| {
            let mut m = Matrix::zeros(n, n);
            for l in 0..n {
                m += ginv[(k, l)] * &first[l];
            }
            m
        })
        .collect();
    Ok(Christoffel { gamma })
}

/// Christoffel symbols with exact metric derivatives.
pub fn christoffels<M: MetricField + ?Sized>(m: &M, p: &[f64]) -> Result<Christoffel> {
    m.domain_check(p)?;
    let g: Matrix = m.metric(p);
    christoffel_from_partials(&g, &m.metric_partials(p), p)
}

/// Central differences of the metric with one Richardson step,
/// `h_k = h·(1 + |p_k|)`.
pub fn metric_partials_fd<M: MetricField + ?Sized>(m: &M, p: &[f64], h: f64) -> Vec<Matrix> {
    let mut q = p.to_vec();
    (0..p.len())
        .map(|k| {
            let hk = h * (1.0 + p[k].abs());
            let mut central = |s: f64| {
                q[k] = p[k] + s;
                let gp: Matrix = m.metric(&q);
                q[k] = p[k] - s;
                let gm: Matrix = m.metric(&q);
                q[k] = p[k];
                (gp - gm) / (2.0 * s)
            };
            let d1 = central(hk);
            let d2 = central(hk / 2.0);
            (4.0 * d2 - d1) / 3.0
        })
        .collect()
}

/// Christoffel symbols from finite-difference metric derivatives.
pub fn christoffels_fd<M: MetricField + ?Sized>(m: &M, p: &[f64], h: f64) -> Result<Christoffel> {
    m.domain_check(p)?;
    let g: Matrix = m.metric(p);
    christoffel_from_partials(&g, &metric_partials_fd(m, p, h), p)
}

/// `∇_A B = J_B A + Γ(A, B)`, the Christoffel path.
pub fn covariant_deriv_christoffel<M, A, B>(m: &M, a: &A, b: &B, p: &[f64]) -> Result<Vector>
where
    M: MetricField + ?Sized,
    A: VectorField + ?Sized,
    B: VectorField + ?Sized,
{
    let gam = christoffels(m, p)?;
    let va = a.at(p)?;
    let vb = b.at(p)?;
    Ok(b.jacobian(p) * &va + gam.contract(va.as_slice(), vb.as_slice()))
}

/// Largest violation of `∂_k g_ij = Γ^l_ki g_lj + Γ^l_kj g_il`.
pub fn compatibility_defect(g: &Matrix, dg: &[Matrix], gam: &Christoffel) -> f64 {
    let n = g.nrows();
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut rhs = 0.0;
                for l in 0..n {
                    rhs += gam.gamma[l][(k, i)] * g[(l, j)] + gam.gamma[l][(k, j)] * g[(i, l)];
                }
                worst = worst.max((dg[k][(i, j)] - rhs).abs());
            }
        }
    }
    worst
}

/// Geodesic acceleration `−Γ(v, v)` for the state `(x, v)`, generic so
/// that it can itself be differentiated.
pub fn geodesic_accel<M: MetricField + ?Sized, T: Scalar>(m: &M, x: &[T], v: &[T]) -> DVector<T> {
    let n = x.len();
    let g = m.metric(x);
    let mut dir = vec![T::zero(); n];
    let dg: Vec<DMatrix<T>> = (0..n)
        .map(|k| {
            dir[k] = T::one();
            let d = m.metric(&seed(x, &dir)).map(|e| e.eps);
            dir[k] = T::zero();
            d
        })
        .collect();
    // Γ_l(v,v) with lowered index: Σ_ij (∂_i g_lj − ½ ∂_l g_ij) v^i v^j
    let vv = DVector::from_column_slice(v);
    let mut low = DVector::from_element(n, T::zero());
    let dv: Vec<DVector<T>> = dg.iter().map(|d| d * &vv).collect();
    for l in 0..n {
        let mut s = T::zero();
        for i in 0..n {
            s += v[i] * dv[i][l];
        }
        s -= T::lit(0.5) * vv.dot(&dv[l]);
        low[l] = s;
    }
    -Lu::new(&g).solve(&low)
}

/// `(Γ_v)^k_i = Γ^k_ij v^j`, generic so that it can be differentiated.
pub fn christoffel_along<M: MetricField + ?Sized, T: Scalar>(
    m: &M,
    x: &[T],
    v: &[T],
) -> DMatrix<T> {
    let n = x.len();
    let g = m.metric(x);
    let mut dir = vec![T::zero(); n];
    let dg: Vec<DMatrix<T>> = (0..n)
        .map(|k| {
            dir[k] = T::one();
            let d = m.metric(&seed(x, &dir)).map(|e| e.eps);
            dir[k] = T::zero();
            d
        })
        .collect();
    let vv = DVector::from_column_slice(v);
    let mut dvg = DMatrix::from_element(n, n, T::zero());
    for (j, d) in dg.iter().enumerate() {
        dvg += d * v[j];
    }
    let dgv: Vec<DVector<T>> = dg.iter().map(|d| d * &vv).collect();
    // A_li = (∂_i g · v)_l + (∂_v g)_li − (∂_l g · v)_i
    let a = DMatrix::from_fn(n, n, |l, i| dgv[i][l] + dvg[(l, i)] - dgv[l][i]);
    Lu::new(&g).inverse() * a * T::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{frame_to_coord, Coord};

    /// Round sphere in `(θ, φ)` with the coordinate frame.
    struct Sphere;

    impl MetricField for Sphere {
        fn dim(&self) -> usize {
            2
        }
        fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
            frame_to_coord(self, p)
        }
    }

    impl FrameMetric for Sphere {
        type Field = Coord;
        fn frame(&self, _p: &[f64]) -> Vec<Coord> {
            vec![Coord { index: 0, n: 2 }, Coord { index: 1, n: 2 }]
        }
        fn gram<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
            let s = p[0].sin();
            DMatrix::from_row_slice(2, 2, &[T::one(), T::zero(), T::zero(), s * s])
        }
    }

    #[test]
    fn sphere_dphi_dphi() {
        let th = std::f64::consts::FRAC_PI_4;
        let dphi = Coord { index: 1, n: 2 };
        let d = covariant_deriv(&Sphere, &dphi, &dphi, &[th, 0.3]).unwrap();
        assert!((d[0] + th.sin() * th.cos()).abs() < 1e-14);
        assert!(d[1].abs() < 1e-14);
        let c = covariant_deriv_christoffel(&Sphere, &dphi, &dphi, &[th, 0.3]).unwrap();
        assert!((c - d).norm() < 1e-14);
    }

    #[test]
    fn christoffels_symmetric_and_compatible() {
        let p = [0.9, 0.1];
        let gam = christoffels(&Sphere, &p).unwrap();
        assert!(gam.asymmetry() < 1e-15);
        let g: Matrix = Sphere.metric(&p[..]);
        assert!(compatibility_defect(&g, &Sphere.metric_partials(&p), &gam) < 1e-14);
        let fd = christoffels_fd(&Sphere, &p, 1e-4).unwrap();
        assert!((fd.gamma[0][(1, 1)] - gam.gamma[0][(1, 1)]).abs() < 1e-9);
    }

    #[test]
    fn accel_matches_contraction() {
        let p = [0.9, 0.1];
        let v = [0.3, -0.7];
        let gam = christoffels(&Sphere, &p).unwrap();
        let a: Vector = geodesic_accel(&Sphere, &p[..], &v[..]);
        assert!((a + gam.contract(&v, &v)).norm() < 1e-14);
    }
}
