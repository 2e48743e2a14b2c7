//! Riemannian metric making a non-lightlike geodesic foliation geodesic:
//! `h = h₀(P·, P·) + ω ⊗ ω`, where `ω = g(X̄, ·)` and `P` is the
//! `g`-orthogonal projection onto `X̄^⊥`.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};
use crate::frame::{MetricField, VectorField};
use crate::scalar::Scalar;

/// Below this `|g(X̄, X̄)|` the foliation counts as lightlike.
pub const LIGHTLIKE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Riemannized<G, X, H> {
    pub g: G,
    pub xbar: X,
    pub h0: H,
}

impl<G: MetricField, X: VectorField, H: MetricField> Riemannized<G, X, H> {
    /// Checks the causal character of `X̄` at the given sample points.
    pub fn new(g: G, xbar: X, h0: H, samples: &[Vec<f64>]) -> Result<Self> {
        let r = Self { g, xbar, h0 };
        for p in samples {
            r.epsilon(p)?;
        }
        Ok(r)
    }

    /// `g(X̄, X̄)` at `p`, rejecting the lightlike case.
    pub fn epsilon(&self, p: &[f64]) -> Result<f64> {
        let x = self.xbar.at(p)?;
        let e = self.g.inner(p, x.as_slice(), x.as_slice());
        if e.abs() < LIGHTLIKE_TOL {
            return Err(GeoError::Lightlike { value: e });
        }
        Ok(e)
    }
}

impl<G: MetricField, X: VectorField, H: MetricField> MetricField for Riemannized<G, X, H> {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    /// For a non-unit `X̄` the formula is applied to `X̄/√|g(X̄,X̄)|`.
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let g = self.g.metric(p);
        let x: DVector<T> = self.xbar.eval(p);
        let w = &g * &x;
        let e = x.dot(&w);
        let n = g.nrows();
        let proj = DMatrix::identity(n, n) - &x * w.transpose() / e;
        proj.transpose() * self.h0.metric(p) * proj + &w * w.transpose() / e.abs()
    }

    fn domain_check(&self, p: &[f64]) -> Result<()> {
        self.g.domain_check(p)?;
        self.h0.domain_check(p)?;
        self.xbar.domain_check(p)?;
        self.epsilon(p).map(|_| ())
    }
}
