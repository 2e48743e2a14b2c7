//! Sasaki metric on the tangent bundle and the tangent-lift check: the
//! lift `(γ, γ̇)` of a geodesic is a geodesic of the same causal character.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::connection::{christoffel_along, christoffels, christoffels_fd, geodesic_accel};
use crate::dual::{seed, Dual};
use crate::error::{GeoError, Result};
use crate::frame::MetricField;
use crate::integrate::Trajectory;
use crate::linalg::{self, Signature};
use crate::scalar::Scalar;
use crate::{Matrix, Vector};

/// `ḡ` on the `2n`-chart `(x, v)`:
/// `ḡ(ξ₁, ξ₂) = g(dπ ξ₁, dπ ξ₂) + g(K ξ₁, K ξ₂)` with `K(ẋ, v̇) = v̇ + Γ(ẋ, v)`.
#[derive(Clone, Debug)]
pub struct SasakiMetric<M>(pub M);

impl<M: MetricField> SasakiMetric<M> {
    pub fn base_dim(&self) -> usize {
        self.0.dim()
    }

    /// Connection map applied to `(ẋ, v̇)` at `(x, v)`.
    pub fn connection_map(
        &self,
        x: &[f64],
        v: &[f64],
        xdot: &[f64],
        vdot: &[f64],
    ) -> Result<Vector> {
        let gam = christoffels(&self.0, x)?;
        Ok(Vector::from_column_slice(vdot) + gam.contract(xdot, v))
    }

    /// Assembly through `K` and `dπ` pair by pair, independent of the block
    /// formula in [`MetricField::metric`].
    pub fn metric_via_k(&self, x: &[f64], v: &[f64]) -> Result<Matrix> {
        let n = self.0.dim();
        let g: Matrix = self.0.metric(x);
        let basis = |i: usize| -> (Vec<f64>, Vec<f64>) {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            if i < n {
                a[i] = 1.0;
            } else {
                b[i - n] = 1.0;
            }
            (a, b)
        };
        let mut out = Matrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            let (xi, vi) = basis(i);
            let ki = self.connection_map(x, v, &xi, &vi)?;
            for j in 0..2 * n {
                let (xj, vj) = basis(j);
                let kj = self.connection_map(x, v, &xj, &vj)?;
                let xi_v = Vector::from_column_slice(&xi);
                let xj_v = Vector::from_column_slice(&xj);
                out[(i, j)] = xi_v.dot(&(&g * xj_v)) + ki.dot(&(&g * kj));
            }
        }
        Ok(out)
    }

    /// Horizontal lift `(ẋ, −Γ(ẋ, v))`.
    pub fn horizontal(&self, x: &[f64], v: &[f64], xdot: &[f64]) -> Result<Vector> {
        let gam = christoffels(&self.0, x)?;
        let n = x.len();
        let k = gam.contract(xdot, v);
        Ok(Vector::from_fn(2 * n, |i, _| {
            if i < n {
                xdot[i]
            } else {
                -k[i - n]
            }
        }))
    }

    /// Vertical vector `(0, v̇)`.
    pub fn vertical(&self, vdot: &[f64]) -> Vector {
        let n = vdot.len();
        Vector::from_fn(2 * n, |i, _| if i < n { 0.0 } else { vdot[i - n] })
    }
}

impl<M: MetricField> MetricField for SasakiMetric<M> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }

    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let n = self.0.dim();
        let (x, v) = p.split_at(n);
        let g = self.0.metric(x);
        let gv = christoffel_along(&self.0, x, v);
        let ggv = &g * &gv;
        let mut out = DMatrix::from_element(2 * n, 2 * n, T::zero());
        out.view_mut((0, 0), (n, n))
            .copy_from(&(&g + gv.transpose() * &ggv));
        out.view_mut((0, n), (n, n)).copy_from(&ggv.transpose());
        out.view_mut((n, 0), (n, n)).copy_from(&ggv);
        out.view_mut((n, n), (n, n)).copy_from(&g);
        out
    }

    fn domain_check(&self, p: &[f64]) -> Result<()> {
        if p.len() != 2 * self.0.dim() {
            return Err(GeoError::Dimension {
                expected: 2 * self.0.dim(),
                got: p.len(),
            });
        }
        self.0.domain_check(&p[..self.0.dim()])
    }
}

/// `ḡ` at `(x, v)` and its signature.
pub fn sasaki_signature<M: MetricField>(
    m: &SasakiMetric<M>,
    x: &[f64],
    v: &[f64],
) -> Result<Signature> {
    let p: Vec<f64> = x.iter().chain(v).copied().collect();
    linalg::signature(&m.metric(&p), linalg::SIGNATURE_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub samples: usize,
    /// `g(γ̇, γ̇)` at the start.
    pub g_vv: f64,
    /// Largest `|c̈ + Γ̄(ċ, ċ)|` with finite-difference `Γ̄`.
    pub max_residual: f64,
    /// Largest `|ḡ(ċ, ċ) − g(γ̇, γ̇)|`.
    pub max_energy_defect: f64,
    /// Sign of `ḡ(ċ, ċ)` agrees with the sign of `g(γ̇, γ̇)` at every
    /// sample (values below `causal_tol` count as zero).
    pub same_causal_character: bool,
}

/// Causal sign with a dead band.
pub fn causal_sign(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

/// Checks the tangent lift of an integrated geodesic at `samples` interior
/// parameter values.
pub fn tangent_lift_check<M: MetricField>(
    m: &SasakiMetric<M>,
    traj: &Trajectory,
    samples: usize,
    fd_step: f64,
    causal_tol: f64,
) -> Result<LiftReport> {
    let n = m.base_dim();
    let s0 = traj.start();
    let s1 = traj.end();
    let y0 = traj.eval(s0);
    let g_vv = m.0.inner(&y0[..n], &y0[n..], &y0[n..]);
    let mut rep = LiftReport {
        samples,
        g_vv,
        max_residual: 0.0,
        max_energy_defect: 0.0,
        same_causal_character: true,
    };
    for i in 0..samples {
        let s = s0 + (s1 - s0) * (i as f64 + 0.5) / samples as f64;
        let y = traj.eval(s);
        let (x, v) = y.split_at(n);
        // ċ = (v, a(x, v)); c̈ by differentiating the same map along ċ
        let a = geodesic_accel(&m.0, x, v);
        let cdot: Vec<f64> = v.iter().copied().chain(a.iter().copied()).collect();
        let q: Vec<Dual<f64>> = seed(&y, &cdot);
        let (qx, qv) = q.split_at(n);
        let ad: DVector<Dual<f64>> = geodesic_accel(&m.0, qx, qv);
        let cddot: Vec<f64> = a.iter().copied().chain(ad.iter().map(|d| d.eps)).collect();
        let gam = christoffels_fd(m, &y, fd_step)?;
        let res = Vector::from_column_slice(&cddot) + gam.contract(&cdot, &cdot);
        rep.max_residual = rep.max_residual.max(res.norm());
        let e_lift = m.inner(&y, &cdot, &cdot);
        let e_base = m.0.inner(x, v, v);
        rep.max_energy_defect = rep.max_energy_defect.max((e_lift - e_base).abs());
        if causal_sign(e_lift, causal_tol) != causal_sign(e_base, causal_tol) {
            rep.same_causal_character = false;
        }
    }
    Ok(rep)
}

/// Horizontal/vertical decomposition defects at `(x, v)` for test vectors
/// `xdot`, `vdot`: `|ḡ(H,H) − g(ẋ,ẋ)|`, `|ḡ(V,V) − g(v̇,v̇)|`, `|ḡ(H,V)|`.
pub fn decomposition_defects<M: MetricField>(
    m: &SasakiMetric<M>,
    x: &[f64],
    v: &[f64],
    xdot: &[f64],
    vdot: &[f64],
) -> Result<[f64; 3]> {
    let p: Vec<f64> = x.iter().chain(v).copied().collect();
    let gb: Matrix = m.metric(&p);
    let h = m.horizontal(x, v, xdot)?;
    let w = m.vertical(vdot);
    let hh = h.dot(&(&gb * &h));
    let vv = w.dot(&(&gb * &w));
    let hv = h.dot(&(&gb * &w));
    Ok([
        (hh - m.0.inner(x, xdot, xdot)).abs(),
        (vv - m.0.inner(x, vdot, vdot)).abs(),
        hv.abs(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_geodesic;
    use crate::linalg::Signature;
    use crate::surfaces::Surface;

    #[test]
    fn flat_base_is_euclidean() {
        let m = SasakiMetric(Surface::FlatPlane);
        let g: Matrix = m.metric(&[0.3, -1.0, 2.0, 0.5]);
        assert!((g - Matrix::identity(4, 4)).abs().max() < 1e-15);
    }

    #[test]
    fn lorentzian_base_doubles_signature() {
        let m = SasakiMetric(Surface::PseudoSphere { r: 1.0 });
        let s = sasaki_signature(&m, &[0.4, 1.0], &[0.3, -0.7]).unwrap();
        assert_eq!(s, Signature::new(2, 2, 0));
    }

    #[test]
    fn block_formula_matches_assembly() {
        let m = SasakiMetric(Surface::RoundSphere);
        let (x, v) = ([0.9, 0.2], [0.4, 1.3]);
        let p = [x[0], x[1], v[0], v[1]];
        let a: Matrix = m.metric(&p);
        let b = m.metric_via_k(&x, &v).unwrap();
        assert!((a - b).abs().max() < 1e-13);
        let d = decomposition_defects(&m, &x, &v, &[0.3, -0.2], &[1.1, 0.4]).unwrap();
        assert!(d.iter().all(|e| *e < 1e-13), "{d:?}");
    }

    #[test]
    fn lift_of_sphere_geodesic() {
        let base = Surface::RoundSphere;
        let tr = integrate_geodesic(base, &[1.0, 0.0], &[0.2, 1.0], 2.0, 1e-12).unwrap();
        let rep = tangent_lift_check(&SasakiMetric(base), &tr, 8, 1e-5, 1e-9).unwrap();
        assert!(rep.max_residual < 1e-6, "{rep:?}");
        assert!(rep.max_energy_defect < 1e-9);
        assert!(rep.same_causal_character);
    }
}
