//! The metric for which `X_ξ` is geodesic and changes causal type.
//!
//! Near the bad set the metric is `G₀(u)` in the base frame
//! `(∂t, V1, V2, ∂z, ∂u)`. Away from it the metric is `diag(σ, M(u))`
//! (resp. `diag(σ, N(u))`) in the frame `(W_ξ, V1, V2, ∂z, Y)`, where
//! `σ = |ξ|/ξ` and `M`, `N` agree with the block `L(u)` of `G₀` close to the
//! bad set.
//!
//! `M` is built as `R(τ)ᵀ L(ρ(u)) R(τ)`: `ρ` freezes the argument of `L`
//! inside the interval where `G₀` has been certified, and `R(τ)` rotates the
//! `(∂z, Y)` plane by `πτ`, ending at `diag(1, 1, −1, −1)`, which is exactly
//! the symmetry relating `L(π − v)` to `L(v)`. Congruence by a rotation
//! keeps the signature, so `M` never leaves the right orbit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::DMatrix;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::ext::Ext;
use crate::frame::{FrameMetric, MetricField};
use crate::linalg::{self, Signature, SignatureMethod};
use crate::scalar::Scalar;
use crate::thurston::{base_coframe, base_frame, dist_to_bad_set, Profile, ThurstonField, DIM, IU};
use crate::Matrix;

/// Shape of the interpolation, in absolute `u` units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpParams {
    /// `M = L` for distances to the bad set below `b0`.
    pub b0: f64,
    /// Frozen argument of `L` in the middle of the interval.
    pub bstar: f64,
    /// End of the freezing ramp (`ρ ≡ b*` beyond).
    pub b1: f64,
    /// The rotation runs from `τ = 0` at `|u| = tau_lo` to `τ = 1` at `π − tau_lo`.
    pub tau_lo: f64,
    /// Distance beyond which the metric is assembled directly in the
    /// `(W_ξ, …, Y)` frame instead of as a correction to `G₀`.
    pub path_switch: f64,
}

/// Which of the three glued metrics is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    G0,
    G1,
    G2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeChangeConfig {
    pub profile: Profile,
    /// Skips `find_eta` and uses this (already halved) value.
    pub eta_override: Option<f64>,
    /// Points per half-interval in the `η` certification grid.
    pub eta_grid: usize,
    /// Minimum `|λ|` of `G₀` accepted by the certification.
    pub eta_tol: f64,
    /// `b0 = b0_frac · η_cert`.
    pub b0_frac: f64,
    /// `b* = bstar_frac · η_cert`.
    pub bstar_frac: f64,
    pub tau_lo: f64,
    /// Points per half-interval in the interpolation audit.
    pub audit_points: usize,
    /// Negate the symmetric pair `(i, j)` of `G₀` (mutation testing only).
    pub flip: Option<(usize, usize)>,
}

impl Default for TypeChangeConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Xi,
            eta_override: None,
            eta_grid: 2000,
            eta_tol: 1e-9,
            b0_frac: 0.7,
            bstar_frac: 0.83,
            tau_lo: 1.0,
            audit_points: 10_000,
            flip: None,
        }
    }
}

/// Result of the construction-time audit of `M` and `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpAudit {
    pub points: usize,
    pub method: SignatureMethod,
    pub m_signature: Signature,
    pub n_signature: Signature,
    pub max_asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeChangeModel {
    pub profile: Profile,
    /// Largest grid-certified radius (capped at `π/4`).
    pub eta_cert: f64,
    /// Working radius, `η_cert / 2` unless overridden.
    pub eta: f64,
    pub params: InterpParams,
    pub flip: Option<(usize, usize)>,
    pub audit: InterpAudit,
}

/// Off-diagonal pairs of `G₀` that are not identically zero.
pub const G0_NONZERO_OFFDIAG: [(usize, usize); 6] =
    [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)];

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, built from `e^{-1/x}`.
pub fn smoothstep<T: Scalar>(x: T) -> T {
    let phi = |t: T| {
        if t.re() <= 0.0 {
            T::zero()
        } else {
            (-t.recip()).exp()
        }
    };
    if x.re() <= 0.0 {
        return T::zero();
    }
    if x.re() >= 1.0 {
        return T::one();
    }
    let a = phi(x);
    a / (a + phi(T::one() - x))
}

/// `u` wrapped into `(−π, π]`.
fn wrap<T: Scalar>(u: T) -> T {
    let k = ((u.re() + PI) / TAU).floor();
    let w = u - T::lit(k * TAU);
    if w.re() <= -PI {
        w + T::lit(TAU)
    } else {
        w
    }
}

/// `G₀(u)` for a profile, in the base frame.
pub fn g0_matrix<T: Scalar>(profile: Profile, u: T) -> DMatrix<T> {
    let c = u.cos();
    let v = profile.eval(u);
    let (f, a) = (v.f, v.a);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let c2 = c * c;
    let mut g = DMatrix::from_element(DIM, DIM, T::zero());
    let mut set = |i: usize, j: usize, x: T| {
        g[(i, j)] = x;
        g[(j, i)] = x;
    };
    set(0, 0, c2 * c2 / T::lit(4.0));
    set(0, 1, a / (two * c));
    set(0, 3, half * c2 * f * f - f * a / c2);
    set(1, 2, half);
    set(1, 3, a * f * f / (c2 * c));
    set(2, 3, f / c);
    set(3, 3, f * f * f * f);
    set(3, 4, -T::one());
    set(4, 4, T::one());
    g
}

/// `L(u)` in the frame `(V1, V2, ∂z, Y)`.
pub fn l_matrix<T: Scalar>(profile: Profile, u: T) -> DMatrix<T> {
    let c = u.cos();
    let v = profile.eval(u);
    let (f, a) = (v.f, v.a);
    let half = T::lit(0.5);
    let c2 = c * c;
    let c4 = c2 * c2;
    let mut l = DMatrix::from_element(4, 4, T::zero());
    let mut set = |i: usize, j: usize, x: T| {
        l[(i, j)] = x;
        l[(j, i)] = x;
    };
    set(0, 1, half);
    set(0, 2, a * f * f / (c2 * c));
    set(0, 3, -c * a * half);
    set(1, 2, f / c);
    set(2, 2, f * f * f * f);
    set(2, 3, -half * c4 * f * f - f * a);
    set(3, 3, c4 * c4 / T::lit(4.0) + T::lit(4.0) * f * f * a * a);
    l
}

/// Columns `(W_ξ, V1, V2, ∂z, Y)` in base-frame coefficients.
pub fn frame_change<T: Scalar>(profile: Profile, u: T) -> DMatrix<T> {
    let c = u.cos();
    let v = profile.eval(u);
    let k = c / v.f;
    let mut m = DMatrix::from_element(DIM, DIM, T::zero());
    m[(0, 0)] = T::one();
    m[(1, 0)] = k;
    m[(3, 0)] = -k * k / T::lit(2.0);
    m[(1, 1)] = T::one();
    m[(2, 2)] = T::one();
    m[(3, 3)] = T::one();
    m[(0, 4)] = -c * c;
    m[(4, 4)] = T::lit(2.0) * v.f * v.a;
    m
}

/// Inverse of [`frame_change`] in closed form.
pub fn frame_change_inv<T: Scalar>(profile: Profile, u: T) -> DMatrix<T> {
    let c = u.cos();
    let v = profile.eval(u);
    let k = c / v.f;
    let c2 = c * c;
    let iy = (T::lit(2.0) * v.f * v.a).recip();
    let half_k2 = k * k / T::lit(2.0);
    let mut m = DMatrix::from_element(DIM, DIM, T::zero());
    m[(0, 0)] = T::one();
    m[(0, 4)] = c2 * iy;
    m[(1, 0)] = -k;
    m[(1, 1)] = T::one();
    m[(1, 4)] = -k * c2 * iy;
    m[(2, 2)] = T::one();
    m[(3, 0)] = half_k2;
    m[(3, 3)] = T::one();
    m[(3, 4)] = half_k2 * c2 * iy;
    m[(4, 4)] = iy;
    m
}

/// Rotation by `πτ` in the `(∂z, Y)` plane; exact at `τ ∈ {0, 1}`.
fn rotation<T: Scalar>(tau: T) -> DMatrix<T> {
    let (cs, sn) = if tau.re() > 0.5 {
        let r = T::one() - tau;
        (-(T::PI() * r).cos(), (T::PI() * r).sin())
    } else {
        ((T::PI() * tau).cos(), (T::PI() * tau).sin())
    };
    let mut m = DMatrix::from_element(4, 4, T::zero());
    m[(0, 0)] = T::one();
    m[(1, 1)] = T::one();
    m[(2, 2)] = cs;
    m[(2, 3)] = -sn;
    m[(3, 2)] = sn;
    m[(3, 3)] = cs;
    m
}

/// `diag(1, 1, −1, −1) · A · diag(1, 1, −1, −1)`.
fn reflect<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    DMatrix::from_fn(4, 4, |i, j| {
        if (i < 2) == (j < 2) {
            a[(i, j)]
        } else {
            -a[(i, j)]
        }
    })
}

/// Certifies `η` on a grid: the largest `η ≤ π/4` such that `G₀` has
/// signature `(3,2)` with `min |λ| > tol` at every grid point within `η` of
/// the bad set (both sides of `0` and of `π`).
pub fn find_eta(
    profile: Profile,
    flip: Option<(usize, usize)>,
    grid: usize,
    tol: f64,
) -> Result<f64> {
    let target = Signature::new(3, 2, 0);
    let mut eta = None;
    for i in 0..=grid {
        let d = FRAC_PI_4 * i as f64 / grid as f64;
        let ok = [d, -d, PI - d, PI + d].iter().all(|&u| {
            let g = apply_flip(g0_matrix(profile, u), flip);
            if g.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let ev = linalg::sym_eigenvalues(&g);
            let minabs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            minabs > tol
                && linalg::signature(&g, linalg::SIGNATURE_TOL)
                    .map(|s| s == target)
                    .unwrap_or(false)
        });
        if !ok {
            break;
        }
        eta = Some(d);
    }
    match eta {
        Some(e) if e > 0.0 => Ok(e),
        _ => Err(GeoError::Construction(
            "G0 has no certified neighbourhood of signature (3,2)".into(),
        )),
    }
}

fn apply_flip<T: Scalar>(mut g: DMatrix<T>, flip: Option<(usize, usize)>) -> DMatrix<T> {
    if let Some((i, j)) = flip {
        g[(i, j)] = -g[(i, j)];
        if i != j {
            g[(j, i)] = -g[(j, i)];
        }
    }
    g
}

impl TypeChangeModel {
    pub fn new(cfg: &TypeChangeConfig) -> Result<Self> {
        if let Some((i, j)) = cfg.flip {
            if i >= DIM || j >= DIM || i == j {
                return Err(GeoError::Construction(format!("invalid G0 flip ({i},{j})")));
            }
        }
        let (eta_cert, eta) = match cfg.eta_override {
            Some(e) => {
                if !(e > 0.0 && e < FRAC_PI_4) {
                    return Err(GeoError::Construction(format!(
                        "eta override {e} outside (0, π/4)"
                    )));
                }
                (2.0 * e, e)
            }
            None => {
                let c = find_eta(cfg.profile, cfg.flip, cfg.eta_grid, cfg.eta_tol)?;
                (c, c / 2.0)
            }
        };
        let params = InterpParams {
            b0: cfg.b0_frac * eta_cert,
            bstar: cfg.bstar_frac * eta_cert,
            b1: eta_cert,
            tau_lo: cfg.tau_lo,
            path_switch: 0.5 * (eta_cert + cfg.tau_lo),
        };
        let p = params;
        if !(eta < p.b0
            && p.b0 < p.bstar
            && p.bstar < p.b1
            && p.b1 < p.tau_lo
            && p.tau_lo < FRAC_PI_2)
        {
            return Err(GeoError::Construction(format!(
                "interpolation parameters out of order: eta={eta}, b0={}, b*={}, b1={}, tau_lo={}",
                p.b0, p.bstar, p.b1, p.tau_lo
            )));
        }
        let mut model = Self {
            profile: cfg.profile,
            eta_cert,
            eta,
            params,
            flip: cfg.flip,
            audit: InterpAudit {
                points: 0,
                method: SignatureMethod::BunchKaufman,
                m_signature: Signature::new(0, 0, 0),
                n_signature: Signature::new(0, 0, 0),
                max_asymmetry: 0.0,
            },
        };
        model.audit = model.audit_interpolation(cfg.audit_points)?;
        Ok(model)
    }

    /// Interpolation audit: symmetry and constant signature of `M` on
    /// `(0, π)` and `N` on `(−π, 0)`, evaluated in extended range so that
    /// points arbitrarily close to the bad set are resolved.
    fn audit_interpolation(&self, n: usize) -> Result<InterpAudit> {
        let half = 0.5 * self.params.b0;
        let m_target = linalg::inertia(&self.l_block(Ext::from_f64(half)), linalg::SIGNATURE_TOL)?;
        let n_target = linalg::inertia(&self.l_block(Ext::from_f64(-half)), linalg::SIGNATURE_TOL)?;
        let mut asym = 0.0f64;
        for side in [1.0, -1.0] {
            let target = if side > 0.0 { m_target } else { n_target };
            for i in 0..n {
                let u = side * PI * (i as f64 + 0.5) / n as f64;
                let m = self.interp_block(Ext::from_f64(u));
                asym = asym.max(linalg::max_asymmetry(&m));
                let s = linalg::inertia(&m, linalg::SIGNATURE_TOL)?;
                if s != target {
                    return Err(GeoError::Construction(format!(
                        "interpolated block has signature {s} at u = {u}, expected {target}"
                    )));
                }
                if m.iter().any(|v| !v.re().is_finite()) {
                    return Err(GeoError::Construction(format!(
                        "interpolated block not finite at u = {u}"
                    )));
                }
            }
        }
        Ok(InterpAudit {
            points: 2 * n,
            method: SignatureMethod::BunchKaufman,
            m_signature: m_target,
            n_signature: n_target,
            max_asymmetry: asym,
        })
    }

    /// `G₀(u)`, including any configured mutation.
    pub fn g0<T: Scalar>(&self, u: T) -> DMatrix<T> {
        apply_flip(g0_matrix(self.profile, u), self.flip)
    }

    /// Closed-form `L(u)`.
    pub fn l_block<T: Scalar>(&self, u: T) -> DMatrix<T> {
        l_matrix(self.profile, u)
    }

    /// `g(W_ξ, W_ξ) = |ξ|/ξ`.
    pub fn sigma<T: Scalar>(&self, u: T) -> T {
        let v = self.profile.eval(u);
        v.a / v.f
    }

    fn reduced(&self, u: f64) -> (f64, bool, f64) {
        let w = wrap(u);
        let aw = w.abs();
        let near_pi = aw > FRAC_PI_2;
        let v = if near_pi { PI - aw } else { aw };
        (w.signum(), near_pi, v)
    }

    /// `L(u)` evaluated through the nearest bad-set point, rounded the same
    /// way as the interpolated block, so their difference is smooth.
    fn l_reduced<T: Scalar>(&self, u: T) -> DMatrix<T> {
        let w = wrap(u);
        let (sgn, near_pi, _) = self.reduced(u.re());
        if near_pi {
            let v = T::PI() - w.abs();
            reflect(&self.l_block(T::lit(sgn) * v))
        } else {
            self.l_block(w)
        }
    }

    fn rho<T: Scalar>(&self, v: T) -> T {
        let p = &self.params;
        let s = smoothstep((v - T::lit(p.b0)) / T::lit(p.b1 - p.b0));
        (T::one() - s) * v + s * T::lit(p.bstar)
    }

    fn tau<T: Scalar>(&self, aw: T) -> T {
        let p = &self.params;
        smoothstep((aw - T::lit(p.tau_lo)) / T::lit(PI - 2.0 * p.tau_lo))
    }

    /// `M(u)` for `u ∈ (0, π)` and `N(u)` for `u ∈ (−π, 0)` (mod `2π`).
    pub fn interp_block<T: Scalar>(&self, u: T) -> DMatrix<T> {
        let (sgn, near_pi, v0) = self.reduced(u.re());
        if v0 < self.params.b0 {
            return self.l_block(u);
        }
        let w = wrap(u);
        let aw = w.abs();
        let v = if near_pi { T::PI() - aw } else { aw };
        let rho = T::lit(sgn) * self.rho(v);
        let r = rotation(self.tau(aw));
        r.transpose() * self.l_block(rho) * r
    }

    pub fn branch(&self, u: f64) -> Branch {
        if dist_to_bad_set(u) < self.eta {
            Branch::G0
        } else if wrap(u) > 0.0 {
            Branch::G1
        } else {
            Branch::G2
        }
    }

    /// Gram matrix in the base frame `(∂t, V1, V2, ∂z, ∂u)`.
    pub fn base_gram<T: Scalar>(&self, u: T) -> DMatrix<T> {
        // `M = L` below `b0`, where both branches reduce to `G₀` exactly.
        let d = dist_to_bad_set(u.re());
        if d < self.params.b0 {
            return self.g0(u);
        }
        let cinv = frame_change_inv(self.profile, u);
        let m = self.interp_block(u);
        let mut block = DMatrix::from_element(DIM, DIM, T::zero());
        if d < self.params.path_switch {
            let diff = m - self.l_reduced(u);
            block.view_mut((1, 1), (4, 4)).copy_from(&diff);
            self.g0(u) + cinv.transpose() * block * cinv
        } else {
            block[(0, 0)] = self.sigma(u);
            block.view_mut((1, 1), (4, 4)).copy_from(&m);
            cinv.transpose() * block * cinv
        }
    }

    /// Frame matrix and Gram matrix of the branch active at `u`.
    pub fn branch_frame_gram<T: Scalar>(&self, p: &[T]) -> (Branch, DMatrix<T>, DMatrix<T>) {
        let u = p[IU];
        let b = self.branch(u.re());
        match b {
            Branch::G0 => (b, base_frame(p), self.g0(u)),
            _ => {
                let mut g = DMatrix::from_element(DIM, DIM, T::zero());
                g[(0, 0)] = self.sigma(u);
                g.view_mut((1, 1), (4, 4)).copy_from(&self.interp_block(u));
                (b, base_frame(p) * frame_change(self.profile, u), g)
            }
        }
    }

    /// Frame fields of the active branch.
    pub fn branch_frame(&self, u: f64) -> Vec<ThurstonField> {
        use ThurstonField::*;
        match self.branch(u) {
            Branch::G0 => vec![Dt, V1, V2, Dz, Du],
            _ => vec![Wxi(self.profile), V1, V2, Dz, Yxi(self.profile)],
        }
    }

    /// Signature of the active branch's Gram matrix (congruent to the
    /// coordinate metric by Sylvester's law).
    pub fn branch_signature(&self, u: f64) -> Result<Signature> {
        let (_, _, g) = self.branch_frame_gram(&[0.0, 0.0, 0.0, 0.0, u][..]);
        linalg::inertia(&g, linalg::SIGNATURE_TOL)
    }

    /// `Cᵀ G₀ C` against `diag(σ, M)` in the `(W_ξ, …, Y)` frame. Each entry
    /// difference is divided by `(|C|ᵀ |G₀| |C|)_ij`, the size of the terms
    /// that cancel in it, so the result is a relative backward error.
    /// Evaluated in extended range, so it is meaningful arbitrarily close to
    /// the bad set.
    pub fn overlap_defect(&self, u: f64) -> f64 {
        let ue = Ext::from_f64(u);
        let c: DMatrix<Ext> = frame_change(self.profile, ue);
        let g0: DMatrix<Ext> = self.g0(ue);
        let lhs = c.transpose() * &g0 * &c;
        let ca = c.map(|v| v.abs());
        let scale = ca.transpose() * g0.map(|v| v.abs()) * ca;
        let mut rhs = DMatrix::from_element(DIM, DIM, Ext::zero());
        rhs[(0, 0)] = self.sigma(ue);
        rhs.view_mut((1, 1), (4, 4))
            .copy_from(&self.interp_block(ue));
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                let d = (lhs[(i, j)] - rhs[(i, j)]).abs();
                if d.is_zero() {
                    continue;
                }
                let s = scale[(i, j)];
                worst = worst.max(if s.is_zero() {
                    f64::INFINITY
                } else {
                    (d / s).value()
                });
            }
        }
        worst
    }
}

impl TypeChangeModel {
    /// Parameter values where the construction switches formula, with
    /// their mirrors in `(−π, π)`.
    pub fn seams(&self) -> Vec<f64> {
        let p = &self.params;
        let mut out = Vec::new();
        for s in [self.eta, p.b0, p.b1, p.path_switch, p.tau_lo, FRAC_PI_2] {
            for v in [s, PI - s, -s, s - PI] {
                if !out.iter().any(|w: &f64| (w - v).abs() < 1e-12) {
                    out.push(v);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Jumps of the first and second `u`-derivatives of the coordinate
    /// metric at `(x, y, z, t, u_s)`, from second-order one-sided
    /// differences with step `h` on each side, relative to the largest
    /// entry of the metric and of the derivative.
    pub fn seam_defect(&self, p: &[f64], h: f64) -> [f64; 2] {
        let at = |k: f64| -> Matrix {
            let mut q = p.to_vec();
            q[IU] = p[IU] + k * h;
            self.metric(&q)
        };
        let g: Vec<Matrix> = (-3..=3).map(|k| at(k as f64)).collect();
        let (l, c, r) = (|k: usize| &g[3 - k], &g[3], |k: usize| &g[3 + k]);
        let d1l = (c * 3.0 - l(1) * 4.0 + l(2)) / (2.0 * h);
        let d1r = (r(1) * 4.0 - c * 3.0 - r(2)) / (2.0 * h);
        let d2l = (c * 2.0 - l(1) * 5.0 + l(2) * 4.0 - l(3)) / (h * h);
        let d2r = (c * 2.0 - r(1) * 5.0 + r(2) * 4.0 - r(3)) / (h * h);
        let scale = |a: &Matrix, b: &Matrix| a.amax().max(b.amax()).max(c.amax()).max(1.0);
        [
            (&d1l - &d1r).amax() / scale(&d1l, &d1r),
            (&d2l - &d2r).amax() / scale(&d2l, &d2r),
        ]
    }
}

impl MetricField for TypeChangeModel {
    fn dim(&self) -> usize {
        DIM
    }

    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let cf = base_coframe(p);
        cf.transpose() * self.base_gram(p[IU]) * cf
    }

    fn domain_check(&self, p: &[f64]) -> Result<()> {
        if p.len() != DIM {
            return Err(GeoError::Dimension {
                expected: DIM,
                got: p.len(),
            });
        }
        Ok(())
    }
}

impl FrameMetric for TypeChangeModel {
    type Field = ThurstonField;

    fn frame(&self, _p: &[f64]) -> Vec<ThurstonField> {
        use ThurstonField::*;
        vec![Dt, V1, V2, Dz, Du]
    }

    fn gram<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        self.base_gram(p[IU])
    }

    fn frame_matrix<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        base_frame(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TypeChangeModel {
        TypeChangeModel::new(&TypeChangeConfig {
            audit_points: 500,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn smoothstep_is_a_step() {
        assert_eq!(smoothstep(-0.1f64), 0.0);
        assert_eq!(smoothstep(1.2f64), 1.0);
        assert!((smoothstep(0.5f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eta_is_capped() {
        let m = model();
        assert!((m.eta_cert - FRAC_PI_4).abs() < 1e-12, "{}", m.eta_cert);
        assert!((m.eta - FRAC_PI_4 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn matching_zone_is_exact() {
        let m = model();
        for u in [
            m.eta / 4.0,
            PI - m.eta / 4.0,
            -m.eta / 4.0,
            -PI + m.eta / 4.0,
        ] {
            let d = (m.interp_block(u) - m.l_block(u)).abs().max();
            assert!(d < 1e-15 * m.l_block(u).abs().max(), "u = {u}: {d}");
        }
    }

    #[test]
    fn l_is_the_lower_block_of_g0() {
        let m = model();
        for u in [0.3, 0.7, 1.2, 2.0, -0.5, -2.5] {
            let c: Matrix = frame_change(Profile::Xi, u);
            let full = c.transpose() * m.g0(u) * &c;
            let l = m.l_block(u);
            assert!(
                (full.view((1, 1), (4, 4)) - &l).abs().max() < 1e-9,
                "u = {u}"
            );
            assert!((full[(0, 0)] - m.sigma(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn seams_are_smooth() {
        let m = model();
        for u in m.seams() {
            let [r1, r2] = m.seam_defect(&[0.2, 0.4, -0.1, 0.9, u], 1e-4);
            assert!(r1 < 1e-6 && r2 < 1e-6, "u = {u}: {r1:e} {r2:e}");
        }
    }

    #[test]
    fn closed_form_inverse() {
        for u in [0.4, 1.3, -2.0] {
            let c: Matrix = frame_change(Profile::Xi, u);
            let ci: Matrix = frame_change_inv(Profile::Xi, u);
            assert!((c * ci - Matrix::identity(DIM, DIM)).abs().max() < 1e-10);
        }
    }
}
