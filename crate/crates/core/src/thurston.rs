//! Thurston's flow on the Heisenberg nilmanifold times a 2-torus.
//!
//! Chart coordinates are `(x, y, z, t, u)`. Every field below has the shape
//! `k(u)·V1 + τ(u)·∂t − q(u)·∂z` (plus, for `Y`, a `∂u` part), which is
//! what makes the hand-written Jacobians short.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::frame::VectorField;
use crate::scalar::Scalar;
use crate::Matrix;

pub const DIM: usize = 5;
pub const IX: usize = 0;
pub const IY: usize = 1;
pub const IZ: usize = 2;
pub const IT: usize = 3;
pub const IU: usize = 4;

/// The function replacing `ξ` and `|ξ|` in the deformed fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `ξ(u) = ±e^{-1/sin²u}`, flat at the bad set; `a = |ξ|`.
    Xi,
    /// `ξ = sin`, with the absolute values dropped (`a = sin`).
    Sin,
    /// `ξ = a = u²`; deliberately wrong, used as a mutation.
    USquared,
}

/// `f = ξ`, `a = |ξ|` (or its replacement) and their `u`-derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ProfileVals<T> {
    pub f: T,
    pub a: T,
    pub df: T,
    pub da: T,
}

impl Profile {
    pub fn eval<T: Scalar>(self, u: T) -> ProfileVals<T> {
        match self {
            Profile::Xi => {
                let (s, c) = u.sin_cos();
                let s2 = s * s;
                let zero = ProfileVals {
                    f: T::zero(),
                    a: T::zero(),
                    df: T::zero(),
                    da: T::zero(),
                };
                if s2.is_zero() {
                    return zero;
                }
                // e^{-1/s²} underflows below this; the function is flat there.
                let limit = -T::min_positive_value().ln().re();
                let inv = s2.recip();
                if inv.re() > limit {
                    return zero;
                }
                let a = (-inv).exp();
                let f = if s.re() < 0.0 { -a } else { a };
                let g = T::lit(2.0) * c / (s2 * s);
                ProfileVals {
                    f,
                    a,
                    df: f * g,
                    da: a * g,
                }
            }
            Profile::Sin => {
                let (s, c) = u.sin_cos();
                ProfileVals {
                    f: s,
                    a: s,
                    df: c,
                    da: c,
                }
            }
            Profile::USquared => {
                let two_u = T::lit(2.0) * u;
                ProfileVals {
                    f: u * u,
                    a: u * u,
                    df: two_u,
                    da: two_u,
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Xi => "xi",
            Profile::Sin => "sin",
            Profile::USquared => "u-squared",
        }
    }
}

/// Distance from `u` to the nearest multiple of `π`.
pub fn dist_to_bad_set(u: f64) -> f64 {
    let r = u.rem_euclid(std::f64::consts::PI);
    r.min(std::f64::consts::PI - r)
}

/// Below this distance to `πℤ` the fields `W`, `W_ξ` are rejected.
pub const BAD_SET_EPS: f64 = 1e-12;

/// Fields of the Thurston model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThurstonField {
    Dx,
    Dy,
    Dz,
    Dt,
    Du,
    V1,
    V2,
    /// Thurston's field `sin 2u·V1 + 2sin²u·∂t − cos²u·∂z`.
    X,
    /// `X / (2 sin²u)`, undefined on the bad set.
    W,
    /// `2ξc·V1 + 2ξ²·∂t − c²·∂z`.
    Xxi(Profile),
    /// `X_ξ / (2ξ²)`, undefined where `ξ` vanishes.
    Wxi(Profile),
    /// `−c²·∂t + 2ξ|ξ|·∂u`.
    Yxi(Profile),
    /// `2∂t + ∂z`.
    Null,
}

/// `k·V1 + τ·∂t − q·∂z`.
fn rotating<T: Scalar>(k: T, tau: T, q: T, p: &[T]) -> DVector<T> {
    let (st, ct) = p[IT].sin_cos();
    DVector::from_vec(vec![k * ct, k * st, k * p[IX] * st - q, tau, T::zero()])
}

/// Jacobian of [`rotating`] given the `u`-derivatives `dk, dtau, dq`.
fn rotating_jac(k: f64, dk: f64, dtau: f64, dq: f64, p: &[f64]) -> Matrix {
    let (st, ct) = p[IT].sin_cos();
    let x = p[IX];
    let mut j = Matrix::zeros(DIM, DIM);
    j[(IZ, IX)] = k * st;
    j[(IX, IT)] = -k * st;
    j[(IY, IT)] = k * ct;
    j[(IZ, IT)] = k * x * ct;
    j[(IX, IU)] = dk * ct;
    j[(IY, IU)] = dk * st;
    j[(IZ, IU)] = dk * x * st - dq;
    j[(IT, IU)] = dtau;
    j
}

impl ThurstonField {
    pub fn name(&self) -> String {
        match self {
            ThurstonField::Xxi(p) => format!("Xxi[{}]", p.name()),
            ThurstonField::Wxi(p) => format!("Wxi[{}]", p.name()),
            ThurstonField::Yxi(p) => format!("Yxi[{}]", p.name()),
            other => format!("{other:?}"),
        }
    }

    /// Coefficients in the base frame `(∂t, V1, V2, ∂z, ∂u)`, which depend on
    /// `u` only. `None` for `∂x`, `∂y`.
    pub fn frame_coeffs<T: Scalar>(&self, u: T) -> Option<DVector<T>> {
        let z = T::zero();
        let two = T::lit(2.0);
        let rot = |k: T, tau: T, q: T| DVector::from_vec(vec![tau, k, z, -q, z]);
        let unit =
            |i: usize| DVector::from_fn(DIM, |r, _| if r == i { T::one() } else { T::zero() });
        Some(match *self {
            ThurstonField::Dx | ThurstonField::Dy => return None,
            ThurstonField::Dt => unit(0),
            ThurstonField::V1 => unit(1),
            ThurstonField::V2 => unit(2),
            ThurstonField::Dz => unit(3),
            ThurstonField::Du => unit(4),
            ThurstonField::X => {
                let (s, c) = u.sin_cos();
                rot(two * s * c, two * s * s, c * c)
            }
            ThurstonField::W => {
                let k = u.cos() / u.sin();
                rot(k, T::one(), k * k / two)
            }
            ThurstonField::Xxi(prof) => {
                let c = u.cos();
                let v = prof.eval(u);
                rot(two * v.f * c, two * v.f * v.f, c * c)
            }
            ThurstonField::Wxi(prof) => {
                let k = u.cos() / prof.eval(u).f;
                rot(k, T::one(), k * k / two)
            }
            ThurstonField::Yxi(prof) => {
                let c = u.cos();
                let v = prof.eval(u);
                DVector::from_vec(vec![-c * c, z, z, z, two * v.f * v.a])
            }
            ThurstonField::Null => DVector::from_vec(vec![two, z, z, T::one(), z]),
        })
    }
}

impl VectorField for ThurstonField {
    fn dim(&self) -> usize {
        DIM
    }

    fn eval<T: Scalar>(&self, p: &[T]) -> DVector<T> {
        let u = p[IU];
        let unit =
            |i: usize| DVector::from_fn(DIM, |r, _| if r == i { T::one() } else { T::zero() });
        match *self {
            ThurstonField::Dx => unit(IX),
            ThurstonField::Dy => unit(IY),
            ThurstonField::Dz => unit(IZ),
            ThurstonField::Dt => unit(IT),
            ThurstonField::Du => unit(IU),
            ThurstonField::V1 => rotating(T::one(), T::zero(), T::zero(), p),
            ThurstonField::V2 => {
                let (st, ct) = p[IT].sin_cos();
                DVector::from_vec(vec![-st, ct, p[IX] * ct, T::zero(), T::zero()])
            }
            ThurstonField::X => {
                let (s, c) = u.sin_cos();
                let two = T::lit(2.0);
                rotating(two * s * c, two * s * s, c * c, p)
            }
            ThurstonField::W => {
                let k = u.cos() / u.sin();
                rotating(k, T::one(), k * k / T::lit(2.0), p)
            }
            ThurstonField::Xxi(prof) => {
                let c = u.cos();
                let v = prof.eval(u);
                let two = T::lit(2.0);
                rotating(two * v.f * c, two * v.f * v.f, c * c, p)
            }
            ThurstonField::Wxi(prof) => {
                let v = prof.eval(u);
                let k = u.cos() / v.f;
                rotating(k, T::one(), k * k / T::lit(2.0), p)
            }
            ThurstonField::Yxi(prof) => {
                let c = u.cos();
                let v = prof.eval(u);
                let z = T::zero();
                DVector::from_vec(vec![z, z, z, -c * c, T::lit(2.0) * v.f * v.a])
            }
            ThurstonField::Null => {
                let z = T::zero();
                DVector::from_vec(vec![z, z, T::one(), T::lit(2.0), z])
            }
        }
    }

    fn jacobian(&self, p: &[f64]) -> Matrix {
        let u = p[IU];
        let (s, c) = u.sin_cos();
        match *self {
            ThurstonField::Dx
            | ThurstonField::Dy
            | ThurstonField::Dz
            | ThurstonField::Dt
            | ThurstonField::Du
            | ThurstonField::Null => Matrix::zeros(DIM, DIM),
            ThurstonField::V1 => rotating_jac(1.0, 0.0, 0.0, 0.0, p),
            ThurstonField::V2 => {
                let (st, ct) = p[IT].sin_cos();
                let mut j = Matrix::zeros(DIM, DIM);
                j[(IZ, IX)] = ct;
                j[(IX, IT)] = -ct;
                j[(IY, IT)] = -st;
                j[(IZ, IT)] = -p[IX] * st;
                j
            }
            ThurstonField::X => {
                let s2u = (2.0 * u).sin();
                rotating_jac(s2u, 2.0 * (2.0 * u).cos(), 2.0 * s2u, -s2u, p)
            }
            ThurstonField::W => {
                let k = c / s;
                let dk = -1.0 / (s * s);
                rotating_jac(k, dk, 0.0, k * dk, p)
            }
            ThurstonField::Xxi(prof) => {
                let v = prof.eval(u);
                let k = 2.0 * v.f * c;
                let dk = 2.0 * (v.df * c - v.f * s);
                rotating_jac(k, dk, 4.0 * v.f * v.df, -2.0 * c * s, p)
            }
            ThurstonField::Wxi(prof) => {
                let v = prof.eval(u);
                let k = c / v.f;
                let dk = (-s * v.f - c * v.df) / (v.f * v.f);
                rotating_jac(k, dk, 0.0, k * dk, p)
            }
            ThurstonField::Yxi(prof) => {
                let v = prof.eval(u);
                let mut j = Matrix::zeros(DIM, DIM);
                j[(IT, IU)] = 2.0 * c * s;
                j[(IU, IU)] = 2.0 * (v.df * v.a + v.f * v.da);
                j
            }
        }
    }

    fn domain_check(&self, p: &[f64]) -> Result<()> {
        if p.len() != DIM {
            return Err(GeoError::Dimension {
                expected: DIM,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::Domain {
                point: p.to_vec(),
                reason: "non-finite coordinate".into(),
            });
        }
        match *self {
            ThurstonField::W if dist_to_bad_set(p[IU]) < BAD_SET_EPS => Err(GeoError::BadSet {
                field: "W",
                u: p[IU],
            }),
            ThurstonField::Wxi(prof)
                if dist_to_bad_set(p[IU]) < BAD_SET_EPS || prof.eval(p[IU]).f == 0.0 =>
            {
                Err(GeoError::BadSet {
                    field: "Wxi",
                    u: p[IU],
                })
            }
            _ => Ok(()),
        }
    }
}

/// Which closed-form flow to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    W,
    Wxi(Profile),
}

impl FlowKind {
    /// The rotation coefficient `k(u)`.
    pub fn k(self, u: f64) -> Result<f64> {
        match self {
            FlowKind::W => {
                if dist_to_bad_set(u) < BAD_SET_EPS {
                    return Err(GeoError::BadSet { field: "W", u });
                }
                Ok(u.cos() / u.sin())
            }
            FlowKind::Wxi(prof) => {
                let f = prof.eval(u).f;
                if dist_to_bad_set(u) < BAD_SET_EPS || f == 0.0 {
                    return Err(GeoError::BadSet { field: "Wxi", u });
                }
                Ok(u.cos() / f)
            }
        }
    }

    pub fn field(self) -> ThurstonField {
        match self {
            FlowKind::W => ThurstonField::W,
            FlowKind::Wxi(p) => ThurstonField::Wxi(p),
        }
    }
}

/// Closed-form time-`s` flow of `W` (or `W_ξ`, with `k = cos u / ξ(u)`).
pub fn exact_flow(kind: FlowKind, p: &[f64], s: f64) -> Result<[f64; DIM]> {
    if p.len() != DIM {
        return Err(GeoError::Dimension {
            expected: DIM,
            got: p.len(),
        });
    }
    let k = kind.k(p[IU])?;
    let (x, y, z, t, u) = (p[IX], p[IY], p[IZ], p[IT], p[IU]);
    let (st, ct) = t.sin_cos();
    let (sts, cts) = (t + s).sin_cos();
    Ok([
        x + (sts - st) * k,
        y + (ct - cts) * k,
        z + ((2.0 * t).sin() - (2.0 * t + 2.0 * s).sin()) * k * k / 4.0
            + (cts - ct) * (k * k * st - k * x),
        t + s,
        u,
    ])
}

/// A generator of `Γ' = Γ × (2πℤ)²` acting on chart points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeWord {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub mt: i64,
    pub mu: i64,
}

impl LatticeWord {
    pub const IDENTITY: Self = Self {
        a: 0,
        b: 0,
        c: 0,
        mt: 0,
        mu: 0,
    };

    /// `(a,b,c)·(x,y,z) = (x+a, y+b, z+c+a·y)`, `t + 2π·mt`, `u + 2π·mu`.
    pub fn act(&self, p: &[f64]) -> [f64; DIM] {
        let tau = std::f64::consts::TAU;
        let a = self.a as f64;
        [
            p[IX] + a,
            p[IY] + self.b as f64,
            p[IZ] + self.c as f64 + a * p[IY],
            p[IT] + tau * self.mt as f64,
            p[IU] + tau * self.mu as f64,
        ]
    }

    /// Differential of the action applied to a tangent vector.
    pub fn push(&self, v: &[f64]) -> [f64; DIM] {
        [v[IX], v[IY], v[IZ] + self.a as f64 * v[IY], v[IT], v[IU]]
    }

    /// `self ∘ other` as a single word.
    pub fn compose(&self, other: &Self) -> Self {
        // (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a·b')
        Self {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c + self.a * other.b,
            mt: self.mt + other.mt,
            mu: self.mu + other.mu,
        }
    }

    pub fn generators() -> [Self; 5] {
        let z = Self::IDENTITY;
        [
            Self { a: 1, ..z },
            Self { b: 1, ..z },
            Self { c: 1, ..z },
            Self { mt: 1, ..z },
            Self { mu: 1, ..z },
        ]
    }
}

/// Basis components `(∂t, V1, V2, ∂z, ∂u)` as columns.
pub fn base_frame<T: Scalar>(p: &[T]) -> nalgebra::DMatrix<T> {
    let mut f = nalgebra::DMatrix::from_element(DIM, DIM, T::zero());
    let (st, ct) = p[IT].sin_cos();
    let x = p[IX];
    f[(IT, 0)] = T::one();
    f[(IX, 1)] = ct;
    f[(IY, 1)] = st;
    f[(IZ, 1)] = x * st;
    f[(IX, 2)] = -st;
    f[(IY, 2)] = ct;
    f[(IZ, 2)] = x * ct;
    f[(IZ, 3)] = T::one();
    f[(IU, 4)] = T::one();
    f
}

/// Inverse of [`base_frame`], i.e. the coframe `(dt, θ1, θ2, θz, du)` with
/// `θ1 = cos t dx + sin t dy`, `θ2 = −sin t dx + cos t dy`, `θz = dz − x dy`.
pub fn base_coframe<T: Scalar>(p: &[T]) -> nalgebra::DMatrix<T> {
    let mut c = nalgebra::DMatrix::from_element(DIM, DIM, T::zero());
    let (st, ct) = p[IT].sin_cos();
    c[(0, IT)] = T::one();
    c[(1, IX)] = ct;
    c[(1, IY)] = st;
    c[(2, IX)] = -st;
    c[(2, IY)] = ct;
    c[(3, IZ)] = T::one();
    c[(3, IY)] = -p[IX];
    c[(4, IU)] = T::one();
    c
}

/// The auxiliary Riemannian metric `h` with `h(X̂, X̂) = 1` for a given
/// direction `X̂`: Euclidean on `X̂^⊥`, rescaled along `X̂`.
pub fn unit_aux_metric(x: &[f64]) -> Matrix {
    let n = x.len();
    let v = crate::Vector::from_column_slice(x);
    let n2 = v.norm_squared();
    let outer = &v * v.transpose();
    Matrix::identity(n, n) - &outer / n2 + outer / (n2 * n2)
}

/// Foliations whose leaf lengths are tabulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafField {
    X,
    Xxi(Profile),
}

impl LeafField {
    pub fn field(self) -> ThurstonField {
        match self {
            LeafField::X => ThurstonField::X,
            LeafField::Xxi(p) => ThurstonField::Xxi(p),
        }
    }

    /// The factor `φ(u)` with `field = 2φ(u)·W`: `sin²u` or `ξ²`.
    pub fn speed_factor(self, u: f64) -> f64 {
        match self {
            LeafField::X => u.sin().powi(2),
            LeafField::Xxi(p) => p.eval(u).f.powi(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRow {
    pub u0: f64,
    pub closed: bool,
    pub period: f64,
    pub length: f64,
    /// `length · φ(u₀)`, constant (`= C`) if the lengths scale as `C/φ`.
    pub normalized: f64,
    pub closure_residual: f64,
}

/// Leaf through `(x, y, z, t, u₀)` for each `u₀`, its period and its length
/// for the auxiliary metric in which the field has unit norm.
pub fn leaf_length_profile(
    leaf: LeafField,
    start: [f64; 4],
    u0s: &[f64],
    opts: &crate::integrate::ClosureOpts,
) -> Result<Vec<LeafRow>> {
    use crate::integrate::{detect_closed_orbit, FlowDynamics, Quotient};
    use rayon::prelude::*;
    let field = leaf.field();
    u0s.par_iter()
        .map(|&u0| {
            let p0 = [start[0], start[1], start[2], start[3], u0];
            let d = FlowDynamics(field);
            let speed = |y: &[f64]| {
                let v = field.eval(y);
                let h = unit_aux_metric(v.as_slice());
                v.dot(&(h * &v)).sqrt()
            };
            let (r, _) = detect_closed_orbit(&d, &p0, &Quotient::HeisenbergTorus, opts, speed)?;
            Ok(LeafRow {
                u0,
                closed: r.closed,
                period: r.period,
                length: r.length,
                normalized: r.length * leaf.speed_factor(u0),
                closure_residual: r.closure_residual,
            })
        })
        .collect()
}
