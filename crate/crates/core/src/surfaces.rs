//! Two-dimensional example geometries: the pseudo-sphere `S²₁(r)`, the
//! Einstein torus `dθ² − dφ²`, and flat and round comparison models, with
//! geodesic closure audits.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::frame::MetricField;
use crate::integrate::closure::{detect_closed_orbit, ClosureOpts};
use crate::integrate::quotient::{angle, Quotient};
use crate::integrate::GeodesicDynamics;
use crate::linalg;
use crate::sasaki::causal_sign;
use crate::scalar::Scalar;
use crate::Matrix;

/// A map from a chart into `ℝ^m` with the form `−Σ_{i<ν} x_i² + Σ_{i≥ν} x_i²`.
pub trait Embedding: Sync {
    fn chart_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    /// Number of negative ambient directions.
    fn nu(&self) -> usize;
    fn map<T: Scalar>(&self, p: &[T]) -> DVector<T>;
    fn jacobian<T: Scalar>(&self, p: &[T]) -> DMatrix<T>;

    fn ambient_form<T: Scalar>(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let mut s = T::zero();
        for i in 0..a.len() {
            let t = a[i] * b[i];
            if i < self.nu() {
                s -= t;
            } else {
                s += t;
            }
        }
        s
    }
}

/// `g_ij = ⟨∂_i F, ∂_j F⟩_ν`.
pub fn pullback_metric<E: Embedding + ?Sized, T: Scalar>(e: &E, p: &[T]) -> DMatrix<T> {
    let j = e.jacobian(p);
    let n = e.chart_dim();
    DMatrix::from_fn(n, n, |a, b| {
        e.ambient_form(&j.column(a).into_owned(), &j.column(b).into_owned())
    })
}

/// Rejects points where the embedding is not an immersion.
pub fn check_rank<E: Embedding + ?Sized>(e: &E, p: &[f64]) -> Result<()> {
    let j: Matrix = e.jacobian(p);
    let sv = j.singular_values();
    let smax = sv.max();
    if sv.min() <= 1e-12 * smax.max(1.0) {
        return Err(GeoError::Singular {
            what: "embedding Jacobian",
            point: p.to_vec(),
            cond: smax / sv.min(),
        });
    }
    Ok(())
}

/// `S²₁(r)`: `(w, θ) ↦ r (sinh w, cosh w cos θ, cosh w sin θ)` in `ℝ³₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperboloidEmbedding {
    pub r: f64,
}

impl Embedding for HyperboloidEmbedding {
    fn chart_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn nu(&self) -> usize {
        1
    }
    fn map<T: Scalar>(&self, p: &[T]) -> DVector<T> {
        let r = T::lit(self.r);
        let (s, c) = p[1].sin_cos();
        DVector::from_vec(vec![
            r * p[0].sinh(),
            r * p[0].cosh() * c,
            r * p[0].cosh() * s,
        ])
    }
    fn jacobian<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let r = T::lit(self.r);
        let (s, c) = p[1].sin_cos();
        let (sh, ch) = (p[0].sinh(), p[0].cosh());
        DMatrix::from_row_slice(
            3,
            2,
            &[
                r * ch,
                T::zero(),
                r * sh * c,
                -r * ch * s,
                r * sh * s,
                r * ch * c,
            ],
        )
    }
}

/// Unit sphere in Euclidean `ℝ³`, `(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereEmbedding;

impl Embedding for SphereEmbedding {
    fn chart_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn nu(&self) -> usize {
        0
    }
    fn map<T: Scalar>(&self, p: &[T]) -> DVector<T> {
        let (st, ct) = p[0].sin_cos();
        let (sp, cp) = p[1].sin_cos();
        DVector::from_vec(vec![st * cp, st * sp, ct])
    }
    fn jacobian<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let (st, ct) = p[0].sin_cos();
        let (sp, cp) = p[1].sin_cos();
        DMatrix::from_row_slice(3, 2, &[ct * cp, -st * sp, ct * sp, st * cp, -st, T::zero()])
    }
}

/// Surface metrics in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Surface {
    /// `−r² dw² + r² cosh²w dθ²`.
    PseudoSphere {
        r: f64,
    },
    /// `dθ² − dφ²` on `(ℝ/2πℤ)²`.
    EinsteinTorus,
    /// `dt² − dx²`.
    Minkowski,
    FlatPlane,
    /// `dθ² + sin²θ dφ²`.
    RoundSphere,
}

impl Surface {
    pub fn name(&self) -> String {
        match self {
            Surface::PseudoSphere { r } => format!("pseudo-sphere(r={r})"),
            Surface::EinsteinTorus => "einstein-torus".into(),
            Surface::Minkowski => "minkowski-plane".into(),
            Surface::FlatPlane => "flat-plane".into(),
            Surface::RoundSphere => "round-sphere".into(),
        }
    }

    pub fn quotient(&self) -> Quotient {
        match self {
            Surface::PseudoSphere { .. } | Surface::RoundSphere => {
                Quotient::Torus(vec![false, true])
            }
            Surface::EinsteinTorus => Quotient::Torus(vec![true, true]),
            Surface::Minkowski | Surface::FlatPlane => Quotient::None,
        }
    }

    /// `⟨F, F⟩_ν − r²` relative to `|F|²`, for surfaces with an embedding.
    pub fn constraint_defect(&self, p: &[f64]) -> Option<f64> {
        match *self {
            Surface::PseudoSphere { r } => {
                let e = HyperboloidEmbedding { r };
                let f = e.map(p);
                Some((e.ambient_form(&f, &f) - r * r).abs() / f.norm_squared())
            }
            _ => None,
        }
    }
}

impl MetricField for Surface {
    fn dim(&self) -> usize {
        2
    }

    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        let d = |a: T, b: T| DMatrix::from_row_slice(2, 2, &[a, T::zero(), T::zero(), b]);
        match *self {
            Surface::PseudoSphere { r } => {
                let r2 = T::lit(r * r);
                let ch = p[0].cosh();
                d(-r2, r2 * ch * ch)
            }
            Surface::EinsteinTorus | Surface::Minkowski => d(T::one(), -T::one()),
            Surface::FlatPlane => d(T::one(), T::one()),
            Surface::RoundSphere => {
                let s = p[0].sin();
                d(T::one(), s * s)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalType {
    Spacelike,
    Timelike,
    Lightlike,
}

impl CausalType {
    pub fn of(g_vv: f64, tol: f64) -> Self {
        match causal_sign(g_vv, tol) {
            1 => CausalType::Spacelike,
            -1 => CausalType::Timelike,
            _ => CausalType::Lightlike,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicAudit {
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub causal: CausalType,
    pub closed: bool,
    pub period: f64,
    /// `∫ √|g(γ̇,γ̇)| ds` over one period (or the integrated span).
    pub length: f64,
    pub closure_residual: f64,
    /// Largest `|x_0|` reached (the `w` coordinate on `S²₁`).
    pub max_abs_first: f64,
    pub escaped: bool,
    pub simple: bool,
    pub energy_drift: f64,
    pub constraint_drift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOpts {
    pub closure: ClosureOpts,
    /// Stop once `|x_0|` exceeds this (escape witness).
    pub escape_radius: f64,
    /// Trace samples used for the self-intersection test.
    pub simple_samples: usize,
    pub simple_tol: f64,
}

impl Default for AuditOpts {
    fn default() -> Self {
        Self {
            closure: ClosureOpts {
                horizon: 1e3,
                ..ClosureOpts::default()
            },
            escape_radius: 10.5,
            simple_samples: 1500,
            simple_tol: 1e-4,
        }
    }
}

/// Integrates the geodesic from `(x0, v0)` and classifies it.
pub fn classify_geodesic(
    surface: &Surface,
    x0: &[f64],
    v0: &[f64],
    opts: &AuditOpts,
) -> Result<GeodesicAudit> {
    let g_vv = surface.inner(x0, v0, v0);
    let causal = CausalType::of(g_vv, 1e-12);
    let d = GeodesicDynamics(*surface);
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut copts = opts.closure;
    let quotient = surface.quotient();
    let periodic0 = matches!(&quotient, Quotient::Torus(f) if f[0]);
    copts.escape = if periodic0 {
        None
    } else {
        Some((0, opts.escape_radius))
    };
    // a lightlike geodesic has length zero; its speed is rounding noise
    let null = causal == CausalType::Lightlike;
    let speed = |y: &[f64]| {
        if null {
            0.0
        } else {
            surface.inner(&y[..2], &y[2..], &y[2..]).abs().sqrt()
        }
    };
    let (rep, traj) = detect_closed_orbit(&d, &y0, &quotient, &copts, speed)?;
    let max_abs_first = traj.states.iter().fold(0.0f64, |m, y| m.max(y[0].abs()));
    let constraint_drift = traj
        .states
        .iter()
        .filter_map(|y| surface.constraint_defect(&y[..2]))
        .fold(0.0f64, f64::max);
    let simple = if rep.closed {
        is_simple(&traj, rep.period, &quotient, opts)
    } else {
        false
    };
    Ok(GeodesicAudit {
        x0: x0.to_vec(),
        v0: v0.to_vec(),
        causal,
        closed: rep.closed,
        period: rep.period,
        length: rep.length,
        closure_residual: rep.closure_residual,
        max_abs_first,
        escaped: rep.escaped,
        simple,
        energy_drift: traj.energy_drift(),
        constraint_drift,
    })
}

/// No two trace points further apart than a few samples in parameter come
/// within `simple_tol` of each other in the quotient, unless their
/// velocities are parallel (the trace running over itself).
fn is_simple(
    traj: &crate::integrate::Trajectory,
    period: f64,
    q: &Quotient,
    opts: &AuditOpts,
) -> bool {
    let n = opts.simple_samples;
    let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .map(|i| {
            let y = traj.eval(period * i as f64 / n as f64);
            let (p, w) = q.reduce(&y[..2]);
            let v = w.push(&y[2..]);
            let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
            (p, vec![v[0] / nv, v[1] / nv])
        })
        .collect();
    for i in 0..n {
        for j in i + 3..n {
            if j + 3 > n + i {
                continue;
            }
            let w = q.nearest(&pts[j].0, &pts[i].0);
            let r = w.act(&pts[j].0);
            let d = ((r[0] - pts[i].0[0]).powi(2) + (r[1] - pts[i].0[1]).powi(2)).sqrt();
            if d < opts.simple_tol && angle(&pts[i].1, &pts[j].1) > 1e-3 {
                return false;
            }
        }
    }
    true
}

/// Random initial state of the requested causal type in the chart box.
pub fn random_state(
    surface: &Surface,
    causal: CausalType,
    bx: [[f64; 2]; 2],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = vec![
        rng.gen_range(bx[0][0]..bx[0][1]),
        rng.gen_range(bx[1][0]..bx[1][1]),
    ];
    let g: Matrix = surface.metric(&x);
    if causal == CausalType::Lightlike {
        // null directions of a diagonal 2×2 form with opposite signs
        if g[(0, 0)] * g[(1, 1)] >= 0.0 {
            return Err(GeoError::Domain {
                point: x,
                reason: "metric has no null directions".into(),
            });
        }
        let slope = (-g[(0, 0)] / g[(1, 1)]).sqrt();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return Ok((x, vec![1.0, sign * slope]));
    }
    let want = if causal == CausalType::Spacelike {
        1.0
    } else {
        -1.0
    };
    for _ in 0..10_000 {
        let a: f64 = rng.gen_range(0.0..TAU);
        let v = [a.cos(), a.sin()];
        let e = surface.inner(&x, &v, &v);
        if e * want > 1e-6 {
            let s = 1.0 / e.abs().sqrt();
            return Ok((x, vec![v[0] * s, v[1] * s]));
        }
    }
    Err(GeoError::Domain {
        point: x,
        reason: format!("no {causal:?} direction found"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScAudit {
    pub surface: String,
    pub causal: CausalType,
    pub seed: u64,
    pub samples: usize,
    pub closed: usize,
    pub fraction_closed: f64,
    /// `max/min − 1` over closed lengths (0 if fewer than two).
    pub length_dispersion: f64,
    /// Mean closed length.
    pub mean_length: f64,
    pub all_simple: bool,
    pub escaped: usize,
    pub min_escape: f64,
    pub max_period_error_2pi: f64,
    pub max_energy_drift: f64,
    pub max_constraint_drift: f64,
    pub records: Vec<GeodesicAudit>,
}

/// Classifies `count` random geodesics of one causal type. States are
/// drawn sequentially from one seeded stream; integration runs in
/// parallel and results keep the sample order.
pub fn sc_audit(
    surface: &Surface,
    causal: CausalType,
    count: usize,
    seed: u64,
    bx: [[f64; 2]; 2],
    opts: &AuditOpts,
) -> Result<ScAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
        .map(|_| random_state(surface, causal, bx, &mut rng))
        .collect::<Result<_>>()?;
    let records: Vec<GeodesicAudit> = states
        .par_iter()
        .map(|(x, v)| classify_geodesic(surface, x, v, opts))
        .collect::<Result<_>>()?;
    let closed: Vec<&GeodesicAudit> = records.iter().filter(|r| r.closed).collect();
    let lengths: Vec<f64> = closed.iter().map(|r| r.length).collect();
    let (lmin, lmax) = lengths
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    Ok(ScAudit {
        surface: surface.name(),
        causal,
        seed,
        samples: count,
        closed: closed.len(),
        fraction_closed: closed.len() as f64 / count.max(1) as f64,
        length_dispersion: if lengths.len() > 1 && lmin > 0.0 {
            lmax / lmin - 1.0
        } else {
            0.0
        },
        mean_length: if lengths.is_empty() {
            f64::NAN
        } else {
            lengths.iter().sum::<f64>() / lengths.len() as f64
        },
        all_simple: closed.iter().all(|r| r.simple),
        escaped: records.iter().filter(|r| r.escaped).count(),
        min_escape: records
            .iter()
            .map(|r| r.max_abs_first)
            .fold(f64::INFINITY, f64::min),
        max_period_error_2pi: closed
            .iter()
            .map(|r| (r.period - TAU).abs())
            .fold(0.0, f64::max),
        max_energy_drift: records.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
        max_constraint_drift: records
            .iter()
            .map(|r| r.constraint_drift)
            .fold(0.0, f64::max),
        records,
    })
}

/// Pullback of an embedding as a metric field.
#[derive(Clone, Copy, Debug)]
pub struct Pullback<E>(pub E);

impl<E: Embedding> MetricField for Pullback<E> {
    fn dim(&self) -> usize {
        self.0.chart_dim()
    }
    fn metric<T: Scalar>(&self, p: &[T]) -> DMatrix<T> {
        pullback_metric(&self.0, p)
    }
    fn domain_check(&self, p: &[f64]) -> Result<()> {
        check_rank(&self.0, p)
    }
}

/// Signature of a surface metric at `p`.
pub fn surface_signature(s: &Surface, p: &[f64]) -> Result<linalg::Signature> {
    linalg::signature(&s.metric(p), linalg::SIGNATURE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperboloid_pullback_matches_closed_form() {
        let s = Surface::PseudoSphere { r: 1.7 };
        let e = HyperboloidEmbedding { r: 1.7 };
        for p in [[0.0, 0.0], [0.8, 2.1], [-1.5, 4.0]] {
            let a: Matrix = pullback_metric(&e, &p);
            let b: Matrix = s.metric(&p);
            assert!((a - b).abs().max() < 1e-12);
            assert!(s.constraint_defect(&p).unwrap() < 1e-15);
            check_rank(&e, &p).unwrap();
        }
        let a: Matrix = pullback_metric(&SphereEmbedding, &[0.7, 0.2]);
        assert!((a - Surface::RoundSphere.metric(&[0.7, 0.2])).abs().max() < 1e-14);
        assert!(check_rank(&SphereEmbedding, &[0.0, 0.3]).is_err());
    }

    #[test]
    fn signatures() {
        let sig = |s: Surface| surface_signature(&s, &[0.4, 0.3]).unwrap();
        assert_eq!(
            sig(Surface::PseudoSphere { r: 1.0 }),
            linalg::Signature::new(1, 1, 0)
        );
        assert_eq!(sig(Surface::EinsteinTorus), linalg::Signature::new(1, 1, 0));
        assert_eq!(sig(Surface::FlatPlane), linalg::Signature::new(2, 0, 0));
    }

    #[test]
    fn pseudo_sphere_spacelike_closes() {
        // w = 0 equator, unit spacelike
        let a = classify_geodesic(
            &Surface::PseudoSphere { r: 1.0 },
            &[0.0, 0.0],
            &[0.0, 1.0],
            &AuditOpts::default(),
        )
        .unwrap();
        assert!(a.closed, "{a:?}");
        assert!((a.period - TAU).abs() < 1e-6);
        assert!((a.length - TAU).abs() < 1e-6);
        assert!(a.simple);
    }

    #[test]
    fn pseudo_sphere_timelike_escapes() {
        let a = classify_geodesic(
            &Surface::PseudoSphere { r: 1.0 },
            &[0.0, 0.0],
            &[1.0, 0.0],
            &AuditOpts::default(),
        )
        .unwrap();
        assert!(!a.closed && a.escaped, "{a:?}");
    }

    #[test]
    fn random_states_have_requested_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Surface::PseudoSphere { r: 1.0 };
        for c in [
            CausalType::Spacelike,
            CausalType::Timelike,
            CausalType::Lightlike,
        ] {
            let (x, v) = random_state(&s, c, [[-1.0, 1.0], [0.0, TAU]], &mut rng).unwrap();
            let e = s.inner(&x, &v, &v);
            assert_eq!(CausalType::of(e, 1e-12), c);
            if c != CausalType::Lightlike {
                assert!((e.abs() - 1.0).abs() < 1e-12);
            }
        }
    }
}
