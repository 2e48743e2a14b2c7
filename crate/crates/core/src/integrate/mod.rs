//! Adaptive integration of flows and geodesics, lattice quotients,
//! closed-orbit detection and arclength.

pub mod arclength;
pub mod closure;
pub mod csv;
pub mod dopri;
pub mod quotient;

pub use arclength::{arc_length, gauss_kronrod};
pub use closure::{detect_closed_orbit, ClosureOpts, ClosureReport};
pub use quotient::Quotient;

use serde::{Deserialize, Serialize};

use crate::connection::geodesic_accel;
use crate::error::{GeoError, Result};
use crate::frame::{MetricField, VectorField};
use crate::Vector;
use dopri::{dopri_step, rhs_at, rk4_step, Dense};

/// First-order system `y' = f(s, y)` together with how to read a chart
/// point and a velocity out of a state.
pub trait Dynamics: Sync {
    /// State dimension.
    fn dim(&self) -> usize;
    /// Chart dimension.
    fn chart_dim(&self) -> usize;
    fn rhs(&self, s: f64, y: &[f64], out: &mut [f64]) -> Result<()>;
    fn velocity(&self, y: &[f64]) -> Result<Vector>;
    /// Conserved `g(γ̇, γ̇)` for geodesics.
    fn energy(&self, _y: &[f64]) -> Option<f64> {
        None
    }
}

/// Integral curves of a vector field.
pub struct FlowDynamics<F>(pub F);

impl<F: VectorField> Dynamics for FlowDynamics<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart_dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, _s: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let v = self.0.at(y)?;
        out.copy_from_slice(v.as_slice());
        Ok(())
    }
    fn velocity(&self, y: &[f64]) -> Result<Vector> {
        self.0.at(y)
    }
}

/// Geodesic equation on `TM`, state `(x, v)`.
pub struct GeodesicDynamics<M>(pub M);

impl<M: MetricField> Dynamics for GeodesicDynamics<M> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }
    fn chart_dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, _s: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.0.dim();
        let (x, v) = y.split_at(n);
        self.0.domain_check(x)?;
        let a = geodesic_accel(&self.0, x, v);
        out[..n].copy_from_slice(v);
        out[n..].copy_from_slice(a.as_slice());
        Ok(())
    }
    fn velocity(&self, y: &[f64]) -> Result<Vector> {
        let n = self.0.dim();
        Ok(Vector::from_column_slice(&y[n..]))
    }
    fn energy(&self, y: &[f64]) -> Option<f64> {
        let n = self.0.dim();
        Some(self.0.inner(&y[..n], &y[n..], &y[n..]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dopri5,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOpts {
    /// Relative and absolute local error target.
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOpts {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorOpts {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// One accepted step with its interpolant.
#[derive(Clone, Debug)]
pub struct Segment {
    pub s0: f64,
    pub h: f64,
    pub dense: Dense,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub method: Method,
    pub tol: f64,
    /// Step endpoints: `s` strictly increasing, with the state at each.
    pub s: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `g(γ̇, γ̇)` at each sample, for geodesics.
    pub energy: Vec<f64>,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    fn new(method: Method, tol: f64, s0: f64, y0: &[f64], e0: Option<f64>) -> Self {
        Self {
            method,
            tol,
            s: vec![s0],
            states: vec![y0.to_vec()],
            energy: e0.into_iter().collect(),
            segments: vec![],
        }
    }

    pub fn start(&self) -> f64 {
        self.s[0]
    }

    pub fn end(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Dense-output state at `s` (clamped to the covered span).
    pub fn eval(&self, s: f64) -> Vec<f64> {
        if self.segments.is_empty() || s <= self.start() {
            return self.states[0].clone();
        }
        if s >= self.end() {
            return self.last().to_vec();
        }
        let i = self
            .segments
            .partition_point(|seg| seg.s0 + seg.h < s)
            .min(self.segments.len() - 1);
        let seg = &self.segments[i];
        seg.dense.eval((s - seg.s0) / seg.h, seg.h)
    }

    /// Largest `|g(γ̇,γ̇)(s_i) − g(γ̇,γ̇)(s_0)|`.
    pub fn energy_drift(&self) -> f64 {
        match self.energy.first() {
            Some(e0) => self.energy.iter().fold(0.0, |m, e| m.max((e - e0).abs())),
            None => 0.0,
        }
    }
}

fn err_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol + tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<D: Dynamics + ?Sized>(
    d: &D,
    s0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: f64,
) -> Result<f64> {
    let sc: Vec<f64> = y0.iter().map(|v| tol + tol * v.abs()).collect();
    let norm = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let f1 = rhs_at(d, s0 + h0, &y1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

/// Adaptive DOPRI5 from `s0` to `s1`. `observe` sees each accepted segment
/// and may stop the integration early by returning `false`.
pub fn integrate<D, O>(
    d: &D,
    y0: &[f64],
    s0: f64,
    s1: f64,
    opts: &IntegratorOpts,
    observe: O,
) -> Result<Trajectory>
where
    D: Dynamics + ?Sized,
    O: FnMut(&Trajectory) -> Result<bool>,
{
    integrate_with_stops(d, y0, s0, s1, &[], opts, observe)
}

/// As [`integrate`], with accepted steps landing exactly on every parameter
/// of `stops` inside `(s0, s1)`, so the state there is a step endpoint
/// rather than an interpolated value.
pub fn integrate_with_stops<D, O>(
    d: &D,
    y0: &[f64],
    s0: f64,
    s1: f64,
    stops: &[f64],
    opts: &IntegratorOpts,
    mut observe: O,
) -> Result<Trajectory>
where
    D: Dynamics + ?Sized,
    O: FnMut(&Trajectory) -> Result<bool>,
{
    let mut stops: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|t| *t > s0 && *t < s1)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.push(s1);
    let mut next = 0usize;
    if y0.len() != d.dim() {
        return Err(GeoError::Dimension {
            expected: d.dim(),
            got: y0.len(),
        });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(GeoError::NonFinite { s: s0 });
    }
    let mut traj = Trajectory::new(Method::Dopri5, opts.tol, s0, y0, d.energy(y0));
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut k1 = rhs_at(d, s, &y)?;
    let mut h = initial_step(d, s, &y, &k1, opts.tol)?
        .min(opts.max_step)
        .min(s1 - s0);
    let mut steps = 0usize;
    while s < s1 {
        if steps >= opts.max_steps {
            return Err(GeoError::StepUnderflow { s, h });
        }
        steps += 1;
        let target = stops[next];
        let h_free = h;
        let last = s + h >= target;
        if last {
            h = target - s;
        }
        let hmin = 1e-14 * s.abs().max(1.0);
        let attempt = dopri_step(d, s, &y, &k1, h);
        let (accept, fac, step) = match attempt {
            Ok(st) => {
                let e = err_norm(&st.err, &y, &st.y1, opts.tol);
                if e.is_finite() && st.y1.iter().all(|v| v.is_finite()) {
                    let fac = if e == 0.0 {
                        10.0
                    } else {
                        (0.9 * e.powf(-0.2)).clamp(0.2, 10.0)
                    };
                    (e <= 1.0, fac, Some(st))
                } else {
                    (false, 0.2, None)
                }
            }
            Err(GeoError::NonFinite { .. }) => (false, 0.2, None),
            Err(e) => return Err(e),
        };
        if accept {
            let st = step.unwrap();
            let s_new = if last { target } else { s + h };
            traj.segments.push(Segment {
                s0: s,
                h: s_new - s,
                dense: st.dense,
            });
            traj.s.push(s_new);
            traj.states.push(st.y1.clone());
            if let Some(e) = d.energy(&st.y1) {
                traj.energy.push(e);
            }
            s = s_new;
            y = st.y1;
            k1 = st.k7;
            if !observe(&traj)? {
                break;
            }
            if last {
                next += 1;
                if next == stops.len() {
                    break;
                }
            }
            // a step clipped to a stop does not shrink the next one
            h = if last && h < h_free {
                h_free
            } else {
                (h * fac).min(opts.max_step)
            };
        } else {
            h *= fac.min(1.0);
            if h < hmin {
                return Err(GeoError::StepUnderflow { s, h });
            }
        }
    }
    Ok(traj)
}

/// Integral curve of `field` through `p0` over `[0, span]`.
pub fn integrate_flow<F: VectorField>(
    field: F,
    p0: &[f64],
    span: f64,
    tol: f64,
) -> Result<Trajectory> {
    field.domain_check(p0)?;
    integrate(
        &FlowDynamics(field),
        p0,
        0.0,
        span,
        &IntegratorOpts::with_tol(tol),
        |_| Ok(true),
    )
}

/// Integral curve of `field` through `p0` evaluated at the parameters of
/// `grid` (sorted, starting at or after 0), each one a step endpoint.
pub fn flow_at<F: VectorField>(
    field: F,
    p0: &[f64],
    grid: &[f64],
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    field.domain_check(p0)?;
    let end = grid.last().copied().unwrap_or(0.0);
    if end <= 0.0 {
        return Ok(grid.iter().map(|_| p0.to_vec()).collect());
    }
    let tr = integrate_with_stops(
        &FlowDynamics(field),
        p0,
        0.0,
        end,
        grid,
        &IntegratorOpts::with_tol(tol),
        |_| Ok(true),
    )?;
    Ok(grid
        .iter()
        .map(|t| match tr.s.binary_search_by(|s| s.total_cmp(t)) {
            Ok(i) => tr.states[i].clone(),
            Err(_) => tr.eval(*t),
        })
        .collect())
}

/// Geodesic with initial point `x0` and velocity `v0` over `[0, span]`.
pub fn integrate_geodesic<M: MetricField>(
    metric: M,
    x0: &[f64],
    v0: &[f64],
    span: f64,
    tol: f64,
) -> Result<Trajectory> {
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    integrate(
        &GeodesicDynamics(metric),
        &y0,
        0.0,
        span,
        &IntegratorOpts::with_tol(tol),
        |_| Ok(true),
    )
}

/// Fixed-step integration with `n` equal steps, for order measurements and
/// as a cross-check of the adaptive path.
pub fn integrate_fixed<D: Dynamics + ?Sized>(
    d: &D,
    y0: &[f64],
    s0: f64,
    s1: f64,
    n: usize,
    method: Method,
) -> Result<Trajectory> {
    let h = (s1 - s0) / n as f64;
    let mut traj = Trajectory::new(method, 0.0, s0, y0, d.energy(y0));
    let mut y = y0.to_vec();
    let mut k1 = rhs_at(d, s0, &y)?;
    for i in 0..n {
        let s = s0 + i as f64 * h;
        let (y1, k_end, dense) = match method {
            Method::Dopri5 => {
                let st = dopri_step(d, s, &y, &k1, h)?;
                (st.y1, st.k7, st.dense)
            }
            Method::Rk4 => {
                let y1 = rk4_step(d, s, &y, &k1, h)?;
                let f1 = rhs_at(d, s + h, &y1)?;
                let dense = Dense::Hermite {
                    y0: y.clone(),
                    y1: y1.clone(),
                    f0: k1.clone(),
                    f1: f1.clone(),
                };
                (y1, f1, dense)
            }
        };
        if y1.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::NonFinite { s: s + h });
        }
        let s_new = if i + 1 == n {
            s1
        } else {
            s0 + (i + 1) as f64 * h
        };
        traj.segments.push(Segment {
            s0: s,
            h: s_new - s,
            dense,
        });
        traj.s.push(s_new);
        if let Some(e) = d.energy(&y1) {
            traj.energy.push(e);
        }
        traj.states.push(y1.clone());
        y = y1;
        k1 = k_end;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Constant;
    use crate::thurston::{exact_flow, FlowKind, ThurstonField};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn stops_are_step_endpoints() {
        let stops = [0.3, 1.0, 1.0 + 1e-9, 2.5];
        let tr = integrate_with_stops(
            &FlowDynamics(ThurstonField::W),
            &[0.1, 0.2, 0.3, 0.4, 0.9],
            0.0,
            3.0,
            &stops,
            &IntegratorOpts::default(),
            |_| Ok(true),
        )
        .unwrap();
        for t in stops {
            assert!(tr.s.contains(&t), "{t}");
        }
        assert_eq!(*tr.s.last().unwrap(), 3.0);
        let grid: Vec<f64> = (0..=50).map(|i| TAU * i as f64 / 50.0).collect();
        let p = [0.1, 0.2, 0.3, 0.4, 0.3];
        for (s, y) in grid
            .iter()
            .zip(flow_at(ThurstonField::W, &p, &grid, 1e-10).unwrap())
        {
            let e = exact_flow(FlowKind::W, &p, *s).unwrap();
            assert!(y.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }

    #[test]
    fn w_flow_matches_closed_form() {
        let p0 = [0.2, -0.4, 0.1, 0.3, 0.7];
        let tr = integrate_flow(ThurstonField::W, &p0, TAU, 1e-11).unwrap();
        for k in 0..=50 {
            let s = TAU * k as f64 / 50.0;
            let e = exact_flow(FlowKind::W, &p0, s).unwrap();
            let y = tr.eval(s);
            let d = e
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-8, "s = {s}: {d}");
        }
    }

    #[test]
    fn constant_field_is_exact() {
        let tr = integrate_flow(Constant(vec![1.0, 2.0]), &[0.0, 0.0], PI, 1e-10).unwrap();
        assert!((tr.last()[1] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rk4_fixed_step_is_fourth_order() {
        let d = FlowDynamics(ThurstonField::W);
        let p0 = [0.0, 0.0, 0.0, 0.0, 1.0];
        let e = exact_flow(FlowKind::W, &p0, 2.0).unwrap();
        let err = |n| {
            let t = integrate_fixed(&d, &p0, 0.0, 2.0, n, Method::Rk4).unwrap();
            t.last()
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let slope = (err(40) / err(80)).log2();
        assert!((slope - 4.0).abs() < 0.8, "{slope}");
    }
}
