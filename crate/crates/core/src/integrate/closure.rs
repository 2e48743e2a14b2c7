//! Closed-orbit detection in a quotient.

use serde::{Deserialize, Serialize};

use super::arclength::arc_length;
use super::quotient::{Anchor, Quotient};
use super::{integrate, Dynamics, IntegratorOpts, Trajectory};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureOpts {
    /// Bound on both the position distance and the velocity angle.
    pub tol: f64,
    pub horizon: f64,
    pub integrator_tol: f64,
    /// The orbit must first leave this ball around its start.
    pub arm_radius: f64,
    /// Largest chart displacement per step, converted to a parameter step
    /// with the initial speed.
    pub max_displacement: f64,
    /// Distance samples per accepted step.
    pub subsamples: usize,
    /// Stop once `|state[i]| > r` for `Some((i, r))`.
    pub escape: Option<(usize, f64)>,
}

impl Default for ClosureOpts {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            horizon: 1e4,
            integrator_tol: 1e-12,
            arm_radius: 1e-3,
            max_displacement: 0.05,
            subsamples: 16,
            escape: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub closed: bool,
    /// First return time (parameter units); `horizon` reached otherwise.
    pub period: f64,
    /// Arclength over one period, for the supplied speed.
    pub length: f64,
    pub closure_residual: f64,
    pub angle_residual: f64,
    /// Local minima of the return distance inside the arming radius.
    pub return_count: usize,
    /// Smallest return distance seen after arming.
    pub best_approach: f64,
    pub best_approach_s: f64,
    pub escaped: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a) > 1e-14 * a.abs().max(b.abs()).max(1.0) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Integrates from `y0` until the orbit returns to its start in the
/// quotient, with matching direction, or the horizon is exhausted.
/// `speed` maps a state to the auxiliary norm of its velocity.
pub fn detect_closed_orbit<D, S>(
    d: &D,
    y0: &[f64],
    quotient: &Quotient,
    opts: &ClosureOpts,
    speed: S,
) -> Result<(ClosureReport, Trajectory)>
where
    D: Dynamics + ?Sized,
    S: Fn(&[f64]) -> f64,
{
    let n = d.chart_dim();
    let v0 = d.velocity(y0)?;
    let anchor: Anchor = quotient.anchor(&y0[..n], v0.as_slice());
    let dist = |y: &[f64]| -> Result<(f64, f64)> {
        let v = d.velocity(y)?;
        Ok(anchor.distance(&y[..n], v.as_slice()))
    };
    let mut armed = false;
    let mut window: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut report = ClosureReport {
        closed: false,
        period: opts.horizon,
        length: f64::NAN,
        closure_residual: f64::INFINITY,
        angle_residual: f64::INFINITY,
        return_count: 0,
        best_approach: f64::INFINITY,
        best_approach_s: f64::NAN,
        escaped: false,
    };
    let v0_norm = v0.amax();
    let max_step = if v0_norm > 0.0 {
        opts.max_displacement / v0_norm
    } else {
        f64::INFINITY
    };
    let refine_radius = opts.arm_radius + 2.0 * opts.max_displacement / opts.subsamples as f64;
    let iopts = IntegratorOpts {
        tol: opts.integrator_tol,
        max_step,
        ..IntegratorOpts::default()
    };
    let traj = integrate(d, y0, 0.0, opts.horizon, &iopts, |tr: &Trajectory| {
        let seg = tr.segments.last().unwrap();
        if let Some((i, r)) = opts.escape {
            if tr.last()[i].abs() > r {
                report.escaped = true;
                return Ok(false);
            }
        }
        for j in 1..=opts.subsamples {
            let s = seg.s0 + seg.h * j as f64 / opts.subsamples as f64;
            let y = seg.dense.eval(j as f64 / opts.subsamples as f64, seg.h);
            let (r, _) = dist(&y)?;
            if !armed {
                armed = r > opts.arm_radius;
                window = vec![(s, r)];
                continue;
            }
            window.push((s, r));
            if window.len() > 3 {
                window.remove(0);
            }
            // a sampled minimum further than one sample spacing from the
            // start cannot hide a return within `tol`
            if window.len() == 3
                && window[1].1 <= window[0].1
                && window[1].1 <= window[2].1
                && window[1].1 <= refine_radius
            {
                let (a, b) = (window[0].0, window[2].0);
                let (sm, rm) = golden_min(
                    |s| dist(&tr.eval(s)).map(|x| x.0).unwrap_or(f64::INFINITY),
                    a,
                    b,
                );
                if rm < report.best_approach {
                    report.best_approach = rm;
                    report.best_approach_s = sm;
                }
                if rm <= opts.arm_radius {
                    report.return_count += 1;
                }
                if rm <= opts.tol {
                    let (_, ang) = dist(&tr.eval(sm))?;
                    if ang <= opts.tol {
                        report.closed = true;
                        report.period = sm;
                        report.closure_residual = rm;
                        report.angle_residual = ang;
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    })?;
    let end = if report.closed {
        report.period
    } else {
        traj.end()
    };
    report.length = arc_length(&traj, 0.0, end, &speed);
    Ok((report, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Constant;
    use crate::integrate::FlowDynamics;
    use std::f64::consts::TAU;

    #[test]
    fn slope_one_line_closes_on_the_torus() {
        let d = FlowDynamics(Constant(vec![1.0, 1.0]));
        let (r, _) = detect_closed_orbit(
            &d,
            &[0.3, 0.1],
            &Quotient::Torus(vec![true, true]),
            &ClosureOpts::default(),
            |_| 1.0,
        )
        .unwrap();
        assert!(r.closed);
        assert!((r.period - TAU).abs() < 1e-9, "{}", r.period);
        assert!((r.length - TAU).abs() < 1e-9);
    }
}
