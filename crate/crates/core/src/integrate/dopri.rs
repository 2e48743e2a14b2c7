//! Dormand–Prince 5(4) with the standard fourth-order continuous extension,
//! and the classical RK4 step used as an independent cross-check.

use super::Dynamics;
use crate::error::Result;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolant over one accepted step.
#[derive(Clone, Debug)]
pub enum Dense {
    /// Hairer's five-vector form for DOPRI5.
    Dopri([Vec<f64>; 5]),
    /// Cubic Hermite through both end values and slopes.
    Hermite {
        y0: Vec<f64>,
        y1: Vec<f64>,
        f0: Vec<f64>,
        f1: Vec<f64>,
    },
}

impl Dense {
    pub fn eval(&self, theta: f64, h: f64) -> Vec<f64> {
        match self {
            Dense::Dopri(r) => {
                let t1 = 1.0 - theta;
                (0..r[0].len())
                    .map(|i| {
                        r[0][i]
                            + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])))
                    })
                    .collect()
            }
            Dense::Hermite { y0, y1, f0, f1 } => {
                let t2 = theta * theta;
                let t3 = t2 * theta;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + theta;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                (0..y0.len())
                    .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
                    .collect()
            }
        }
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

fn eval<D: Dynamics + ?Sized>(d: &D, s: f64, y: &[f64]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; y.len()];
    d.rhs(s, y, &mut f)?;
    Ok(f)
}

pub struct DopriStep {
    pub y1: Vec<f64>,
    /// Slope at the end of the step (first stage of the next, FSAL).
    pub k7: Vec<f64>,
    pub err: Vec<f64>,
    pub dense: Dense,
}

/// One DOPRI5 step from `(s, y)` with first stage `k1`.
pub fn dopri_step<D: Dynamics + ?Sized>(
    d: &D,
    s: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
) -> Result<DopriStep> {
    let k2 = eval(d, s + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = eval(d, s + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = eval(
        d,
        s + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = eval(
        d,
        s + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = eval(
        d,
        s + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y1 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = eval(d, s + h, &y1)?;
    let n = y.len();
    let err: Vec<f64> = (0..n)
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    let r1 = y.to_vec();
    let r2: Vec<f64> = (0..n).map(|i| y1[i] - y[i]).collect();
    let r3: Vec<f64> = (0..n).map(|i| h * k1[i] - r2[i]).collect();
    let r4: Vec<f64> = (0..n).map(|i| r2[i] - h * k7[i] - r3[i]).collect();
    let r5: Vec<f64> = (0..n)
        .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
        .collect();
    Ok(DopriStep {
        y1,
        k7,
        err,
        dense: Dense::Dopri([r1, r2, r3, r4, r5]),
    })
}

/// One classical RK4 step; returns the new state.
pub fn rk4_step<D: Dynamics + ?Sized>(
    d: &D,
    s: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let k2 = eval(d, s + 0.5 * h, &axpy(y, h, &[(0.5, k1)]))?;
    let k3 = eval(d, s + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = eval(d, s + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h,
        &[
            (1.0 / 6.0, k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    ))
}

pub(super) fn rhs_at<D: Dynamics + ?Sized>(d: &D, s: f64, y: &[f64]) -> Result<Vec<f64>> {
    eval(d, s, y)
}
