//! Small dense linear algebra: pivoted LU, symmetric inertia and signatures.
//!
//! Frames here are at most 10-dimensional, so everything is written for
//! clarity over dynamic matrices. LU and the Bunch–Kaufman inertia are
//! generic so they also run on dual and extended-exponent scalars.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::scalar::Scalar;
use crate::Matrix;

/// Reciprocal condition numbers below this are treated as singular.
pub const RCOND_FLOOR: f64 = 1e-15;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar> {
    lu: DMatrix<T>,
    perm: Vec<usize>,
    odd: bool,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &DMatrix<T>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        let mut singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_zero() {
                singular = true;
                continue;
            }
            if piv != k {
                lu.swap_rows(piv, k);
                perm.swap(piv, k);
                odd = !odd;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / d;
                lu[(i, k)] = l;
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= l * ukj;
                }
            }
        }
        Self {
            lu,
            perm,
            odd,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> T {
        let mut d = if self.odd { -T::one() } else { T::one() };
        for k in 0..self.lu.nrows() {
            d *= self.lu[(k, k)];
        }
        d
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        let n = self.lu.nrows();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DMatrix<T> {
        let n = self.lu.nrows();
        let mut inv = DMatrix::from_element(n, n, T::zero());
        for j in 0..n {
            let mut e = DVector::from_element(n, T::zero());
            e[j] = T::one();
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

fn norm1(a: &Matrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal 1-norm condition number, computed from the primal parts.
pub fn rcond<T: Scalar>(a: &DMatrix<T>) -> f64 {
    let a0 = a.map(|v| v.re());
    let lu = Lu::new(&a0);
    if lu.is_singular() {
        return 0.0;
    }
    let inv = lu.inverse();
    let r = 1.0 / (norm1(&a0) * norm1(&inv));
    if r.is_finite() {
        r
    } else {
        0.0
    }
}

/// Solves `a x = b` with a condition guard; failures report the point.
pub fn solve_guarded<T: Scalar>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    what: &'static str,
    point: &[f64],
) -> Result<DVector<T>> {
    let lu = Lu::new(a);
    let rc = rcond(a);
    if lu.is_singular() || rc < RCOND_FLOOR {
        return Err(GeoError::Singular {
            what,
            point: point.to_vec(),
            cond: 1.0 / rc,
        });
    }
    Ok(lu.solve(b))
}

/// Inverse with the same guard as [`solve_guarded`].
pub fn inverse_guarded<T: Scalar>(
    a: &DMatrix<T>,
    what: &'static str,
    point: &[f64],
) -> Result<DMatrix<T>> {
    let lu = Lu::new(a);
    let rc = rcond(a);
    if lu.is_singular() || rc < RCOND_FLOOR {
        return Err(GeoError::Singular {
            what,
            point: point.to_vec(),
            cond: 1.0 / rc,
        });
    }
    Ok(lu.inverse())
}

/// Largest absolute asymmetry `|a_ij - a_ji|`.
pub fn max_asymmetry<T: Scalar>(a: &DMatrix<T>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max((a[(i, j)] - a[(j, i)]).abs().re());
        }
    }
    m
}

/// Counts of positive, negative and numerically zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub const fn new(plus: usize, minus: usize, zero: usize) -> Self {
        Self { plus, minus, zero }
    }

    pub fn dim(&self) -> usize {
        self.plus + self.minus + self.zero
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.plus, self.minus, self.zero)
    }
}

/// How a signature was counted; reports record it next to the result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureMethod {
    SymmetricEigen,
    BunchKaufman,
}

/// Default relative zero tolerance for eigenvalues and pivots.
pub const SIGNATURE_TOL: f64 = 1e-9;

/// Symmetry tolerance for matrices fed to [`signature`].
pub const SYMMETRY_TOL: f64 = 1e-14;

/// Signature by symmetric eigen-decomposition. Eigenvalues with
/// `|λ| < tol · max|λ|` count as zero.
pub fn signature(s: &Matrix, tol: f64) -> Result<Signature> {
    let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let asym = max_asymmetry(s);
    if asym > SYMMETRY_TOL * scale {
        return Err(GeoError::NonSymmetric { asym });
    }
    let eig = SymmetricEigen::new(s.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut sig = Signature::new(0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() < tol * lmax || lmax == 0.0 {
            sig.zero += 1;
        } else if l > 0.0 {
            sig.plus += 1;
        } else {
            sig.minus += 1;
        }
    }
    Ok(sig)
}

/// Eigenvalues in ascending order.
pub fn sym_eigenvalues(s: &Matrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(s.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Sylvester inertia by symmetric Bunch–Kaufman pivoting.
///
/// Every reduced entry carries a cancellation-free magnitude bound obtained
/// by running the same elimination on absolute values. A pivot counts as
/// zero when it is below `tol` times its bound, i.e. when it is rounding
/// noise rather than a small but resolved value. This keeps forms whose
/// smallest eigenvalue is far below the largest (such as the `L(u)` block
/// near the bad set) resolvable.
pub fn inertia<T: Scalar>(s: &DMatrix<T>, tol: f64) -> Result<Signature> {
    let n = s.nrows();
    let mut a = s.clone();
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > T::lit(SYMMETRY_TOL) * scale.max(T::one()) {
                return Err(GeoError::NonSymmetric {
                    asym: (a[(i, j)] - a[(j, i)]).abs().re(),
                });
            }
        }
    }
    let mut mag = a.map(|v| v.abs());
    let alpha = T::lit((1.0 + 17f64.sqrt()) / 8.0);
    let tol_t = T::lit(tol);
    let mut sig = Signature::new(0, 0, 0);

    let swap = |a: &mut DMatrix<T>, i: usize, j: usize| {
        if i != j {
            a.swap_rows(i, j);
            a.swap_columns(i, j);
        }
    };

    let mut k = 0;
    while k < n {
        let (mut lam, mut r) = (T::zero(), k);
        for i in k + 1..n {
            if a[(i, k)].abs() > lam {
                lam = a[(i, k)].abs();
                r = i;
            }
        }
        let akk = a[(k, k)].abs();
        let mut two = false;
        if akk.max(lam).is_zero() {
            sig.zero += 1;
            k += 1;
            continue;
        }
        if akk < alpha * lam {
            let mut sigma = T::zero();
            for j in k..n {
                if j != r {
                    sigma = sigma.max(a[(r, j)].abs());
                }
            }
            if akk * sigma >= alpha * lam * lam {
                // 1x1 pivot at k
            } else if a[(r, r)].abs() >= alpha * sigma {
                swap(&mut a, k, r);
                swap(&mut mag, k, r);
            } else {
                swap(&mut a, k + 1, r);
                swap(&mut mag, k + 1, r);
                two = true;
            }
        }
        if !two {
            let d = a[(k, k)];
            let dm = mag[(k, k)];
            if d.abs() <= tol_t * dm {
                sig.zero += 1;
            } else if d > T::zero() {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
            if !d.is_zero() {
                for i in k + 1..n {
                    for j in k + 1..n {
                        let upd = a[(i, k)] * a[(k, j)] / d;
                        let updm = mag[(i, k)] * mag[(k, j)] / d.abs();
                        a[(i, j)] -= upd;
                        mag[(i, j)] += updm;
                    }
                }
            }
            k += 1;
        } else {
            let (p, q, c) = (a[(k, k)], a[(k, k + 1)], a[(k + 1, k + 1)]);
            let det = p * c - q * q;
            let detm = (p * c).abs() + q * q;
            if det.abs() <= tol_t * detm {
                // Degenerate block: classify by its eigenvalues directly.
                let tr = p + c;
                sig.zero += 1;
                if tr.abs() <= tol_t * (p.abs() + c.abs()) {
                    sig.zero += 1;
                } else if tr > T::zero() {
                    sig.plus += 1;
                } else {
                    sig.minus += 1;
                }
            } else if det < T::zero() {
                sig.plus += 1;
                sig.minus += 1;
            } else if p + c > T::zero() {
                sig.plus += 2;
            } else {
                sig.minus += 2;
            }
            if !det.is_zero() {
                let (ip, iq, ic) = (c / det, -q / det, p / det);
                let (ipm, iqm, icm) = (
                    c.abs() / det.abs(),
                    q.abs() / det.abs(),
                    p.abs() / det.abs(),
                );
                for i in k + 2..n {
                    for j in k + 2..n {
                        let (x0, x1) = (a[(i, k)], a[(i, k + 1)]);
                        let (y0, y1) = (a[(k, j)], a[(k + 1, j)]);
                        let upd = x0 * (ip * y0 + iq * y1) + x1 * (iq * y0 + ic * y1);
                        let (m0, m1) = (mag[(i, k)], mag[(i, k + 1)]);
                        let (n0, n1) = (mag[(k, j)], mag[(k + 1, j)]);
                        let updm = m0 * (ipm * n0 + iqm * n1) + m1 * (iqm * n0 + icm * n1);
                        a[(i, j)] -= upd;
                        mag[(i, j)] += updm;
                    }
                }
            }
            k += 2;
        }
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_inverts() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let lu = Lu::new(&a);
        assert!((lu.det() - (-5.0)).abs() < 1e-14);
        let inv = lu.inverse();
        assert!((&a * inv - Matrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = crate::Vector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            solve_guarded(&a, &b, "test", &[0.0]),
            Err(GeoError::Singular { .. })
        ));
    }

    #[test]
    fn diagonal_signature() {
        let s = Matrix::from_diagonal(&crate::Vector::from_vec(vec![1.0, 1.0, 1.0, -1.0, -1.0]));
        assert_eq!(
            signature(&s, SIGNATURE_TOL).unwrap(),
            Signature::new(3, 2, 0)
        );
        assert_eq!(inertia(&s, SIGNATURE_TOL).unwrap(), Signature::new(3, 2, 0));
    }

    #[test]
    fn zero_eigenvalue_counted() {
        let s = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            signature(&s, SIGNATURE_TOL).unwrap(),
            Signature::new(1, 0, 1)
        );
        assert_eq!(inertia(&s, SIGNATURE_TOL).unwrap(), Signature::new(1, 0, 1));
    }

    #[test]
    fn hyperbolic_pair_needs_two_by_two_pivot() {
        let s = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(inertia(&s, SIGNATURE_TOL).unwrap(), Signature::new(2, 1, 0));
    }

    #[test]
    fn non_symmetric_rejected() {
        let s = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(signature(&s, SIGNATURE_TOL).is_err());
        assert!(inertia(&s, SIGNATURE_TOL).is_err());
    }
}
