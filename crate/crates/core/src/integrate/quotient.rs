//! Fundamental domains and quotient distances.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::thurston::{LatticeWord, IT, IU, IX, IY, IZ};

/// Lattice acting on the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quotient {
    None,
    /// `Γ × (2πℤ)²` on `(x, y, z, t, u)`.
    HeisenbergTorus,
    /// Translation by `2π` along the flagged coordinates.
    Torus(Vec<bool>),
}

/// Element of whichever lattice is in use: a Heisenberg word, or integer
/// shifts along periodic axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Word {
    Heisenberg(LatticeWord),
    Shifts(Vec<i64>),
}

impl Word {
    pub fn act(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Word::Heisenberg(w) => w.act(p).to_vec(),
            Word::Shifts(k) => p.iter().zip(k).map(|(x, k)| x + TAU * *k as f64).collect(),
        }
    }

    /// Differential of the action on a tangent vector.
    pub fn push(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Word::Heisenberg(w) => w.push(v).to_vec(),
            Word::Shifts(_) => v.to_vec(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Word) -> Word {
        match (self, other) {
            (Word::Heisenberg(a), Word::Heisenberg(b)) => Word::Heisenberg(a.compose(b)),
            (Word::Shifts(a), Word::Shifts(b)) => {
                Word::Shifts(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => panic!("composing words of different lattices"),
        }
    }
}

/// `floor` with a guard so that the reduced value is strictly below the
/// period even when `x` sits a rounding error under a lattice point.
fn shift_into(x: f64, period: f64) -> i64 {
    let mut k = -(x / period).floor();
    if x + k * period >= period {
        k -= 1.0;
    }
    if x + k * period < 0.0 {
        k += 1.0;
    }
    k as i64
}

impl Quotient {
    /// Representative in the fundamental domain and the word reaching it.
    /// For the Heisenberg lattice `x` is reduced first, then `y`, then `z`.
    pub fn reduce(&self, p: &[f64]) -> (Vec<f64>, Word) {
        match self {
            Quotient::None => (p.to_vec(), Word::Shifts(vec![0; p.len()])),
            Quotient::HeisenbergTorus => {
                let a = shift_into(p[IX], 1.0);
                let b = shift_into(p[IY], 1.0);
                let z1 = p[IZ] + a as f64 * p[IY];
                let c = shift_into(z1, 1.0);
                let w = LatticeWord {
                    a,
                    b,
                    c,
                    mt: shift_into(p[IT], TAU),
                    mu: shift_into(p[IU], TAU),
                };
                let mut q = w.act(p);
                // the z update can round up to exactly 1
                for i in [IX, IY, IZ] {
                    if q[i] >= 1.0 {
                        q[i] -= 1.0;
                    }
                }
                (q.to_vec(), Word::Heisenberg(w))
            }
            Quotient::Torus(axes) => {
                let k: Vec<i64> = p
                    .iter()
                    .zip(axes)
                    .map(|(x, &per)| if per { shift_into(*x, TAU) } else { 0 })
                    .collect();
                let w = Word::Shifts(k);
                (w.act(p), w)
            }
        }
    }

    /// Word `n` minimising `|n·q − target|`. Translations along `y`, `t`,
    /// `u` and the flat axes separate; for the Heisenberg `x` shift the
    /// coupled `z` shift is optimal in closed form, so three candidates
    /// suffice.
    pub fn nearest(&self, q: &[f64], target: &[f64]) -> Word {
        let round = |d: f64, period: f64| (d / period).round() as i64;
        match self {
            Quotient::None => Word::Shifts(vec![0; q.len()]),
            Quotient::Torus(axes) => Word::Shifts(
                q.iter()
                    .zip(target)
                    .zip(axes)
                    .map(|((a, b), &per)| if per { round(b - a, TAU) } else { 0 })
                    .collect(),
            ),
            Quotient::HeisenbergTorus => {
                let b = round(target[IY] - q[IY], 1.0);
                let mt = round(target[IT] - q[IT], TAU);
                let mu = round(target[IU] - q[IU], TAU);
                let a0 = round(target[IX] - q[IX], 1.0);
                let mut best = (f64::INFINITY, LatticeWord::IDENTITY);
                for a in a0 - 1..=a0 + 1 {
                    let c = round(target[IZ] - q[IZ] - a as f64 * q[IY], 1.0);
                    let dx = q[IX] + a as f64 - target[IX];
                    let dz = q[IZ] + c as f64 + a as f64 * q[IY] - target[IZ];
                    let e = dx * dx + dz * dz;
                    if e < best.0 {
                        best = (e, LatticeWord { a, b, c, mt, mu });
                    }
                }
                Word::Heisenberg(best.1)
            }
        }
    }

    /// Reduced reference point, reused across many distance evaluations.
    pub fn anchor(&self, p: &[f64], v: &[f64]) -> Anchor {
        let (q, w) = self.reduce(p);
        let dir = unit(&w.push(v));
        Anchor {
            point: q,
            dir,
            quotient: self.clone(),
        }
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

/// Angle between unit vectors, accurate for small angles.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let d = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    2.0 * (0.5 * d).min(1.0).asin()
}

#[derive(Clone, Debug)]
pub struct Anchor {
    pub point: Vec<f64>,
    pub dir: Vec<f64>,
    quotient: Quotient,
}

impl Anchor {
    /// Quotient distance from `p` to the anchor and the angle between the
    /// velocities once `v` is transported by the same word.
    pub fn distance(&self, p: &[f64], v: &[f64]) -> (f64, f64) {
        let (q, w) = self.quotient.reduce(p);
        let n = self.quotient.nearest(&q, &self.point);
        let r = n.act(&q);
        let d = r
            .iter()
            .zip(&self.point)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let word = n.compose(&w);
        (d, angle(&unit(&word.push(v)), &self.dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_z_only() {
        let (q, w) = Quotient::HeisenbergTorus.reduce(&[0.5, 0.3, 2.7, 1.0, 1.0]);
        assert!((q[IZ] - 0.7).abs() < 1e-12);
        assert_eq!(
            w,
            Word::Heisenberg(LatticeWord {
                c: -2,
                ..LatticeWord::IDENTITY
            })
        );
    }

    #[test]
    fn reduces_x_through_group_law() {
        let (q, _) = Quotient::HeisenbergTorus.reduce(&[1.5, 0.3, 0.0, 1.0, 1.0]);
        assert!(
            (q[IX] - 0.5).abs() < 1e-12
                && (q[IY] - 0.3).abs() < 1e-12
                && (q[IZ] - 0.7).abs() < 1e-12,
            "{q:?}"
        );
    }

    #[test]
    fn distance_sees_through_the_lattice() {
        let a = Quotient::HeisenbergTorus.anchor(
            &[0.999_999_9, 0.2, 0.5, 0.1, 0.1],
            &[1.0, 0.0, 0.0, 0.0, 0.0],
        );
        let (d, ang) = a.distance(
            &[1.000_000_1, 0.2, 0.5, 0.1, 0.1],
            &[1.0, 0.0, 0.0, 0.0, 0.0],
        );
        assert!(d < 1e-6 && ang < 1e-12, "{d} {ang}");
    }
}
