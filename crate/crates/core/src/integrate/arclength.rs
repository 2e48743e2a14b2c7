//! Adaptive Gauss–Kronrod (7, 15) quadrature on dense output.

use super::Trajectory;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f` by adaptive bisection until each piece's Kronrod–Gauss
/// difference is below `rel · |total|`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64) -> f64 {
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (k, e) = gk15(f, a, b);
        if e <= tol || depth == 0 {
            return k;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    let (k, _) = gk15(&mut f, a, b);
    rec(&mut f, a, b, rel * k.abs().max(f64::MIN_POSITIVE), 16)
}

/// `∫ speed(γ(s)) ds` over `[s0, s1]`, one quadrature per integrator step.
pub fn arc_length<S: Fn(&[f64]) -> f64>(traj: &Trajectory, s0: f64, s1: f64, speed: &S) -> f64 {
    let mut total = 0.0;
    for seg in &traj.segments {
        let a = seg.s0.max(s0);
        let b = (seg.s0 + seg.h).min(s1);
        if b <= a {
            continue;
        }
        total += gauss_kronrod(
            |s| speed(&seg.dense.eval((s - seg.s0) / seg.h, seg.h)),
            a,
            b,
            1e-13,
        );
    }
    total
}
