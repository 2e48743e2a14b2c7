use std::f64::consts::{PI, TAU};

use anyhow::Result;
use geofol_core::integrate::integrate_geodesic;
use geofol_core::linalg::Signature;
use geofol_core::sasaki::{
    causal_sign, decomposition_defects, sasaki_signature, tangent_lift_check, LiftReport,
    SasakiMetric,
};
use geofol_core::surfaces::{random_state, CausalType, Surface};
use rand::Rng;
use serde::Serialize;

use super::Ctx;
use crate::report::{Check, Section};

const ANCHOR_LIFT: &str =
    "the tangent curve of every geodesic is a geodesic of the Sasaki metric of the same causal character";

#[derive(Serialize)]
struct LiftRow {
    surface: String,
    causal: CausalType,
    x0: Vec<f64>,
    v0: Vec<f64>,
    report: LiftReport,
    energy_drift: f64,
}

/// Base models with the chart box used for random states.
fn bases() -> Vec<(Surface, [[f64; 2]; 2], Vec<CausalType>)> {
    use CausalType::*;
    vec![
        (
            Surface::PseudoSphere { r: 1.0 },
            [[-1.0, 1.0], [0.0, TAU]],
            vec![Spacelike, Timelike, Lightlike],
        ),
        (
            Surface::Minkowski,
            [[-1.0, 1.0], [-1.0, 1.0]],
            vec![Spacelike, Timelike, Lightlike],
        ),
        (
            Surface::EinsteinTorus,
            [[0.0, TAU], [0.0, TAU]],
            vec![Lightlike],
        ),
        (
            Surface::RoundSphere,
            [[0.5, PI - 0.5], [0.0, TAU]],
            vec![Spacelike],
        ),
        (
            Surface::FlatPlane,
            [[-1.0, 1.0], [-1.0, 1.0]],
            vec![Spacelike],
        ),
    ]
}

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let sc = &cfg.sasaki;
    let mut sec = Section::new("sasaki-check");
    let mut rng = ctx.rng(41);
    let mut states = Vec::new();
    for (s, bx, types) in bases() {
        for c in types {
            for _ in 0..sc.geodesics_per_type {
                let (x, v) = random_state(&s, c, bx, &mut rng)?;
                states.push((s, c, x, v));
            }
        }
    }
    let rows: Vec<LiftRow> = {
        use rayon::prelude::*;
        states
            .par_iter()
            .map(|(s, c, x, v)| -> Result<LiftRow> {
                let traj = integrate_geodesic(*s, x, v, sc.span, cfg.run.tol)?;
                let report =
                    tangent_lift_check(&SasakiMetric(*s), &traj, sc.samples, sc.fd_step, 1e-9)?;
                Ok(LiftRow {
                    surface: s.name(),
                    causal: *c,
                    x0: x.clone(),
                    v0: v.clone(),
                    report,
                    energy_drift: traj.energy_drift(),
                })
            })
            .collect::<Result<_>>()?
    };
    let worst = |f: &dyn Fn(&LiftRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    sec.push(Check::at_most(
        "lift geodesic residual (FD Christoffels)",
        ANCHOR_LIFT,
        worst(&|r| r.report.max_residual),
        1e-5,
    ));
    sec.push(Check::at_most(
        "|gbar(c',c') - g(gamma',gamma')|",
        ANCHOR_LIFT,
        worst(&|r| r.report.max_energy_defect),
        1e-10,
    ));
    sec.push(Check::none(
        "lifts with a different causal character",
        ANCHOR_LIFT,
        rows.iter()
            .filter(|r| !r.report.same_causal_character)
            .count(),
    ));
    sec.push(Check::at_most(
        "energy drift of base geodesics",
        "g(gamma', gamma') is constant along geodesics",
        worst(&|r| r.energy_drift),
        100.0 * cfg.run.tol,
    ));
    let mink: Vec<i8> = rows
        .iter()
        .filter(|r| r.surface == Surface::Minkowski.name())
        .map(|r| causal_sign(r.report.g_vv, 1e-9))
        .collect();
    sec.push(Check::holds(
        "lifts of all three causal characters coexist over the Minkowski plane",
        "the tangent bundle of a non-Riemannian base carries lifted geodesics of every causal character",
        [-1i8, 0, 1].iter().all(|s| mink.contains(s)),
    ));

    let mut worst_dec = [0.0f64; 3];
    let mut bad_sig = 0;
    for (s, bx, _) in bases() {
        let m = SasakiMetric(s);
        let base_sig = geofol_core::frame::metric_signature(&s, &[bx[0][0], bx[1][0]], 1e-9)?;
        for _ in 0..20 {
            let x = [
                rng.gen_range(bx[0][0]..bx[0][1]),
                rng.gen_range(bx[1][0]..bx[1][1]),
            ];
            let mut r = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (v, xd, vd) = (r(), r(), r());
            let d = decomposition_defects(&m, &x, &v, &xd, &vd)?;
            for i in 0..3 {
                worst_dec[i] = worst_dec[i].max(d[i]);
            }
            let want = Signature::new(2 * base_sig.plus, 2 * base_sig.minus, 0);
            if sasaki_signature(&m, &x, &v)? != want {
                bad_sig += 1;
            }
        }
    }
    sec.push(Check::at_most(
        "|gbar(H,H) - g(x',x')| for horizontal H",
        "the bundle projection is a pseudo-Riemannian submersion",
        worst_dec[0],
        1e-10,
    ));
    sec.push(Check::at_most(
        "|gbar(V,V) - g(v',v')| for vertical V",
        "connection map K: vertical part isometric to g",
        worst_dec[1],
        1e-10,
    ));
    sec.push(Check::at_most(
        "|gbar(H,V)|",
        "horizontal and vertical subspaces are orthogonal",
        worst_dec[2],
        1e-10,
    ));
    sec.push(Check::none(
        "Sasaki signature is twice the base signature",
        "Sasaki metric gbar on TM",
        bad_sig,
    ));
    sec.table("lifts", &rows);
    Ok(sec)
}
