use std::f64::consts::TAU;

use anyhow::Result;
use geofol_core::integrate::ClosureOpts;
use geofol_core::surfaces::{sc_audit, AuditOpts, CausalType, ScAudit, Surface};

use super::Ctx;
use crate::report::{Check, Section};

const ANCHOR_SC: &str =
    "SC-metric: all geodesics of the type are simply closed with the same length";
const ANCHOR_NOZOLL: &str =
    "a compact Lorentzian surface contains a nonclosed spacelike or timelike geodesic";

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let sc = &cfg.surfaces;
    let mut sec = Section::new("surface-audit");
    let opts = AuditOpts {
        closure: ClosureOpts {
            tol: sc.closure_tol,
            horizon: sc.horizon,
            integrator_tol: sc.integrator_tol,
            ..Default::default()
        },
        escape_radius: sc.escape_radius,
        ..Default::default()
    };
    let s21 = Surface::PseudoSphere { r: sc.radius };
    let s21_box = [sc.w_range, [0.0, TAU]];
    let torus_box = [[0.0, TAU], [0.0, TAU]];
    let seed = cfg.run.seed;
    let n = sc.samples;
    let runs: Vec<(Surface, CausalType, [[f64; 2]; 2], u64)> = vec![
        (s21, CausalType::Spacelike, s21_box, 51),
        (s21, CausalType::Timelike, s21_box, 52),
        (s21, CausalType::Lightlike, s21_box, 53),
        (Surface::EinsteinTorus, CausalType::Lightlike, torus_box, 54),
        (Surface::EinsteinTorus, CausalType::Spacelike, torus_box, 55),
        (Surface::EinsteinTorus, CausalType::Timelike, torus_box, 56),
    ];
    let audits: Vec<ScAudit> = {
        use rayon::prelude::*;
        runs.par_iter()
            .map(|(s, c, bx, stream)| {
                sc_audit(
                    s,
                    *c,
                    n,
                    seed.wrapping_mul(1000).wrapping_add(*stream),
                    *bx,
                    &opts,
                )
            })
            .collect::<std::result::Result<_, _>>()?
    };
    let (sp, tl, s21_null, tor_null) = (&audits[0], &audits[1], &audits[2], &audits[3]);

    sec.push(Check::at_least(
        "S2_1 spacelike: fraction closed",
        ANCHOR_SC,
        sp.fraction_closed,
        1.0,
    ));
    sec.push(Check::holds(
        "S2_1 spacelike: all closed geodesics simple",
        ANCHOR_SC,
        sp.all_simple,
    ));
    sec.push(Check::at_most(
        "S2_1 spacelike: length dispersion (max/min - 1)",
        ANCHOR_SC,
        sp.length_dispersion,
        1e-3,
    ));
    sec.push(Check::at_most(
        "S2_1 spacelike: |mean length - 2 pi r| / (2 pi r)",
        "spacelike geodesics of the pseudo-sphere are closed (common length 2 pi r)",
        (sp.mean_length - TAU * sc.radius).abs() / (TAU * sc.radius),
        1e-3,
    ));
    sec.push(Check::at_most(
        "S2_1 timelike: fraction closed",
        ANCHOR_NOZOLL,
        tl.fraction_closed,
        0.0,
    ));
    sec.push(Check::at_least(
        "S2_1 timelike: smallest max |w| (escape witness)",
        ANCHOR_NOZOLL,
        tl.min_escape,
        10.0,
    ));
    sec.push(Check::at_least(
        "Einstein torus lightlike: fraction closed",
        "all lightlike geodesics of the Einstein torus are closed",
        tor_null.fraction_closed,
        1.0,
    ));
    sec.push(Check::at_most(
        "Einstein torus lightlike: |period - 2 pi|",
        "all lightlike geodesics of the Einstein torus are closed",
        tor_null.max_period_error_2pi,
        1e-6,
    ));
    let drift = [sp, tl, s21_null]
        .iter()
        .map(|a| a.max_constraint_drift)
        .fold(0.0, f64::max);
    sec.push(Check::at_most(
        "S2_1 embedding constraint drift (relative to |F|^2)",
        "pseudo-sphere: <x,x> = r^2 in R^3_1",
        drift,
        1e-8,
    ));
    let energy = audits
        .iter()
        .map(|a| a.max_energy_drift)
        .fold(0.0, f64::max);
    sec.push(Check::at_most(
        "energy drift over all audited geodesics",
        "g(gamma', gamma') is constant along geodesics",
        energy,
        100.0 * sc.integrator_tol,
    ));
    let both = [(&audits[0], &audits[1]), (&audits[4], &audits[5])]
        .iter()
        .filter(|(a, b)| a.fraction_closed == 1.0 && b.fraction_closed == 1.0)
        .count();
    sec.push(Check::none(
        "surfaces with both spacelike and timelike families all closed",
        ANCHOR_NOZOLL,
        both,
    ));

    let summary: Vec<serde_json::Value> = audits
        .iter()
        .map(|a| {
            serde_json::json!({
                "surface": a.surface, "causal": a.causal, "seed": a.seed, "samples": a.samples,
                "closed": a.closed, "fraction_closed": a.fraction_closed,
                "length_dispersion": a.length_dispersion, "mean_length": a.mean_length,
                "all_simple": a.all_simple, "escaped": a.escaped, "min_escape": a.min_escape,
            })
        })
        .collect();
    sec.table("audits", &summary);
    sec.table(
        "records",
        &audits.iter().map(|a| &a.records).collect::<Vec<_>>(),
    );
    Ok(sec)
}
