use std::f64::consts::{PI, TAU};

use anyhow::Result;
use geofol_core::integrate::{flow_at, integrate_flow, ClosureOpts};
use geofol_core::metrics::LightlikeModel;
use geofol_core::thurston::{
    exact_flow, leaf_length_profile, FlowKind, LeafField, LeafRow, Profile, ThurstonField, IU,
};
use rand::Rng;

use super::{max_of, quotient_point, Ctx};
use crate::report::{Check, Section};

/// `min over C in {π, 2π} of |c − C| / C`.
fn constant_distance(c: f64) -> f64 {
    [PI, TAU]
        .iter()
        .map(|k| (c - k).abs() / k)
        .fold(f64::INFINITY, f64::min)
}

fn spread(rows: &[LeafRow]) -> f64 {
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| {
        (a.min(r.normalized), b.max(r.normalized))
    });
    hi / lo - 1.0
}

fn sweep(sec: &mut Section, label: &str, factor: &str, rows: &[LeafRow], tol: f64) {
    let open = rows.iter().filter(|r| !r.closed).count();
    sec.push(Check::none(
        &format!("{label}: unclosed leaves"),
        "the leaves are circles",
        open,
    ));
    let resid = rows.iter().map(|r| r.closure_residual).fold(0.0, f64::max);
    sec.push(Check::at_most(
        &format!("{label}: closure residual"),
        "the leaves are circles",
        resid,
        tol,
    ));
    sec.push(Check::at_most(
        &format!("{label}: spread of length*{factor}"),
        "leaf length is a constant over the speed factor",
        spread(rows),
        1e-3,
    ));
    let mut sorted: Vec<&LeafRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.u0.total_cmp(&b.u0));
    let inversions = sorted
        .windows(2)
        .filter(|w| !(w[0].length > w[1].length))
        .count();
    sec.push(Check::none(
        &format!("{label}: lengths increase as u0 decreases"),
        "leaf lengths are unbounded towards the bad set",
        inversions,
    ));
    let mean = rows.iter().map(|r| r.normalized).sum::<f64>() / rows.len().max(1) as f64;
    sec.push(Check::at_most(
        &format!("{label}: constant C in {{pi, 2pi}} (relative distance)"),
        "leaf length 2 pi / sin^2 u up to the normalization of the auxiliary metric",
        constant_distance(mean),
        1e-3,
    ));
}

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let oc = &cfg.orbit;
    let mut sec = Section::new("orbit-sweep");
    let opts = ClosureOpts {
        tol: oc.closure_tol,
        horizon: oc.horizon,
        integrator_tol: oc.integrator_tol,
        ..Default::default()
    };

    let xrows = leaf_length_profile(LeafField::X, oc.start, &oc.u0, &opts)?;
    sweep(&mut sec, "X", "sin^2(u0)", &xrows, oc.closure_tol);
    sec.table("leaves_x", &xrows);

    if !oc.xxi_u0.is_empty() {
        let xopts = ClosureOpts {
            horizon: oc.xxi_horizon,
            ..opts
        };
        let rows = leaf_length_profile(LeafField::Xxi(Profile::Xi), oc.start, &oc.xxi_u0, &xopts)?;
        sweep(&mut sec, "X_xi", "xi^2(u0)", &rows, oc.closure_tol);
        sec.table("leaves_xxi", &rows);
    }

    let mut rng = ctx.rng(31);
    let starts: Vec<Vec<f64>> = (0..oc.flow_starts)
        .map(|_| {
            let mut p = quotient_point(&mut rng);
            let u: f64 = rng.gen_range(0.3..PI - 0.3);
            p[IU] = if rng.gen_bool(0.5) { u } else { -u };
            p
        })
        .collect();
    let sup = max_of(&starts, |p| {
        let grid: Vec<f64> = (0..=200).map(|i| TAU * i as f64 / 200.0).collect();
        let ys = flow_at(ThurstonField::W, p, &grid, cfg.run.tol)?;
        let mut worst = 0.0f64;
        for (s, y) in grid.iter().zip(&ys) {
            let e = exact_flow(FlowKind::W, p, *s)?;
            worst = worst.max(
                y.iter()
                    .zip(&e)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
        Ok(worst)
    })?;
    sec.push(Check::at_most(
        "sup |numerical W-flow - closed form| on [0, 2pi]",
        "closed-form flow of W",
        sup,
        1e-8,
    ));
    let period = max_of(&starts, |p| {
        let e = exact_flow(FlowKind::W, p, TAU)?;
        let mut d = 0.0f64;
        for i in 0..p.len() {
            let target = if i == 3 { p[i] + TAU } else { p[i] };
            d = d.max((e[i] - target).abs());
        }
        Ok(d)
    })?;
    sec.push(Check::at_most(
        "|phi_2pi - id| (t mod 2pi)",
        "the flow of W is 2 pi periodic",
        period,
        1e-10,
    ));

    let g = LightlikeModel::default();
    for r in xrows.iter().filter(|r| r.closed) {
        let p0 = [oc.start[0], oc.start[1], oc.start[2], oc.start[3], r.u0];
        let traj = integrate_flow(ThurstonField::X, &p0, r.period, cfg.run.tol)?;
        ctx.write_flow_csv(
            &mut sec,
            &format!("leaf_x_u{}", r.u0),
            &traj,
            &ThurstonField::X,
            &g,
        )?;
    }
    Ok(sec)
}
