use anyhow::Result;
use geofol_core::connection::geodesic_residual;
use geofol_core::frame::{
    flat, flat_exterior_derivative_fd, metric_signature, MetricField, VectorField,
};
use geofol_core::integrate::integrate_flow;
use geofol_core::linalg::{Signature, SIGNATURE_TOL};
use geofol_core::metrics::LightlikeModel;
use geofol_core::thurston::{ThurstonField, DIM, IU};
use geofol_core::Vector;
use std::f64::consts::TAU;

use super::{count_failures, cross_path, max_of, quotient_points, Ctx};
use crate::report::{Check, Section};

const ANCHOR_FRAME: &str =
    "metric with g(X,du)=1 and identity block in the frame (X, du, V1, V2, 2dt+dz)";

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let mut sec = Section::new("verify-lightlike");
    let m = LightlikeModel::default();
    sec.model("lightlike", &serde_json::json!({ "block": m.block }));
    let pts = quotient_points(&mut ctx.rng(1), cfg.sampling.points);
    let x = ThurstonField::X;

    let bad_sig = count_failures(&pts, |p| {
        Ok(metric_signature(&m, p, SIGNATURE_TOL)? == Signature::new(4, 1, 0))
    })?;
    sec.push(Check::none(
        "Lorentzian signature (4,1)",
        ANCHOR_FRAME,
        bad_sig,
    ));

    let gxx = max_of(&pts, |p| {
        let v = x.at(p)?;
        Ok(m.inner(p, v.as_slice(), v.as_slice()).abs())
    })?;
    sec.push(Check::at_most("|g(X,X)|", "X is lightlike", gxx, 1e-12));

    let du = Vector::from_fn(DIM, |i, _| if i == IU { 1.0 } else { 0.0 });
    let flat_err = max_of(&pts, |p| Ok((flat(&m, &x, p)? - &du).amax()))?;
    sec.push(Check::at_most(
        "|X-flat - du|",
        "the metric dual of X is du",
        flat_err,
        1e-12,
    ));

    let h = cfg.sampling.fd_step;
    let dflat = max_of(&pts, |p| {
        Ok(flat_exterior_derivative_fd(&m, &x, p, h)?.amax())
    })?;
    sec.push(Check::at_most(
        "|d(X-flat)| (finite differences)",
        "the metric dual of X is closed",
        dflat,
        1e-8,
    ));

    let res = max_of(&pts, |p| Ok(geodesic_residual(&m, &x, p)?))?;
    sec.push(Check::at_most(
        "geodesic residual |D_X X|",
        "Thurston's field X is geodesic: D_X X = 0",
        res,
        1e-7,
    ));

    use ThurstonField::*;
    let fields = [X, Du, V1, V2, Null, Dt, Dz, Dx, Dy];
    let cp = cross_path(
        &m,
        &fields,
        &mut ctx.rng(2),
        cfg.sampling.cross_path_inputs,
        0.0,
    )?;
    sec.push(Check::at_most(
        "Koszul vs Christoffel covariant derivative",
        "Levi-Civita connection via the Koszul formula",
        cp,
        1e-8,
    ));

    let start = [
        cfg.orbit.start[0],
        cfg.orbit.start[1],
        cfg.orbit.start[2],
        cfg.orbit.start[3],
        1.0,
    ];
    let traj = integrate_flow(x, &start, TAU, cfg.run.tol)?;
    ctx.write_flow_csv(&mut sec, "x_flow_u1", &traj, &x, &m)?;
    Ok(sec)
}
