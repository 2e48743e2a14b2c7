use std::f64::consts::PI;

use anyhow::Result;
use geofol_core::connection::geodesic_residual;
use geofol_core::frame::{lie_bracket, lie_bracket_with_scale, MetricField, VectorField};
use geofol_core::integrate::integrate_flow;
use geofol_core::linalg::{inertia, Signature, SIGNATURE_TOL};
use geofol_core::metrics::{divergence_trace, divergence_volume, TypeChangeModel};
use geofol_core::thurston::{dist_to_bad_set, Profile, ThurstonField, IU};
use geofol_core::{Ext, Vector};
use nalgebra::{DMatrix, DVector};
use num_traits::{Float, Zero};
use rand::Rng;

use super::{count_failures, cross_path, max_of, quotient_point, quotient_points, u_grid, Ctx};
use crate::report::{Check, Section};

const ANCHOR_GLUE: &str = "G0, g1 = diag(+1, M), g2 = diag(-1, N) glue together in a smooth metric";
const ANCHOR_SIG: &str = "the glued metric has signature (3,2)";
const ANCHOR_GEO: &str = "D_{X_xi} X_xi = 0 for the glued metric";

/// `g(A, B)` through base-frame coefficients, in extended range.
fn frame_pair(m: &TypeChangeModel, a: ThurstonField, b: ThurstonField, u: f64) -> Option<Ext> {
    let ue = Ext::from_f64(u);
    let g: DMatrix<Ext> = m.base_gram(ue);
    let ca: DVector<Ext> = a.frame_coeffs(ue)?;
    let cb: DVector<Ext> = b.frame_coeffs(ue)?;
    Some(ca.dot(&(g * cb)))
}

fn sign_of(v: Ext) -> i8 {
    if v.is_zero() {
        0
    } else if v > Ext::zero() {
        1
    } else {
        -1
    }
}

fn expected_sign(u: f64) -> i8 {
    if dist_to_bad_set(u) == 0.0 {
        0
    } else if u.sin() > 0.0 {
        1
    } else {
        -1
    }
}

fn start(ctx: &Ctx, u: f64) -> Vec<f64> {
    let s = ctx.cfg.orbit.start;
    vec![s[0], s[1], s[2], s[3], u]
}

/// Checks shared by both profiles.
fn common(ctx: &Ctx, m: &TypeChangeModel, sec: &mut Section) -> Result<()> {
    let cfg = ctx.cfg;
    let grid = u_grid(cfg.sampling.u_grid);

    let n = cfg.typechange.audit_points.max(2);
    let audit_u = u_grid(n);
    let bad = count_failures(&audit_u, |&u| {
        let g: DMatrix<Ext> = m.base_gram(Ext::from_f64(u));
        Ok(inertia(&g, SIGNATURE_TOL)? == Signature::new(3, 2, 0))
    })?;
    sec.push(Check::none(
        "signature (3,2) of the glued metric",
        ANCHOR_SIG,
        bad,
    ));
    let bad = count_failures(&audit_u, |&u| {
        Ok(m.branch_signature(u)? == Signature::new(3, 2, 0))
    })?;
    sec.push(Check::none(
        "signature (3,2) of each branch Gram matrix",
        ANCHOR_SIG,
        bad,
    ));

    let seams = m.seams();
    let h = cfg.sampling.fd_step;
    let (r1, r2) = seams.iter().fold((0.0f64, 0.0f64), |(a, b), &u| {
        let [x, y] = m.seam_defect(&start(ctx, u), h);
        (a.max(x), b.max(y))
    });
    sec.push(Check::at_most(
        "seam jump of d/du metric (relative)",
        ANCHOR_GLUE,
        r1,
        1e-6,
    ));
    sec.push(Check::at_most(
        "seam jump of d2/du2 metric (relative)",
        ANCHOR_GLUE,
        r2,
        1e-6,
    ));
    sec.table("seams", &seams);

    let pts = quotient_points(&mut ctx.rng(11), cfg.sampling.points);
    let x = ThurstonField::Xxi(m.profile);
    let res = max_of(&pts, |p| Ok(geodesic_residual(m, &x, p)?))?;
    sec.push(Check::at_most(
        "geodesic residual |D_X X| incl. bad set",
        ANCHOR_GEO,
        res,
        1e-6,
    ));

    let dv = max_of(&pts, |p| Ok(divergence_volume(m, &x, p)?.abs()))?;
    let dt = max_of(&pts, |p| Ok(divergence_trace(m, &x, p)?.abs()))?;
    let dd = max_of(&pts, |p| {
        Ok((divergence_volume(m, &x, p)? - divergence_trace(m, &x, p)?).abs())
    })?;
    sec.push(Check::at_most(
        "|div X| (volume form)",
        "X_xi is divergence free",
        dv,
        1e-8,
    ));
    sec.push(Check::at_most(
        "|div X| (trace of DX)",
        "X_xi is divergence free",
        dt,
        1e-8,
    ));
    sec.push(Check::at_most(
        "volume vs trace divergence",
        "X_xi is divergence free",
        dd,
        1e-9,
    ));

    use ThurstonField::*;
    let p = m.profile;
    let fields = [Dt, V1, V2, Dz, Du, Xxi(p), Wxi(p), Yxi(p)];
    let cp = cross_path(
        m,
        &fields,
        &mut ctx.rng(12),
        cfg.sampling.cross_path_inputs,
        0.5,
    )?;
    sec.push(Check::at_most(
        "Koszul vs Christoffel covariant derivative",
        "Levi-Civita connection via the Koszul formula",
        cp,
        1e-8,
    ));

    let gxx_abs = max_of(&grid, |&u| {
        let q = start(ctx, u);
        let v = x.at(&q)?;
        let pv = m.profile.eval(u);
        Ok((m.inner(&q, v.as_slice(), v.as_slice()) - 4.0 * pv.f.powi(3) * pv.a).abs())
    })?;
    sec.push(Check::at_most(
        "|g(X,X) - 4 xi^3 |xi||",
        "g(X_xi, X_xi) = 4 xi^3 |xi|",
        gxx_abs,
        1e-12,
    ));

    let u1 = start(ctx, 1.0);
    let span = PI / m.profile.eval(1.0f64).f.powi(2);
    let traj = integrate_flow(x, &u1, span, cfg.run.tol)?;
    ctx.write_flow_csv(
        sec,
        &format!("xxi_{}_flow_u1", m.profile.name()),
        &traj,
        &x,
        m,
    )?;
    Ok(())
}

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let mut sec = Section::new("verify-typechange");
    let m = TypeChangeModel::new(&cfg.core_typechange(Profile::Xi))?;
    sec.model("typechange-xi", &m);
    let prof = Profile::Xi;

    sec.push(Check::at_least(
        "certified eta",
        "there exists eta > 0 with G0 of signature (3,2)",
        m.eta,
        0.1,
    ));
    sec.push(Check::holds(
        "interpolated block signatures (2,2) on (0,pi), (3,1) on (-pi,0)",
        "smooth maps M, N of constant signature coinciding with L near the ends",
        m.audit.m_signature == Signature::new(2, 2, 0)
            && m.audit.n_signature == Signature::new(3, 1, 0),
    ));

    common(ctx, &m, &mut sec)?;
    let grid = u_grid(cfg.sampling.u_grid);
    let x = ThurstonField::Xxi(prof);

    let bad_sign = count_failures(&grid, |&u| {
        Ok(frame_pair(&m, x, x, u).map(sign_of) == Some(expected_sign(u)))
    })?;
    sec.push(Check::none(
        "sign of g(X,X): + on (0,pi), 0 on {0,pi}, - on (-pi,0)",
        "X_xi is spacelike, lightlike on the bad set, timelike: the metric changes type",
        bad_sign,
    ));
    let rel = max_of(&grid, |&u| {
        let ue = Ext::from_f64(u);
        let v = prof.eval(ue);
        let want = Ext::from_f64(4.0) * v.f * v.f * v.f * v.a;
        let got = frame_pair(&m, x, x, u).unwrap_or(Ext::from_f64(f64::NAN));
        Ok(if want.is_zero() {
            if got.is_zero() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            ((got - want) / want).abs().value()
        })
    })?;
    sec.push(Check::at_most(
        "relative error of g(X,X) against 4 xi^3 |xi| (frame path)",
        "g(X_xi, X_xi) = 4 xi^3 |xi|",
        rel,
        1e-12,
    ));

    let w = ThurstonField::Wxi(prof);
    for (label, side) in [("(0,pi)", 1.0), ("(-pi,0)", -1.0)] {
        let us: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|&u| u * side > 0.0 && dist_to_bad_set(u) > 1e-3)
            .collect();
        let e = max_of(&us, |&u| {
            Ok((frame_pair(&m, w, w, u)
                .map(|v| v.value())
                .unwrap_or(f64::NAN)
                - side)
                .abs())
        })?;
        sec.push(Check::at_most(
            &format!("|g(W,W) - ({side:+})| on {label}"),
            "g(W_xi, W_xi) = |xi|/xi = +-1",
            e,
            1e-10,
        ));
    }

    let mut rng = ctx.rng(13);
    let far: Vec<Vec<f64>> = (0..cfg.sampling.points.min(200))
        .map(|_| {
            let mut p = quotient_point(&mut rng);
            while dist_to_bad_set(p[IU]) < 0.5 {
                p[IU] = rng.gen_range(-PI..PI);
            }
            p
        })
        .collect();
    let orth_fields = [
        ThurstonField::V1,
        ThurstonField::V2,
        ThurstonField::Dz,
        ThurstonField::Yxi(prof),
    ];
    let orth = max_of(&far, |p| {
        let xv = x.at(p)?;
        let mut worst = 0.0f64;
        for e in orth_fields {
            worst = worst.max(m.inner(p, xv.as_slice(), e.at(p)?.as_slice()).abs());
        }
        Ok(worst)
    })?;
    sec.push(Check::at_most(
        "max |g(X, E)|, E in {V1, V2, dz, Y}",
        "X_xi-orthogonal space spanned by V1, V2, dz, Y",
        orth,
        1e-10,
    ));
    let fact2 = max_of(&far, |p| {
        let wv = w.at(p)?;
        let mut worst = 0.0f64;
        for e in orth_fields {
            let br = lie_bracket(&w, &e, p)?;
            worst = worst.max(m.inner(p, wv.as_slice(), br.as_slice()).abs());
        }
        Ok(worst)
    })?;
    sec.push(Check::at_most(
        "max |g(W, [W, E])|, E in {V1, V2, dz, Y}",
        "a unit field is geodesic iff it preserves its orthogonal distribution",
        fact2,
        1e-8,
    ));
    let wres = max_of(&far, |p| Ok(geodesic_residual(&m, &w, p)?))?;
    sec.push(Check::at_most(
        "geodesic residual |D_W W| off the bad set",
        "D_{X_xi} X_xi = 0 iff D_W W = 0 off the bad set",
        wres,
        1e-6,
    ));

    let bp: Vec<Vec<f64>> = (0..cfg.sampling.bracket_points)
        .map(|_| {
            let mut p = quotient_point(&mut rng);
            p[IU] = rng.gen_range(0.2..PI - 0.2);
            p
        })
        .collect();
    let br = max_of(&bp, |p| bracket_table_error(prof, p))?;
    sec.push(Check::at_most(
        "bracket table [W, V1], [W, V2], [W, dz], [W, Y] (backward error)",
        "[W,V1] = V2, [W,V2] = (cos u/xi) dz - V1, [W,dz] = 0, [W,Y] in span(V1, V2, dz)",
        br,
        1e-8,
    ));

    let mut ov_u = Vec::new();
    let k = 100;
    for i in 0..k {
        let a = 1e-4f64.ln() + (m.eta.ln() - 1e-4f64.ln()) * i as f64 / (k - 1) as f64;
        let d = a.exp();
        ov_u.extend([d, PI - d, -d, d - PI]);
    }
    let ov = max_of(&ov_u, |&u| Ok(m.overlap_defect(u)))?;
    sec.push(Check::at_most(
        "branch overlap disagreement (relative)",
        ANCHOR_GLUE,
        ov,
        1e-12,
    ));

    let near: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&u| dist_to_bad_set(u) <= m.eta_cert)
        .collect();
    let g0id = max_of(&near, |&u| {
        let ue = Ext::from_f64(u);
        let v = prof.eval(ue);
        let c = ue.cos();
        let two = Ext::from_f64(2.0);
        let z = Ext::zero();
        let coef = DVector::from_vec(vec![two * v.f * v.f, two * v.f * c, z, -(c * c), z]);
        let want = DVector::from_vec(vec![two * v.f * v.a, z, z, z, c * c]);
        let g0: DMatrix<Ext> = m.g0(ue);
        let got = &g0 * &coef;
        let scale = g0.map(|e| e.abs()) * coef.map(|e| e.abs());
        let mut worst = 0.0f64;
        for i in 0..got.len() {
            let d = (got[i] - want[i]).abs();
            if !d.is_zero() {
                worst = worst.max((d / scale[i]).value());
            }
        }
        Ok(worst)
    })?;
    sec.push(Check::at_most(
        "G0 (2xi^2, 2xi cos u, 0, -cos^2 u, 0) = (2xi|xi|, 0, 0, 0, cos^2 u)",
        "applying G0 to X_xi",
        g0id,
        1e-14,
    ));
    Ok(sec)
}

/// Worst deviation of the four bracket identities at `p`, per component
/// relative to the terms that cancel in it.
fn bracket_table_error(prof: Profile, p: &[f64]) -> Result<f64> {
    use ThurstonField::*;
    let w = Wxi(prof);
    let u = p[IU];
    let (s, c) = u.sin_cos();
    let v = prof.eval(u);
    let k = c / v.f;
    let dk = (-s * v.f - c * v.df) / (v.f * v.f);
    let f = |fld: ThurstonField| fld.at(p);
    let want = [
        (V1, f(V2)?),
        (V2, f(Dz)? * k - f(V1)?),
        (Dz, Vector::zeros(5)),
        (
            Yxi(prof),
            f(V1)? * (-2.0 * v.f * v.a * dk)
                + f(V2)? * (c * c * c / v.f)
                + f(Dz)? * (v.f * v.a * 2.0 * k * dk),
        ),
    ];
    let mut worst = 0.0f64;
    for (e, expect) in want {
        let (got, scale) = lie_bracket_with_scale(&w, &e, p)?;
        for i in 0..got.len() {
            worst = worst.max((got[i] - expect[i]).abs() / scale[i].max(expect[i].abs()).max(1.0));
        }
    }
    Ok(worst)
}

pub fn run_sin(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let mut sec = Section::new("verify-typechange-sin");
    let m = TypeChangeModel::new(&cfg.core_typechange(Profile::Sin))?;
    sec.model("typechange-sin", &m);
    common(ctx, &m, &mut sec)?;

    let pts = quotient_points(&mut ctx.rng(21), cfg.sampling.points);
    let res = max_of(&pts, |p| Ok(geodesic_residual(&m, &ThurstonField::X, p)?))?;
    sec.push(Check::at_most(
        "geodesic residual of Thurston's X",
        "replacing xi by sin makes Thurston's flow geodesic",
        res,
        1e-7,
    ));
    let grid = u_grid(cfg.sampling.u_grid);
    let err = max_of(&grid, |&u| {
        let q = start(ctx, u);
        let v = ThurstonField::X.at(&q)?;
        Ok((m.inner(&q, v.as_slice(), v.as_slice()) - 4.0 * u.sin().powi(4)).abs())
    })?;
    sec.push(Check::at_most(
        "|g(X,X) - 4 sin^4 u|",
        "g(X,X) >= 0: X is nowhere timelike",
        err,
        1e-12,
    ));
    let min = grid
        .iter()
        .map(|&u| {
            let q = start(ctx, u);
            let v = ThurstonField::X.eval(&q[..]);
            m.inner(&q, v.as_slice(), v.as_slice())
        })
        .fold(f64::INFINITY, f64::min);
    sec.push(Check::at_least(
        "min g(X,X)",
        "g(X,X) >= 0: X is nowhere timelike",
        min,
        -1e-12,
    ));
    Ok(sec)
}
