use std::f64::consts::{PI, TAU};

use anyhow::Result;
use geofol_core::connection::covariant_deriv_christoffel;
use geofol_core::frame::{Constant, Coord, Euclidean, MetricField, VectorField};
use geofol_core::linalg::sym_eigenvalues;
use geofol_core::metrics::{Riemannized, TypeChangeModel};
use geofol_core::surfaces::Surface;
use geofol_core::thurston::{dist_to_bad_set, Profile, ThurstonField, IU};
use geofol_core::{GeoError, Matrix};
use rand::Rng;

use super::{max_of, min_of, quotient_point, Ctx};
use crate::report::{Check, Section};

const ANCHOR: &str =
    "h = h0(P., P.) + g(Xbar, .) g(Xbar, .) is Riemannian and makes the foliation geodesic";

struct Audit {
    min_eig: f64,
    unit: f64,
    residual: f64,
}

fn audit<G: MetricField, X: VectorField, H: MetricField>(
    r: &Riemannized<G, X, H>,
    pts: &[Vec<f64>],
) -> Result<Audit> {
    let min_eig = min_of(pts, |p| {
        let h: Matrix = r.metric(p);
        Ok(sym_eigenvalues(&h)
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    })?;
    let unit = max_of(pts, |p| {
        let x = r.xbar.at(p)?;
        Ok((r.inner(p, x.as_slice(), x.as_slice()) - 1.0).abs())
    })?;
    let residual = max_of(pts, |p| {
        Ok(covariant_deriv_christoffel(r, &r.xbar, &r.xbar, p)?.norm())
    })?;
    Ok(Audit {
        min_eig,
        unit,
        residual,
    })
}

fn push(sec: &mut Section, label: &str, a: &Audit) {
    sec.push(Check::at_least(
        &format!("{label}: smallest eigenvalue of h"),
        ANCHOR,
        a.min_eig,
        1e-12,
    ));
    sec.push(Check::at_most(
        &format!("{label}: |h(Xbar, Xbar) - 1|"),
        ANCHOR,
        a.unit,
        1e-12,
    ));
    sec.push(Check::at_most(
        &format!("{label}: h-geodesic residual of Xbar"),
        ANCHOR,
        a.residual,
        1e-7,
    ));
}

pub fn run(ctx: &Ctx) -> Result<Section> {
    let cfg = ctx.cfg;
    let n = cfg.riemannize.points;
    let mut sec = Section::new("riemannize-check");
    let mut rng = ctx.rng(61);

    let plane: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    let mink = Riemannized::new(
        Surface::Minkowski,
        Coord { index: 0, n: 2 },
        Euclidean(2),
        &plane,
    )?;
    push(
        &mut sec,
        "Minkowski plane, Xbar = dt",
        &audit(&mink, &plane)?,
    );
    let flat_err = max_of(&plane, |p| {
        let h: Matrix = mink.metric(p);
        Ok((h - Matrix::identity(2, 2)).amax())
    })?;
    sec.push(Check::at_most(
        "Minkowski plane: |h - (dt^2 + dx^2)|",
        ANCHOR,
        flat_err,
        1e-15,
    ));

    let torus: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)])
        .collect();
    let et = Riemannized::new(
        Surface::EinsteinTorus,
        Coord { index: 0, n: 2 },
        Euclidean(2),
        &torus,
    )?;
    push(
        &mut sec,
        "Einstein torus, Xbar = d_theta",
        &audit(&et, &torus)?,
    );

    let rejected = matches!(
        Riemannized::new(
            Surface::EinsteinTorus,
            Constant(vec![1.0, 1.0]),
            Euclidean(2),
            &torus
        ),
        Err(GeoError::Lightlike { .. })
    );
    sec.push(Check::holds(
        "lightlike foliation d_theta + d_phi rejected",
        "the foliation must not be lightlike",
        rejected,
    ));

    let m = TypeChangeModel::new(&cfg.core_typechange(Profile::Xi))?;
    let pts: Vec<Vec<f64>> = (0..n.min(100))
        .map(|_| {
            let mut p = quotient_point(&mut rng);
            while dist_to_bad_set(p[IU]) < 1.0 || p[IU] < 0.0 {
                p[IU] = rng.gen_range(0.0..PI);
            }
            p
        })
        .collect();
    let tc = Riemannized::new(m, ThurstonField::Wxi(Profile::Xi), Euclidean(5), &pts)?;
    let a = audit(&tc, &pts)?;
    sec.push(Check::at_least(
        "type-change metric, Xbar = W_xi: smallest eigenvalue of h",
        ANCHOR,
        a.min_eig,
        1e-12,
    ));
    sec.push(Check::at_most(
        "type-change metric, Xbar = W_xi: |h(Xbar, Xbar) - 1|",
        ANCHOR,
        a.unit,
        1e-10,
    ));
    sec.push(Check::at_most(
        "type-change metric, Xbar = W_xi: h-geodesic residual",
        ANCHOR,
        a.residual,
        1e-6,
    ));
    Ok(sec)
}
