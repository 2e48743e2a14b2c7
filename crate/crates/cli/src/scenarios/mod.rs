//! Verification suites, one per scenario.

mod lightlike;
mod orbits;
mod riemannize;
mod sasaki;
mod surfaces;
mod typechange;

use std::f64::consts::{PI, TAU};
use std::path::Path;

use anyhow::Result;
use geofol_core::frame::{FrameMetric, MetricField, VectorField};
use geofol_core::integrate::csv::{write_rows, Row};
use geofol_core::integrate::Trajectory;
use geofol_core::thurston::{ThurstonField, DIM, IU};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::report::Section;

pub const SCENARIOS: [&str; 7] = [
    "verify-lightlike",
    "verify-typechange",
    "verify-typechange-sin",
    "orbit-sweep",
    "sasaki-check",
    "surface-audit",
    "riemannize-check",
];

/// Where a scenario writes its artifacts.
pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub out: &'a Path,
}

impl Ctx<'_> {
    /// Independent stream `stream` of the configured seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.run.seed);
        r.set_stream(stream);
        r
    }

    /// Samples a flow trajectory onto a uniform grid and writes it when CSV
    /// output is enabled. `g_vv` is evaluated at each row.
    pub fn write_flow_csv<F, G>(
        &self,
        sec: &mut Section,
        name: &str,
        traj: &Trajectory,
        field: &F,
        g: &G,
    ) -> Result<()>
    where
        F: VectorField,
        G: MetricField,
    {
        if !self.cfg.run.csv {
            return Ok(());
        }
        let n = self.cfg.run.csv_rows;
        let (s0, s1) = (traj.start(), traj.end());
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let s = s0 + (s1 - s0) * i as f64 / (n - 1) as f64;
            let y = traj.eval(s);
            let v = field.at(&y)?;
            let mut x = [0.0; DIM];
            let mut vv = [0.0; DIM];
            x.copy_from_slice(&y[..DIM]);
            vv.copy_from_slice(v.as_slice());
            rows.push(Row {
                s,
                x,
                v: vv,
                g_vv: g.inner(&y, v.as_slice(), v.as_slice()),
            });
        }
        let file = format!("{name}.csv");
        write_rows(&self.out.join(&file), &rows)?;
        sec.artifacts.push(file);
        Ok(())
    }
}

/// Runs one scenario; failures become a failed section with diagnostics.
pub fn run(name: &str, ctx: &Ctx) -> Vec<Section> {
    if name == "all" {
        return SCENARIOS.par_iter().map(|s| run_one(s, ctx)).collect();
    }
    vec![run_one(name, ctx)]
}

fn run_one(name: &str, ctx: &Ctx) -> Section {
    let r = match name {
        "verify-lightlike" => lightlike::run(ctx),
        "verify-typechange" => typechange::run(ctx),
        "verify-typechange-sin" => typechange::run_sin(ctx),
        "orbit-sweep" => orbits::run(ctx),
        "sasaki-check" => sasaki::run(ctx),
        "surface-audit" => surfaces::run(ctx),
        "riemannize-check" => riemannize::run(ctx),
        other => Err(anyhow::anyhow!("unknown scenario {other}")),
    };
    match r {
        Ok(s) => s.finish(),
        Err(e) => Section::failed(name, &e),
    }
}

/// Uniform point of the fundamental domain `[0,1)³ × [0,2π) × [−π,π)`.
pub fn quotient_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![
        rng.gen(),
        rng.gen(),
        rng.gen(),
        rng.gen_range(0.0..TAU),
        rng.gen_range(-PI..PI),
    ]
}

/// `n` quotient points; every tenth lies on the bad set (`u = 0` or `π`).
pub fn quotient_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut p = quotient_point(rng);
            if i % 10 == 0 {
                p[IU] = if i % 20 == 0 { 0.0 } else { PI };
            }
            p
        })
        .collect()
}

/// `n` points of `[−π, π]`, endpoints included.
pub fn u_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -PI + TAU * i as f64 / (n - 1) as f64)
        .collect()
}

/// Largest value of `f` over `items`, evaluated in parallel and reduced in
/// index order. NaN wins.
pub fn max_of<T: Sync, F>(items: &[T], f: F) -> Result<f64>
where
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    let vals: Vec<f64> = items.par_iter().map(|t| f(t)).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, |m: f64, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    }))
}

/// Smallest value of `f` over `items`; `+inf` when empty. NaN wins.
pub fn min_of<T: Sync, F>(items: &[T], f: F) -> Result<f64>
where
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    let vals: Vec<f64> = items.par_iter().map(|t| f(t)).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, |m: f64, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.min(v)
        }
    }))
}

/// Number of items for which `f` is false.
pub fn count_failures<T: Sync, F>(items: &[T], f: F) -> Result<usize>
where
    F: Fn(&T) -> Result<bool> + Sync + Send,
{
    let vals: Vec<bool> = items.par_iter().map(|t| f(t)).collect::<Result<_>>()?;
    Ok(vals.into_iter().filter(|ok| !ok).count())
}

/// Largest `|∇_A B|_Koszul − ∇_A B|_Christoffel|`, relative to `max(1, |·|)`,
/// over random fields among `fields` and random quotient points.
pub fn cross_path<M>(
    m: &M,
    fields: &[ThurstonField],
    rng: &mut ChaCha8Rng,
    n: usize,
    avoid_bad: f64,
) -> Result<f64>
where
    M: FrameMetric,
{
    let inputs: Vec<(ThurstonField, ThurstonField, Vec<f64>)> = (0..n)
        .map(|_| {
            let a = fields[rng.gen_range(0..fields.len())];
            let b = fields[rng.gen_range(0..fields.len())];
            let mut p = quotient_point(rng);
            while geofol_core::thurston::dist_to_bad_set(p[IU]) < avoid_bad {
                p[IU] = rng.gen_range(-PI..PI);
            }
            (a, b, p)
        })
        .collect();
    max_of(&inputs, |(a, b, p)| {
        let k = geofol_core::connection::covariant_deriv(m, a, b, p)?;
        let c = geofol_core::connection::covariant_deriv_christoffel(m, a, b, p)?;
        Ok((&k - &c).amax() / k.amax().max(1.0))
    })
}
