//! Scenario configuration read from TOML. Every section and key is
//! optional; unknown keys are errors.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunCfg,
    pub sampling: SamplingCfg,
    pub typechange: TypeChangeCfg,
    pub orbit: OrbitCfg,
    pub sasaki: SasakiCfg,
    pub surfaces: SurfacesCfg,
    pub riemannize: RiemannizeCfg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunCfg {
    pub seed: u64,
    /// Integrator tolerance (absolute and relative).
    pub tol: f64,
    /// Write trajectory CSV files next to the report.
    pub csv: bool,
    /// Rows per trajectory CSV.
    pub csv_rows: usize,
}

impl Default for RunCfg {
    fn default() -> Self {
        Self {
            seed: 1,
            tol: 1e-10,
            csv: true,
            csv_rows: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingCfg {
    /// Random quotient points for residual, flat and divergence checks.
    pub points: usize,
    /// Points for the bracket table.
    pub bracket_points: usize,
    /// Random inputs per model for the Koszul/Christoffel comparison.
    pub cross_path_inputs: usize,
    /// Points of the uniform `u`-grid on `[−π, π]`.
    pub u_grid: usize,
    /// Finite-difference step for `dX♭` and seam derivatives.
    pub fd_step: f64,
}

impl Default for SamplingCfg {
    fn default() -> Self {
        Self {
            points: 1000,
            bracket_points: 100,
            cross_path_inputs: 100,
            u_grid: 2001,
            fd_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TypeChangeCfg {
    /// Fixed working radius near the bad set; certified on a grid when absent.
    pub eta_override: Option<f64>,
    pub eta_grid: usize,
    pub eta_tol: f64,
    pub b0_frac: f64,
    pub bstar_frac: f64,
    pub tau_lo: f64,
    /// Points per half-interval in the construction audit.
    pub audit_points: usize,
}

impl Default for TypeChangeCfg {
    fn default() -> Self {
        let d = geofol_core::metrics::TypeChangeConfig::default();
        Self {
            eta_override: d.eta_override,
            eta_grid: d.eta_grid,
            eta_tol: d.eta_tol,
            b0_frac: d.b0_frac,
            bstar_frac: d.bstar_frac,
            tau_lo: d.tau_lo,
            audit_points: d.audit_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitCfg {
    /// `(x, y, z, t)` of every leaf start.
    pub start: [f64; 4],
    /// Leaves of `X`.
    pub u0: Vec<f64>,
    /// Leaves of `X_ξ`; small values are slow (the leaf winds `~1/ξ` times).
    pub xxi_u0: Vec<f64>,
    pub closure_tol: f64,
    pub horizon: f64,
    pub xxi_horizon: f64,
    pub integrator_tol: f64,
    /// Random starts for the exact-flow comparison.
    pub flow_starts: usize,
}

impl Default for OrbitCfg {
    fn default() -> Self {
        Self {
            start: [0.1, 0.2, 0.3, 0.4],
            u0: vec![0.3, 0.7, 1.0, 1.5],
            xxi_u0: vec![1.5, 1.0, 0.7],
            closure_tol: 1e-6,
            horizon: 1e4,
            xxi_horizon: 1e5,
            integrator_tol: 1e-12,
            flow_starts: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SasakiCfg {
    pub geodesics_per_type: usize,
    pub span: f64,
    /// Points along each lift where the residual is evaluated.
    pub samples: usize,
    /// Step of the finite-difference Christoffels of the lifted metric.
    pub fd_step: f64,
}

impl Default for SasakiCfg {
    fn default() -> Self {
        Self {
            geodesics_per_type: 5,
            span: 3.0,
            samples: 10,
            fd_step: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfacesCfg {
    pub samples: usize,
    pub radius: f64,
    /// Range of the `w` coordinate for random starts on the pseudo-sphere.
    pub w_range: [f64; 2],
    pub horizon: f64,
    pub escape_radius: f64,
    pub closure_tol: f64,
    pub integrator_tol: f64,
}

impl Default for SurfacesCfg {
    fn default() -> Self {
        Self {
            samples: 20,
            radius: 1.0,
            w_range: [-1.0, 1.0],
            horizon: 1e3,
            escape_radius: 10.5,
            closure_tol: 1e-6,
            integrator_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiemannizeCfg {
    pub points: usize,
}

impl Default for RiemannizeCfg {
    fn default() -> Self {
        Self { points: 200 }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).context("invalid configuration")?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("run.tol", self.run.tol),
            ("sampling.fd_step", self.sampling.fd_step),
            ("typechange.eta_tol", self.typechange.eta_tol),
            ("orbit.closure_tol", self.orbit.closure_tol),
            ("orbit.horizon", self.orbit.horizon),
            ("orbit.xxi_horizon", self.orbit.xxi_horizon),
            ("orbit.integrator_tol", self.orbit.integrator_tol),
            ("sasaki.span", self.sasaki.span),
            ("sasaki.fd_step", self.sasaki.fd_step),
            ("surfaces.radius", self.surfaces.radius),
            ("surfaces.horizon", self.surfaces.horizon),
            ("surfaces.escape_radius", self.surfaces.escape_radius),
            ("surfaces.closure_tol", self.surfaces.closure_tol),
            ("surfaces.integrator_tol", self.surfaces.integrator_tol),
        ];
        for (k, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{k} must be positive and finite, got {v}");
            }
        }
        if let Some(e) = self.typechange.eta_override {
            if !(e > 0.0 && e.is_finite()) {
                bail!("typechange.eta_override must be positive, got {e}");
            }
        }
        if self.run.csv_rows < 2 {
            bail!("run.csv_rows must be at least 2");
        }
        if self.surfaces.w_range[0] >= self.surfaces.w_range[1] {
            bail!("surfaces.w_range must be increasing");
        }
        if self
            .orbit
            .u0
            .iter()
            .chain(&self.orbit.xxi_u0)
            .any(|u| !(u.sin() > 0.0))
        {
            bail!("orbit u0 values must lie in (0, π)");
        }
        Ok(())
    }

    pub fn core_typechange(
        &self,
        profile: geofol_core::thurston::Profile,
    ) -> geofol_core::metrics::TypeChangeConfig {
        let t = &self.typechange;
        geofol_core::metrics::TypeChangeConfig {
            profile,
            eta_override: t.eta_override,
            eta_grid: t.eta_grid,
            eta_tol: t.eta_tol,
            b0_frac: t.b0_frac,
            bstar_frac: t.bstar_frac,
            tau_lo: t.tau_lo,
            audit_points: t.audit_points,
            flip: None,
        }
    }
}

/// Key documentation for the generated reference, `(section, key, text)`.
const DOCS: &[(&str, &str, &str)] = &[
    ("run", "seed", "seed of every random sample (ChaCha8)"),
    ("run", "tol", "integrator tolerance, absolute and relative"),
    (
        "run",
        "csv",
        "write trajectory CSV files next to the report",
    ),
    ("run", "csv_rows", "rows per trajectory CSV"),
    (
        "sampling",
        "points",
        "random quotient points for residual, flat and divergence checks",
    ),
    ("sampling", "bracket_points", "points for the bracket table"),
    (
        "sampling",
        "cross_path_inputs",
        "random inputs per model for the Koszul/Christoffel comparison",
    ),
    (
        "sampling",
        "u_grid",
        "points of the uniform u-grid on [-pi, pi]",
    ),
    (
        "sampling",
        "fd_step",
        "finite-difference step for dX-flat and seam derivatives",
    ),
    (
        "typechange",
        "eta_override",
        "fixed working radius near the bad set (absent: certified on a grid)",
    ),
    (
        "typechange",
        "eta_grid",
        "grid points per half-interval for the eta certification",
    ),
    (
        "typechange",
        "eta_tol",
        "smallest |eigenvalue| of G0 accepted by the certification",
    ),
    (
        "typechange",
        "b0_frac",
        "the interpolated block equals L below b0_frac * eta_cert",
    ),
    (
        "typechange",
        "bstar_frac",
        "frozen argument of L, as a fraction of eta_cert",
    ),
    (
        "typechange",
        "tau_lo",
        "start of the rotation ramp (ends at pi - tau_lo)",
    ),
    (
        "typechange",
        "audit_points",
        "points per half-interval in the construction audit",
    ),
    ("orbit", "start", "(x, y, z, t) of every leaf start"),
    ("orbit", "u0", "leaves of X"),
    ("orbit", "xxi_u0", "leaves of X_xi; small values are slow"),
    (
        "orbit",
        "closure_tol",
        "closure distance and angle tolerance",
    ),
    ("orbit", "horizon", "largest flow time searched for X"),
    (
        "orbit",
        "xxi_horizon",
        "largest flow time searched for X_xi",
    ),
    ("orbit", "integrator_tol", "integrator tolerance for leaves"),
    (
        "orbit",
        "flow_starts",
        "random starts for the exact-flow comparison",
    ),
    (
        "sasaki",
        "geodesics_per_type",
        "base geodesics per causal type",
    ),
    ("sasaki", "span", "parameter length of each base geodesic"),
    (
        "sasaki",
        "samples",
        "points along each lift where the residual is evaluated",
    ),
    (
        "sasaki",
        "fd_step",
        "step of the finite-difference Christoffels of the lifted metric",
    ),
    ("surfaces", "samples", "random geodesics per audit"),
    ("surfaces", "radius", "radius r of the pseudo-sphere"),
    (
        "surfaces",
        "w_range",
        "range of w for random starts on the pseudo-sphere",
    ),
    (
        "surfaces",
        "horizon",
        "largest parameter searched for closure",
    ),
    (
        "surfaces",
        "escape_radius",
        "|w| beyond which a geodesic counts as escaped",
    ),
    (
        "surfaces",
        "closure_tol",
        "closure distance and angle tolerance",
    ),
    ("surfaces", "integrator_tol", "integrator tolerance"),
    ("riemannize", "points", "audit points per foliation"),
];

/// Commented TOML listing every key with its default.
pub fn defaults_reference() -> String {
    let value = toml::Value::try_from(Config::default()).expect("defaults serialize");
    let table = value.as_table().expect("table");
    let mut out =
        String::from("# geofol configuration reference: every key with its default value.\n");
    out.push_str("# All sections and keys are optional; unknown keys are rejected.\n");
    let mut section = "";
    for (sec, key, doc) in DOCS {
        if *sec != section {
            section = sec;
            out.push_str(&format!("\n[{sec}]\n"));
        }
        out.push_str(&format!("# {doc}\n"));
        match table.get(*sec).and_then(|t| t.get(*key)) {
            Some(v) => out.push_str(&format!("{key} = {v}\n")),
            None => out.push_str(&format!("# {key} = <unset>\n")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("[run]\nsed = 3\n").is_err());
        assert!(Config::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn bad_tolerance_rejected() {
        assert!(Config::from_toml("[run]\ntol = 0.0\n").is_err());
        assert!(Config::from_toml("[run]\nseed = -1\n").is_err());
    }

    #[test]
    fn reference_round_trips() {
        let text = defaults_reference();
        assert_eq!(Config::from_toml(&text).unwrap(), Config::default());
        let value = toml::Value::try_from(Config::default()).unwrap();
        for (sec, t) in value.as_table().unwrap() {
            for key in t.as_table().unwrap().keys() {
                assert!(
                    DOCS.iter().any(|(s, k, _)| s == sec && k == key),
                    "{sec}.{key} undocumented"
                );
            }
        }
    }
}
