use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use geofol::{config, Config};

#[derive(Parser)]
#[command(
    name = "geofol",
    version,
    about = "Verification scenarios for geodesic foliations by circles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; all keys optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV files.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.tol` (integrator tolerance).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lightlike metric: X null, X-flat = du closed, X geodesic.
    VerifyLightlike(RunArgs),
    /// Type-changing metric built from xi.
    VerifyTypechange(RunArgs),
    /// Type-changing construction with xi replaced by sin.
    VerifyTypechangeSin(RunArgs),
    /// Leaf periods and lengths; exact flow of W.
    OrbitSweep(RunArgs),
    /// Tangent lifts of surface geodesics under the Sasaki metric.
    SasakiCheck(RunArgs),
    /// Closed-geodesic audits on the pseudo-sphere and the Einstein torus.
    SurfaceAudit(RunArgs),
    /// Riemannian metrics making non-lightlike foliations geodesic.
    RiemannizeCheck(RunArgs),
    /// Every scenario.
    All(RunArgs),
    /// Print the documented default configuration.
    Defaults,
}

fn execute(name: &str, a: &RunArgs) -> Result<bool> {
    let mut cfg = match &a.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = a.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = a.tol {
        cfg.run.tol = t;
    }
    cfg.validate()?;
    let report = geofol::run(name, &cfg, &a.out)?;
    for s in &report.sections {
        for c in &s.checks {
            let m = c
                .measured
                .map_or("null".to_string(), |v| format!("{v:.3e}"));
            let rel = serde_json::to_value(c.relation)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            println!(
                "{} {}/{}: {m} {rel} {:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                s.scenario,
                c.name,
                c.threshold
            );
        }
        if let Some(e) = &s.error {
            println!("FAIL {}: {e}", s.scenario);
        }
    }
    println!(
        "{}: {}",
        if report.passed { "PASS" } else { "FAIL" },
        a.out.join("report.json").display()
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args) = match &cli.cmd {
        Cmd::Defaults => {
            print!("{}", config::defaults_reference());
            return ExitCode::SUCCESS;
        }
        Cmd::VerifyLightlike(a) => ("verify-lightlike", a),
        Cmd::VerifyTypechange(a) => ("verify-typechange", a),
        Cmd::VerifyTypechangeSin(a) => ("verify-typechange-sin", a),
        Cmd::OrbitSweep(a) => ("orbit-sweep", a),
        Cmd::SasakiCheck(a) => ("sasaki-check", a),
        Cmd::SurfaceAudit(a) => ("surface-audit", a),
        Cmd::RiemannizeCheck(a) => ("riemannize-check", a),
        Cmd::All(a) => ("all", a),
    };
    match execute(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
