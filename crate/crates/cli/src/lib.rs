//! Scenario runner for the `geofol` verification suites.

pub mod config;
pub mod report;
pub mod scenarios;

use std::path::Path;

use anyhow::{Context, Result};

pub use config::Config;
pub use report::{Check, Report, Section};

/// Runs `scenario` with `cfg`, writing `report.json` and any CSV files into
/// `out`.
pub fn run(scenario: &str, cfg: &Config, out: &Path) -> Result<Report> {
    if scenario != "all" && !scenarios::SCENARIOS.contains(&scenario) {
        anyhow::bail!(
            "unknown scenario {scenario:?}; expected one of {:?} or \"all\"",
            scenarios::SCENARIOS
        );
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let ctx = scenarios::Ctx { cfg, out };
    let sections = scenarios::run(scenario, &ctx);
    let report = Report::new(scenario, cfg, sections);
    let path = out.join("report.json");
    std::fs::write(&path, report.to_json())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}
