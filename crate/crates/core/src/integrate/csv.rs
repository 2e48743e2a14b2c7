//! Trajectory dumps for plotting.

use std::path::Path;

use crate::error::{GeoError, Result};

/// Column names for five-dimensional chart trajectories.
pub const COLUMNS: [&str; 12] = [
    "s", "x", "y", "z", "t", "u", "vx", "vy", "vz", "vt", "vu", "g_vv",
];

/// One row: parameter, position, velocity, `g(v, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub s: f64,
    pub x: [f64; 5],
    pub v: [f64; 5],
    pub g_vv: f64,
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let io = |e: csv::Error| GeoError::Output(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(COLUMNS).map_err(io)?;
    for r in rows {
        let rec: Vec<String> = std::iter::once(r.s)
            .chain(r.x)
            .chain(r.v)
            .chain([r.g_vv])
            .map(|v| format!("{v:.17e}"))
            .collect();
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()
        .map_err(|e| GeoError::Output(format!("writing {}: {e}", path.display())))?;
    Ok(())
}
