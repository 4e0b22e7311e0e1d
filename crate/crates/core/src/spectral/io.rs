//! Snapshot export: CSV (rows = `y` nodes, columns = `x` nodes) plus a JSON
//! manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SpectralField;
use crate::error::Result;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub nx: usize,
    pub ny: usize,
    pub time: f64,
    pub epsilon: f64,
    pub field_name: String,
}

/// Renders nodal values as CSV; numbers use the shortest round-trip form.
pub fn snapshot_csv<T: Real>(field: &SpectralField<T>) -> String {
    let phys = field.to_physical();
    let (nx, ny) = phys.dim();
    let mut out = String::with_capacity(nx * ny * 24);
    for m in 0..ny {
        for j in 0..nx {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", phys[[j, m]].as_f64()));
        }
        out.push('\n');
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
pub fn write_snapshot<T: Real>(
    dir: &Path,
    stem: &str,
    field: &SpectralField<T>,
    time: f64,
    epsilon: f64,
    field_name: &str,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    fs::File::create(&csv)?.write_all(snapshot_csv(field).as_bytes())?;
    let manifest = SnapshotManifest {
        nx: field.grid().nx(),
        ny: field.grid().ny(),
        time,
        epsilon,
        field_name: field_name.to_string(),
    };
    fs::write(&json, serde_json::to_string_pretty(&manifest)?)?;
    Ok((csv, json))
}
