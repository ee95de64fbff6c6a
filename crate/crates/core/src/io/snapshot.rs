//! Snapshot files: a JSON sidecar plus a raw little-endian float64 payload.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{atomic_write, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{Field2D, Grid2D};
use crate::timestep::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelParams>,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t: f64,
    pub byte_order: String,
    pub dtype: String,
    pub layout: String,
    /// Payload file name, relative to the sidecar.
    pub payload: String,
}

/// Writes `<stem>.json` and `<stem>.bin` into `dir`; returns the sidecar path.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    snap: &Snapshot,
    model: Option<&ModelParams>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let g = *snap.field.grid();
    let bin_name = format!("{stem}.bin");
    let mut bytes = Vec::with_capacity(8 * g.len());
    for v in snap.field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(&dir.join(&bin_name), &bytes)?;
    let header = SnapshotHeader {
        schema_version: SCHEMA_VERSION,
        model: model.copied(),
        nx: g.nx,
        ny: g.ny,
        lx: g.lx,
        ly: g.ly,
        t: snap.t,
        byte_order: "little".into(),
        dtype: "float64".into(),
        layout: "x-fastest".into(),
        payload: bin_name,
    };
    let json_path = dir.join(format!("{stem}.json"));
    atomic_write(
        &json_path,
        serde_json::to_string_pretty(&header)?.as_bytes(),
    )?;
    Ok(json_path)
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_header(path: &Path) -> Result<SnapshotHeader> {
    let text = fs::read_to_string(path)?;
    let header: SnapshotHeader =
        serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(format_err(
            path,
            format!("unsupported schema_version {}", header.schema_version),
        ));
    }
    if header.byte_order != "little" || header.dtype != "float64" || header.layout != "x-fastest" {
        return Err(format_err(path, "unsupported byte order, dtype or layout"));
    }
    Ok(header)
}

/// Reads a snapshot given its sidecar path.
pub fn read_snapshot(path: &Path) -> Result<(Grid2D, Snapshot)> {
    let header = read_header(path)?;
    let grid = Grid2D::new(header.nx, header.ny, header.lx, header.ly)?;
    let bin = path
        .parent()
        .unwrap_or(Path::new("."))
        .join(&header.payload);
    let bytes = fs::read(&bin)?;
    if bytes.len() != 8 * grid.len() {
        return Err(format_err(
            &bin,
            format!(
                "payload has {} bytes, expected {}",
                bytes.len(),
                8 * grid.len()
            ),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let field = Field2D::from_values(grid, values).map_err(|e| format_err(&bin, e.to_string()))?;
    Ok((grid, Snapshot { t: header.t, field }))
}

/// All snapshot sidecars in `dir`, sorted by time.
pub fn read_series(dir: &Path) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_snapshot = path.extension().is_some_and(|e| e == "json")
            && path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snap_"));
        if is_snapshot {
            out.push(read_snapshot(&path)?.1);
        }
    }
    if out.is_empty() {
        return Err(format_err(dir, "no snap_*.json files found"));
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// File stem for the `i`-th snapshot of a run.
pub fn snapshot_stem(i: usize) -> String {
    format!("snap_{i:06}")
}
