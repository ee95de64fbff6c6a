//! Files: configs, snapshots, CSV tables and JSON reports.
//!
//! Every write goes to a temporary file in the target directory first and is
//! then renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

mod snapshot;

pub use snapshot::{
    read_header, read_series, read_snapshot, snapshot_stem, write_snapshot, SnapshotHeader,
};

pub const SCHEMA_VERSION: u32 = 1;

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidArgument(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Float formatting for tables: 17 significant digits, round-trippable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a header line and `\n` endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    atomic_write(path, s.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    atomic_write(path, s.as_bytes())
}

/// Parses a config, reporting the offending key path on failure.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
        path: ".".into(),
        message: e.to_string(),
    })?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| Error::Config {
            path: "schema_version".into(),
            message: "missing field".into(),
        })?
        .as_u64();
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(Error::Config {
            path: "schema_version".into(),
            message: format!("expected {SCHEMA_VERSION}"),
        });
    }
    let mut obj = value;
    if let Some(m) = obj.as_object_mut() {
        m.remove("schema_version");
    }
    serde_path_to_error::deserialize(obj).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}
