//! Profile files: `<name>.csv` with columns `y,Y,Yp`, `<name>.meta.json`
//! and `<name>.diag.json`.
//!
//! Numbers are written with 17 significant digits, which reproduces every
//! `f64` exactly on reload.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileMeta};

pub const CSV_HEADER: &str = "y,Y,Yp";

/// Paths of the three files sharing a base name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub diag: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            csv: dir.join(format!("{name}.csv")),
            meta: dir.join(format!("{name}.meta.json")),
            diag: dir.join(format!("{name}.diag.json")),
        }
    }

    /// Splits `path/to/name.csv` (extension optional) into directory and name.
    pub fn from_csv_path(path: &Path) -> Self {
        let dir = path.parent().unwrap_or(Path::new(""));
        let stem = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => path.file_stem(),
            _ => path.file_name(),
        };
        Self::new(dir, &stem.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

pub fn profile_csv(profile: &Profile) -> String {
    let mut out = String::with_capacity(64 * (profile.grid.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..profile.grid.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            profile.grid[i], profile.value[i], profile.slope[i]
        ));
    }
    out
}

/// Parses the CSV produced by [`profile_csv`] into `(y, Y, Yp)` columns.
pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument(format!("CSV header must be {CSV_HEADER:?}")));
    }
    let (mut grid, mut value, mut slope) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidArgument(format!("CSV row {}: expected 3 fields", row + 2)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("CSV row {}: {e}", row + 2)))
        };
        grid.push(parse(fields[0])?);
        value.push(parse(fields[1])?);
        slope.push(parse(fields[2])?);
    }
    Ok((grid, value, slope))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// Writes `<name>.csv` and `<name>.meta.json`; the metadata object gets the
/// profile metadata under the key `profile`.
pub fn write_profile(paths: &OutputPaths, profile: &Profile, meta: &Value) -> Result<()> {
    if let Some(dir) = paths.csv.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    fs::write(&paths.csv, profile_csv(profile)).map_err(|e| io_err(&paths.csv, e))?;
    let mut meta = meta.clone();
    let profile_meta = serde_json::to_value(&profile.meta).map_err(|e| io_err(&paths.meta, e))?;
    match &mut meta {
        Value::Object(map) => {
            map.insert("profile".into(), profile_meta);
        }
        _ => meta = serde_json::json!({ "config": meta, "profile": profile_meta }),
    }
    write_json(&paths.meta, &meta)
}

/// Reloads a profile written by [`write_profile`].
pub fn read_profile(paths: &OutputPaths) -> Result<Profile> {
    let text = fs::read_to_string(&paths.csv).map_err(|e| io_err(&paths.csv, e))?;
    let (grid, value, slope) = parse_csv(&text)?;
    if grid.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let meta = read_json(&paths.meta)?;
    let profile_meta: ProfileMeta = meta
        .get("profile")
        .cloned()
        .ok_or_else(|| io_err(&paths.meta, "missing key \"profile\""))
        .and_then(|v| serde_json::from_value(v).map_err(|e| io_err(&paths.meta, e)))?;
    Ok(Profile::new(grid, value, slope, profile_meta))
}
