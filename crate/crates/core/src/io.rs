//! Output files: atomic writes, the binary grid format and ensemble CSVs.

use crate::error::{LabError, Result};
use crate::eulerian::ScalarField;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes `bytes` to a sibling temporary file and renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| LabError::Config(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Header stored next to a binary grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "time")]
    pub time: f64,
    #[serde(rename = "kappa")]
    pub kappa: f64,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<stem>.bin` (row-major little-endian f64) and `<stem>.json`.
pub fn write_grid(stem: &Path, field: &ScalarField, kappa: f64) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * field.values.len());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(&with_ext(stem, ".bin"), &bytes)?;
    let header = GridHeader { n: field.n, time: field.time, kappa };
    write_atomic(&with_ext(stem, ".json"), &to_json_bytes(&header)?)
}

pub fn read_grid(stem: &Path) -> Result<(ScalarField, GridHeader)> {
    let header: GridHeader = serde_json::from_slice(&fs::read(with_ext(stem, ".json"))?)
        .map_err(|e| LabError::Config(format!("grid header: {e}")))?;
    let bytes = fs::read(with_ext(stem, ".bin"))?;
    if bytes.len() != 8 * header.n * header.n {
        return Err(LabError::Config(format!(
            "grid file holds {} bytes, header says N = {}",
            bytes.len(),
            header.n
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((ScalarField::from_values(header.n, values, header.time)?, header))
}

/// Grid as CSV rows `x1,x2,value` at the cell-centred nodes (small N only).
pub fn grid_csv(field: &ScalarField) -> String {
    let n = field.n;
    let mut out = String::from("x1,x2,value\n");
    for j in 0..n {
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let y = (j as f64 + 0.5) / n as f64;
            out.push_str(&format!("{x},{y},{}\n", field.values[j * n + i]));
        }
    }
    out
}

/// Ensemble snapshot: a JSON header line prefixed by `#`, then `id,x1,x2`.
pub fn ensemble_csv(points: &[[f64; 2]], header: &serde_json::Value) -> String {
    let mut out = format!("# {header}\nid,x1,x2\n");
    for (i, p) in points.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", p[0], p[1]));
    }
    out
}

/// `x,y` pairs for a plot-data file.
pub fn xy_csv(x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("{x_label},{y_label}\n");
    for (x, y) in points {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

pub fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| LabError::Config(format!("json: {e}")))?;
    s.push('\n');
    Ok(s.into_bytes())
}
