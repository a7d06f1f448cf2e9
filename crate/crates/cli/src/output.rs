//! File writers for command outputs.
//!
//! Cluster maps are binary PPM (P6). Label 0 is black; label `l > 0` takes
//! `PALETTE[(l - 1) % PALETTE.len()]`, so colors are stable across runs.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// Twelve well-separated colors (RGB).
pub const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

pub fn label_color(label: u32) -> [u8; 3] {
    match label {
        0 => [0, 0, 0],
        l => PALETTE[(l as usize - 1) % PALETTE.len()],
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Plain CSV: header then rows, no quoting (cells are numeric).
pub fn write_rows<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

/// A `# {json}` comment recording how the labels were made, then a `label`
/// column.
pub fn write_labels_file(path: &Path, labels: &[u32], record: &Value) -> Result<()> {
    let mut text = format!("# {}\nlabel\n", serde_json::to_string(record)?);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_text(path, &text)
}

/// Row-major `rows x cols` label raster.
pub fn write_ppm(path: &Path, rows: usize, cols: usize, labels: &[u32]) -> Result<()> {
    anyhow::ensure!(labels.len() == rows * cols, "{} labels for a {rows}x{cols} map", labels.len());
    let mut bytes = format!("P6\n{cols} {rows}\n255\n").into_bytes();
    bytes.reserve(labels.len() * 3);
    for &l in labels {
        bytes.extend_from_slice(&label_color(l));
    }
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(&bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_colors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ppm");
        write_ppm(&path, 1, 2, &[0, 13]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P6\n2 1\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 0, 0, 230, 25, 75]);
        assert!(write_ppm(&path, 2, 2, &[1]).is_err());
    }
}
