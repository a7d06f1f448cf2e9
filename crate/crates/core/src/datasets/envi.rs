//! ENVI raster reader (ASCII header plus raw binary cube).

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    Bsq,
    Bil,
    Bip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataType {
    Int16,
    Float32,
    Float64,
}

impl DataType {
    fn from_code(code: u32) -> Option<Self> {
        match code {
            2 => Some(DataType::Int16),
            4 => Some(DataType::Float32),
            5 => Some(DataType::Float64),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            DataType::Int16 => 2,
            DataType::Float32 => 4,
            DataType::Float64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub interleave: Interleave,
    pub data_type: DataType,
    pub big_endian: bool,
    pub header_offset: usize,
}

impl EnviHeader {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("ENVI") {
            return Err(Error::format(path, "header does not start with 'ENVI'"));
        }
        let fields = parse_fields(lines, path)?;
        let get = |key: &str| fields.get(key).map(String::as_str);
        let int = |key: &str| -> Result<Option<usize>> {
            get(key)
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| Error::format(path, format!("'{key}' is not an integer: '{v}'")))
                })
                .transpose()
        };
        let required = |key: &str| -> Result<usize> {
            int(key)?.ok_or_else(|| Error::format(path, format!("missing required key '{key}'")))
        };

        let interleave = match get("interleave").map(str::to_ascii_lowercase).as_deref() {
            Some("bsq") | None => Interleave::Bsq,
            Some("bil") => Interleave::Bil,
            Some("bip") => Interleave::Bip,
            Some(other) => return Err(Error::format(path, format!("unsupported interleave '{other}'"))),
        };
        let code = required("data type")?;
        let data_type = DataType::from_code(code as u32).ok_or_else(|| {
            Error::format(
                path,
                format!("unsupported data type {code} (expected 2 = int16, 4 = float32, 5 = float64)"),
            )
        })?;
        let big_endian = match int("byte order")?.unwrap_or(0) {
            0 => false,
            1 => true,
            other => return Err(Error::format(path, format!("invalid byte order {other}"))),
        };
        let header = Self {
            samples: required("samples")?,
            lines: required("lines")?,
            bands: required("bands")?,
            interleave,
            data_type,
            big_endian,
            header_offset: int("header offset")?.unwrap_or(0),
        };
        if header.samples == 0 || header.lines == 0 || header.bands == 0 {
            return Err(Error::format(path, "samples, lines and bands must be positive"));
        }
        Ok(header)
    }

    pub fn expected_bytes(&self) -> usize {
        self.header_offset + self.samples * self.lines * self.bands * self.data_type.size()
    }

    /// Byte position of `(line, sample, band)` in the binary file.
    fn offset(&self, line: usize, sample: usize, band: usize) -> usize {
        let (s, l, b) = (self.samples, self.lines, self.bands);
        let element = match self.interleave {
            Interleave::Bsq => (band * l + line) * s + sample,
            Interleave::Bil => (line * b + band) * s + sample,
            Interleave::Bip => (line * s + sample) * b + band,
        };
        self.header_offset + element * self.data_type.size()
    }

    fn read_value(&self, bytes: &[u8], at: usize) -> f64 {
        let be = self.big_endian;
        match self.data_type {
            DataType::Int16 => {
                let raw = [bytes[at], bytes[at + 1]];
                f64::from(if be { i16::from_be_bytes(raw) } else { i16::from_le_bytes(raw) })
            }
            DataType::Float32 => {
                let raw: [u8; 4] = bytes[at..at + 4].try_into().expect("4 bytes");
                f64::from(if be { f32::from_be_bytes(raw) } else { f32::from_le_bytes(raw) })
            }
            DataType::Float64 => {
                let raw: [u8; 8] = bytes[at..at + 8].try_into().expect("8 bytes");
                if be {
                    f64::from_be_bytes(raw)
                } else {
                    f64::from_le_bytes(raw)
                }
            }
        }
    }
}

/// `key = value` pairs; `{...}` values may span lines. Keys are lowercased.
fn parse_fields<'a>(lines: impl Iterator<Item = &'a str>, path: &Path) -> Result<HashMap<String, String>> {
    let mut fields = HashMap::new();
    let mut pending: Option<(String, String)> = None;
    for line in lines {
        if let Some((key, mut value)) = pending.take() {
            value.push(' ');
            value.push_str(line.trim());
            if value.contains('}') {
                fields.insert(key, value);
            } else {
                pending = Some((key, value));
            }
            continue;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            pending = Some((key, value));
        } else {
            fields.insert(key, value);
        }
    }
    if let Some((key, _)) = pending {
        return Err(Error::format(path, format!("unterminated '{{' in value of '{key}'")));
    }
    Ok(fields)
}

/// Binary file next to a header: the header path without `.hdr`, or with a
/// common raster extension in its place.
pub fn data_path(header_path: &Path) -> Result<PathBuf> {
    let stem = header_path.with_extension("");
    if stem != header_path && stem.is_file() {
        return Ok(stem);
    }
    for ext in ["img", "raw", "dat", "bsq", "bil", "bip"] {
        let candidate = header_path.with_extension(ext);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(Error::format(header_path, "no binary data file found next to header"))
}

fn read_header(header_path: &Path) -> Result<(EnviHeader, Vec<u8>, PathBuf)> {
    let text = std::fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = EnviHeader::parse(&text, header_path)?;
    let bin = data_path(header_path)?;
    let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != header.expected_bytes() {
        return Err(Error::format(
            &bin,
            format!(
                "expected {} bytes for {} x {} x {} {:?}, found {}",
                header.expected_bytes(),
                header.lines,
                header.samples,
                header.bands,
                header.data_type,
                bytes.len()
            ),
        ));
    }
    Ok((header, bytes, bin))
}

/// Loads a cube as `lines * samples` pixels in row-major image order, with
/// an optional single-band label raster of the same size (0 = unlabeled).
pub fn load_envi(header_path: &Path, labels_header: Option<&Path>) -> Result<PointCloud> {
    let (h, bytes, bin) = read_header(header_path)?;
    let n = h.lines * h.samples;
    let mut data = Vec::with_capacity(n * h.bands);
    for line in 0..h.lines {
        for sample in 0..h.samples {
            for band in 0..h.bands {
                let at = h.offset(line, sample, band);
                let v = h.read_value(&bytes, at);
                if !v.is_finite() {
                    return Err(Error::format(&bin, format!("non-finite value at byte offset {at}")));
                }
                data.push(v);
            }
        }
    }
    let mut cloud = PointCloud::new(data, n, h.bands)?.with_shape(h.lines, h.samples)?;
    if let Some(lp) = labels_header {
        cloud = cloud.with_labels(load_envi_labels(lp, h.lines, h.samples)?)?;
    }
    Ok(cloud)
}

fn load_envi_labels(header_path: &Path, lines: usize, samples: usize) -> Result<Vec<u32>> {
    let (h, bytes, bin) = read_header(header_path)?;
    if h.bands != 1 || h.lines != lines || h.samples != samples {
        return Err(Error::format(
            header_path,
            format!(
                "label raster is {} x {} x {}, expected {lines} x {samples} x 1",
                h.lines, h.samples, h.bands
            ),
        ));
    }
    let mut labels = Vec::with_capacity(lines * samples);
    for line in 0..lines {
        for sample in 0..samples {
            let at = h.offset(line, sample, 0);
            let v = h.read_value(&bytes, at);
            if !(v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)) {
                return Err(Error::format(&bin, format!("invalid label {v} at byte offset {at}")));
            }
            labels.push(v as u32);
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiline_braces_and_defaults() {
        let text = "ENVI\nsamples = 2\nlines = 3\nbands = 4\ndata type = 4\nwavelength = {1,\n 2,\n 3}\n";
        let h = EnviHeader::parse(text, Path::new("x.hdr")).unwrap();
        assert_eq!(h.interleave, Interleave::Bsq);
        assert!(!h.big_endian);
        assert_eq!(h.expected_bytes(), 2 * 3 * 4 * 4);
    }

    #[test]
    fn rejects_unknown_interleave_and_type() {
        let base = "ENVI\nsamples = 1\nlines = 1\nbands = 1\n";
        assert!(EnviHeader::parse(&format!("{base}data type = 4\ninterleave = bxx\n"), Path::new("h")).is_err());
        assert!(EnviHeader::parse(&format!("{base}data type = 9\n"), Path::new("h")).is_err());
        assert!(EnviHeader::parse("samples = 1\n", Path::new("h")).is_err());
    }

    #[test]
    fn interleave_offsets() {
        let mut h = EnviHeader {
            samples: 2,
            lines: 3,
            bands: 4,
            interleave: Interleave::Bsq,
            data_type: DataType::Int16,
            big_endian: false,
            header_offset: 0,
        };
        assert_eq!(h.offset(1, 1, 2), ((2 * 3 + 1) * 2 + 1) * 2);
        h.interleave = Interleave::Bil;
        assert_eq!(h.offset(1, 1, 2), ((4 + 2) * 2 + 1) * 2);
        h.interleave = Interleave::Bip;
        assert_eq!(h.offset(1, 1, 2), ((2 + 1) * 4 + 2) * 2);
    }
}
