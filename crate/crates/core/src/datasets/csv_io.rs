//! CSV point clouds and label files.
//!
//! Layout: optional `# shape = ROWSxCOLS` comment lines, an optional header
//! row, then one pixel per row. A header whose last column is `label` marks
//! a trailing integer label column (0 = unlabeled). Values are written in
//! shortest round-trip form, so write-then-read is bit-exact.

use std::io::Write;
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

const LABEL_COLUMN: &str = "label";

fn is_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|cell| cell.trim().parse::<f64>().is_err())
}

fn split_comments(text: &str) -> (Vec<&str>, &str) {
    let mut rest = text;
    let mut comments = Vec::new();
    while let Some(line) = rest.strip_prefix('#') {
        let (head, tail) = line.split_once('\n').unwrap_or((line, ""));
        comments.push(head.trim());
        rest = tail;
    }
    (comments, rest)
}

fn parse_shape(comment: &str, path: &Path) -> Result<Option<(usize, usize)>> {
    let Some((key, value)) = comment.split_once('=') else {
        return Ok(None);
    };
    if key.trim() != "shape" {
        return Ok(None);
    }
    let bad = || Error::format(path, format!("malformed shape comment '{comment}'"));
    let (r, c) = value.trim().split_once('x').ok_or_else(bad)?;
    Ok(Some((
        r.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    )))
}

fn reader(body: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes())
}

pub fn load_csv(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (comments, body) = split_comments(&text);
    let mut shape = None;
    for c in comments {
        if let Some(s) = parse_shape(c, path)? {
            shape = Some(s);
        }
    }

    let mut has_labels = false;
    let mut width = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (line_idx, record) in reader(body).records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let line = line_idx + 1;
        if line_idx == 0 && is_header(&record) {
            has_labels = record
                .iter()
                .last()
                .is_some_and(|c| c.eq_ignore_ascii_case(LABEL_COLUMN));
            width = Some(record.len());
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::format(path, format!("row {line} has {} columns, expected {w}", record.len())));
        }
        let value_cols = if has_labels { w - 1 } else { w };
        for (col, cell) in record.iter().enumerate().take(value_cols) {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::format(path, format!("row {line}, column {}: not a number: '{cell}'", col + 1)))?;
            data.push(v);
        }
        if has_labels {
            let cell = &record[w - 1];
            labels.push(
                cell.parse::<u32>()
                    .map_err(|_| Error::format(path, format!("row {line}, column {w}: not a label: '{cell}'")))?,
            );
        }
        n += 1;
    }
    let dim = match width {
        Some(w) if n > 0 => w - usize::from(has_labels),
        _ => return Err(Error::format(path, "no data rows")),
    };
    let mut cloud = PointCloud::new(data, n, dim).map_err(|e| Error::format(path, e.to_string()))?;
    if has_labels {
        cloud = cloud.with_labels(labels)?;
    }
    if let Some((r, c)) = shape {
        cloud = cloud.with_shape(r, c)?;
    }
    Ok(cloud)
}

pub fn write_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut out = String::new();
    if let Some((r, c)) = cloud.shape() {
        out.push_str(&format!("# shape = {r}x{c}\n"));
    }
    let mut header: Vec<String> = (0..cloud.dim()).map(|j| format!("b{j}")).collect();
    if cloud.labels().is_some() {
        header.push(LABEL_COLUMN.to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in cloud.rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = cloud.labels() {
            cells.push(l[i].to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// One label per row under a `label` header.
pub fn write_labels(path: &Path, labels: &[u32]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3 + 8);
    out.push_str(LABEL_COLUMN);
    out.push('\n');
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Reads labels from a single-column file or from the `label` column of a
/// point-cloud CSV.
pub fn read_labels(path: &Path) -> Result<Vec<u32>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (_, body) = split_comments(&text);
    let mut column = None;
    let mut labels = Vec::new();
    for (line_idx, record) in reader(body).records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let line = line_idx + 1;
        if line_idx == 0 && is_header(&record) {
            column = record.iter().position(|c| c.eq_ignore_ascii_case(LABEL_COLUMN));
            if column.is_none() && record.len() != 1 {
                return Err(Error::format(path, "no 'label' column"));
            }
            continue;
        }
        let col = column.unwrap_or(0);
        if column.is_none() && record.len() != 1 {
            return Err(Error::format(path, format!("row {line}: expected a single label column")));
        }
        let cell = record
            .get(col)
            .ok_or_else(|| Error::format(path, format!("row {line}: missing label column")))?;
        labels.push(
            cell.parse::<u32>()
                .map_err(|_| Error::format(path, format!("row {line}, column {}: not a label: '{cell}'", col + 1)))?,
        );
    }
    if labels.is_empty() {
        return Err(Error::format(path, "no labels"));
    }
    Ok(labels)
}
