//! PGM images and headered atom-matrix files.
//!
//! Images in memory are stacked columnwise; PGM rasters are row-major.
//! Matrix files start with three text lines (rows, cols, labels flag)
//! followed by either whitespace-separated row-major values, or the same
//! values as little-endian `f64`. With the flag set, `cols` labels follow
//! the values (as text, or one byte each in the binary form).

use std::path::Path;

use super::DigitSet;
use crate::error::{check_len, Error, Result};

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Encodes a columnwise-stacked `rows × cols` image with values clamped to
/// `[0, 1]` and 8-bit depth; `binary` selects P5 over P2.
pub fn encode_pgm(image: &[f64], rows: usize, cols: usize, binary: bool) -> Result<Vec<u8>> {
    check_len(image.len(), rows * cols)?;
    let level = |i: usize, c: usize| (image[i + c * rows].clamp(0.0, 1.0) * 255.0).round() as u8;
    let mut out = format!("{}\n{cols} {rows}\n255\n", if binary { "P5" } else { "P2" }).into_bytes();
    for i in 0..rows {
        if binary {
            out.extend((0..cols).map(|c| level(i, c)));
        } else {
            let line: Vec<String> = (0..cols).map(|c| level(i, c).to_string()).collect();
            out.extend(line.join(" ").bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// A decoded grayscale image, values scaled to `[0, 1]`, stacked columnwise.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

/// Splits off the next whitespace-delimited header token, skipping `#` comments.
fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(format_err("truncated PGM header"));
    }
    std::str::from_utf8(&bytes[start..*pos]).map_err(|_| format_err("non-ASCII PGM header"))
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    header_token(bytes, pos)?
        .parse()
        .map_err(|_| format_err(format!("bad PGM {what}")))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos)?;
    let binary = match magic {
        "P5" => true,
        "P2" => false,
        other => return Err(format_err(format!("unsupported PGM magic {other:?}"))),
    };
    let cols = header_number(bytes, &mut pos, "width")?;
    let rows = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(format_err(format!("PGM maxval {maxval} out of range")));
    }
    let count = rows * cols;
    let raster: Vec<usize> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let body = &bytes[(pos + 1).min(bytes.len())..];
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if body.len() < need {
            return Err(format_err("truncated PGM raster"));
        }
        if wide {
            body[..need].chunks(2).map(|p| (p[0] as usize) << 8 | p[1] as usize).collect()
        } else {
            body[..need].iter().map(|&b| b as usize).collect()
        }
    } else {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| format_err("non-ASCII P2 raster"))?;
        let values = text
            .split_ascii_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| format_err(format!("bad P2 sample {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(format_err(format!("P2 raster has {} samples, expected {count}", values.len())));
        }
        values
    };
    if raster.iter().any(|&v| v > maxval) {
        return Err(format_err("PGM sample exceeds maxval"));
    }
    let mut pixels = vec![0.0; count];
    for i in 0..rows {
        for c in 0..cols {
            pixels[i + c * rows] = raster[i * cols + c] as f64 / maxval as f64;
        }
    }
    Ok(GrayImage { rows, cols, pixels })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    decode_pgm(&std::fs::read(path)?)
}

/// A row-major real matrix with optional integer column labels.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub labels: Option<Vec<u8>>,
}

impl AtomMatrix {
    /// Column `j` as an image vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Columns as annotated atoms; fails without labels.
    pub fn to_digit_set(&self) -> Result<DigitSet> {
        let labels = self.labels.clone().ok_or_else(|| format_err("matrix file carries no labels"))?;
        DigitSet::new((0..self.cols).map(|j| self.column(j)).collect(), labels)
    }

    pub fn from_digit_set(set: &DigitSet) -> Self {
        let (rows, cols) = (set.pixel_count(), set.len());
        let mut data = vec![0.0; rows * cols];
        for (j, img) in set.images.iter().enumerate() {
            for (i, v) in img.iter().enumerate() {
                data[i * cols + j] = *v;
            }
        }
        AtomMatrix { rows, cols, data, labels: Some(set.labels.clone()) }
    }
}

pub fn encode_matrix(m: &AtomMatrix, binary: bool) -> Result<Vec<u8>> {
    check_len(m.data.len(), m.rows * m.cols)?;
    if let Some(l) = &m.labels {
        check_len(l.len(), m.cols)?;
    }
    let mut out = format!("{}\n{}\n{}\n", m.rows, m.cols, u8::from(m.labels.is_some())).into_bytes();
    if binary {
        for v in &m.data {
            out.extend(v.to_le_bytes());
        }
        if let Some(l) = &m.labels {
            out.extend(l);
        }
    } else {
        for row in m.data.chunks(m.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.extend(line.join(" ").bytes());
            out.push(b'\n');
        }
        if let Some(l) = &m.labels {
            let line: Vec<String> = l.iter().map(u8::to_string).collect();
            out.extend(line.join(" ").bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

fn parse_text_body(body: &[u8], rows: usize, cols: usize, labelled: bool) -> Option<(Vec<f64>, Option<Vec<u8>>)> {
    let text = std::str::from_utf8(body).ok()?;
    let tokens: Vec<&str> = text.split_ascii_whitespace().collect();
    let count = rows * cols;
    if tokens.len() != count + if labelled { cols } else { 0 } {
        return None;
    }
    let data = tokens[..count].iter().map(|t| t.parse().ok()).collect::<Option<Vec<f64>>>()?;
    let labels = if labelled {
        Some(tokens[count..].iter().map(|t| t.parse().ok()).collect::<Option<Vec<u8>>>()?)
    } else {
        None
    };
    Some((data, labels))
}

pub fn decode_matrix(bytes: &[u8]) -> Result<AtomMatrix> {
    let mut header = Vec::with_capacity(3);
    let mut pos = 0;
    for what in ["row count", "column count", "labels flag"] {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err("matrix header needs three lines"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| format_err("non-ASCII header"))?;
        let value: usize = line.trim().parse().map_err(|_| format_err(format!("bad {what} {line:?}")))?;
        header.push(value);
        pos += end + 1;
    }
    let (rows, cols) = (header[0], header[1]);
    let labelled = match header[2] {
        0 => false,
        1 => true,
        other => return Err(format_err(format!("labels flag must be 0 or 1, got {other}"))),
    };
    let body = &bytes[pos..];
    let (data, labels) = if let Some(parsed) = parse_text_body(body, rows, cols, labelled) {
        parsed
    } else if body.len() == rows * cols * 8 + if labelled { cols } else { 0 } {
        let (values, tail) = body.split_at(rows * cols * 8);
        let data = values.chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        (data, labelled.then(|| tail.to_vec()))
    } else {
        return Err(format_err(format!("matrix body does not hold {rows} x {cols} values")));
    };
    if let Some(l) = &labels {
        if l.iter().any(|&v| v > 9) {
            return Err(format_err("labels must lie in 0..=9"));
        }
    }
    Ok(AtomMatrix { rows, cols, data, labels })
}

pub fn read_matrix(path: &Path) -> Result<AtomMatrix> {
    decode_matrix(&std::fs::read(path)?)
}
