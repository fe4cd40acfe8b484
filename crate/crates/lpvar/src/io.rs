//! File formats: binary PGM (P5), CSV arrays, and frequency-mask files.
//!
//! CSV layout is row-major with full round-trip float precision: 2D signals
//! are written one grid row per line, 1D signals one value per line. Mask
//! files hold one frequency index per line (1D) or one `k_x,k_y` pair per
//! line (2D). Lines starting with `#` are ignored in both formats.

use crate::error::{Error, Result};
use crate::operators::{Selection, Shape, Signal};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Reads an 8-bit binary PGM (P5) file as a 2D signal with values in [0, 255].
pub fn load_image(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| Error::Parse(format!("{}: {msg}", path.display())))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<Signal, String> {
    let mut pos = 0usize;
    let mut token = |bytes: &[u8]| -> std::result::Result<String, String> {
        // Skip whitespace and '#' comments between tokens.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if token(bytes)? != "P5" {
        return Err("not a binary PGM (P5) file".into());
    }
    let cols: usize = token(bytes)?.parse().map_err(|_| "bad width".to_string())?;
    let rows: usize = token(bytes)?.parse().map_err(|_| "bad height".to_string())?;
    let maxval: usize = token(bytes)?.parse().map_err(|_| "bad maxval".to_string())?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (8-bit only)"));
    }
    // Exactly one whitespace byte separates the header from raster data.
    pos += 1;
    let need = rows * cols;
    if bytes.len() < pos + need {
        return Err(format!(
            "raster truncated: need {need} bytes, found {}",
            bytes.len().saturating_sub(pos)
        ));
    }
    let values: Vec<f64> = bytes[pos..pos + need].iter().map(|&b| b as f64).collect();
    Signal::new(values, Shape::TwoD { rows, cols }).map_err(|e| e.to_string())
}

/// Writes a 2D signal as binary PGM. Values are rounded and clamped to
/// [0, 255]; use [`save_image_scaled`] for arbitrary-range data.
pub fn save_image(path: impl AsRef<Path>, image: &Signal) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = match image.shape() {
        Shape::TwoD { rows, cols } => (rows, cols),
        Shape::OneD(_) => {
            return Err(Error::InvalidInput(
                "PGM output requires a 2D signal".into(),
            ))
        }
    };
    let mut data = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    data.extend(
        image
            .values()
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8),
    );
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Writes a 2D signal as PGM after linear min-max scaling to [0, 255].
/// Constant images map to all zeros. Visualization only.
pub fn save_image_scaled(path: impl AsRef<Path>, image: &Signal) -> Result<()> {
    let lo = image.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = image
        .values()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = if hi > lo {
        image
            .values()
            .iter()
            .map(|&v| (v - lo) / (hi - lo) * 255.0)
            .collect()
    } else {
        vec![0.0; image.len()]
    };
    save_image(path, &Signal::new(scaled, image.shape())?)
}

/// Writes a signal as CSV in its grid layout with full float precision.
pub fn save_csv(path: impl AsRef<Path>, signal: &Signal) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match signal.shape() {
        Shape::OneD(_) => signal
            .values()
            .iter()
            .try_for_each(|v| writeln!(w, "{v}")),
        Shape::TwoD { rows, cols } => (0..rows).try_for_each(|r| {
            let line = signal.values()[r * cols..(r + 1) * cols]
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")
        }),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes a flat vector as one-value-per-line CSV.
pub fn save_csv_vector(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    values
        .iter()
        .try_for_each(|v| writeln!(w, "{v}"))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`save_csv`], inferring 1D vs 2D from the line
/// structure: multiple comma-separated columns mean a 2D row-major grid.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{}:{}: bad number {tok:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty CSV", path.display())));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{}: ragged rows in CSV",
            path.display()
        )));
    }
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    if cols == 1 {
        let n = values.len();
        Signal::new(values, Shape::OneD(n))
    } else {
        let rows_n = values.len() / cols;
        Signal::new(
            values,
            Shape::TwoD {
                rows: rows_n,
                cols,
            },
        )
    }
}

/// Reads a frequency mask file for the given signal shape.
pub fn load_mask(path: impl AsRef<Path>, shape: Shape) -> Result<Selection> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut one_d = Vec::new();
    let mut two_d = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |tok: &str| {
            Error::Parse(format!(
                "{}:{}: bad frequency index {tok:?}",
                path.display(),
                lineno + 1
            ))
        };
        match shape {
            Shape::OneD(_) => {
                one_d.push(line.parse::<usize>().map_err(|_| bad(line))?);
            }
            Shape::TwoD { .. } => {
                let (a, b) = line.split_once(',').ok_or_else(|| {
                    Error::Parse(format!(
                        "{}:{}: expected k_x,k_y pair",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                two_d.push((
                    a.trim().parse::<usize>().map_err(|_| bad(a))?,
                    b.trim().parse::<usize>().map_err(|_| bad(b))?,
                ));
            }
        }
    }
    Ok(match shape {
        Shape::OneD(_) => Selection::OneD(one_d),
        Shape::TwoD { .. } => Selection::TwoD(two_d),
    })
}

/// Writes a frequency mask file (one index or `k_x,k_y` pair per line).
pub fn save_mask(path: impl AsRef<Path>, selection: &Selection) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    match selection {
        Selection::OneD(ks) => {
            for k in ks {
                out.push_str(&format!("{k}\n"));
            }
        }
        Selection::TwoD(ks) => {
            for (kx, ky) in ks {
                out.push_str(&format!("{kx},{ky}\n"));
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.pgm");
        let img = Signal::new(
            vec![0.0, 255.0, 128.0, 64.0],
            Shape::TwoD { rows: 2, cols: 2 },
        )
        .unwrap();
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
        let bytes1 = fs::read(&path).unwrap();
        save_image(&path, &back).unwrap();
        assert_eq!(bytes1, fs::read(&path).unwrap());
    }

    #[test]
    fn pgm_missing_file_is_io_error() {
        assert!(matches!(
            load_image("/nonexistent/file.pgm"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn pgm_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        fs::write(&path, b"P6\n2 2\n255\nxxxx").unwrap();
        assert!(matches!(load_image(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn csv_roundtrip_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        let sig = Signal::new(
            vec![1.0 / 3.0, -2.5e-17, 3.14159265358979, 42.0, 0.1, -0.0],
            Shape::TwoD { rows: 2, cols: 3 },
        )
        .unwrap();
        save_csv(&path, &sig).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(back.shape(), sig.shape());
        for (a, b) in back.values().iter().zip(sig.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let line = Signal::new(vec![0.25, -7.0, 1e-300], Shape::OneD(3)).unwrap();
        save_csv(&path, &line).unwrap();
        assert_eq!(load_csv(&path).unwrap(), line);
    }

    #[test]
    fn mask_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.txt");

        let sel = Selection::OneD(vec![0, 3, 7]);
        save_mask(&path, &sel).unwrap();
        assert_eq!(load_mask(&path, Shape::OneD(10)).unwrap(), sel);

        let sel = Selection::TwoD(vec![(0, 0), (3, 1), (2, 5)]);
        save_mask(&path, &sel).unwrap();
        assert_eq!(
            load_mask(&path, Shape::TwoD { rows: 6, cols: 4 }).unwrap(),
            sel
        );
    }
}
