//! Binary PPM (P6, 8-bit) read and write.
//!
//! Quantization at write is round-to-nearest of `255·v` clamped to `[0, 255]`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::colorspace::RgbImage;

#[derive(Debug, Error)]
pub enum PpmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: not a P6 PPM (magic {magic:?})")]
    BadMagic { path: String, magic: String },
    #[error("{path}: malformed header field {field}")]
    BadHeader { path: String, field: &'static str },
    #[error("{path}: maxval {maxval} unsupported (want 255)")]
    BadMaxval { path: String, maxval: u32 },
    #[error("{path}: payload has {got} bytes, want {want}")]
    Truncated {
        path: String,
        got: usize,
        want: usize,
    },
}

fn io_err(path: &Path, source: io::Error) -> PpmError {
    PpmError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `img` as binary P6 with maxval 255.
pub fn write_ppm(img: &RgbImage, path: &Path) -> Result<(), PpmError> {
    let mut buf = Vec::with_capacity(32 + img.data().len());
    write!(buf, "P6\n{} {}\n255\n", img.width(), img.height()).expect("vec write");
    buf.extend(img.data().iter().map(|&v| quantize(v)));
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&buf).map_err(|e| io_err(path, e))
}

/// Round-to-nearest 8-bit quantization of a unit-interval value.
pub fn quantize(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

/// Reads a binary P6 PPM with maxval 255.
pub fn read_ppm(path: &Path) -> Result<RgbImage, PpmError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    let p = path.display().to_string();
    if !bytes.starts_with(b"P6") {
        return Err(PpmError::BadMagic {
            path: p,
            magic: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
        });
    }
    let mut pos = 2;
    let width = read_header_int(&bytes, &mut pos).ok_or(PpmError::BadHeader {
        path: p.clone(),
        field: "width",
    })?;
    let height = read_header_int(&bytes, &mut pos).ok_or(PpmError::BadHeader {
        path: p.clone(),
        field: "height",
    })?;
    let maxval = read_header_int(&bytes, &mut pos).ok_or(PpmError::BadHeader {
        path: p.clone(),
        field: "maxval",
    })?;
    if maxval != 255 {
        return Err(PpmError::BadMaxval {
            path: p,
            maxval: maxval as u32,
        });
    }
    pos += 1; // single whitespace byte after maxval
    let want = height * width * 3;
    let payload = &bytes[pos.min(bytes.len())..];
    if payload.len() < want {
        return Err(PpmError::Truncated {
            path: p,
            got: payload.len(),
            want,
        });
    }
    let data: Vec<f64> = payload[..want].iter().map(|&b| b as f64 / 255.0).collect();
    Ok(RgbImage::from_data(height, width, data).expect("bytes map into range"))
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Option<usize> {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b' ' | b'\t' | b'\n' | b'\r' => *pos += 1,
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_trip_is_8bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f64> = (0..6 * 4 * 3).map(|_| rng.gen()).collect();
        let img = RgbImage::from_data(6, 4, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ppm");
        write_ppm(&img, &path).unwrap();
        let back = read_ppm(&path).unwrap();
        assert_eq!(back.height(), 6);
        assert_eq!(back.width(), 4);
        // Quantization error is at most half a level.
        assert!(img.max_abs_diff(&back) <= 0.5 / 255.0 + 1e-12);
        // A second round trip is bit-stable.
        let path2 = dir.path().join("y.ppm");
        write_ppm(&back, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap()[3..], std::fs::read(&path2).unwrap()[3..]);
    }

    #[test]
    fn quantize_rounds_to_nearest() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(2.0), 255);
        assert_eq!(quantize(-0.3), 0);
    }

    #[test]
    fn rejects_non_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        std::fs::write(&path, b"P5\n1 1\n255\n0").unwrap();
        assert!(matches!(read_ppm(&path), Err(PpmError::BadMagic { .. })));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.ppm");
        std::fs::write(&path, b"P6\n2 2\n255\n\x00\x01").unwrap();
        assert!(matches!(read_ppm(&path), Err(PpmError::Truncated { .. })));
    }
}
