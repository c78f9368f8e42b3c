//! Bit-exact reader for the big-endian IDX container used by MNIST.
//!
//! Supported records: magic `0x00000803` (unsigned bytes, 3 dimensions,
//! images) and `0x00000801` (unsigned bytes, 1 dimension, labels). Parse
//! errors name the byte offset at which the file went wrong.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: truncated at byte offset {offset} (needed {needed} more bytes)")]
    Truncated {
        path: String,
        offset: usize,
        needed: usize,
    },
    #[error("{path}: magic mismatch at byte offset 0: got {got:#010x}, want 0x00000803 (images) or 0x00000801 (labels)")]
    BadMagic { path: String, got: u32 },
    #[error("{path}: dimension {dim} at byte offset {offset} overflows ({value})")]
    DimensionOverflow {
        path: String,
        dim: usize,
        offset: usize,
        value: u32,
    },
    #[error("{path}: payload length mismatch at byte offset {offset}: file has {got} payload bytes, dimensions require {want}")]
    PayloadMismatch {
        path: String,
        offset: usize,
        got: usize,
        want: usize,
    },
}

pub const MAGIC_IMAGES: u32 = 0x0000_0803;
pub const MAGIC_LABELS: u32 = 0x0000_0801;

/// A parsed IDX record: dimension sizes and the raw u8 payload in row-major
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub magic: u32,
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxTensor {
    pub fn is_images(&self) -> bool {
        self.magic == MAGIC_IMAGES
    }

    pub fn is_labels(&self) -> bool {
        self.magic == MAGIC_LABELS
    }
}

/// Parses an IDX file, validating magic, dimensions, and exact payload length.
pub fn read_idx(path: &Path) -> Result<IdxTensor, IdxError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| IdxError::Io {
            path: path.display().to_string(),
            source,
        })?;
    parse_idx(&bytes, &path.display().to_string())
}

/// Parses IDX bytes; exposed so fixtures can be authored in memory.
pub fn parse_idx(bytes: &[u8], path: &str) -> Result<IdxTensor, IdxError> {
    let be_u32 = |offset: usize| -> Result<u32, IdxError> {
        let end = offset + 4;
        if bytes.len() < end {
            return Err(IdxError::Truncated {
                path: path.to_string(),
                offset: bytes.len(),
                needed: end - bytes.len(),
            });
        }
        Ok(u32::from_be_bytes([
            bytes[offset],
            bytes[offset + 1],
            bytes[offset + 2],
            bytes[offset + 3],
        ]))
    };
    let magic = be_u32(0)?;
    let ndim = match magic {
        MAGIC_IMAGES => 3,
        MAGIC_LABELS => 1,
        got => {
            return Err(IdxError::BadMagic {
                path: path.to_string(),
                got,
            })
        }
    };
    let mut dims = Vec::with_capacity(ndim);
    let mut want: usize = 1;
    for d in 0..ndim {
        let offset = 4 + 4 * d;
        let value = be_u32(offset)?;
        let (product, overflow) = want.overflowing_mul(value as usize);
        if overflow || value as usize > u32::MAX as usize {
            return Err(IdxError::DimensionOverflow {
                path: path.to_string(),
                dim: d,
                offset,
                value,
            });
        }
        want = product;
        dims.push(value as usize);
    }
    let header = 4 + 4 * ndim;
    let got = bytes.len() - header.min(bytes.len());
    if got != want {
        return Err(IdxError::PayloadMismatch {
            path: path.to_string(),
            offset: header,
            got,
            want,
        });
    }
    Ok(IdxTensor {
        magic,
        dims,
        data: bytes[header..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds IDX image bytes by hand, independent of the parser.
    fn make_images(h: usize, w: usize, images: &[Vec<u8>]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(MAGIC_IMAGES.to_be_bytes());
        out.extend((images.len() as u32).to_be_bytes());
        out.extend((h as u32).to_be_bytes());
        out.extend((w as u32).to_be_bytes());
        for img in images {
            assert_eq!(img.len(), h * w);
            out.extend(img);
        }
        out
    }

    fn make_labels(labels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(MAGIC_LABELS.to_be_bytes());
        out.extend((labels.len() as u32).to_be_bytes());
        out.extend(labels);
        out
    }

    #[test]
    fn four_image_fixture_round_trips_exactly() {
        // Fixture with known checksums, authored by the independent writer
        // above.
        let images: Vec<Vec<u8>> = (0..4)
            .map(|i| (0..28 * 28).map(|p| ((p * 7 + i * 13) % 256) as u8).collect())
            .collect();
        let bytes = make_images(28, 28, &images);
        let parsed = parse_idx(&bytes, "fixture").unwrap();
        assert_eq!(parsed.dims, vec![4, 28, 28]);
        assert!(parsed.is_images());
        for (i, img) in images.iter().enumerate() {
            let start = i * 28 * 28;
            assert_eq!(&parsed.data[start..start + 28 * 28], img.as_slice());
            let checksum: u64 = img.iter().map(|&b| b as u64).sum();
            let parsed_sum: u64 = parsed.data[start..start + 28 * 28]
                .iter()
                .map(|&b| b as u64)
                .sum();
            assert_eq!(checksum, parsed_sum);
        }
    }

    #[test]
    fn empty_file_errors_at_offset_zero() {
        let err = parse_idx(&[], "empty").unwrap_err();
        match err {
            IdxError::Truncated { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_magic_on_image_reader_is_rejected() {
        let bytes = make_labels(&[1, 2, 3]);
        let parsed = parse_idx(&bytes, "labels").unwrap();
        assert!(parsed.is_labels() && !parsed.is_images());
        // A non-IDX magic names the mismatch.
        let mut bad = bytes.clone();
        bad[2] = 0x99;
        let err = parse_idx(&bad, "bad").unwrap_err();
        assert!(matches!(err, IdxError::BadMagic { .. }));
        assert!(err.to_string().contains("magic mismatch"));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut bytes = make_images(2, 2, &[vec![1, 2, 3, 4]]);
        bytes.pop();
        let err = parse_idx(&bytes, "short").unwrap_err();
        assert!(matches!(err, IdxError::PayloadMismatch { .. }));
    }

    #[test]
    fn label_round_trip() {
        let bytes = make_labels(&[7, 0, 9]);
        let parsed = parse_idx(&bytes, "labels").unwrap();
        assert_eq!(parsed.dims, vec![3]);
        assert_eq!(parsed.data, vec![7, 0, 9]);
    }
}
