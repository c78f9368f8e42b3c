//! Labeled image sets and their on-disk manifest format.
//!
//! A dataset directory holds zero-padded-index PPM files plus `manifest.json`
//! with class names, labels, the generator spec, the seed, and a sha256 per
//! file. Reading verifies the hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::colorspace::RgbImage;
use crate::ppm::{read_ppm, write_ppm, PpmError};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ppm(#[from] PpmError),
    #[error("{path}: manifest parse error: {message}")]
    Parse { path: String, message: String },
    #[error("{file}: content hash mismatch (expected {expected}, got {got})")]
    HashMismatch {
        file: String,
        expected: String,
        got: String,
    },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("image and label counts differ: {images} vs {labels}")]
    CountMismatch { images: usize, labels: usize },
}

fn io_err(path: &Path, source: std::io::Error) -> ManifestError {
    ManifestError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// In-memory labeled dataset.
#[derive(Debug, Clone)]
pub struct LabeledImageSet {
    pub images: Vec<RgbImage>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl LabeledImageSet {
    pub fn new(
        images: Vec<RgbImage>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self, ManifestError> {
        if images.len() != labels.len() {
            return Err(ManifestError::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(ManifestError::LabelOutOfRange {
                label,
                classes: classes.len(),
            });
        }
        Ok(Self {
            images,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Histogram of labels per class.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.classes.len()];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ManifestItem {
    pub file: String,
    pub label: usize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub classes: Vec<String>,
    pub items: Vec<ManifestItem>,
    pub spec: serde_json::Value,
    pub seed: u64,
    pub sha256: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the set as PPM files plus `manifest.json`; returns the manifest
/// path. Image files are named `img_<zero-padded index>.ppm`.
pub fn write_manifest(
    set: &LabeledImageSet,
    dir: &Path,
    spec: serde_json::Value,
    seed: u64,
) -> Result<PathBuf, ManifestError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut items = Vec::with_capacity(set.len());
    let mut hashes = BTreeMap::new();
    for (i, (img, &label)) in set.images.iter().zip(&set.labels).enumerate() {
        let name = format!("img_{i:06}.ppm");
        let path = dir.join(&name);
        write_ppm(img, &path)?;
        let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        hashes.insert(name.clone(), sha256_hex(&bytes));
        items.push(ManifestItem { file: name, label });
    }
    let manifest = Manifest {
        version: 1,
        classes: set.classes.clone(),
        items,
        spec,
        seed,
        sha256: hashes,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Reads a manifest directory back, verifying per-file hashes.
pub fn read_manifest(dir: &Path) -> Result<(LabeledImageSet, Manifest), ManifestError> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ManifestError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut images = Vec::with_capacity(manifest.items.len());
    let mut labels = Vec::with_capacity(manifest.items.len());
    for item in &manifest.items {
        let fpath = dir.join(&item.file);
        let bytes = std::fs::read(&fpath).map_err(|e| io_err(&fpath, e))?;
        if let Some(expected) = manifest.sha256.get(&item.file) {
            let got = sha256_hex(&bytes);
            if &got != expected {
                return Err(ManifestError::HashMismatch {
                    file: item.file.clone(),
                    expected: expected.clone(),
                    got,
                });
            }
        }
        images.push(read_ppm(&fpath)?);
        labels.push(item.label);
    }
    let set = LabeledImageSet::new(images, labels, manifest.classes.clone())?;
    Ok((set, manifest))
}
