#!/usr/bin/env python3
"""Builds the desk-scale handwritten-digit pool in IDX format.

Source: the UCI optical-digits set bundled with scikit-learn (1797 8x8
grayscale digits, 10 classes). Images are upscaled to 14x14 with bilinear
interpolation and contrast-stretched (clip(1.6*v)) so strokes reach full
intensity. The first 1500 digits become the training pool, the remaining
297 the test pool. Output files use the MNIST IDX container (big endian,
magic 0x00000803 for u8 image tensors and 0x00000801 for u8 labels).

Usage: python3 tools/make_digits_pool.py [outdir]
"""

import struct
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.datasets import load_digits

SIZE = 14
TRAIN_POOL = 1500
CONTRAST = 1.6


def write_idx_images(path: Path, images: np.ndarray) -> None:
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/digits")
    outdir.mkdir(parents=True, exist_ok=True)
    digits = load_digits()
    upscaled = []
    for img in digits.images:  # values 0..16
        arr = (img / 16.0 * 255.0).astype(np.uint8)
        big = Image.fromarray(arr, mode="L").resize((SIZE, SIZE), Image.BILINEAR)
        v = np.asarray(big, dtype=np.float64)
        v = np.clip(v * CONTRAST, 0, 255)
        upscaled.append(v.astype(np.uint8))
    images = np.stack(upscaled)
    labels = digits.target.astype(np.uint8)

    write_idx_images(outdir / "train-images-idx3-ubyte", images[:TRAIN_POOL])
    write_idx_labels(outdir / "train-labels-idx1-ubyte", labels[:TRAIN_POOL])
    write_idx_images(outdir / "test-images-idx3-ubyte", images[TRAIN_POOL:])
    write_idx_labels(outdir / "test-labels-idx1-ubyte", labels[TRAIN_POOL:])
    print(f"wrote {TRAIN_POOL} train / {len(images) - TRAIN_POOL} test digits to {outdir}")


if __name__ == "__main__":
    main()
