#!/usr/bin/env python3
"""Build an MNIST-format handwritten digit dataset for offline use.

Upscales scikit-learn's bundled 8x8 handwritten digits to 28x28 and
augments them with small random affine jitter, then writes the four
standard IDX files (train-images-idx3-ubyte, train-labels-idx1-ubyte,
t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte). Source images are
split into disjoint train/test pools before augmentation, so no test
image is a jittered copy of a training image.

The output is byte-compatible with MNIST loaders; point any tool that
reads MNIST IDX files at the output directory.
"""

import argparse
import struct
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split


def upscale(img8: np.ndarray) -> np.ndarray:
    # 8x8 in [0,16] -> 28x28 in [0,1]
    img = ndimage.zoom(img8 / 16.0, 28 / 8, order=3)
    return np.clip(img, 0.0, 1.0)


def jitter(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    angle = rng.uniform(-8.0, 8.0)
    scale = rng.uniform(0.92, 1.06)
    shift = rng.uniform(-1.5, 1.5, size=2)
    out = ndimage.rotate(img, angle, reshape=False, order=1, mode="constant")
    c = np.array(out.shape) / 2.0 - 0.5
    mat = np.eye(2) / scale
    offset = c - mat @ c + shift
    out = ndimage.affine_transform(out, mat, offset=offset, order=1, mode="constant")
    return np.clip(out, 0.0, 1.0)


def write_idx_images(path: Path, images: np.ndarray) -> None:
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, h, w))
        f.write((images * 255.0).round().astype(np.uint8).tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def build_split(pool_x, pool_y, count, rng):
    images = np.empty((count, 28, 28), dtype=np.float64)
    labels = np.empty(count, dtype=np.uint8)
    order = rng.permutation(len(pool_x))
    for i in range(count):
        j = order[i % len(pool_x)]
        base = pool_x[j]
        images[i] = base if i < len(pool_x) else jitter(base, rng)
        labels[i] = pool_y[j]
    return images, labels


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("data"))
    ap.add_argument("--train-count", type=int, default=12000)
    ap.add_argument("--test-count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    raw = load_digits()
    base = np.stack([upscale(img) for img in raw.images])
    x_train, x_test, y_train, y_test = train_test_split(
        base, raw.target, test_size=0.2, random_state=args.seed, stratify=raw.target
    )

    train_x, train_y = build_split(x_train, y_train, args.train_count, rng)
    test_x, test_y = build_split(x_test, y_test, args.test_count, rng)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx_images(args.out_dir / "train-images-idx3-ubyte", train_x)
    write_idx_labels(args.out_dir / "train-labels-idx1-ubyte", train_y)
    write_idx_images(args.out_dir / "t10k-images-idx3-ubyte", test_x)
    write_idx_labels(args.out_dir / "t10k-labels-idx1-ubyte", test_y)
    print(f"wrote {args.train_count} train / {args.test_count} test images to {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
