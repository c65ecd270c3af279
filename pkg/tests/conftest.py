"""Shared fixtures: synthetic IDX files and discovery of real dataset files.

Real MNIST / Fashion-MNIST files are looked up under $FIRSTPHOTON_DATA
(default ./data), in per-dataset subdirectories using the published file
names, optionally gzipped.  Tests that need them skip with an explicit
message when the files are absent.
"""

import os
import struct
from pathlib import Path

import numpy as np
import pytest

from firstphoton.datasets import IDX_FILE_NAMES, load_idx

DATA_DIR = Path(os.environ.get("FIRSTPHOTON_DATA", "data"))


def write_idx_images(path, images) -> None:
    """Write a list/array of uint8 images (n, rows, cols) in IDX3 format."""
    arr = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, arr.shape[0], arr.shape[1], arr.shape[2]))
        f.write(arr.tobytes())


def write_idx_labels(path, labels) -> None:
    arr = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, arr.shape[0]))
        f.write(arr.tobytes())


def dataset_paths(name: str, split: str):
    """Paths of a real dataset's image/label files, or None if absent."""
    found = []
    for kind in ("images", "labels"):
        base = DATA_DIR / name / IDX_FILE_NAMES[(split, kind)]
        gz = base.with_name(base.name + ".gz")
        if base.exists():
            found.append(base)
        elif gz.exists():
            found.append(gz)
        else:
            return None
    return tuple(found)


def require_dataset(name: str, split: str):
    paths = dataset_paths(name, split)
    if paths is None:
        pytest.skip(
            f"{name} {split} set not found: place "
            f"{IDX_FILE_NAMES[(split, 'images')]} and {IDX_FILE_NAMES[(split, 'labels')]} "
            f"(optionally .gz) under {DATA_DIR / name}/"
        )
    return paths


@pytest.fixture(scope="session")
def mnist_test():
    images, labels = require_dataset("mnist", "test")
    return load_idx(images, labels)


@pytest.fixture(scope="session")
def mnist_train():
    images, labels = require_dataset("mnist", "train")
    return load_idx(images, labels)


@pytest.fixture(scope="session")
def fashion_test():
    images, labels = require_dataset("fashion", "test")
    return load_idx(images, labels)


def synthetic_digits(n: int, rows: int = 6, cols: int = 6, classes: int = 4, seed: int = 0):
    """Deterministic labeled images: each class is a smooth random prototype
    plus per-example brightness jitter.  Classes overlap enough that the
    pixel-lookup ceiling sits well below 1."""
    rng = np.random.default_rng(seed)
    prototypes = rng.uniform(0.05, 1.0, size=(classes, rows, cols))
    images = []
    for i in range(n):
        label = int(rng.integers(classes))
        jitter = rng.uniform(0.6, 1.4, size=(rows, cols))
        pixels = np.clip(prototypes[label] * jitter, 0.0, 1.0)
        images.append((np.round(pixels * 255).astype(np.uint8), label))
    return images
