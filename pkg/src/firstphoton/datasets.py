"""MNIST-style dataset handling: IDX parsing, resampling, and amplitude encoding.

An image drives the experiment twice.  Classically, its normalized pixel
brightnesses are the probability distribution of where the first photon lands.
Quantum mechanically, the square roots of those relative brightnesses are the
real, non-negative amplitudes of the photon state just behind the screen, padded
with always-dark pixels up to a dimension M = C * S that factors into C classes
times S style slots.
"""

from __future__ import annotations

import gzip
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DarkImageError, DatasetMismatchError, IdxFormatError, LayoutError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

# Canonical file names of the published MNIST / Fashion-MNIST archives.  Both
# datasets ship the same four files; Fashion-MNIST reuses MNIST's names.
IDX_FILE_NAMES = {
    ("train", "images"): "train-images-idx3-ubyte",
    ("train", "labels"): "train-labels-idx1-ubyte",
    ("test", "images"): "t10k-images-idx3-ubyte",
    ("test", "labels"): "t10k-labels-idx1-ubyte",
}


@dataclass(frozen=True)
class ExampleImage:
    """One labeled screen pattern.

    pixels holds brightness fractions in [0, 1], shape (rows, cols).  The
    array is treated as immutable after construction.
    """

    pixels: np.ndarray
    label: int

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 2:
            raise ValueError(f"pixels must be a 2-d grid, got shape {pixels.shape}")
        if not np.all(np.isfinite(pixels)) or np.any(pixels < 0.0):
            raise ValueError("pixel brightnesses must be finite and non-negative")
        if self.label < 0:
            raise ValueError(f"label must be non-negative, got {self.label}")
        object.__setattr__(self, "pixels", pixels)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def total_brightness(self) -> float:
        return float(self.pixels.sum())


@dataclass(frozen=True)
class ClassStyleLayout:
    """Index bookkeeping for the class (x) style detector basis.

    Basis state j encodes class c = j // styles and style s = j % styles,
    i.e. j = c * styles + s.  The first pixel_dim indices carry the image;
    indices in [pixel_dim, dim) are padding that stays dark.
    """

    classes: int
    styles: int
    pixel_dim: int

    def __post_init__(self):
        if self.classes < 1 or self.styles < 1 or self.pixel_dim < 1:
            raise LayoutError("classes, styles, and pixel_dim must all be >= 1")
        if self.dim < self.pixel_dim:
            raise LayoutError(
                f"padding may only add dimensions: C*S = {self.dim} < pixel_dim = {self.pixel_dim}"
            )

    @property
    def dim(self) -> int:
        return self.classes * self.styles

    def index(self, class_index: int, style_index: int) -> int:
        return class_index * self.styles + style_index

    def class_of(self, j: int) -> int:
        return j // self.styles

    def class_slice(self, class_index: int) -> slice:
        if not 0 <= class_index < self.classes:
            raise ValueError(f"class index {class_index} outside [0, {self.classes})")
        return slice(class_index * self.styles, (class_index + 1) * self.styles)

    @classmethod
    def for_images(cls, rows: int, cols: int, classes: int = 10) -> "ClassStyleLayout":
        """Smallest layout that fits rows*cols pixels: S = ceil(N^2 / C).

        28x28 with ten classes gives S = 79, M = 790; 10x10 gives S = 10,
        M = 100 with no padding at all.
        """
        pixel_dim = rows * cols
        styles = -(-pixel_dim // classes)
        return cls(classes=classes, styles=styles, pixel_dim=pixel_dim)


@dataclass(frozen=True)
class AmplitudeState:
    """Normalized complex photon amplitudes over the padded detector basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        total = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"squared amplitudes sum to {total!r}, expected 1 within 1e-12")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def _open_maybe_gzip(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, n: int, path, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IdxFormatError(f"{path}: truncated while reading {what} ({len(data)}/{n} bytes)")
    return data


def read_idx_images(path) -> np.ndarray:
    """Read an IDX3 image file into a uint8 array of shape (count, rows, cols)."""
    with _open_maybe_gzip(path) as f:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, path, "header"))
        if magic != IDX_IMAGE_MAGIC:
            raise IdxFormatError(f"{path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
        payload = _read_exact(f, count * rows * cols, path, f"{count} images")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    """Read an IDX1 label file into a uint8 vector."""
    with _open_maybe_gzip(path) as f:
        magic, count = struct.unpack(">II", _read_exact(f, 8, path, "header"))
        if magic != IDX_LABEL_MAGIC:
            raise IdxFormatError(f"{path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}")
        payload = _read_exact(f, count, path, f"{count} labels")
    return np.frombuffer(payload, dtype=np.uint8)


def load_idx(images_path, labels_path) -> list[ExampleImage]:
    """Load a matching IDX image/label pair into ExampleImage records.

    Raw bytes 0..255 become brightness fractions 0.0..1.0.  All-dark images
    are accepted here; encoding them later raises DarkImageError.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DatasetMismatchError(
            f"{images_path} has {images.shape[0]} images but {labels_path} has {labels.shape[0]} labels"
        )
    scaled = images.astype(np.float64) / 255.0
    return [ExampleImage(pixels=scaled[i], label=int(labels[i])) for i in range(scaled.shape[0])]


def _overlap_weights(source: int, target: int) -> np.ndarray:
    """Fractional overlap lengths between target cells and source cells.

    Row t holds, for each source cell s, the length of the intersection of
    source interval [s, s+1) with target interval [t*r, (t+1)*r) where
    r = source / target.  Rows sum to r.
    """
    ratio = source / target
    weights = np.zeros((target, source))
    for t in range(target):
        lo = t * ratio
        hi = (t + 1) * ratio
        s_first = int(np.floor(lo))
        s_last = min(int(np.ceil(hi)), source)
        for s in range(s_first, s_last):
            weights[t, s] = max(0.0, min(hi, s + 1) - max(lo, s))
    return weights


def downsample(image: ExampleImage, target_rows: int, target_cols: int) -> ExampleImage:
    """Area-weighted box resampling to a coarser grid.

    Each target pixel is the brightness integral over its fractional source
    rectangle divided by the rectangle's area, so a constant image stays
    constant and relative brightness mass is conserved.
    """
    if target_rows < 1 or target_cols < 1:
        raise ValueError("target dimensions must be >= 1")
    if target_rows > image.rows or target_cols > image.cols:
        raise ValueError(
            f"cannot upsample: target {target_rows}x{target_cols} exceeds source {image.rows}x{image.cols}"
        )
    row_w = _overlap_weights(image.rows, target_rows)
    col_w = _overlap_weights(image.cols, target_cols)
    area = (image.rows / target_rows) * (image.cols / target_cols)
    resampled = row_w @ image.pixels @ col_w.T / area
    return ExampleImage(pixels=resampled, label=image.label)


def relative_brightness(image: ExampleImage) -> np.ndarray:
    """Flattened per-pixel fraction of the image's total brightness.

    This is the probability distribution of the first detected photon in the
    no-interference setup.
    """
    total = image.total_brightness
    if total <= 0.0:
        raise DarkImageError("image has zero total brightness")
    return image.pixels.ravel() / total


def to_amplitudes(image: ExampleImage, layout: ClassStyleLayout) -> AmplitudeState:
    """Encode an image as the photon state behind the screen.

    Entry y*cols + x is sqrt(brightness fraction of pixel (y, x)); indices at
    and beyond layout.pixel_dim are exactly zero padding.
    """
    if image.rows * image.cols != layout.pixel_dim:
        raise LayoutError(
            f"image has {image.rows * image.cols} pixels but layout expects {layout.pixel_dim}"
        )
    amplitudes = np.zeros(layout.dim, dtype=np.complex128)
    amplitudes[: layout.pixel_dim] = np.sqrt(relative_brightness(image))
    return AmplitudeState(amplitudes=amplitudes)


def encode_dataset(images: list[ExampleImage], layout: ClassStyleLayout) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized encoding of many images.

    Returns (states, labels) where states has shape (n, layout.dim) and real
    dtype: freshly encoded amplitudes are always real and non-negative.
    """
    if not images:
        raise ValueError("empty image list")
    n = len(images)
    states = np.zeros((n, layout.dim))
    labels = np.empty(n, dtype=np.int64)
    for i, image in enumerate(images):
        if image.rows * image.cols != layout.pixel_dim:
            raise LayoutError(
                f"image {i} has {image.rows * image.cols} pixels but layout expects {layout.pixel_dim}"
            )
        states[i, : layout.pixel_dim] = np.sqrt(relative_brightness(image))
        labels[i] = image.label
    return states, labels


def drop_dark_images(images: list[ExampleImage]) -> tuple[list[ExampleImage], int]:
    """Split off images no photon can pass.  Returns (kept, dropped_count)."""
    kept = [img for img in images if img.total_brightness > 0.0]
    return kept, len(images) - len(kept)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
