"""On-disk formats: unitary/weight binaries, JSON matrices, PGM/PPM images.

The binary container has a 16-byte header -- magic "UPHC", a little-endian
u32 version, a little-endian u64 dimension M -- followed by the row-major
payload.  Version 1 stores complex128 matrices as (f64 real, f64 imag) pairs;
version 2 stores real f64 weight matrices, same layout minus the imaginary
halves.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import IdxFormatError
from .linalg import UnitaryTransform

MAGIC = b"UPHC"
VERSION_COMPLEX = 1
VERSION_REAL = 2
_HEADER = struct.Struct("<4sIQ")


def _write_matrix(path, matrix: np.ndarray, version: int) -> None:
    dim = matrix.shape[0]
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, version, dim))
        if version == VERSION_COMPLEX:
            interleaved = np.empty((dim, dim, 2))
            interleaved[..., 0] = matrix.real
            interleaved[..., 1] = matrix.imag
            f.write(interleaved.astype("<f8").tobytes())
        else:
            f.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())


def _read_matrix(path, expected_version: int) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise IdxFormatError(f"{path}: truncated header")
        magic, version, dim = _HEADER.unpack(header)
        if magic != MAGIC:
            raise IdxFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != expected_version:
            raise IdxFormatError(f"{path}: version {version}, expected {expected_version}")
        per_entry = 16 if version == VERSION_COMPLEX else 8
        payload = f.read(dim * dim * per_entry)
        if len(payload) != dim * dim * per_entry:
            raise IdxFormatError(f"{path}: truncated payload ({len(payload)} bytes)")
    if version == VERSION_COMPLEX:
        flat = np.frombuffer(payload, dtype="<f8").reshape(dim, dim, 2)
        return flat[..., 0] + 1j * flat[..., 1]
    return np.frombuffer(payload, dtype="<f8").reshape(dim, dim).copy()


def write_unitary(path, unitary: UnitaryTransform) -> None:
    _write_matrix(path, unitary.matrix, VERSION_COMPLEX)


def read_unitary(path) -> UnitaryTransform:
    return UnitaryTransform(matrix=_read_matrix(path, VERSION_COMPLEX))


def write_weights(path, weights: np.ndarray) -> None:
    _write_matrix(path, np.asarray(weights, dtype=np.float64), VERSION_REAL)


def read_weights(path) -> np.ndarray:
    return _read_matrix(path, VERSION_REAL)


def unitary_to_json(unitary: UnitaryTransform) -> str:
    """Readable alternative for small matrices."""
    return json.dumps(
        {
            "dim": unitary.dim,
            "real": unitary.matrix.real.tolist(),
            "imag": unitary.matrix.imag.tolist(),
        }
    )


def unitary_from_json(text: str) -> UnitaryTransform:
    data = json.loads(text)
    return UnitaryTransform(matrix=np.asarray(data["real"]) + 1j * np.asarray(data["imag"]))


def write_pgm(path, values: np.ndarray, maxval: int = 255) -> None:
    """Binary PGM (P5) of an integer-valued grid in [0, maxval], maxval <= 255."""
    grid = np.asarray(values)
    if grid.ndim != 2:
        raise ValueError("PGM output needs a 2-d grid")
    if maxval > 255:
        raise ValueError("single-byte PGM only")
    clipped = np.clip(np.round(grid), 0, maxval).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{grid.shape[1]} {grid.shape[0]}\n{maxval}\n".encode())
        f.write(clipped.tobytes())


def write_ppm(path, rgb: np.ndarray) -> None:
    """Binary PPM (P6) of an (h, w, 3) uint8 array."""
    image = np.asarray(rgb)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("PPM output needs an (h, w, 3) array")
    with open(path, "wb") as f:
        f.write(f"P6\n{image.shape[1]} {image.shape[0]}\n255\n".encode())
        f.write(image.astype(np.uint8).tobytes())


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB, all components in [0, 1]."""
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    channels = np.stack(
        [
            np.choose(i, [v, q, p, p, t, v]),
            np.choose(i, [t, v, v, q, p, p]),
            np.choose(i, [p, p, t, v, v, q]),
        ],
        axis=-1,
    )
    return channels


def amplitude_image(amplitudes: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Render complex amplitudes with brightness = magnitude, hue = phase.

    Only the first rows*cols entries (the pixel basis) are drawn; returns an
    (rows, cols, 3) uint8 array suitable for write_ppm.
    """
    plane = np.asarray(amplitudes)[: rows * cols].reshape(rows, cols)
    magnitude = np.abs(plane)
    peak = magnitude.max()
    value = magnitude / peak if peak > 0 else magnitude
    hue = np.mod(np.angle(plane), 2.0 * np.pi) / (2.0 * np.pi)
    rgb = _hsv_to_rgb(hue, np.ones_like(hue), value)
    return np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)


def magnitude_image(values: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Grayscale rendering of non-negative per-pixel values, peak-normalized."""
    plane = np.asarray(values, dtype=np.float64)[: rows * cols].reshape(rows, cols)
    peak = plane.max()
    scaled = plane / peak if peak > 0 else plane
    return np.clip(np.round(scaled * 255.0), 0, 255).astype(np.uint8)
