"""Closed-form two-shape example on a 2 x 4 pixel screen.

Two tetromino shapes, four lit pixels each, sharing exactly two pixels.  With
no optics, maximum-likelihood lookup on the landing pixel reaches 75%.  A
fixed rotation inside each 2-pixel column, (a, b) -> ((a-b)/sqrt2, (a+b)/sqrt2),
creates destructive interference in the top row and lifts the lookup accuracy
to 87.5%.  The true ceiling for discriminating two pure states with overlap
cos(alpha) is cos^2(pi/4 - alpha/2); at overlap 1/2 that is (sqrt3 + 2)/4,
about 93.30%, and gradient training of a free 8 x 8 unitary reaches it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import ExampleImage


@dataclass(frozen=True)
class ToyShape:
    """Binary 2 x 4 pattern with exactly four lit pixels.

    Each lit pixel carries photon probability 1/4, so amplitude 1/2.
    """

    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.shape != (2, 4):
            raise ValueError(f"toy shapes live on a 2x4 screen, got {grid.shape}")
        if not np.all((grid == 0.0) | (grid == 1.0)):
            raise ValueError("toy shapes are binary")
        if int(grid.sum()) != 4:
            raise ValueError("toy shapes have exactly 4 lit pixels")
        object.__setattr__(self, "grid", grid)

    @property
    def amplitudes(self) -> np.ndarray:
        """Row-major amplitude vector of length 8, entries 0 or 1/2."""
        return self.grid.ravel() / 2.0

    @property
    def probabilities(self) -> np.ndarray:
        return self.amplitudes**2

    def to_example(self, label: int) -> ExampleImage:
        return ExampleImage(pixels=self.grid, label=label)


def tee_shapes() -> tuple[ToyShape, ToyShape]:
    """The two T tetrominoes of the example; they share two pixels."""
    first = ToyShape(grid=np.array([[1, 1, 1, 0], [0, 1, 0, 0]], dtype=float))
    second = ToyShape(grid=np.array([[0, 0, 1, 0], [0, 1, 1, 1]], dtype=float))
    return first, second


def _lookup_accuracy(p1: np.ndarray, p2: np.ndarray) -> float:
    """Maximum-likelihood accuracy for equal priors: sum_k max(p1_k, p2_k) / 2."""
    return float(np.sum(np.maximum(p1, p2)) / 2.0)


def baseline_accuracy(shapes: tuple[ToyShape, ToyShape]) -> float:
    """Best pixel-lookup accuracy with no optics between screen and detector."""
    first, second = shapes
    return _lookup_accuracy(first.probabilities, second.probabilities)


def column_interference_matrix() -> np.ndarray:
    """8 x 8 unitary replacing each column pair (a, b) by ((a-b)/sqrt2, (a+b)/sqrt2).

    Four disjoint two-mode rotations of angle pi/4, acting on pixel pairs
    (x, 4 + x) in row-major indexing.
    """
    matrix = np.zeros((8, 8))
    r = 1.0 / np.sqrt(2.0)
    for x in range(4):
        top, bottom = x, 4 + x
        matrix[top, top] = r
        matrix[top, bottom] = -r
        matrix[bottom, top] = r
        matrix[bottom, bottom] = r
    return matrix


def transformed_probabilities(shape: ToyShape) -> np.ndarray:
    """Per-pixel detection probabilities after the column rotation, shape (2, 4)."""
    out = column_interference_matrix() @ shape.amplitudes
    return (out**2).reshape(2, 4)


def column_transform_accuracy(shapes: tuple[ToyShape, ToyShape]) -> float:
    """Pixel-lookup accuracy after the fixed column rotation."""
    first, second = shapes
    return _lookup_accuracy(
        transformed_probabilities(first).ravel(), transformed_probabilities(second).ravel()
    )


def optimal_two_state_accuracy(shapes: tuple[ToyShape, ToyShape]) -> float:
    """Ceiling for discriminating the two states with any unitary.

    A rotation brings both states into the plane of two detector axes,
    symmetric about the bisector; with overlap cos(alpha) the success
    probability is cos^2(pi/4 - alpha/2).
    """
    first, second = shapes
    overlap = float(np.clip(np.dot(first.amplitudes, second.amplitudes), -1.0, 1.0))
    alpha = np.arccos(overlap)
    return float(np.cos(np.pi / 4.0 - alpha / 2.0) ** 2)
