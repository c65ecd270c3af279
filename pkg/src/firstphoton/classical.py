"""Exact accuracy ceiling for interference-free single-photon classifiers.

Any classifier that sees only the index of the detector cell that caught the
first photon is a row-stochastic matrix K over (cell, class), and its accuracy
is sum_k P(cell k) * sum_c P(class c | cell k) * K_kc.  The optimum picks, per
cell, the most likely class, so the ceiling is sum_k P(cell k) * max_c
P(class c | cell k).  This module builds those tables from a dataset, evaluates
the ceiling, extracts the per-cell argmax lookup map, and scores how many bits
the detector index carries about the label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import ExampleImage, relative_brightness

UNLIT = -1  # class-map sentinel for cells that are dark in every example


@dataclass(frozen=True)
class ClassPosteriorTable:
    """Joint photon/label statistics of a dataset.

    gamma[k] is the probability that a fairly drawn example's first photon
    lands on cell k; posterior[k, c] is the label posterior given that event
    (all-zero row where gamma[k] == 0); class_prior[c] is the label frequency.
    """

    gamma: np.ndarray
    posterior: np.ndarray
    class_prior: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=np.float64)
        posterior = np.asarray(self.posterior, dtype=np.float64)
        prior = np.asarray(self.class_prior, dtype=np.float64)
        if posterior.shape != (gamma.shape[0], prior.shape[0]):
            raise ValueError(
                f"posterior shape {posterior.shape} does not match "
                f"{gamma.shape[0]} cells x {prior.shape[0]} classes"
            )
        if np.any(gamma < 0.0) or np.any(posterior < 0.0) or np.any(prior < 0.0):
            raise ValueError("probabilities must be non-negative")
        if abs(gamma.sum() - 1.0) > 1e-10:
            raise ValueError(f"cell probabilities sum to {gamma.sum()!r}, expected 1 within 1e-10")
        row_sums = posterior.sum(axis=1)
        lit = gamma > 0.0
        if np.any(np.abs(row_sums[lit] - 1.0) > 1e-10):
            raise ValueError("posterior rows of lit cells must sum to 1 within 1e-10")
        if np.any(row_sums[~lit] != 0.0):
            raise ValueError("posterior rows of never-lit cells must be all zero")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "posterior", posterior)
        object.__setattr__(self, "class_prior", prior)

    @property
    def n_cells(self) -> int:
        return self.gamma.shape[0]

    @property
    def n_classes(self) -> int:
        return self.class_prior.shape[0]


@dataclass(frozen=True)
class PixelClassMap:
    """Per-cell most-likely-class lookup table.

    argmax_class[k] is the optimal prediction for a photon on cell k, or UNLIT
    for cells with zero photon probability; max_posterior[k] is that class's
    posterior.
    """

    argmax_class: np.ndarray
    max_posterior: np.ndarray


def posterior_table(examples: list[ExampleImage], classes: int) -> ClassPosteriorTable:
    """Accumulate photon/label statistics over a uniformly weighted dataset.

    Every example has weight 1/len(examples); its per-cell photon
    probabilities are its relative pixel brightnesses.  All examples must
    share dimensions and have nonzero brightness.
    """
    if not examples:
        raise ValueError("empty example list")
    rows, cols = examples[0].rows, examples[0].cols
    n_cells = rows * cols
    joint = np.zeros((n_cells, classes))  # joint[k, c] = P(photon on k AND label c)
    prior = np.zeros(classes)
    weight = 1.0 / len(examples)
    for image in examples:
        if (image.rows, image.cols) != (rows, cols):
            raise ValueError(
                f"images must share dimensions: got {image.rows}x{image.cols} after {rows}x{cols}"
            )
        if image.label >= classes:
            raise ValueError(f"label {image.label} outside [0, {classes})")
        joint[:, image.label] += weight * relative_brightness(image)
        prior[image.label] += weight
    gamma = joint.sum(axis=1)
    posterior = np.zeros_like(joint)
    lit = gamma > 0.0
    posterior[lit] = joint[lit] / gamma[lit, None]
    return ClassPosteriorTable(gamma=gamma, posterior=posterior, class_prior=prior)


def optimal_accuracy(table: ClassPosteriorTable) -> float:
    """The best accuracy any cell-index-only classifier can reach.

    Equals sum_k gamma_k * max_c posterior_kc and lies in [max prior, 1].
    """
    return float(np.sum(table.gamma * table.posterior.max(axis=1)))


def class_map(table: ClassPosteriorTable) -> PixelClassMap:
    """Optimal per-cell lookup map; ties break toward the lowest class index."""
    argmax = table.posterior.argmax(axis=1)  # np.argmax returns the first maximum
    best = table.posterior.max(axis=1)
    unlit = table.gamma == 0.0
    argmax = np.where(unlit, UNLIT, argmax)
    best = np.where(unlit, 0.0, best)
    return PixelClassMap(argmax_class=argmax, max_posterior=best)


def class_entropy(table: ClassPosteriorTable) -> float:
    """Label entropy H(C) in bits under the table's class prior."""
    p = table.class_prior[table.class_prior > 0.0]
    return float(-np.sum(p * np.log2(p)))


def classical_mutual_information(table: ClassPosteriorTable) -> float:
    """Mutual information I(C; K) in bits between label and detector cell.

    I = sum_k gamma_k sum_c R_kc log2(R_kc / P(c)), with 0 log 0 := 0.
    """
    mi = 0.0
    prior = table.class_prior
    for k in np.flatnonzero(table.gamma > 0.0):
        row = table.posterior[k]
        live = row > 0.0
        mi += table.gamma[k] * float(np.sum(row[live] * np.log2(row[live] / prior[live])))
    return mi
