"""Analytic evaluation of a trained optical classifier.

Everything here is computed from exact detection probabilities rather than
sampled photons: the expected (single-photon) accuracy, the argmax accuracy a
many-photon experiment would see, mutual information between true label and
measured class, probabilistic confusion matrices, and per-class amplitude
projections that decompose an example into the components each class detector
would claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import AmplitudeState, ClassStyleLayout, ExampleImage, encode_dataset
from .linalg import UnitaryTransform

_TOL = 1e-9


@dataclass(frozen=True)
class EvalReport:
    """Aggregate test-set metrics.

    confusion[c, c'] is the mean probability that an example of true class c
    is detected as class c' (rows of present classes sum to 1); class_prior
    holds the label frequencies, so the prior-weighted confusion trace is the
    expected accuracy.  mutual_information groups detector cells by class
    (C outcomes); mutual_information_full keeps every detector cell separate
    (M outcomes) and can only be larger.
    """

    expected_accuracy: float
    argmax_accuracy: float
    mutual_information: float
    mutual_information_full: float
    class_entropy: float
    confusion: np.ndarray
    class_prior: np.ndarray
    n_examples: int

    def __post_init__(self):
        confusion = np.asarray(self.confusion, dtype=np.float64)
        prior = np.asarray(self.class_prior, dtype=np.float64)
        row_sums = confusion.sum(axis=1)
        present = row_sums > 0.0
        if np.any(np.abs(row_sums[present] - 1.0) > _TOL):
            raise ValueError("confusion rows of present classes must sum to 1 within 1e-9")
        trace = float(np.sum(prior * np.diagonal(confusion)))
        if abs(trace - self.expected_accuracy) > _TOL:
            raise ValueError(
                f"prior-weighted confusion trace {trace} disagrees with "
                f"expected accuracy {self.expected_accuracy}"
            )
        if not -_TOL <= self.mutual_information <= self.class_entropy + _TOL:
            raise ValueError(
                f"mutual information {self.mutual_information} outside [0, H(C) = {self.class_entropy}]"
            )
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "class_prior", prior)


@dataclass(frozen=True)
class ClassProjection:
    """Pixel-basis component of a state attributable to one class.

    amplitudes = U^H (class block mask) U state; mass is its squared norm,
    i.e. the probability that the photon is detected as this class.
    """

    class_index: int
    amplitudes: np.ndarray
    mass: float


def _mutual_information_bits(joint: np.ndarray) -> float:
    """MI of a joint probability table, 0 log 0 := 0."""
    row = joint.sum(axis=1)
    col = joint.sum(axis=0)
    live = joint > 0.0
    denom = np.outer(row, col)
    return float(np.sum(joint[live] * np.log2(joint[live] / denom[live])))


def evaluate(unitary: UnitaryTransform, test_set: list[ExampleImage], layout: ClassStyleLayout) -> EvalReport:
    """Score a unitary on a dataset with exact per-example probabilities."""
    if not test_set:
        raise ValueError("empty test set")
    states, labels = encode_dataset(test_set, layout)
    out = states @ unitary.matrix.T  # (n, M)
    cell_probs = np.abs(out) ** 2
    probs = cell_probs.reshape(-1, layout.classes, layout.styles).sum(axis=2)  # (n, C)

    n = states.shape[0]
    expected = float(np.mean(probs[np.arange(n), labels]))
    argmax = float(np.mean(probs.argmax(axis=1) == labels))

    classes = layout.classes
    counts = np.bincount(labels, minlength=classes)
    prior = counts / n
    confusion = np.zeros((classes, classes))
    joint_cells = np.zeros((classes, layout.dim))
    for c in range(classes):
        if counts[c] == 0:
            continue
        mask = labels == c
        confusion[c] = probs[mask].mean(axis=0)
        joint_cells[c] = prior[c] * cell_probs[mask].mean(axis=0)

    joint_classes = prior[:, None] * confusion
    live_prior = prior[prior > 0.0]
    entropy = float(-np.sum(live_prior * np.log2(live_prior)))

    return EvalReport(
        expected_accuracy=expected,
        argmax_accuracy=argmax,
        mutual_information=_mutual_information_bits(joint_classes),
        mutual_information_full=_mutual_information_bits(joint_cells),
        class_entropy=entropy,
        confusion=confusion,
        class_prior=prior,
        n_examples=n,
    )


def project_example(
    unitary: UnitaryTransform,
    state: AmplitudeState,
    class_index: int,
    layout: ClassStyleLayout,
) -> ClassProjection:
    """Component of a state that the given class's detectors would claim.

    The C projections of one state are mutually orthogonal and sum back to
    the state; their masses are exactly the class probabilities.
    """
    if unitary.dim != layout.dim or state.dim != layout.dim:
        raise ValueError("dimension mismatch between unitary, state, and layout")
    if not 0 <= class_index < layout.classes:
        raise ValueError(f"class index {class_index} outside [0, {layout.classes})")
    transformed = unitary.matrix @ state.amplitudes
    masked = np.zeros_like(transformed)
    block = layout.class_slice(class_index)
    masked[block] = transformed[block]
    component = unitary.matrix.conj().T @ masked
    return ClassProjection(
        class_index=class_index,
        amplitudes=component,
        mass=float(np.sum(np.abs(component) ** 2)),
    )


@dataclass(frozen=True)
class InterferenceReport:
    """Per-pixel comparison of coherent vs incoherent class components.

    combined[k] = |a1_k + a2_k|^2, separate[k] = |a1_k|^2 + |a2_k|^2, and
    interference[k] = combined - separate = 2 Re(a1_k conj(a2_k)).  Nonzero
    interference is exactly why per-class intensities do not add up to the
    example's intensities.
    """

    class_pair: tuple[int, int]
    combined: np.ndarray
    separate: np.ndarray
    interference: np.ndarray


def interference_audit(
    unitary: UnitaryTransform,
    state: AmplitudeState,
    layout: ClassStyleLayout,
    classes: tuple[int, int],
) -> InterferenceReport:
    """Audit how two class components interfere pixel by pixel."""
    first, second = classes
    if first == second:
        raise ValueError("interference audit needs two distinct classes")
    a1 = project_example(unitary, state, first, layout).amplitudes
    a2 = project_example(unitary, state, second, layout).amplitudes
    combined = np.abs(a1 + a2) ** 2
    separate = np.abs(a1) ** 2 + np.abs(a2) ** 2
    return InterferenceReport(
        class_pair=(first, second),
        combined=combined,
        separate=separate,
        interference=2.0 * np.real(a1 * np.conj(a2)),
    )
