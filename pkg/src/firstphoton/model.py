"""The trainable quantum classifier.

The model is a single unitary U = expm((W - W^T) + i (W + W^T)) applied to the
encoded photon state.  The probability of predicting class c for example E is
the squared amplitude mass that U routes into the c-th style block.  Training
minimizes cross-entropy of those probabilities; because U is unitary by
construction, the probabilities are valid at every step and the logarithms
never see garbage.  Accuracy here means the probability of the correct label
averaged over examples: with one photon there is no argmax to take.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import AmplitudeState, ClassStyleLayout, ExampleImage, encode_dataset
from .errors import LayoutError, NumericalError
from .linalg import (
    ExpmConfig,
    UnitaryTransform,
    build_generator,
    expm,
    expm_vjp,
    expm_with_cache,
    weight_gradient,
)


@dataclass(frozen=True)
class ClassProbabilities:
    """Per-class detection probabilities for a single example."""

    probs: np.ndarray
    style_mass: np.ndarray | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(probs < 0.0):
            raise ValueError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1 within 1e-9")
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 10
    seed: int = 0
    init_scale: float = 1e-3
    log_eps: float = 1e-12
    expm: ExpmConfig = field(default_factory=ExpmConfig)
    optimizer: str = "adam"

    def __post_init__(self):
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.init_scale <= 0.0:
            raise ValueError("init_scale must be positive")
        if not 0.0 < self.log_eps <= 1e-8:
            raise ValueError("log_eps must be in (0, 1e-8]")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class Checkpoint:
    """Trained weights plus the layout they were trained under."""

    weights: np.ndarray
    layout: ClassStyleLayout
    step: int
    metrics: dict

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(weights)):
            raise ValueError("checkpoint weights contain non-finite entries")
        if weights.shape != (self.layout.dim, self.layout.dim):
            raise LayoutError(
                f"weights shape {weights.shape} does not match layout dimension {self.layout.dim}"
            )
        self.weights = weights

    def unitary(self, cfg: ExpmConfig = ExpmConfig()) -> UnitaryTransform:
        return expm(build_generator(self.weights), cfg)


def class_mass(transformed: np.ndarray, layout: ClassStyleLayout) -> np.ndarray:
    """Per-class probability mass of transformed states.

    transformed has shape (..., M); the result has shape (..., C), summing
    |amplitude|^2 over each class's style block.
    """
    mags = np.abs(transformed) ** 2
    return mags.reshape(*mags.shape[:-1], layout.classes, layout.styles).sum(axis=-1)


def forward(unitary: UnitaryTransform, state: AmplitudeState, layout: ClassStyleLayout) -> ClassProbabilities:
    """Apply the optical transform and read off class probabilities."""
    if unitary.dim != layout.dim or state.dim != layout.dim:
        raise LayoutError(
            f"dimension mismatch: unitary {unitary.dim}, state {state.dim}, layout {layout.dim}"
        )
    out = unitary.matrix @ state.amplitudes
    mass = np.abs(out) ** 2
    style_mass = mass.reshape(layout.classes, layout.styles)
    return ClassProbabilities(probs=style_mass.sum(axis=1), style_mass=style_mass)


def loss(probs: ClassProbabilities, label: int, log_eps: float = 1e-12) -> float:
    """Cross-entropy of the single-photon prediction: -ln max(p_label, log_eps)."""
    if not 0 <= label < probs.probs.shape[0]:
        raise ValueError(f"label {label} outside [0, {probs.probs.shape[0]})")
    return float(-np.log(max(float(probs.probs[label]), log_eps)))


def _batch_loss_gradient(
    weights: np.ndarray,
    states: np.ndarray,
    labels: np.ndarray,
    layout: ClassStyleLayout,
    expm_cfg: ExpmConfig,
    log_eps: float,
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over a batch and its exact weight gradient.

    states has shape (n, M) and may be real; the gradient is that of the
    Taylor-truncated forward pass.  The expensive exponential runs once and
    its intermediates are reused by the reverse sweep.
    """
    generator = build_generator(weights)
    unitary, cache = expm_with_cache(generator, expm_cfg)

    out = states @ unitary.T  # (n, M); row i is U @ states[i]
    probs = class_mass(out, layout)
    conservation = np.abs(probs.sum(axis=1) - 1.0)
    if not np.all(conservation <= 1e-9):  # also catches NaN
        raise NumericalError(
            f"probability conservation violated by {float(np.nanmax(conservation)):.3e} in a batch"
        )
    n = states.shape[0]
    picked = probs[np.arange(n), labels]
    floored = np.maximum(picked, log_eps)
    mean_loss = float(np.mean(-np.log(floored)))

    # d(mean loss)/d picked_i = -1/(n * picked_i) where the floor is inactive.
    dl_dp = np.where(picked > log_eps, -1.0 / (n * floored), 0.0)
    out_grad = np.zeros_like(out)
    rows = np.arange(n)[:, None]
    label_block = labels[:, None] * layout.styles + np.arange(layout.styles)[None, :]
    out_grad[rows, label_block] = 2.0 * dl_dp[:, None] * out[rows, label_block]

    unitary_grad = out_grad.T @ states.conj()
    generator_grad = expm_vjp(generator, unitary_grad, expm_cfg, cache=cache)
    return mean_loss, weight_gradient(generator_grad)


def batch_gradient(
    weights: np.ndarray,
    batch: list[tuple[AmplitudeState, int]],
    layout: ClassStyleLayout,
    cfg: TrainingConfig,
) -> tuple[float, np.ndarray]:
    """Mean loss and exact gradient for a batch of (state, label) pairs."""
    if not batch:
        raise ValueError("empty batch")
    states = np.stack([state.amplitudes for state, _ in batch])
    labels = np.array([label for _, label in batch], dtype=np.int64)
    if states.shape[1] != layout.dim:
        raise LayoutError(f"state dimension {states.shape[1]} does not match layout {layout.dim}")
    if np.any(labels < 0) or np.any(labels >= layout.classes):
        raise ValueError("labels outside layout class range")
    return _batch_loss_gradient(weights, states, labels, layout, cfg.expm, cfg.log_eps)


class Adam:
    """Adaptive-moment gradient descent with the standard constants."""

    def __init__(self, shape, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)

    def step(self, weights: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return weights - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


class Sgd:
    """Plain stochastic gradient descent."""

    def __init__(self, shape, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, weights: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return weights - self.learning_rate * grad


def _make_optimizer(cfg: TrainingConfig, shape):
    if cfg.optimizer == "adam":
        return Adam(shape, cfg.learning_rate)
    return Sgd(shape, cfg.learning_rate)


def expected_accuracy(unitary_matrix: np.ndarray, states: np.ndarray, labels: np.ndarray, layout: ClassStyleLayout) -> float:
    """Mean probability assigned to the true label: the single-photon accuracy."""
    probs = class_mass(states @ unitary_matrix.T, layout)
    return float(np.mean(probs[np.arange(states.shape[0]), labels]))


def train(
    train_set: list[ExampleImage],
    cfg: TrainingConfig,
    layout: ClassStyleLayout,
    on_epoch=None,
) -> tuple[Checkpoint, list[dict]]:
    """Fit the weight matrix by minibatch gradient descent.

    Deterministic for a fixed seed: weights start from a seeded normal draw
    scaled by cfg.init_scale and the per-epoch shuffle order is drawn from the
    same generator.  All-dark images must have been filtered out beforehand.
    Returns the final checkpoint and the per-epoch metric log; on_epoch, when
    given, is called as on_epoch(checkpoint, metrics) after every epoch.
    """
    if not train_set:
        raise ValueError("empty training set")
    states, labels = encode_dataset(train_set, layout)
    if np.any(labels >= layout.classes):
        raise ValueError("training labels exceed layout class count")

    rng = np.random.default_rng(cfg.seed)
    weights = cfg.init_scale * rng.standard_normal((layout.dim, layout.dim))
    optimizer = _make_optimizer(cfg, weights.shape)
    n = states.shape[0]
    step = 0
    history: list[dict] = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch_loss, grad = _batch_loss_gradient(
                weights, states[idx], labels[idx], layout, cfg.expm, cfg.log_eps
            )
            if not np.isfinite(batch_loss):
                error = NumericalError(f"non-finite loss at epoch {epoch}, step {step}; training aborted")
                error.checkpoint = Checkpoint(
                    weights=weights, layout=layout, step=step, metrics={"epoch": epoch, "aborted": True}
                )
                raise error
            weights = optimizer.step(weights, grad)
            epoch_loss += batch_loss * idx.shape[0]
            step += 1

        unitary, _ = expm_with_cache(build_generator(weights), cfg.expm)
        metrics = {
            "epoch": epoch,
            "step": step,
            "mean_loss": epoch_loss / n,
            "expected_accuracy": expected_accuracy(unitary, states, labels, layout),
        }
        history.append(metrics)
        if on_epoch is not None:
            on_epoch(Checkpoint(weights=weights, layout=layout, step=step, metrics=metrics), metrics)

    final_metrics = history[-1] if history else {"epoch": -1, "step": 0}
    return Checkpoint(weights=weights, layout=layout, step=step, metrics=final_metrics), history
