"""Differentiable unitary parametrization via the matrix exponential.

A real square weight matrix W generates the anti-Hermitian matrix
A = (W - W^T) + i (W + W^T), and U = expm(A) is unitary for every W; sweeping W
over all real matrices sweeps U over the whole unitary group.  The exponential
is computed with a fixed budget: scale A by 2^-s, evaluate a truncated Taylor
polynomial, square the result s times.  Because the same composition of matrix
products is easy to traverse in reverse, the loss gradient is backpropagated
through it exactly (the gradient of the truncated forward pass, not of the
ideal exponential).

Cotangent convention: for a real loss L and complex matrix X, the cotangent
G_X satisfies dL = Re(sum(conj(G_X) * dX)).  This makes the reverse rule of a
matrix product Y = A @ B the familiar G_A = G_Y @ B^H, G_B = A^H @ G_Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import NumericalError

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class ExpmConfig:
    """Fixed budget for the scaled Taylor exponential."""

    squarings: int = 8
    taylor_order: int = 10

    def __post_init__(self):
        if not 0 <= self.squarings <= 32:
            raise ValueError(f"squarings must be in [0, 32], got {self.squarings}")
        if self.taylor_order < 2:
            raise ValueError(f"taylor_order must be >= 2, got {self.taylor_order}")


@dataclass(frozen=True)
class UnitaryTransform:
    """A complex matrix checked to be unitary within UNITARITY_TOL."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        defect = unitarity_defect(matrix)
        if not defect <= UNITARITY_TOL:  # also catches NaN
            raise NumericalError(
                f"matrix is not unitary: defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}"
            )
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def unitarity_defect(matrix: np.ndarray) -> float:
    """max-entry norm of U U^H - I, the probability-conservation error."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def build_generator(weights: np.ndarray) -> np.ndarray:
    """Anti-Hermitian generator A = (W - W^T) + i (W + W^T) of a real W."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be a square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    return (w - w.T) + 1j * (w + w.T)


@dataclass
class ExpmCache:
    """Forward intermediates retained for the reverse pass."""

    cfg: ExpmConfig
    scaled: np.ndarray            # A / 2^squarings
    horner: list = field(default_factory=list)   # horner[p] = E_p, p = 0..order
    presquare: list = field(default_factory=list)  # matrices before each squaring
    unitary: np.ndarray | None = None


def _expm_forward(generator: np.ndarray, cfg: ExpmConfig) -> ExpmCache:
    order = cfg.taylor_order
    coeff = [1.0 / factorial(p) for p in range(order + 1)]
    scaled = generator / (2.0 ** cfg.squarings)
    eye = np.eye(generator.shape[0], dtype=generator.dtype)

    # Horner evaluation of the degree-`order` Taylor polynomial in `scaled`:
    # E_order = c_order I, E_p = scaled @ E_{p+1} + c_p I, result E_0.
    horner = [None] * (order + 1)
    horner[order] = coeff[order] * eye
    for p in range(order - 1, -1, -1):
        horner[p] = scaled @ horner[p + 1] + coeff[p] * eye

    presquare = []
    result = horner[0]
    for _ in range(cfg.squarings):
        presquare.append(result)
        result = result @ result

    return ExpmCache(cfg=cfg, scaled=scaled, horner=horner, presquare=presquare, unitary=result)


def _check_anti_hermitian(generator: np.ndarray) -> np.ndarray:
    a = np.asarray(generator, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"generator must be a square matrix, got shape {a.shape}")
    skew = float(np.max(np.abs(a + a.conj().T)))
    if not skew <= 1e-12:  # also catches NaN
        raise ValueError(f"generator is not anti-Hermitian: max |A + A^H| = {skew:.3e}")
    return a


def expm(generator: np.ndarray, cfg: ExpmConfig = ExpmConfig()) -> UnitaryTransform:
    """Exponential of an anti-Hermitian matrix, validated to be unitary.

    Raises NumericalError when the fixed budget was insufficient; raising
    cfg.squarings is the remedy.
    """
    a = _check_anti_hermitian(generator)
    cache = _expm_forward(a, cfg)
    defect = unitarity_defect(cache.unitary)
    if not defect <= UNITARITY_TOL:  # also catches NaN
        raise NumericalError(
            f"expm unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}; "
            f"increase squarings (currently {cfg.squarings}) or taylor_order"
        )
    return UnitaryTransform(matrix=cache.unitary)


def expm_with_cache(generator: np.ndarray, cfg: ExpmConfig = ExpmConfig()) -> tuple[np.ndarray, ExpmCache]:
    """Like expm but also returns the intermediates needed by expm_vjp."""
    a = _check_anti_hermitian(generator)
    cache = _expm_forward(a, cfg)
    defect = unitarity_defect(cache.unitary)
    if not defect <= UNITARITY_TOL:  # also catches NaN
        raise NumericalError(
            f"expm unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}; "
            f"increase squarings (currently {cfg.squarings}) or taylor_order"
        )
    return cache.unitary, cache


def expm_vjp(
    generator: np.ndarray,
    upstream: np.ndarray,
    cfg: ExpmConfig = ExpmConfig(),
    cache: ExpmCache | None = None,
) -> np.ndarray:
    """Pull the cotangent of U = expm(A) back to a cotangent of A.

    Reverse accumulation through each squaring step (product rule on
    X -> X @ X) and through the Horner evaluation of the Taylor polynomial.
    A cache from expm_with_cache for the same A and cfg avoids recomputing the
    forward intermediates.
    """
    if cache is None:
        a = _check_anti_hermitian(generator)
        cache = _expm_forward(a, cfg)
    else:
        if cache.cfg != cfg:
            raise ValueError(f"cache was built with {cache.cfg}, not {cfg}")
        expected = np.asarray(generator, dtype=np.complex128) / (2.0 ** cfg.squarings)
        if cache.scaled.shape != expected.shape or not np.array_equal(cache.scaled, expected):
            raise ValueError("cache does not belong to this generator")

    cotangent = np.asarray(upstream, dtype=np.complex128)
    for pre in reversed(cache.presquare):
        pre_h = pre.conj().T
        cotangent = cotangent @ pre_h + pre_h @ cotangent

    # Through the Horner recurrence: at step p, `cotangent` is the cotangent
    # of E_p = scaled @ E_{p+1} + c_p I.
    scaled_h = cache.scaled.conj().T
    grad_scaled = np.zeros_like(cache.scaled)
    for p in range(cfg.taylor_order):
        grad_scaled += cotangent @ cache.horner[p + 1].conj().T
        cotangent = scaled_h @ cotangent

    return grad_scaled / (2.0 ** cfg.squarings)


def weight_gradient(generator_cotangent: np.ndarray) -> np.ndarray:
    """Pull a generator cotangent back to the real weight matrix.

    Adjoint of W -> (W - W^T) + i (W + W^T) under the real inner product
    Re(sum(conj(X) * Y)): grad W = Re(G - G^T) + Im(G + G^T).
    """
    g = np.asarray(generator_cotangent, dtype=np.complex128)
    return np.real(g - g.T) + np.imag(g + g.T)


def real_block_generator(weights: np.ndarray) -> np.ndarray:
    """The 2M x 2M real embedding of the generator, blocks [[C, -D], [D, C]].

    Row/column 2j and 2j+1 carry the real and imaginary components of complex
    index j, so complex arithmetic becomes real arithmetic at twice the
    storage.  Used as an independent cross-check of the complex pipeline.
    """
    w = np.asarray(weights, dtype=np.float64)
    m = w.shape[0]
    antisym = w - w.T
    sym = w + w.T
    block = np.zeros((2 * m, 2 * m))
    block[0::2, 0::2] = antisym
    block[0::2, 1::2] = -sym
    block[1::2, 0::2] = sym
    block[1::2, 1::2] = antisym
    return block


def real_block_expm(weights: np.ndarray, cfg: ExpmConfig = ExpmConfig()) -> np.ndarray:
    """Exponentiate the real-block embedding and read the complex result back.

    Deliberately uses plain term-by-term Taylor summation rather than the
    Horner loop of the production path, so the two routes share no code.
    """
    block = real_block_generator(weights)
    scaled = block / (2.0 ** cfg.squarings)
    result = np.eye(block.shape[0])
    term = np.eye(block.shape[0])
    for p in range(1, cfg.taylor_order + 1):
        term = term @ scaled / p
        result = result + term
    for _ in range(cfg.squarings):
        result = result @ result
    return result[0::2, 0::2] + 1j * result[1::2, 0::2]
