"""Triangular decomposition of a unitary into two-mode optical elements.

Any M x M unitary factors into at most M(M-1)/2 beam-splitter/phase-shifter
elements plus a final column of output phase shifters, which is what makes a
trained transform buildable on an optical bench.  The element convention,
fixed here and recorded in every blueprint file, is

    T(a, b, theta, phi) = identity except rows/columns (a, b), where it is

        [ e^{i phi} cos(theta)   -sin(theta) ]
        [ e^{i phi} sin(theta)    cos(theta) ]

i.e. a beam splitter of mixing angle theta with a phase shifter phi on mode a
at its input.  A blueprint lists elements in application order (first element
acts first on the input state), followed by the output phases.

The decomposition is Givens elimination: right-multiplying by T(a, b)^H mixes
columns a and b, and the angles are chosen to annihilate one below-diagonal
entry at a time, sweeping row M-1 up to row 1.  What remains is diagonal, and
its angles are the output phases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .linalg import UNITARITY_TOL, UnitaryTransform, unitarity_defect

CONVENTION = "reck-triangular-v1"
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OpticalElement:
    """One beam-splitter/phase-shifter pair acting on modes (mode_a, mode_b)."""

    mode_a: int
    mode_b: int
    theta: float
    phi: float

    def __post_init__(self):
        if not 0 <= self.mode_a < self.mode_b:
            raise ValueError(f"need 0 <= mode_a < mode_b, got ({self.mode_a}, {self.mode_b})")
        if not 0.0 <= self.theta <= np.pi / 2.0 + 1e-12:
            raise ValueError(f"theta {self.theta} outside [0, pi/2]")
        if not 0.0 <= self.phi < _TWO_PI:
            raise ValueError(f"phi {self.phi} outside [0, 2*pi)")

    def block(self) -> np.ndarray:
        """The 2x2 action on (mode_a, mode_b)."""
        c, s = np.cos(self.theta), np.sin(self.theta)
        p = np.exp(1j * self.phi)
        return np.array([[p * c, -s], [p * s, c]])


@dataclass(frozen=True)
class OpticalBlueprint:
    """Ordered element list plus output phases realizing one unitary."""

    dim: int
    elements: tuple
    output_phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.output_phases, dtype=np.float64)
        if phases.shape != (self.dim,):
            raise ValueError(f"need {self.dim} output phases, got shape {phases.shape}")
        for element in self.elements:
            if element.mode_b >= self.dim:
                raise ValueError(f"element modes ({element.mode_a}, {element.mode_b}) exceed dim {self.dim}")
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "output_phases", phases)


def element_matrix(element: OpticalElement, dim: int) -> np.ndarray:
    """Full dim x dim matrix of a single element."""
    if element.mode_b >= dim:
        raise ValueError(f"element modes ({element.mode_a}, {element.mode_b}) exceed dim {dim}")
    matrix = np.eye(dim, dtype=np.complex128)
    a, b = element.mode_a, element.mode_b
    matrix[np.ix_([a, b], [a, b])] = element.block()
    return matrix


def _as_matrix(unitary) -> np.ndarray:
    if isinstance(unitary, UnitaryTransform):
        return unitary.matrix
    matrix = np.asarray(unitary, dtype=np.complex128)
    defect = unitarity_defect(matrix)
    if defect > UNITARITY_TOL:
        raise ValueError(f"input is not unitary: defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}")
    return matrix


def decompose(unitary) -> OpticalBlueprint:
    """Factor a unitary into a triangular mesh of two-mode elements.

    Accepts a UnitaryTransform or a plain matrix (validated).  Elements that
    would be exact identities (nothing to annihilate) are pruned, so the
    identity decomposes into an empty list and a diagonal unitary into output
    phases only.
    """
    v = _as_matrix(unitary).copy()
    dim = v.shape[0]
    elements: list[OpticalElement] = []
    for i in range(dim - 1, 0, -1):
        for j in range(i):
            if v[i, j] == 0.0:
                continue
            if abs(v[i, i]) == 0.0:
                theta, phi = np.pi / 2.0, 0.0
            else:
                # np.mod of a tiny negative angle can round up to exactly 2*pi.
                phi = float(np.mod(np.angle(v[i, j]) - np.angle(v[i, i]), _TWO_PI))
                if phi >= _TWO_PI:
                    phi = 0.0
                theta = float(np.arctan2(abs(v[i, j]), abs(v[i, i])))
            element = OpticalElement(mode_a=j, mode_b=i, theta=theta, phi=phi)
            # v <- v @ T^H mixes columns (j, i) and zeroes v[i, j].
            block_h = element.block().conj().T
            v[:, [j, i]] = v[:, [j, i]] @ block_h
            elements.append(element)
    phases = np.mod(np.angle(np.diagonal(v)), _TWO_PI)
    phases[phases == _TWO_PI] = 0.0
    return OpticalBlueprint(dim=dim, elements=tuple(elements), output_phases=phases)


def reconstruct(blueprint: OpticalBlueprint) -> UnitaryTransform:
    """Multiply a blueprint back into the unitary it realizes."""
    matrix = np.eye(blueprint.dim, dtype=np.complex128)
    for element in blueprint.elements:
        rows = [element.mode_a, element.mode_b]
        matrix[rows, :] = element.block() @ matrix[rows, :]
    matrix *= np.exp(1j * blueprint.output_phases)[:, None]
    return UnitaryTransform(matrix=matrix)


def blueprint_to_dict(blueprint: OpticalBlueprint) -> dict:
    return {
        "version": 1,
        "dim": blueprint.dim,
        "convention": CONVENTION,
        "elements": [
            {"a": e.mode_a, "b": e.mode_b, "theta": e.theta, "phi": e.phi} for e in blueprint.elements
        ],
        "output_phases": blueprint.output_phases.tolist(),
    }


def blueprint_from_dict(data: dict) -> OpticalBlueprint:
    if data.get("convention") != CONVENTION:
        raise LayoutError(f"unsupported blueprint convention {data.get('convention')!r}")
    elements = tuple(
        OpticalElement(mode_a=e["a"], mode_b=e["b"], theta=e["theta"], phi=e["phi"])
        for e in data["elements"]
    )
    return OpticalBlueprint(
        dim=int(data["dim"]),
        elements=elements,
        output_phases=np.asarray(data["output_phases"], dtype=np.float64),
    )


def save_blueprint(path, blueprint: OpticalBlueprint) -> None:
    """Write blueprint JSON; floats keep full f64 round-trip precision."""
    with open(path, "w") as f:
        json.dump(blueprint_to_dict(blueprint), f, indent=1)
        f.write("\n")


def load_blueprint(path) -> OpticalBlueprint:
    with open(path) as f:
        return blueprint_from_dict(json.load(f))
