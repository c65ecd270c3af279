"""From a trained matrix to an optical bench: the beam-splitter blueprint.

Every M x M unitary factors into at most M(M-1)/2 two-mode beam-splitter/
phase-shifter elements plus one output phase per mode.  This script
decomposes a unitary (a trained checkpoint if you pass one, otherwise a
random one), prints the element budget, verifies the reconstruction
round-trip, and saves the blueprint JSON a lab could work from.

Run:  python demos/04_optical_blueprint.py [unitary.uphc]
"""

import sys
from collections import Counter
from pathlib import Path

import numpy as np

from firstphoton import build_generator, decompose, expm, reconstruct, save_blueprint
from firstphoton.fileio import read_unitary


def main():
    if len(sys.argv) > 1:
        unitary = read_unitary(sys.argv[1])
        print(f"Loaded {unitary.dim}x{unitary.dim} unitary from {sys.argv[1]}")
    else:
        rng = np.random.default_rng(4)
        dim = 12
        unitary = expm(build_generator(rng.standard_normal((dim, dim)) / np.sqrt(dim)))
        print(f"No checkpoint given; using a random {dim}x{dim} unitary.")

    blueprint = decompose(unitary)
    dim = blueprint.dim
    print(f"\nElements: {len(blueprint.elements)} (budget {dim * (dim - 1) // 2})")

    angles = Counter(round(np.degrees(e.theta)) for e in blueprint.elements)
    common = ", ".join(f"{count}x ~{deg} deg" for deg, count in angles.most_common(5))
    print(f"Mixing-angle histogram (rounded): {common}")
    nontrivial_phases = sum(1 for e in blueprint.elements if abs(e.phi) > 1e-9)
    print(f"Elements with a nonzero input phase shifter: {nontrivial_phases}")

    rebuilt = reconstruct(blueprint)
    error = float(np.max(np.abs(rebuilt.matrix - unitary.matrix)))
    print(f"\nReconstruction max-entry error: {error:.2e}")

    out = Path("runs/demo_blueprint")
    out.mkdir(parents=True, exist_ok=True)
    save_blueprint(out / "blueprint.json", blueprint)
    print(f"Blueprint written to {out}/blueprint.json")
    print('Element convention ("reck-triangular-v1"): T(a, b, theta, phi) acts on modes (a, b) as')
    print("  [ e^{i phi} cos t   -sin t ]")
    print("  [ e^{i phi} sin t    cos t ],  elements applied first-to-last, then output phases.")


if __name__ == "__main__":
    main()
