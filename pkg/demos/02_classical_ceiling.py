"""The best any interference-free single-photon classifier can do.

A classifier that sees only the detector cell index of the first photon is a
lookup table, and the best table predicts the most likely class of each cell.
This script builds the cell/label statistics of a dataset, evaluates the
resulting accuracy ceiling and mutual information, and writes the per-cell
class map as CSV and indexed PGM.

Uses the real MNIST test set when its IDX files sit under data/mnist/
(see README); otherwise it falls back to a clearly-labeled synthetic dataset
so the mechanics are still visible.

Run:  python demos/02_classical_ceiling.py [data_dir]
"""

import sys
from pathlib import Path

import numpy as np

from firstphoton import (
    UNLIT,
    ExampleImage,
    class_entropy,
    class_map,
    classical_mutual_information,
    drop_dark_images,
    load_idx,
    optimal_accuracy,
    posterior_table,
)
from firstphoton.fileio import write_pgm


def load_mnist_test(data_dir):
    base = Path(data_dir) / "mnist"
    for suffix in ("", ".gz"):
        images = base / ("t10k-images-idx3-ubyte" + suffix)
        labels = base / ("t10k-labels-idx1-ubyte" + suffix)
        if images.exists() and labels.exists():
            return load_idx(images, labels), "MNIST test set"
    return None, None


def synthetic_fallback():
    rng = np.random.default_rng(0)
    prototypes = rng.uniform(0.05, 1.0, size=(10, 12, 12)) ** 2
    examples = []
    for _ in range(2000):
        label = int(rng.integers(10))
        jitter = rng.uniform(0.4, 1.6, size=(12, 12))
        examples.append(ExampleImage(pixels=np.clip(prototypes[label] * jitter, 0, 1), label=label))
    return examples, "synthetic 12x12 stand-in (real MNIST not found)"


def main():
    data_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    examples, source = load_mnist_test(data_dir)
    if examples is None:
        examples, source = synthetic_fallback()
    examples = drop_dark_images(examples)[0]
    print(f"Dataset: {source}, {len(examples)} examples of "
          f"{examples[0].rows}x{examples[0].cols} pixels")

    table = posterior_table(examples, classes=10)
    bound = optimal_accuracy(table)
    information = classical_mutual_information(table)
    entropy = class_entropy(table)
    print(f"\nAccuracy ceiling for cell-lookup classifiers: {bound:.5f}")
    print(f"Label entropy H(C):                           {entropy:.4f} bits")
    print(f"Information the cell index carries:           {information:.4f} bits")

    lookup = class_map(table)
    rows, cols = examples[0].rows, examples[0].cols
    never_lit = int(np.sum(lookup.argmax_class == UNLIT))
    print(f"Cells dark in every example: {never_lit} of {rows * cols}")

    out = Path("runs/demo_classical")
    out.mkdir(parents=True, exist_ok=True)
    indexed = np.where(lookup.argmax_class == UNLIT, 10, lookup.argmax_class)
    write_pgm(out / "class_map.pgm", indexed.reshape(rows, cols), maxval=10)
    print(f"\nPer-cell most-likely-class map written to {out}/class_map.pgm")
    print("(pixel value = class index, value 10 = never lit)")


if __name__ == "__main__":
    main()
