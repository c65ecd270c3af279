"""Train the optical transform and watch it beat the classical ceiling.

The model is a single unitary U = expm((W - W^T) + i(W + W^T)) acting on the
photon amplitudes behind the screen; class c's probability is the amplitude
mass U routes into the c-th block of detector cells.  Training minimizes
cross-entropy of those (always-valid) probabilities.  Accuracy is the mean
probability of the true label: a one-photon experiment has no argmax.

With real MNIST under data/mnist/ this trains on 10x10 downsampled images
(M = 100); otherwise it uses a labeled synthetic stand-in.  Either way it
prints the classical ceiling of the same test set for comparison.

Run:  python demos/03_train_quantum_classifier.py [data_dir] [epochs]
"""

import sys
from pathlib import Path

import numpy as np

from firstphoton import (
    ClassStyleLayout,
    ExampleImage,
    TrainingConfig,
    downsample,
    drop_dark_images,
    evaluate,
    load_idx,
    optimal_accuracy,
    posterior_table,
    train,
)
from firstphoton.fileio import write_unitary


def load_mnist(data_dir, split):
    base = Path(data_dir) / "mnist"
    names = {
        "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    }[split]
    for suffix in ("", ".gz"):
        images, labels = (base / (n + suffix) for n in names)
        if images.exists() and labels.exists():
            return load_idx(images, labels)
    return None


def synthetic_split(n, seed):
    rng = np.random.default_rng(99)
    prototypes = rng.uniform(0.02, 1.0, size=(10, 10, 10)) ** 2
    r = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        label = int(r.integers(10))
        jitter = r.uniform(0.3, 1.7, size=(10, 10))
        out.append(ExampleImage(pixels=np.clip(prototypes[label] * jitter, 0, 1), label=label))
    return out


def main():
    data_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 20

    train_set = load_mnist(data_dir, "train")
    test_set = load_mnist(data_dir, "test")
    if train_set is not None:
        print("Using MNIST, downsampled to 10x10.")
        train_set = drop_dark_images([downsample(img, 10, 10) for img in train_set])[0]
        test_set = drop_dark_images([downsample(img, 10, 10) for img in test_set])[0]
    else:
        print("Real MNIST not found; using a synthetic 10-class stand-in.")
        train_set = synthetic_split(20000, seed=1)
        test_set = synthetic_split(4000, seed=2)

    layout = ClassStyleLayout.for_images(10, 10)
    print(f"Layout: {layout.classes} classes x {layout.styles} styles = {layout.dim} detector cells\n")

    bound = optimal_accuracy(posterior_table(test_set, classes=10))
    print(f"Classical ceiling on this test set: {bound:.4f}")

    cfg = TrainingConfig(learning_rate=1e-3, batch_size=128, epochs=epochs, seed=0)
    print(f"Training for {epochs} epochs on {len(train_set)} examples ...")

    def progress(checkpoint, metrics):
        if metrics["epoch"] % 5 == 0 or metrics["epoch"] == epochs - 1:
            print(f"  epoch {metrics['epoch']:3d}  loss {metrics['mean_loss']:.4f}  "
                  f"train expected accuracy {metrics['expected_accuracy']:.4f}")

    checkpoint, _ = train(train_set, cfg, layout, on_epoch=progress)

    report = evaluate(checkpoint.unitary(), test_set, layout)
    print(f"\nTest expected accuracy (single photon): {report.expected_accuracy:.4f}")
    print(f"Test argmax accuracy (many photons):    {report.argmax_accuracy:.4f}")
    print(f"Mutual information (class outcomes):    {report.mutual_information:.3f} bits")
    print(f"Classical ceiling, same test set:       {bound:.4f}")
    verdict = "beats" if report.expected_accuracy > bound else "does NOT yet beat"
    print(f"\nThe quantum classifier {verdict} every classical single-photon classifier.")

    out = Path("runs/demo_train")
    out.mkdir(parents=True, exist_ok=True)
    write_unitary(out / "unitary.uphc", checkpoint.unitary())
    print(f"Trained transform saved to {out}/unitary.uphc")


if __name__ == "__main__":
    main()
