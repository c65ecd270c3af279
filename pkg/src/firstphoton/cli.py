"""Command-line entry point.

Subcommands cover the full workflow: `classical` scores the no-interference
accuracy ceiling of a dataset, `train` fits the unitary, `eval` scores a
trained transform (from a matrix file or from an optical blueprint),
`decompose` turns a unitary into a beam-splitter blueprint, `project` renders
per-class amplitude components of one example, `toy` prints the closed-form
2x4 example, and `checksums` fingerprints local dataset files.

Every command that writes artifacts also writes a manifest.json recording the
resolved configuration, dataset checksums, seed, package version, and wall
time; re-running a command with the flags recorded in its manifest reproduces
the outputs bit for bit.  Exit codes: 0 success, 2 missing/corrupt files,
3 inconsistent configuration, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (
    UNLIT,
    class_entropy,
    class_map,
    classical_mutual_information,
    optimal_accuracy,
    posterior_table,
)
from .datasets import (
    ClassStyleLayout,
    IDX_FILE_NAMES,
    downsample,
    drop_dark_images,
    file_sha256,
    load_idx,
    to_amplitudes,
)
from .errors import (
    DarkImageError,
    DatasetMismatchError,
    FirstPhotonError,
    IdxFormatError,
    LayoutError,
    NumericalError,
)
from .evaluation import evaluate, project_example
from .fileio import (
    amplitude_image,
    magnitude_image,
    read_unitary,
    write_pgm,
    write_ppm,
    write_unitary,
    write_weights,
)
from .model import TrainingConfig, train
from .reck import decompose, load_blueprint, reconstruct, save_blueprint
from .toy import (
    baseline_accuracy,
    column_transform_accuracy,
    optimal_two_state_accuracy,
    tee_shapes,
    transformed_probabilities,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

DATASET_ALIASES = {
    "mnist": ("mnist", None),
    "fashion": ("fashion", None),
    "mnist10": ("mnist", 10),
    "fashion10": ("fashion", 10),
}


@dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    dataset_checksums: dict
    seed: int | None
    version: str
    duration_seconds: float

    def write(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "manifest.json", "w") as f:
            json.dump(asdict(self), f, indent=1, sort_keys=True)
            f.write("\n")


def _resolve_dataset_paths(args) -> tuple[Path, Path]:
    """Turn --dataset/--split/--data-dir (or explicit --images/--labels) into paths."""
    if args.images and args.labels:
        return Path(args.images), Path(args.labels)
    if bool(args.images) != bool(args.labels):
        raise LayoutError("--images and --labels must be given together")
    if not args.dataset:
        raise LayoutError("either --dataset or --images/--labels is required")
    name, implied_downsample = DATASET_ALIASES[args.dataset]
    if implied_downsample and not args.resize:
        args.resize = implied_downsample
    data_dir = Path(args.data_dir) / name
    paths = []
    for kind in ("images", "labels"):
        base = data_dir / IDX_FILE_NAMES[(args.split, kind)]
        gz = base.with_name(base.name + ".gz")
        if base.exists():
            paths.append(base)
        elif gz.exists():
            paths.append(gz)
        else:
            raise FileNotFoundError(f"dataset file not found: {base} (or {gz.name})")
    return paths[0], paths[1]


def _load_examples(args) -> tuple[list, dict]:
    """Load, optionally downsample, and drop dark images.  Returns (examples, checksums)."""
    images_path, labels_path = _resolve_dataset_paths(args)
    checksums = {str(images_path): file_sha256(images_path), str(labels_path): file_sha256(labels_path)}
    examples = load_idx(images_path, labels_path)
    if args.resize:
        examples = [downsample(img, args.resize, args.resize) for img in examples]
    examples, dropped = drop_dark_images(examples)
    if dropped:
        print(f"dropped {dropped} all-dark image(s)", file=sys.stderr)
    if not examples:
        raise DarkImageError("every image in the dataset is all-dark")
    return examples, checksums


def _layout_for(args, examples) -> ClassStyleLayout:
    rows, cols = examples[0].rows, examples[0].cols
    if args.styles:
        return ClassStyleLayout(classes=args.classes, styles=args.styles, pixel_dim=rows * cols)
    return ClassStyleLayout.for_images(rows, cols, classes=args.classes)


def _add_dataset_flags(parser, with_layout=True):
    parser.add_argument("--dataset", choices=sorted(DATASET_ALIASES), help="named dataset under --data-dir")
    parser.add_argument("--split", choices=("train", "test"), default="test")
    parser.add_argument("--data-dir", default="data", help="directory holding <dataset>/<idx files>")
    parser.add_argument("--images", help="explicit IDX image file (overrides --dataset)")
    parser.add_argument("--labels", help="explicit IDX label file (overrides --dataset)")
    parser.add_argument("--resize", type=int, default=0, help="downsample images to NxN before use")
    parser.add_argument("--limit", type=int, default=0, help="use only the first N examples")
    if with_layout:
        parser.add_argument("--classes", type=int, default=10)
        parser.add_argument("--styles", type=int, default=0, help="style slots per class (default: smallest fit)")


def _maybe_limit(args, examples):
    return examples[: args.limit] if args.limit else examples


def cmd_classical(args) -> int:
    started = time.time()
    examples, checksums = _load_examples(args)
    examples = _maybe_limit(args, examples)
    table = posterior_table(examples, classes=args.classes)
    report = {
        "accuracy_bound": optimal_accuracy(table),
        "mutual_information_bits": classical_mutual_information(table),
        "entropy_bits": class_entropy(table),
        "n_examples": len(examples),
    }
    print(json.dumps(report, indent=1, sort_keys=True))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as f:
        json.dump(report, f, indent=1, sort_keys=True)
        f.write("\n")

    lookup = class_map(table)
    rows, cols = examples[0].rows, examples[0].cols
    with open(out / "class_map.csv", "w") as f:
        f.write("row,col,class,max_posterior\n")
        for k in range(rows * cols):
            f.write(f"{k // cols},{k % cols},{lookup.argmax_class[k]},{lookup.max_posterior[k]!r}\n")
    # Indexed PGM: pixel value is the class index; never-lit cells get maxval.
    indexed = np.where(lookup.argmax_class == UNLIT, args.classes, lookup.argmax_class)
    write_pgm(out / "class_map.pgm", indexed.reshape(rows, cols), maxval=args.classes)

    RunManifest(
        command="classical",
        argv=args.raw_argv,
        config=_public_config(args),
        dataset_checksums=checksums,
        seed=None,
        version=__version__,
        duration_seconds=time.time() - started,
    ).write(out)
    return EXIT_OK


def cmd_train(args) -> int:
    started = time.time()
    examples, checksums = _load_examples(args)
    examples = _maybe_limit(args, examples)
    layout = _layout_for(args, examples)
    cfg = TrainingConfig(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        init_scale=args.init_scale,
        optimizer=args.optimizer,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.jsonl"
    metrics_file = open(metrics_path, "w")

    def on_epoch(checkpoint, metrics):
        metrics_file.write(json.dumps(metrics, sort_keys=True) + "\n")
        metrics_file.flush()
        write_weights(out / "weights.bin", checkpoint.weights)

    try:
        checkpoint, history = train(examples, cfg, layout, on_epoch=on_epoch)
    finally:
        metrics_file.close()

    write_weights(out / "weights.bin", checkpoint.weights)
    write_unitary(out / "unitary.uphc", checkpoint.unitary(cfg.expm))
    if history:
        print(json.dumps(history[-1], sort_keys=True))

    RunManifest(
        command="train",
        argv=args.raw_argv,
        config=_public_config(args),
        dataset_checksums=checksums,
        seed=args.seed,
        version=__version__,
        duration_seconds=time.time() - started,
    ).write(out)
    return EXIT_OK


def _load_transform(args):
    if bool(args.unitary) == bool(args.blueprint):
        raise LayoutError("exactly one of --unitary or --blueprint is required")
    if args.unitary:
        return read_unitary(args.unitary)
    return reconstruct(load_blueprint(args.blueprint))


def cmd_eval(args) -> int:
    started = time.time()
    unitary = _load_transform(args)
    examples, checksums = _load_examples(args)
    examples = _maybe_limit(args, examples)
    layout = _layout_for(args, examples)
    if unitary.dim != layout.dim:
        raise LayoutError(
            f"checkpoint dimension {unitary.dim} does not match layout {layout.classes}x{layout.styles}"
            f" = {layout.dim} for {examples[0].rows}x{examples[0].cols} images"
        )
    report = evaluate(unitary, examples, layout)
    summary = {
        "expected_accuracy": report.expected_accuracy,
        "mutual_information_bits": report.mutual_information,
        "mutual_information_full_bits": report.mutual_information_full,
        "entropy_bits": report.class_entropy,
        "n_examples": report.n_examples,
    }
    if args.photons == "many":
        summary["argmax_accuracy"] = report.argmax_accuracy
    print(json.dumps(summary, indent=1, sort_keys=True))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    full = dict(summary, argmax_accuracy=report.argmax_accuracy)
    with open(out / "report.json", "w") as f:
        json.dump(full, f, indent=1, sort_keys=True)
        f.write("\n")
    np.savetxt(out / "confusion.csv", report.confusion, delimiter=",")

    RunManifest(
        command="eval",
        argv=args.raw_argv,
        config=_public_config(args),
        dataset_checksums=checksums,
        seed=None,
        version=__version__,
        duration_seconds=time.time() - started,
    ).write(out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    started = time.time()
    unitary = read_unitary(args.unitary)
    blueprint = decompose(unitary)
    out = Path(args.out)
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        path = out / "blueprint.json"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        path = out
    save_blueprint(path, blueprint)
    rebuilt = reconstruct(blueprint)
    roundtrip = float(np.max(np.abs(rebuilt.matrix - unitary.matrix)))
    print(
        json.dumps(
            {
                "dim": blueprint.dim,
                "elements": len(blueprint.elements),
                "roundtrip_max_error": roundtrip,
                "blueprint": str(path),
            },
            indent=1,
            sort_keys=True,
        )
    )
    if path.parent.is_dir():
        RunManifest(
            command="decompose",
            argv=args.raw_argv,
            config=_public_config(args),
            dataset_checksums={},
            seed=None,
            version=__version__,
            duration_seconds=time.time() - started,
        ).write(path.parent)
    return EXIT_OK


def cmd_project(args) -> int:
    started = time.time()
    unitary = read_unitary(args.unitary)
    examples, checksums = _load_examples(args)
    if not 0 <= args.index < len(examples):
        raise LayoutError(f"--index {args.index} outside the {len(examples)}-example dataset")
    example = examples[args.index]
    layout = _layout_for(args, examples)
    if unitary.dim != layout.dim:
        raise LayoutError(f"checkpoint dimension {unitary.dim} does not match layout {layout.dim}")
    state = to_amplitudes(example, layout)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(out / "original.pgm", magnitude_image(example.pixels.ravel(), example.rows, example.cols))
    masses = {}
    for c in range(layout.classes):
        projection = project_example(unitary, state, c, layout)
        masses[str(c)] = projection.mass
        write_ppm(
            out / f"projection_class_{c}.ppm",
            amplitude_image(projection.amplitudes, example.rows, example.cols),
        )
    with open(out / "masses.json", "w") as f:
        json.dump({"label": example.label, "mass": masses}, f, indent=1, sort_keys=True)
        f.write("\n")
    print(json.dumps({"label": example.label, "mass": masses}, indent=1, sort_keys=True))

    RunManifest(
        command="project",
        argv=args.raw_argv,
        config=_public_config(args),
        dataset_checksums=checksums,
        seed=None,
        version=__version__,
        duration_seconds=time.time() - started,
    ).write(out)
    return EXIT_OK


def cmd_toy(args) -> int:
    started = time.time()
    shapes = tee_shapes()
    results = {
        "baseline_accuracy": baseline_accuracy(shapes),
        "column_transform_accuracy": column_transform_accuracy(shapes),
        "optimal_accuracy": optimal_two_state_accuracy(shapes),
    }
    print(json.dumps(results, indent=1, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, shape in enumerate(shapes, start=1):
            np.savetxt(out / f"shape{i}_screen.csv", shape.probabilities.reshape(2, 4), delimiter=",")
            np.savetxt(out / f"shape{i}_transformed.csv", transformed_probabilities(shape), delimiter=",")
        with open(out / "report.json", "w") as f:
            json.dump(results, f, indent=1, sort_keys=True)
            f.write("\n")
        RunManifest(
            command="toy",
            argv=args.raw_argv,
            config=_public_config(args),
            dataset_checksums={},
            seed=None,
            version=__version__,
            duration_seconds=time.time() - started,
        ).write(out)
    return EXIT_OK


def cmd_checksums(args) -> int:
    """Fingerprint local dataset files so runs can be tied to exact data.

    Compare the digests against the values published by the dataset provider;
    this tool has no network access and never downloads anything.
    """
    data_dir = Path(args.data_dir)
    found_any = False
    for dataset in ("mnist", "fashion"):
        for (split, kind), name in IDX_FILE_NAMES.items():
            for candidate in (data_dir / dataset / name, data_dir / dataset / (name + ".gz")):
                if candidate.exists():
                    print(f"{file_sha256(candidate)}  {candidate}")
                    found_any = True
    if not found_any:
        print(f"no dataset files under {data_dir}/(mnist|fashion)/", file=sys.stderr)
        print("expected names: " + ", ".join(sorted(set(IDX_FILE_NAMES.values()))), file=sys.stderr)
    return EXIT_OK


def _public_config(args) -> dict:
    skip = {"func", "raw_argv"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firstphoton", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=0, help="cap BLAS threads (default: all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", help="no-interference accuracy ceiling of a dataset")
    _add_dataset_flags(p, with_layout=False)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--out", default="runs/classical")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("train", help="fit the unitary transform by gradient descent")
    _add_dataset_flags(p)
    p.set_defaults(split="train")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-scale", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--out", default="runs/train")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a trained transform on a dataset")
    _add_dataset_flags(p)
    p.add_argument("--unitary", help="unitary.uphc checkpoint")
    p.add_argument("--blueprint", help="blueprint.json produced by decompose")
    p.add_argument("--photons", choices=("single", "many"), default="single")
    p.add_argument("--out", default="runs/eval")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("decompose", help="turn a unitary into an optical blueprint")
    p.add_argument("unitary", help="unitary.uphc checkpoint")
    p.add_argument("--out", default="runs/decompose")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("project", help="render per-class amplitude components of one example")
    _add_dataset_flags(p)
    p.add_argument("--unitary", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", default="runs/project")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("toy", help="closed-form 2x4 two-shape example")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("checksums", help="SHA-256 fingerprints of local dataset files")
    p.add_argument("--data-dir", default="data")
    p.set_defaults(func=cmd_checksums)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = argv
    try:
        if args.threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=args.threads):
                return args.func(args)
        return args.func(args)
    except (FileNotFoundError, OSError, EOFError, IdxFormatError, DatasetMismatchError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except (LayoutError, DarkImageError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FirstPhotonError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
