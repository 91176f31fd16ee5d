"""Command-line surface of the toolkit.

Subcommands cover the whole pipeline: ``demo-data`` writes a synthetic
benchmark, ``bank-build`` turns an anchor manifest into a feature bank,
``classify`` predicts categories for test clouds, ``evaluate`` scores
predictions, ``ablate`` sweeps the per-class anchor count, ``export`` dumps
features or a 2-D projection, and ``backend-check`` runs the bridge
conformance suite against an external featurizer.

Every run is deterministic given its flags (including ``--seed``) and emits
a reproducibility block: embedded under ``"run"`` in JSON outputs, written
to a ``*.run.json`` sidecar next to CSV outputs. Report-style commands also
render a figure next to their delimited output unless ``--no-figure``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import ExitStack
from pathlib import Path

import numpy as np

from . import __version__
from .backend import BackendFeaturizer, check_conformance
from .classifier import Prediction, build_bank, load_bank, predict_batch, save_bank
from .descriptor import BuiltinFeaturizer, DescriptorConfig
from .errors import AnchorCloudError, ConfigError, EmptyInputError, ParseError
from .evaluation import ablate_anchors, evaluate, export_embedding_2d
from .formats import (
    CLOUD_SUFFIXES,
    eval_report_to_dict,
    load_cloud,
    parse_manifest,
    render_report_table,
    write_xyz,
)
from .geometry import AugmentConfig, augment
from .shapes import SHAPE_SAMPLERS, benchmark_clouds


def nonneg_int(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0; got {n}")
    return n


def add_pipeline_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline")
    group.add_argument("--seed", type=nonneg_int, default=0, help="master RNG seed")
    group.add_argument(
        "--rotate",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="apply a random rotation during augmentation (on: open-pose, off: aligned)",
    )
    group.add_argument("--points", type=int, default=1024, metavar="N",
                       help="FPS target point count")
    group.add_argument("--pad", action=argparse.BooleanOptionalAction, default=False,
                       help="duplicate points when a cloud is smaller than --points")
    group.add_argument("--descriptor", choices=["builtin", "backend"], default="builtin")
    group.add_argument("--backend-cmd", default=None, metavar="CMD",
                       help="featurizer process command (with --descriptor backend)")
    group.add_argument("--pair-bins", type=int, default=64)
    group.add_argument("--radial-bins", type=int, default=32)


def run_block(args: argparse.Namespace, command: str) -> dict:
    flags = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in vars(args).items()
        if key != "func"
    }
    return {"command": command, "version": __version__, "flags": flags}


def augment_config(args: argparse.Namespace) -> AugmentConfig:
    return AugmentConfig(
        target_points=args.points, rotate=args.rotate, seed=args.seed, pad=args.pad
    )


def make_featurizer(args: argparse.Namespace, stack: ExitStack):
    if args.descriptor == "backend":
        if not args.backend_cmd:
            raise ConfigError("--backend-cmd is required with --descriptor backend")
        return stack.enter_context(BackendFeaturizer(args.backend_cmd))
    return BuiltinFeaturizer(DescriptorConfig(args.pair_bins, args.radial_bins))


def collect_cloud_files(inputs: list[str]) -> list[Path]:
    files: list[Path] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files.extend(
                sorted(p for p in path.iterdir() if p.suffix.lower() in CLOUD_SUFFIXES)
            )
        elif path.suffix.lower() in CLOUD_SUFFIXES:
            if not path.exists():
                raise ParseError(f"input file not found: {path}")
            files.append(path)
        else:
            raise ParseError(f"unsupported input {path} (expected .off/.xyz or a directory)")
    if not files:
        raise EmptyInputError("no cloud files found under the given inputs")
    return files


def unique_ids(files: list[Path]) -> list[str]:
    ids = [f.stem for f in files]
    seen: dict[str, Path] = {}
    for name, path in zip(ids, files):
        if name in seen:
            raise ConfigError(
                f"duplicate sample id {name!r} from {seen[name]} and {path}; rename one"
            )
        seen[name] = path
    return ids


def augment_files(files: list[Path], cfg: AugmentConfig, ids: list[str]):
    clouds = []
    for index, (path, cloud_id) in enumerate(zip(files, ids)):
        cloud = load_cloud(path, cloud_id=cloud_id)
        clouds.append(augment(cloud, cfg, rng=np.random.default_rng([cfg.seed, index])))
    return clouds


def read_truth(path) -> dict[str, str]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in doc.items()
    ):
        raise ParseError(f"{path}: truth file must map sample ids to labels")
    return doc


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def parse_counts(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


def bank_paths(prefix: str) -> tuple[Path, Path]:
    base = Path(prefix)
    if base.suffix in (".afv", ".json"):
        base = base.with_suffix("")
    return base.with_suffix(".afv"), base.with_suffix(".json")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_demo_data(args) -> int:
    out = Path(args.out)
    anchor_dir, test_dir = out / "anchors", out / "test"
    anchor_dir.mkdir(parents=True, exist_ok=True)
    test_dir.mkdir(parents=True, exist_ok=True)

    anchors, tests, truth = benchmark_clouds(
        shapes=args.classes,
        anchors_per_class=args.anchors,
        tests_per_class=args.tests,
        n_points=args.cloud_points,
        noise=args.noise,
        rotate_tests=args.rotate,
        seed=args.seed,
    )
    manifest = {"categories": []}
    for name, clouds in anchors.items():
        entries = []
        for j, cloud in enumerate(clouds):
            filename = f"{cloud.id}.xyz"
            (anchor_dir / filename).write_text(write_xyz(cloud), encoding="utf-8")
            entries.append(
                {"file": filename, "generator": "synthetic", "seed": j, "prompt_index": 0}
            )
        manifest["categories"].append(
            {"name": name, "prompts": [f"A {name}."], "anchors": entries}
        )
    write_json(anchor_dir / "anchors.manifest.json", manifest)
    for cloud in tests:
        (test_dir / f"{cloud.id}.xyz").write_text(write_xyz(cloud), encoding="utf-8")
    write_json(out / "truth.json", truth)
    write_json(out / "demo-data.run.json", run_block(args, "demo-data"))
    print(
        f"wrote {sum(len(v) for v in anchors.values())} anchors, {len(tests)} test clouds "
        f"across {len(anchors)} classes under {out}"
    )
    return 0


def cmd_bank_build(args) -> int:
    manifest = parse_manifest(args.manifest)
    cfg = augment_config(args)
    with ExitStack() as stack:
        featurizer = make_featurizer(args, stack)
        bank = build_bank(manifest, cfg, featurizer)
    afv_path, meta_path = bank_paths(args.out)
    save_bank(bank, afv_path, meta_path, extra_meta={"run": run_block(args, "bank-build")})
    counts = bank.anchor_counts()
    print(
        f"bank: {len(bank.categories)} categories, "
        f"{min(counts.values())}-{max(counts.values())} anchors/class, "
        f"feature dim {bank.feature_dim}"
    )
    print(f"wrote {afv_path} and {meta_path}")
    return 0


def cmd_classify(args) -> int:
    afv_path, meta_path = bank_paths(args.bank)
    bank = load_bank(afv_path, meta_path)
    files = collect_cloud_files(args.inputs)
    ids = unique_ids(files)
    cfg = augment_config(args)
    with ExitStack() as stack:
        featurizer = make_featurizer(args, stack)
        clouds = augment_files(files, cfg, ids)
        features = featurizer(clouds)
    predictions = predict_batch(
        bank, features, ids=ids, keep_distances=args.keep_distances, mode=args.mode
    )
    records = []
    for p in predictions:
        record = {
            "sample_id": p.sample_id,
            "predicted": p.predicted,
            "best_distance": p.best_distance,
        }
        if p.per_anchor_distances is not None:
            record["per_anchor_distances"] = [list(t) for t in p.per_anchor_distances]
        records.append(record)
    write_json(
        args.out,
        {
            "run": run_block(args, "classify"),
            "bank": {
                "categories": list(bank.categories),
                "feature_dim": bank.feature_dim,
            },
            "predictions": records,
        },
    )
    print(f"classified {len(records)} clouds -> {args.out}")
    return 0


def _load_predictions(path) -> tuple[list[Prediction], list[str]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        categories = doc["bank"]["categories"]
        predictions = [
            Prediction(
                sample_id=r["sample_id"],
                predicted=r["predicted"],
                best_distance=float(r["best_distance"]),
            )
            for r in doc["predictions"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: not a predictions file ({exc})") from None
    return predictions, categories


def cmd_evaluate(args) -> int:
    predictions, categories = _load_predictions(args.predictions)
    truth = read_truth(args.truth)
    report = evaluate(predictions, truth, categories)
    print(render_report_table(report))
    out = Path(args.out)
    report_path = out.with_suffix(".report.json")
    doc = eval_report_to_dict(report)
    doc["run"] = run_block(args, "evaluate")
    write_json(report_path, doc)
    print(f"wrote {report_path}")
    if args.figure:
        from .plots import plot_confusion

        figure_path = out.with_suffix(".png")
        plot_confusion(report, figure_path)
        print(f"wrote {figure_path}")
    return 0


def cmd_ablate(args) -> int:
    afv_path, meta_path = bank_paths(args.bank)
    bank = load_bank(afv_path, meta_path)
    files = collect_cloud_files(args.inputs)
    ids = unique_ids(files)
    truth = read_truth(args.truth)
    cfg = augment_config(args)
    with ExitStack() as stack:
        featurizer = make_featurizer(args, stack)
        features = featurizer(augment_files(files, cfg, ids))
    result = ablate_anchors(
        bank, features, ids, truth,
        counts=parse_counts(args.counts), trials=args.trials, seed=args.seed,
    )
    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["n_a", "mean_oacc", "std_oacc", "mean_macc", "std_macc"]
        )
        writer.writeheader()
        writer.writerows(result.rows())
    write_json(out.with_suffix(".run.json"), run_block(args, "ablate"))
    print(f"wrote {out}")
    if args.figure:
        from .plots import plot_ablation

        figure_path = out.with_suffix(".png")
        plot_ablation(result, figure_path)
        print(f"wrote {figure_path}")
    return 0


def cmd_export(args) -> int:
    if not args.bank and not args.inputs:
        raise ConfigError("export needs --bank, --inputs, or both")
    features, ids, labels, anchor_mask = [], [], [], []
    if args.bank:
        afv_path, meta_path = bank_paths(args.bank)
        bank = load_bank(afv_path, meta_path)
        for category in bank.categories:
            for j, (feature, _) in enumerate(bank.anchors_for(category)):
                features.append(feature)
                ids.append(f"{category}/{j}")
                labels.append(category)
                anchor_mask.append(True)
    if args.inputs:
        files = collect_cloud_files(args.inputs)
        input_ids = unique_ids(files)
        truth = read_truth(args.truth) if args.truth else {}
        cfg = augment_config(args)
        with ExitStack() as stack:
            featurizer = make_featurizer(args, stack)
            input_features = featurizer(augment_files(files, cfg, input_ids))
        features.extend(input_features)
        ids.extend(input_ids)
        labels.extend(truth.get(i, "") for i in input_ids)
        anchor_mask.extend([False] * len(input_ids))

    dims = {f.dim for f in features}
    if len(dims) > 1:
        raise ConfigError(f"mixed feature dims {sorted(dims)}; bank and inputs disagree")

    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if args.mode == "features":
            dim = dims.pop()
            writer.writerow(["id", "label", "is_anchor"] + [f"f{i}" for i in range(dim)])
            for feature, i, l, a in zip(features, ids, labels, anchor_mask):
                writer.writerow([i, l, int(a)] + [repr(v) for v in feature.values])
        else:
            embedding = export_embedding_2d(features, ids=ids, labels=labels)
            writer.writerow(["id", "label", "is_anchor", "x", "y"])
            for (i, l, x, y), a in zip(embedding.rows(), anchor_mask):
                writer.writerow([i, l, int(a), repr(x), repr(y)])
    write_json(out.with_suffix(".run.json"), run_block(args, "export"))
    print(f"wrote {out} ({len(features)} rows)")
    if args.mode == "pca2d" and args.figure:
        from .plots import plot_embedding

        figure_path = out.with_suffix(".png")
        plot_embedding(embedding, figure_path, anchor_mask=anchor_mask)
        print(f"wrote {figure_path}")
    return 0


def cmd_backend_check(args) -> int:
    report = check_conformance(args.backend_cmd, timeout=args.timeout, seed=args.seed)
    print(report.summary())
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorcloud",
        description="Training-free open-world point-cloud classification "
        "with anchor feature banks.",
    )
    parser.add_argument("--version", action="version", version=f"anchorcloud {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-data", help="write a synthetic benchmark (clouds + manifest)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classes", nargs="+", choices=sorted(SHAPE_SAMPLERS), default=None)
    p.add_argument("--anchors", type=int, default=7, help="anchor samples per class")
    p.add_argument("--tests", type=int, default=50, help="test samples per class")
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--cloud-points", type=int, default=1400,
                   help="raw points per generated cloud")
    p.add_argument("--rotate", action=argparse.BooleanOptionalAction, default=True,
                   help="rotate test clouds (open-pose benchmark)")
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.set_defaults(func=cmd_demo_data)

    p = sub.add_parser("bank-build", help="build an anchor feature bank from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output prefix (writes .afv and .json)")
    add_pipeline_options(p)
    p.set_defaults(func=cmd_bank_build)

    p = sub.add_parser("classify", help="predict categories for test clouds")
    p.add_argument("--bank", required=True, help="bank prefix from bank-build")
    p.add_argument("--inputs", required=True, nargs="+",
                   help="cloud files and/or directories")
    p.add_argument("--out", required=True, help="predictions JSON path")
    p.add_argument("--keep-distances", action="store_true",
                   help="record every per-anchor distance in the output")
    p.add_argument("--mode", choices=["nearest", "class-mean"], default="nearest")
    add_pipeline_options(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score a predictions file against ground truth")
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True, help="JSON file mapping sample id to label")
    p.add_argument("--out", required=True,
                   help="output prefix (writes .report.json and .png)")
    p.add_argument("--figure", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="sweep the per-class anchor count")
    p.add_argument("--bank", required=True)
    p.add_argument("--inputs", required=True, nargs="+")
    p.add_argument("--truth", required=True)
    p.add_argument("--counts", default="1..7", help="e.g. '1..7' or '1,3,5'")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", required=True, help="CSV path (figure written alongside)")
    p.add_argument("--figure", action=argparse.BooleanOptionalAction, default=True)
    add_pipeline_options(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("export", help="dump features or a 2-D PCA projection as CSV")
    p.add_argument("--bank", default=None)
    p.add_argument("--inputs", nargs="+", default=None)
    p.add_argument("--truth", default=None, help="optional labels for --inputs")
    p.add_argument("--mode", choices=["features", "pca2d"], default="pca2d")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--figure", action=argparse.BooleanOptionalAction, default=True)
    add_pipeline_options(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("backend-check", help="run the featurizer bridge conformance suite")
    p.add_argument("--backend-cmd", required=True)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.set_defaults(func=cmd_backend_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AnchorCloudError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
