"""Evaluation metrics, the anchor-count ablation, and 2-D embedding export.

Overall accuracy (oacc) is the fraction of samples whose predicted category
matches the ground truth; macro accuracy (macc) is the unweighted mean of
the per-class recalls, computed over classes that actually appear in the
test set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classifier import AnchorBank, Prediction, predict_batch
from .descriptor import FeatureVector
from .errors import AlignmentError, ConfigError, InsufficientDataError


@dataclass(frozen=True)
class EvalReport:
    categories: tuple[str, ...]
    confusion: np.ndarray  # rows = ground truth, cols = predicted
    per_class_acc: np.ndarray  # percent; NaN for classes absent from the test set
    oacc: float
    macc: float
    n_samples: int
    absent_categories: tuple[str, ...]


def evaluate(
    predictions: Sequence[Prediction],
    ground_truth: Mapping[str, str],
    categories: Sequence[str],
) -> EvalReport:
    """Score predictions against labeled ground truth.

    Prediction ids and ground-truth ids must match one-to-one; classes with
    no test samples are excluded from macc and listed in the report.
    """
    categories = tuple(categories)
    index = {c: i for i, c in enumerate(categories)}

    seen = set()
    for p in predictions:
        if p.sample_id in seen:
            raise AlignmentError(f"duplicate prediction id {p.sample_id!r}")
        seen.add(p.sample_id)
        if p.sample_id not in ground_truth:
            raise AlignmentError(f"prediction id {p.sample_id!r} missing from ground truth")
    unmatched = set(ground_truth) - seen
    if unmatched:
        raise AlignmentError(
            f"{len(unmatched)} ground-truth ids have no prediction, e.g. {sorted(unmatched)[0]!r}"
        )

    confusion = np.zeros((len(categories), len(categories)), dtype=np.int64)
    for p in predictions:
        true_label = ground_truth[p.sample_id]
        if true_label not in index:
            raise AlignmentError(f"ground-truth label {true_label!r} not in category set")
        if p.predicted not in index:
            raise AlignmentError(f"predicted label {p.predicted!r} not in category set")
        confusion[index[true_label], index[p.predicted]] += 1

    n = len(predictions)
    row_totals = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        per_class = np.where(
            row_totals > 0, 100.0 * np.diag(confusion) / np.maximum(row_totals, 1), np.nan
        )
    present = row_totals > 0
    return EvalReport(
        categories=categories,
        confusion=confusion,
        per_class_acc=per_class,
        oacc=100.0 * np.trace(confusion) / n,
        macc=float(per_class[present].mean()),
        n_samples=n,
        absent_categories=tuple(c for c, ok in zip(categories, present) if not ok),
    )


@dataclass(frozen=True)
class AblationResult:
    anchor_counts: tuple[int, ...]
    mean_oacc: np.ndarray
    std_oacc: np.ndarray
    mean_macc: np.ndarray
    std_macc: np.ndarray
    trials: int
    seed: int

    def rows(self) -> list[dict]:
        return [
            {
                "n_a": count,
                "mean_oacc": float(self.mean_oacc[i]),
                "std_oacc": float(self.std_oacc[i]),
                "mean_macc": float(self.mean_macc[i]),
                "std_macc": float(self.std_macc[i]),
            }
            for i, count in enumerate(self.anchor_counts)
        ]


def ablate_anchors(
    bank: AnchorBank,
    features: Sequence[FeatureVector],
    ids: Sequence[str],
    ground_truth: Mapping[str, str],
    counts: Sequence[int],
    trials: int,
    seed: int = 0,
) -> AblationResult:
    """Sweep the per-class anchor count and measure accuracy mean and spread.

    For every count and trial a per-class subset is drawn without
    replacement from a stream seeded by (seed, count, trial), so runs are
    reproducible and trials are independent. Kept anchors stay in bank
    order.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1; got {trials}")
    min_available = min(bank.anchor_counts().values())
    for count in counts:
        if not 1 <= count <= min_available:
            raise ConfigError(
                f"anchor count {count} outside [1, {min_available}] available per class"
            )

    sizes = [len(bank.anchors_for(c)) for c in bank.categories]
    mean_oacc, std_oacc, mean_macc, std_macc = [], [], [], []
    for count in counts:
        oaccs, maccs = [], []
        for trial in range(trials):
            rng = np.random.default_rng([seed, count, trial])
            picked = [sorted(rng.choice(n, size=count, replace=False)) for n in sizes]
            sub_bank = bank.subset(picked)
            report = evaluate(
                predict_batch(sub_bank, features, ids), ground_truth, sub_bank.categories
            )
            oaccs.append(report.oacc)
            maccs.append(report.macc)
        mean_oacc.append(np.mean(oaccs))
        std_oacc.append(np.std(oaccs))
        mean_macc.append(np.mean(maccs))
        std_macc.append(np.std(maccs))

    return AblationResult(
        anchor_counts=tuple(int(c) for c in counts),
        mean_oacc=np.array(mean_oacc),
        std_oacc=np.array(std_oacc),
        mean_macc=np.array(mean_macc),
        std_macc=np.array(std_macc),
        trials=trials,
        seed=seed,
    )


@dataclass(frozen=True)
class Embedding2D:
    ids: tuple[str, ...]
    labels: tuple[str, ...]
    coords: np.ndarray  # (n, 2)
    axes: np.ndarray  # (2, D) principal directions

    def rows(self) -> list[tuple[str, str, float, float]]:
        return [
            (i, l, float(x), float(y))
            for i, l, (x, y) in zip(self.ids, self.labels, self.coords)
        ]


def export_embedding_2d(
    features: Sequence[FeatureVector],
    ids: Sequence[str] | None = None,
    labels: Sequence[str] | None = None,
) -> Embedding2D:
    """Project features onto their top two principal components.

    A deterministic stand-in for stochastic embedding methods: mean-centered
    PCA with a fixed sign convention (each component's largest-magnitude
    entry is positive), so the output is stable across runs and suitable for
    external plotting.
    """
    if len(features) < 2:
        raise InsufficientDataError(
            f"need at least 2 features for a 2-D embedding; got {len(features)}"
        )
    matrix = np.vstack(
        [f.values if isinstance(f, FeatureVector) else np.asarray(f) for f in features]
    )
    centered = matrix - matrix.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[: min(2, vt.shape[0])].copy()
    for axis in axes:
        if axis[np.argmax(np.abs(axis))] < 0:
            axis *= -1.0
    coords = centered @ axes.T
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(len(coords))])
        axes = np.vstack([axes, np.zeros_like(axes[0])])

    n = len(matrix)
    return Embedding2D(
        ids=tuple(ids) if ids is not None else tuple(str(i) for i in range(n)),
        labels=tuple(labels) if labels is not None else ("",) * n,
        coords=coords,
        axes=axes,
    )
