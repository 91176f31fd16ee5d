"""Anchor banks and nearest-anchor cosine classification.

A bank holds, per category, the feature vectors of that category's anchor
samples together with their provenance. Classification is 1-nearest-anchor:
the query's cosine distance is computed against every anchor and the
category of the global minimum wins, ties broken by lowest category index,
then lowest anchor index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .descriptor import FeatureVector
from .errors import AnchorCloudError, BankError, ShapeMismatchError, ZeroVectorError
from .formats import AnchorManifest, load_cloud, read_feature_file, write_feature_file
from .geometry import AugmentConfig, PointCloud, augment


@dataclass(frozen=True)
class AnchorProvenance:
    """Where an anchor came from: file, generator, seed, and prompt text."""

    source_file: str
    generator: str = "other"
    seed: int = 0
    prompt: str = ""


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    predicted: str
    best_distance: float
    per_anchor_distances: tuple[tuple[str, int, float], ...] | None = None


class AnchorBank:
    """Immutable per-category collection of anchor features.

    ``anchors`` is one list per category (aligned with ``categories``) of
    ``(FeatureVector, AnchorProvenance)`` pairs, in manifest order.
    """

    def __init__(
        self,
        categories: Sequence[str],
        anchors: Sequence[Sequence[tuple[FeatureVector, AnchorProvenance]]],
    ):
        categories = tuple(categories)
        if len(categories) == 0:
            raise BankError("bank must have at least one category")
        if len(set(categories)) != len(categories):
            raise BankError("category names must be unique")
        if len(anchors) != len(categories):
            raise BankError("anchors must align one list per category")

        normalized: list[tuple[tuple[FeatureVector, AnchorProvenance], ...]] = []
        dim: int | None = None
        for name, entries in zip(categories, anchors):
            entries = tuple(entries)
            if len(entries) == 0:
                raise BankError(f"category {name!r} has no anchors")
            for j, (feature, _) in enumerate(entries):
                try:
                    feature = _coerce_feature(feature)
                except ValueError as exc:
                    raise BankError(f"anchor {name}/{j}: {exc}") from exc
                if dim is None:
                    dim = feature.dim
                elif feature.dim != dim:
                    raise BankError(
                        f"anchor {name}/{j} has dim {feature.dim}, expected {dim}"
                    )
                if np.linalg.norm(feature.values) == 0.0:
                    raise BankError(f"anchor {name}/{j} is the zero vector")
            normalized.append(entries)

        self._categories = categories
        self._anchors = tuple(normalized)
        self._dim = int(dim)

        rows = np.vstack(
            [f.values for entries in self._anchors for f, _ in entries]
        )
        self._unit_rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
        self._row_category = np.concatenate(
            [np.full(len(e), i) for i, e in enumerate(self._anchors)]
        )
        self._row_anchor = np.concatenate(
            [np.arange(len(e)) for e in self._anchors]
        )

    @property
    def categories(self) -> tuple[str, ...]:
        return self._categories

    @property
    def feature_dim(self) -> int:
        return self._dim

    @property
    def n_anchors(self) -> int:
        return len(self._row_category)

    def anchors_for(self, category: str) -> tuple[tuple[FeatureVector, AnchorProvenance], ...]:
        return self._anchors[self._categories.index(category)]

    def anchor_counts(self) -> dict[str, int]:
        return {c: len(e) for c, e in zip(self._categories, self._anchors)}

    def subset(self, indices_per_category: Sequence[Sequence[int]]) -> "AnchorBank":
        """New bank keeping only the given anchor indices per category."""
        picked = [
            [entries[i] for i in idx]
            for entries, idx in zip(self._anchors, indices_per_category)
        ]
        return AnchorBank(self._categories, picked)


def _coerce_feature(feature) -> FeatureVector:
    if isinstance(feature, FeatureVector):
        return feature
    return FeatureVector(np.asarray(feature, dtype=np.float64), source="raw")


def cosine_distance(a, b) -> float:
    """1 minus the cosine similarity, clamped into [0, 2] against float drift."""
    av = a.values if isinstance(a, FeatureVector) else np.asarray(a, dtype=np.float64)
    bv = b.values if isinstance(b, FeatureVector) else np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ShapeMismatchError(f"dims differ: {av.shape} vs {bv.shape}")
    na, nb = np.linalg.norm(av), np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine distance undefined for a zero vector")
    return float(np.clip(1.0 - float(av @ bv) / (na * nb), 0.0, 2.0))


def predict(
    bank: AnchorBank,
    test_feature: FeatureVector,
    sample_id: str = "",
    keep_distances: bool = False,
    mode: str = "nearest",
) -> Prediction:
    """Classify one feature against every anchor in the bank.

    ``mode="nearest"`` (the default) takes the category of the globally
    closest anchor. ``mode="class-mean"`` instead averages distances within
    each category and takes the category with the smallest mean.
    """
    query = test_feature.values
    if len(query) != bank.feature_dim:
        raise ShapeMismatchError(
            f"test feature dim {len(query)} != bank dim {bank.feature_dim}"
        )
    norm = np.linalg.norm(query)
    if norm == 0.0:
        raise ZeroVectorError(f"test feature {sample_id!r} is the zero vector")

    distances = np.clip(1.0 - bank._unit_rows @ (query / norm), 0.0, 2.0)
    if mode == "nearest":
        best = int(np.argmin(distances))  # rows are category-major: ties fall out right
        predicted = bank.categories[bank._row_category[best]]
    elif mode == "class-mean":
        means = np.array(
            [distances[bank._row_category == i].mean() for i in range(len(bank.categories))]
        )
        predicted = bank.categories[int(np.argmin(means))]
    else:
        raise ValueError(f"unknown prediction mode {mode!r}")

    per_anchor = None
    if keep_distances:
        per_anchor = tuple(
            (bank.categories[c], int(a), float(d))
            for c, a, d in zip(bank._row_category, bank._row_anchor, distances)
        )
    return Prediction(
        sample_id=sample_id,
        predicted=predicted,
        best_distance=float(distances.min()),
        per_anchor_distances=per_anchor,
    )


def predict_batch(
    bank: AnchorBank,
    features: Sequence[FeatureVector],
    ids: Sequence[str] | None = None,
    keep_distances: bool = False,
    mode: str = "nearest",
) -> list[Prediction]:
    """Classify a batch; output order equals input order."""
    if ids is None:
        ids = [""] * len(features)
    return [
        predict(bank, f, sample_id=i, keep_distances=keep_distances, mode=mode)
        for f, i in zip(features, ids)
    ]


def build_bank(manifest: AnchorManifest, cfg: AugmentConfig, featurizer) -> AnchorBank:
    """Augment and featurize every anchor in the manifest into a bank.

    ``featurizer`` maps a batch of augmented clouds to feature vectors.
    Each anchor gets its own rotation stream derived from ``cfg.seed`` and
    its global position, so builds are deterministic and order-stable.
    """
    clouds: list[PointCloud] = []
    provenances: list[AnchorProvenance] = []
    counts: list[int] = []
    index = 0
    for category in manifest.categories:
        counts.append(len(category.anchors))
        for entry in category.anchors:
            try:
                cloud = load_cloud(entry.path, cloud_id=f"{category.name}/{entry.file}")
                clouds.append(
                    augment(cloud, cfg, rng=np.random.default_rng([cfg.seed, index]))
                )
            except (OSError, AnchorCloudError) as exc:
                raise BankError(
                    f"anchor {entry.file!r} in category {category.name!r}: {exc}"
                ) from exc
            provenances.append(
                AnchorProvenance(
                    source_file=entry.file,
                    generator=entry.generator,
                    seed=entry.seed,
                    prompt=category.prompts[entry.prompt_index],
                )
            )
            index += 1

    features = featurizer(clouds)
    anchors = []
    pos = 0
    for n in counts:
        anchors.append(list(zip(features[pos : pos + n], provenances[pos : pos + n])))
        pos += n
    return AnchorBank([c.name for c in manifest.categories], anchors)


def merge_banks(a: AnchorBank, b: AnchorBank) -> AnchorBank:
    """Pool two banks over the same categories; a's anchors come first."""
    if set(a.categories) != set(b.categories):
        raise BankError("banks cover different category sets")
    if a.feature_dim != b.feature_dim:
        raise BankError(
            f"feature dims differ: {a.feature_dim} vs {b.feature_dim}"
        )
    merged = [
        list(a.anchors_for(c)) + list(b.anchors_for(c)) for c in a.categories
    ]
    return AnchorBank(a.categories, merged)


def save_bank(bank: AnchorBank, afv_path, meta_path, extra_meta: dict | None = None) -> None:
    """Write a bank as a feature file plus a JSON metadata sidecar."""
    rows, ids, records = [], [], []
    sources = set()
    for category in bank.categories:
        for j, (feature, p) in enumerate(bank.anchors_for(category)):
            rows.append(feature.values)
            ids.append(f"{category}/{j}")
            sources.add(feature.source)
            records.append(
                {
                    "category": category,
                    "index": j,
                    "source_file": p.source_file,
                    "generator": p.generator,
                    "seed": p.seed,
                    "prompt": p.prompt,
                }
            )
    meta = {
        "categories": list(bank.categories),
        "feature_dim": bank.feature_dim,
        "feature_source": sorted(sources)[0] if len(sources) == 1 else "mixed",
        "anchors": records,
    }
    if extra_meta:
        meta.update(extra_meta)
    write_feature_file(afv_path, np.vstack(rows), ids)
    Path(meta_path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def load_bank(afv_path, meta_path) -> AnchorBank:
    """Rebuild a bank from :func:`save_bank` output."""
    features, ids = read_feature_file(afv_path)
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    records = meta["anchors"]
    if len(records) != len(ids):
        raise BankError(
            f"metadata lists {len(records)} anchors but {afv_path} holds {len(ids)}"
        )
    source = meta.get("feature_source", "builtin")
    per_category: dict[str, list] = {c: [] for c in meta["categories"]}
    for row, row_id, rec in zip(features, ids, records):
        expected = f"{rec['category']}/{rec['index']}"
        if row_id != expected:
            raise BankError(f"feature row {row_id!r} does not match metadata {expected!r}")
        per_category[rec["category"]].append(
            (
                FeatureVector(np.asarray(row, dtype=np.float64), source=source),
                AnchorProvenance(
                    source_file=rec["source_file"],
                    generator=rec["generator"],
                    seed=rec["seed"],
                    prompt=rec["prompt"],
                ),
            )
        )
    return AnchorBank(meta["categories"], [per_category[c] for c in meta["categories"]])
