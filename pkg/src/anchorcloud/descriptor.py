"""Rotation-invariant cloud features.

The builtin descriptor concatenates two L1-normalized soft histograms over
a normalized cloud: all pairwise point distances over [0, 2] and point radii
over [0, 1]. Both quantities depend only on the shape's distance structure,
so the descriptor is exactly invariant under rotation and point permutation.
Soft (linear-interpolation) binning keeps the map Lipschitz: a float-level
perturbation of a distance can never move a full unit of mass across a bin
edge.

External backends may return per-point feature matrices instead;
:func:`pool_matrix_feature` reduces those to vectors by max-pooling over the
token axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateCloudError, EmptyInputError
from .geometry import PointCloud

PAIR_RANGE = 2.0  # max pairwise distance inside the unit sphere
RADIAL_RANGE = 1.0


@dataclass(frozen=True)
class FeatureVector:
    """A D-dimensional embedding of one cloud, tagged with its origin."""

    values: np.ndarray
    source: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or len(vals) < 1:
            raise ValueError(f"feature must be a non-empty 1-D vector; got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("feature contains non-finite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DescriptorConfig:
    pair_bins: int = 64
    radial_bins: int = 32
    max_pairs: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.pair_bins < 1 or self.radial_bins < 1:
            raise ValueError("pair_bins and radial_bins must be positive")
        if self.max_pairs is not None and self.max_pairs < 1:
            raise ValueError("max_pairs must be positive when set")

    @property
    def dim(self) -> int:
        return self.pair_bins + self.radial_bins


def _soft_histogram(values: np.ndarray, bins: int, value_range: float) -> np.ndarray:
    """L1-normalized histogram with linear-interpolation binning.

    Each value splits its unit of mass between the two bins whose centers
    bracket it; mass falling past either end of the range collapses into the
    boundary bin. Values are sorted first so the accumulation order (and thus
    the result, bit for bit) is independent of input permutation.
    """
    values = np.sort(values)
    u = values * (bins / value_range) - 0.5
    lo = np.floor(u)
    frac = u - lo
    lo = lo.astype(np.int64)
    hist = np.bincount(np.clip(lo, 0, bins - 1), weights=1.0 - frac, minlength=bins)
    hist += np.bincount(np.clip(lo + 1, 0, bins - 1), weights=frac, minlength=bins)
    return hist / hist.sum()


def builtin_descriptor(cloud: PointCloud, cfg: DescriptorConfig | None = None) -> FeatureVector:
    """Distance-histogram descriptor of a normalized cloud.

    Expects the cloud to be augmented already (centroid at the origin, max
    radius 1); radii are measured from the origin and pair distances are
    binned over [0, 2].
    """
    if cfg is None:
        cfg = DescriptorConfig()
    pts = cloud.points
    if len(pts) < 2:
        raise DegenerateCloudError(f"cloud {cloud.id!r} has fewer than 2 points")
    distances = pdist(pts)
    if cfg.max_pairs is not None and len(distances) > cfg.max_pairs:
        rng = np.random.default_rng(cfg.seed)
        distances = distances[rng.choice(len(distances), size=cfg.max_pairs, replace=False)]
    radii = np.linalg.norm(pts, axis=1)
    vec = np.concatenate(
        [
            _soft_histogram(distances, cfg.pair_bins, PAIR_RANGE),
            _soft_histogram(radii, cfg.radial_bins, RADIAL_RANGE),
        ]
    )
    return FeatureVector(vec, source="builtin")


def pool_matrix_feature(
    feature_matrix: np.ndarray, token_axis: str = "columns", source: str = "backend"
) -> FeatureVector:
    """Collapse an F x T feature matrix to an F-vector by max over tokens.

    ``token_axis`` names where the tokens live: ``"columns"`` pools each row
    over the columns (the usual per-point-feature layout), ``"rows"`` the
    transpose.
    """
    m = np.asarray(feature_matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D; got shape {m.shape}")
    if m.size == 0:
        raise EmptyInputError("feature matrix is empty")
    if not np.isfinite(m).all():
        raise ValueError("feature matrix contains non-finite values")
    if token_axis == "columns":
        pooled = m.max(axis=1)
    elif token_axis == "rows":
        pooled = m.max(axis=0)
    else:
        raise ValueError(f"token_axis must be 'rows' or 'columns'; got {token_axis!r}")
    return FeatureVector(pooled, source=source)


@dataclass(frozen=True)
class BuiltinFeaturizer:
    """Batch adapter around :func:`builtin_descriptor` for pipeline code."""

    config: DescriptorConfig = DescriptorConfig()

    def __call__(self, clouds) -> list[FeatureVector]:
        return [builtin_descriptor(c, self.config) for c in clouds]

    @property
    def dim(self) -> int:
        return self.config.dim
