"""Point-cloud value types and the augmentation chain.

Augmentation normalizes every cloud into a canonical frame: farthest point
sampling down to a fixed size, centering on the centroid, scaling so the
farthest point sits on the unit sphere, and (optionally) a uniform random
rotation. All operations are pure; randomness only ever enters through an
explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCloudError, EmptyInputError, InsufficientPointsError


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must have shape (N, 3); got {pts.shape}")
    return pts


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of 3-D points with an identity and optional label.

    Point order is significant: parsers and writers preserve it, and FPS
    determinism depends on it.
    """

    id: str
    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = _as_points(self.points)
        if len(pts) == 0:
            raise EmptyInputError(f"cloud {self.id!r} has no points")
        if not np.isfinite(pts).all():
            raise ValueError(f"cloud {self.id!r} contains non-finite coordinates")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return PointCloud(self.id, points, self.label)


@dataclass(frozen=True)
class AugmentConfig:
    """Settings for :func:`augment`.

    ``pad`` opts into duplicating the last selected point when a cloud has
    fewer than ``target_points`` points (off by default: short clouds error).
    """

    target_points: int = 1024
    rotate: bool = False
    seed: int = 0
    pad: bool = field(default=False)

    def __post_init__(self):
        if self.target_points < 1:
            raise ValueError(f"target_points must be >= 1; got {self.target_points}")


def fps(cloud, k: int, start: int = 0, pad: bool = False) -> np.ndarray:
    """Farthest point sampling: greedy max-min selection order.

    Starting from ``start``, repeatedly selects the point with the largest
    minimum squared distance to the already-selected set; ties break to the
    lowest index. Returns the ``k`` selected indices in selection order.
    With ``pad=True`` and ``k > N``, the last selected index is repeated.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else _as_points(cloud)
    n = len(pts)
    if n == 0:
        raise EmptyInputError("cannot sample from an empty cloud")
    if not 0 <= start < n:
        raise InsufficientPointsError(f"start index {start} out of range for N={n}")
    if k > n and not pad:
        raise InsufficientPointsError(
            f"requested {k} points from a cloud of {n} (pass pad=True to duplicate)"
        )

    n_select = min(k, n)
    order = np.empty(k, dtype=np.int64)
    order[0] = start
    diff = pts - pts[start]
    min_d2 = np.einsum("ij,ij->i", diff, diff)
    min_d2[start] = -1.0  # selected points can never win the argmax
    for i in range(1, n_select):
        nxt = int(np.argmax(min_d2))
        order[i] = nxt
        diff = pts - pts[nxt]
        d2 = np.einsum("ij,ij->i", diff, diff)
        np.minimum(min_d2, d2, out=min_d2)
        min_d2[nxt] = -1.0
    order[n_select:] = order[n_select - 1]
    return order


def center_and_scale(cloud: PointCloud) -> PointCloud:
    """Shift to the centroid and scale the farthest point onto the unit sphere.

    Raises :class:`DegenerateCloudError` for clouds with fewer than two
    points or zero spread.
    """
    pts = cloud.points
    if len(pts) < 2:
        raise DegenerateCloudError(f"cloud {cloud.id!r} has fewer than 2 points")
    centered = pts - pts.mean(axis=0)
    # second pass kills the cancellation residue left by large offsets
    centered -= centered.mean(axis=0)
    radii = np.linalg.norm(centered, axis=1)
    scale = radii.max()
    if scale == 0.0:
        raise DegenerateCloudError(f"cloud {cloud.id!r} has zero spread")
    out = centered / scale
    out = _clamp_to_unit_sphere(out)
    return cloud.with_points(out)


def _clamp_to_unit_sphere(pts: np.ndarray) -> np.ndarray:
    # guarantee max radius <= 1 against last-ulp rounding; the recomputed
    # norm can round back above 1 after one division, so iterate
    radius = np.linalg.norm(pts, axis=1).max()
    while radius > 1.0:
        pts = pts / radius
        radius = np.linalg.norm(pts, axis=1).max()
    return pts


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Draw a rotation matrix uniformly from SO(3).

    A 4-D standard Gaussian sample, normalized, is a uniform unit quaternion;
    converting it to a matrix gives a uniform rotation.
    """
    q = rng.normal(size=4)
    norm = np.linalg.norm(q)
    while norm < 1e-12:  # astronomically unlikely, but stay well-defined
        q = rng.normal(size=4)
        norm = np.linalg.norm(q)
    w, x, y, z = q / norm
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def validate_rotation(m: np.ndarray, tol: float = 1e-9) -> None:
    """Raise ValueError unless ``m`` is a rotation: m.T @ m = I, det = +1."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3; got {m.shape}")
    if np.max(np.abs(m.T @ m - np.eye(3))) > tol:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(m) - 1.0) > tol:
        raise ValueError("matrix determinant is not +1")


def augment(
    cloud: PointCloud,
    cfg: AugmentConfig,
    rng: np.random.Generator | None = None,
) -> PointCloud:
    """Run the full augmentation chain: FPS, center, scale, optional rotation.

    When ``cfg.rotate`` is set and no generator is supplied, a fresh one is
    derived from ``cfg.seed``, so repeated calls with the same config are
    identical.
    """
    order = fps(cloud, cfg.target_points, start=0, pad=cfg.pad)
    sampled = cloud.with_points(np.asarray(cloud.points)[order])
    normalized = center_and_scale(sampled)
    if not cfg.rotate:
        return normalized
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    rotated = normalized.points @ random_rotation(rng)
    return normalized.with_points(_clamp_to_unit_sphere(rotated))
