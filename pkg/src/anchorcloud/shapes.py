"""Procedural surface samplers for the synthetic benchmark.

Five geometric families with clearly different distance structure: sphere,
box, cylinder, torus, and a two-plane "table". Used by the ``demo-data``
command and the acceptance benchmark; anchors are noisy samples of a shape,
test clouds are noisy samples under random rotations.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .geometry import PointCloud, random_rotation


def sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    pts = rng.normal(size=(n, 3))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def box(rng: np.random.Generator, n: int) -> np.ndarray:
    # six faces of the cube [-1, 1]^3, equal areas
    face_axis = rng.integers(0, 3, size=n)
    face_sign = rng.choice([-1.0, 1.0], size=n)
    pts = rng.uniform(-1.0, 1.0, size=(n, 3))
    pts[np.arange(n), face_axis] = face_sign
    return pts


def cylinder(
    rng: np.random.Generator, n: int, radius: float = 0.5, half_height: float = 1.0
) -> np.ndarray:
    lateral_area = 2 * np.pi * radius * (2 * half_height)
    cap_area = 2 * np.pi * radius**2
    on_side = rng.random(n) < lateral_area / (lateral_area + cap_area)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    pts = np.empty((n, 3))
    pts[:, 0] = np.cos(theta)
    pts[:, 1] = np.sin(theta)
    r = np.where(on_side, radius, radius * np.sqrt(rng.random(n)))
    pts[:, 0] *= r
    pts[:, 1] *= r
    pts[:, 2] = np.where(
        on_side,
        rng.uniform(-half_height, half_height, size=n),
        rng.choice([-half_height, half_height], size=n),
    )
    return pts


def torus(
    rng: np.random.Generator,
    n: int,
    ring_radius: float = 0.7,
    tube_radius: float = 0.3,
) -> np.ndarray:
    # rejection in the tube angle keeps the surface density uniform
    pts = np.empty((n, 3))
    filled = 0
    while filled < n:
        m = 2 * (n - filled) + 16
        u = rng.uniform(0, 2 * np.pi, size=m)
        v = rng.uniform(0, 2 * np.pi, size=m)
        keep = rng.random(m) < (ring_radius + tube_radius * np.cos(v)) / (
            ring_radius + tube_radius
        )
        u, v = u[keep][: n - filled], v[keep][: n - filled]
        radial = ring_radius + tube_radius * np.cos(v)
        chunk = np.column_stack(
            [radial * np.cos(u), radial * np.sin(u), tube_radius * np.sin(v)]
        )
        pts[filled : filled + len(chunk)] = chunk
        filled += len(chunk)
    return pts


def table(rng: np.random.Generator, n: int) -> np.ndarray:
    # horizontal top at z = 0.4 plus a vertical support plane below it
    top_area = 2.0 * 2.0
    leg_area = 1.6 * 1.4
    on_top = rng.random(n) < top_area / (top_area + leg_area)
    pts = np.empty((n, 3))
    pts[on_top, 0] = rng.uniform(-1, 1, size=int(on_top.sum()))
    pts[on_top, 1] = rng.uniform(-1, 1, size=int(on_top.sum()))
    pts[on_top, 2] = 0.4
    n_leg = int((~on_top).sum())
    pts[~on_top, 0] = rng.uniform(-0.8, 0.8, size=n_leg)
    pts[~on_top, 1] = 0.0
    pts[~on_top, 2] = rng.uniform(-1.0, 0.4, size=n_leg)
    return pts


SHAPE_SAMPLERS = {
    "sphere": sphere,
    "box": box,
    "cylinder": cylinder,
    "torus": torus,
    "table": table,
}


def sample_shape(
    name: str, n_points: int, rng: np.random.Generator, noise: float = 0.0
) -> np.ndarray:
    if name not in SHAPE_SAMPLERS:
        raise ConfigError(f"unknown shape {name!r}; choose from {sorted(SHAPE_SAMPLERS)}")
    pts = SHAPE_SAMPLERS[name](rng, n_points)
    if noise > 0:
        pts = pts + rng.normal(scale=noise, size=pts.shape)
    return pts


def benchmark_clouds(
    shapes: list[str] | None = None,
    anchors_per_class: int = 7,
    tests_per_class: int = 50,
    n_points: int = 1400,
    noise: float = 0.02,
    rotate_tests: bool = True,
    seed: int = 0,
) -> tuple[dict[str, list[PointCloud]], list[PointCloud], dict[str, str]]:
    """Generate (anchors per class, test clouds, ground truth).

    Every cloud gets its own generator derived from the master seed and its
    position, so the set is reproducible and insensitive to iteration order.
    Test clouds are rotated before any pipeline processing when
    ``rotate_tests`` is set, emulating an open-pose test set.
    """
    shapes = list(SHAPE_SAMPLERS) if shapes is None else shapes
    anchors: dict[str, list[PointCloud]] = {}
    tests: list[PointCloud] = []
    truth: dict[str, str] = {}
    for ci, name in enumerate(shapes):
        anchors[name] = []
        for j in range(anchors_per_class):
            rng = np.random.default_rng([seed, ci, 0, j])
            pts = sample_shape(name, n_points, rng, noise=noise)
            anchors[name].append(PointCloud(f"{name}-a{j}", pts, label=name))
        for k in range(tests_per_class):
            rng = np.random.default_rng([seed, ci, 1, k])
            pts = sample_shape(name, n_points, rng, noise=noise)
            if rotate_tests:
                pts = pts @ random_rotation(rng)
            cloud_id = f"{name}-t{k}"
            tests.append(PointCloud(cloud_id, pts, label=name))
            truth[cloud_id] = name
    return anchors, tests, truth
