"""Labelled synthetic point clouds: circle, sphere and torus in R^3.

All samplers draw from ``numpy.random.default_rng(seed)`` (PCG64), so a
cloud is a pure function of its parameters and seed on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SHAPES = ("circle", "sphere", "torus")


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    label: str | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"point cloud needs shape (n>=1, d>=1), got {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.points, other.points)

    __hash__ = None


def _check_count(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")


def _check_positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def circle_from_angles(angles, radius: float = 1.0) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros_like(angles)])


def sample_circle(n: int, radius: float = 1.0, seed: int = 0) -> PointCloud:
    """Uniform-angle samples on a circle in the z=0 plane of R^3."""
    _check_count(n)
    _check_positive("radius", radius)
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * np.pi, size=int(n))
    return PointCloud(circle_from_angles(angles, radius), "circle", seed)


def sample_sphere(n: int, radius: float = 1.0, seed: int = 0) -> PointCloud:
    """Surface-uniform samples on the 2-sphere via normalised Gaussians."""
    _check_count(n)
    _check_positive("radius", radius)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(n), 3))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero draw has probability 0 but would divide by zero
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return PointCloud(radius * g / norms, "sphere", seed)


def sample_torus(n: int, R: float = 2.0, r: float = 1.0, seed: int = 0) -> PointCloud:
    """Area-uniform samples on the standard torus around the z axis.

    The tube angle ``u`` is drawn by rejection against the area element
    ``R + r cos u`` so the inner rim is not oversampled.
    """
    _check_count(n)
    _check_positive("R", R)
    _check_positive("r", r)
    if r >= R:
        raise ValueError(f"need r < R for an embedded torus, got R={R}, r={r}")
    rng = np.random.default_rng(seed)
    n = int(n)
    us = np.empty(0)
    while len(us) < n:
        batch = max(2 * (n - len(us)), 16)
        u = rng.uniform(0.0, 2 * np.pi, size=batch)
        accept = rng.uniform(0.0, R + r, size=batch) < R + r * np.cos(u)
        us = np.concatenate([us, u[accept]])
    u = us[:n]
    v = rng.uniform(0.0, 2 * np.pi, size=n)
    ring = R + r * np.cos(u)
    pts = np.column_stack([ring * np.cos(v), ring * np.sin(v), r * np.sin(u)])
    return PointCloud(pts, "torus", seed)


def add_uniform_noise(pc: PointCloud, s: float, seed: int = 0) -> PointCloud:
    """Perturb every coordinate by an independent Uniform[-s, s] draw."""
    if not s >= 0:
        raise ValueError(f"noise scale must be nonnegative, got {s}")
    if s == 0:
        return PointCloud(pc.points.copy(), pc.label, pc.seed, dict(pc.meta))
    rng = np.random.default_rng(seed)
    noisy = pc.points + rng.uniform(-s, s, size=pc.points.shape)
    return PointCloud(noisy, pc.label, pc.seed, {**pc.meta, "noise": s, "noise_seed": seed})


def sample_shape(kind: str, n: int, seed: int, params: dict | None = None) -> PointCloud:
    params = dict(params or {})
    if kind == "circle":
        return sample_circle(n, params.get("radius", 1.0), seed)
    if kind == "sphere":
        return sample_sphere(n, params.get("radius", 1.0), seed)
    if kind == "torus":
        return sample_torus(n, params.get("R", 2.0), params.get("r", 1.0), seed)
    raise ValueError(f"unknown shape {kind!r}; expected one of {SHAPES}")
