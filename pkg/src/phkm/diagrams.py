"""Persistence diagrams, persistence measures and transport plans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIAGONAL = -1


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"points must have shape (m, 2), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite multiset of off-diagonal (birth, death) points in one degree.

    Multiplicity is stored by repetition: a point that occurs twice appears
    as two identical rows of ``points``. Diagonal points are implicit.
    """

    dimension: int
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        pts = _as_points(self.points)
        if len(pts) and not np.all(pts[:, 0] < pts[:, 1]):
            raise ValueError("every diagram point needs birth < death")
        if not np.all(np.isfinite(pts)):
            raise ValueError("diagram points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dimension", int(self.dimension))

    @classmethod
    def empty(cls, dimension: int = 0) -> PersistenceDiagram:
        return cls(dimension, np.zeros((0, 2)))

    @classmethod
    def from_multiplicities(cls, dimension, points, multiplicities) -> PersistenceDiagram:
        pts = _as_points(points)
        reps = np.asarray(multiplicities, dtype=int)
        if np.any(reps < 0):
            raise ValueError("multiplicities must be nonnegative")
        return cls(dimension, np.repeat(pts, reps, axis=0))

    @classmethod
    def from_pairs(cls, dimension, pairs, drop_diagonal=True) -> PersistenceDiagram:
        """Build from raw pairs, silently dropping zero-length ones."""
        pts = _as_points(pairs)
        if drop_diagonal and len(pts):
            pts = pts[pts[:, 0] < pts[:, 1]]
        return cls(dimension, pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def persistence(self) -> np.ndarray:
        return self.points[:, 1] - self.points[:, 0]

    def sorted_points(self) -> np.ndarray:
        if not len(self.points):
            return self.points
        order = np.lexsort((self.points[:, 1], self.points[:, 0]))
        return self.points[order]

    def __eq__(self, other) -> bool:
        # multiset equality
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.points.shape == other.points.shape
            and np.array_equal(self.sorted_points(), other.sorted_points())
        )

    __hash__ = None

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> PersistenceDiagram:
        return cls(int(obj["dimension"]), obj.get("points", []))

    def __repr__(self) -> str:
        return f"PersistenceDiagram(dimension={self.dimension}, n_points={len(self)})"


@dataclass(frozen=True, eq=False)
class PersistenceMeasure:
    """Discrete measure on the open half-plane: atoms with positive masses."""

    locations: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dimension: int = 0

    def __post_init__(self):
        loc = _as_points(self.locations)
        mass = np.asarray(self.masses, dtype=float).reshape(-1)
        if len(loc) != len(mass):
            raise ValueError("locations and masses differ in length")
        if np.any(mass < 0):
            raise ValueError("masses must be nonnegative")
        if len(loc) and not np.all(loc[:, 0] < loc[:, 1]):
            raise ValueError("atoms must lie strictly above the diagonal")
        keep = mass > 0
        loc, mass = loc[keep], mass[keep]
        loc.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)
        object.__setattr__(self, "dimension", int(self.dimension))

    def __len__(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def scaled(self, factor: float) -> PersistenceMeasure:
        return PersistenceMeasure(self.locations, self.masses * factor, self.dimension)

    def merged(self) -> PersistenceMeasure:
        """Collapse coincident atoms by summing their masses."""
        if not len(self):
            return self
        uniq, inverse = np.unique(self.locations, axis=0, return_inverse=True)
        mass = np.zeros(len(uniq))
        np.add.at(mass, inverse.reshape(-1), self.masses)
        return PersistenceMeasure(uniq, mass, self.dimension)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceMeasure):
            return NotImplemented
        a, b = self.merged(), other.merged()
        return (
            a.dimension == b.dimension
            and np.array_equal(a.locations, b.locations)
            and np.array_equal(a.masses, b.masses)
        )

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "points": self.locations.tolist(),
            "masses": self.masses.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> PersistenceMeasure:
        pts = obj.get("points", [])
        masses = obj.get("masses")
        if masses is None:
            masses = np.ones(len(pts))
        return cls(pts, masses, int(obj.get("dimension", 0)))

    def __repr__(self) -> str:
        return f"PersistenceMeasure(dimension={self.dimension}, n_atoms={len(self)}, mass={self.total_mass:.6g})"


@dataclass
class TransportPlan:
    """Optimal pairing certificate.

    ``pairs`` holds ``(source, target, mass)`` triples; an index of
    ``DIAGONAL`` means the partner is the diagonal projection of the other end.
    ``cost`` is the optimal value before taking the p-th root.
    """

    pairs: list
    cost: float
    p: float = 2.0
    q: float = 2.0

    def source_marginal(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for s, _, m in self.pairs:
            if s != DIAGONAL:
                out[s] += m
        return out

    def target_marginal(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for _, t, m in self.pairs:
            if t != DIAGONAL:
                out[t] += m
        return out

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "cost": self.cost,
            "pairs": [[int(s), int(t), float(m)] for s, t, m in self.pairs],
        }


def diagonal_projection(points: np.ndarray) -> np.ndarray:
    pts = _as_points(points)
    mid = 0.5 * (pts[:, 0] + pts[:, 1])
    return np.column_stack([mid, mid])
