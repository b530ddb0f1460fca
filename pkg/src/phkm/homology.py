"""Vietoris-Rips filtrations and their persistence diagrams over Z/2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from phkm._backend import anti_transpose, reduce_boundary, rips_cliques
from phkm.diagrams import PersistenceDiagram
from phkm.shapes import PointCloud


@dataclass(eq=False)
class FilteredComplex:
    """Simplicial complex with a monotone filtration.

    ``cells[d]`` is an (N_d, d+1) array of ascending vertex tuples in
    lexicographic order and ``values[d]`` their filtration values.
    ``order`` lists ``(d, row)`` for every simplex in filtration order, i.e.
    sorted by (value, dimension, vertex tuple). ``max_dim`` is the highest
    homology degree the complex is meant to resolve.
    """

    cells: list
    values: list
    max_dim: int
    max_scale: float
    n_vertices: int

    def __post_init__(self):
        dims = np.concatenate(
            [np.full(len(v), d, dtype=np.int64) for d, v in enumerate(self.values)]
        ) if self.values else np.zeros(0, dtype=np.int64)
        rows = np.concatenate(
            [np.arange(len(v), dtype=np.int64) for v in self.values]
        ) if self.values else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(self.values) if self.values else np.zeros(0)
        # blocks are already in (dimension, row) order, so a stable sort on
        # the value alone yields the (value, dimension, vertex tuple) order
        order = np.argsort(vals, kind="stable")
        self.dim_of = dims[order]
        self.row_of = rows[order]
        self.value_of = vals[order]
        self.position = []
        for d, v in enumerate(self.values):
            pos = np.empty(len(v), dtype=np.int64)
            mask = self.dim_of == d
            pos[self.row_of[mask]] = np.nonzero(mask)[0]
            self.position.append(pos)

    def __len__(self) -> int:
        return len(self.dim_of)

    @property
    def simplices(self) -> list:
        return [
            (tuple(int(v) for v in self.cells[d][r]), float(val))
            for d, r, val in zip(self.dim_of, self.row_of, self.value_of)
        ]

    def count(self, dim: int) -> int:
        return len(self.cells[dim]) if dim < len(self.cells) else 0

    @classmethod
    def from_simplices(cls, simplices, max_dim=None, max_scale=None) -> FilteredComplex:
        """Build from explicit ``(vertex_tuple, value)`` pairs in any order."""
        by_dim = {}
        for verts, val in simplices:
            verts = tuple(sorted(int(v) for v in verts))
            by_dim.setdefault(len(verts) - 1, []).append((verts, float(val)))
        if not by_dim:
            raise ValueError("empty complex")
        top = max(by_dim)
        cells, values = [], []
        for d in range(top + 1):
            items = sorted(by_dim.get(d, []))
            cells.append(np.array([s for s, _ in items], dtype=np.int64).reshape(len(items), d + 1))
            values.append(np.array([v for _, v in items], dtype=float))
        n_vertices = int(cells[0].max()) + 1 if len(cells[0]) else 0
        if max_dim is None:
            max_dim = max(top - 1, 0)
        if max_scale is None:
            max_scale = float(max(v.max() for v in values if len(v)))
        return cls(cells, values, int(max_dim), float(max_scale), n_vertices)


def build_vr_filtration(pc, max_scale: float, max_dim: int = 2) -> FilteredComplex:
    """Rips complex of all simplices of diameter <= ``max_scale``.

    Simplices go up to dimension ``max_dim + 1`` so that classes in degree
    ``max_dim`` can die. Distances are Euclidean.
    """
    points = pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("cannot build a filtration on an empty point cloud")
    if not max_scale > 0:
        raise ValueError(f"max_scale must be positive, got {max_scale}")
    if max_dim < 0:
        raise ValueError(f"max_dim must be >= 0, got {max_dim}")
    n = len(points)
    dist = squareform(pdist(points)) if n > 1 else np.zeros((1, 1))
    adj = (dist <= max_scale).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    cells = rips_cliques(adj, max_dim + 2)
    values = []
    for d, cl in enumerate(cells):
        if d == 0:
            values.append(np.zeros(len(cl)))
            continue
        diam = np.zeros(len(cl))
        for a in range(d + 1):
            for b in range(a + 1, d + 1):
                np.maximum(diam, dist[cl[:, a], cl[:, b]], out=diam)
        values.append(diam)
    return FilteredComplex(cells, values, int(max_dim), float(max_scale), n)


def _lex_keys(cells: np.ndarray, base: int) -> np.ndarray:
    keys = np.zeros(len(cells), dtype=np.int64)
    for c in range(cells.shape[1]):
        keys = keys * base + cells[:, c]
    return keys


def _face_lookup(cells: np.ndarray, base: int):
    """Map lexicographic keys of ``cells`` rows to row indices."""
    keys = _lex_keys(cells, base)
    span = base ** cells.shape[1] if len(cells) else 0
    if 0 < span <= 1 << 24:
        table = np.full(span, -1, dtype=np.int64)
        table[keys] = np.arange(len(keys))
        return lambda q: table[q]

    def search(q):
        loc = np.minimum(np.searchsorted(keys, q), max(len(keys) - 1, 0))
        return np.where(keys[loc] == q, loc, -1) if len(keys) else np.full(len(q), -1)

    return search


def boundary_matrix(fc: FilteredComplex):
    """Column-compressed Z/2 boundary matrix in filtration order.

    Returns ``(indptr, indices)``; rows of each column are sorted ascending.
    """
    base = max(fc.n_vertices, 1)
    total = len(fc)
    col_len = np.where(fc.dim_of > 0, fc.dim_of + 1, 0)
    indptr = np.zeros(total + 1, dtype=np.int64)
    np.cumsum(col_len, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for d in range(1, len(fc.cells)):
        cl = fc.cells[d]
        if not len(cl):
            continue
        lookup = _face_lookup(fc.cells[d - 1], base)
        faces = np.empty((len(cl), d + 1), dtype=np.int64)
        for drop in range(d + 1):
            keep = [c for c in range(d + 1) if c != drop]
            loc = lookup(_lex_keys(cl[:, keep], base))
            if np.any(loc < 0):
                raise ValueError(f"complex is not closed under faces in dimension {d}")
            faces[:, drop] = fc.position[d - 1][loc]
        faces.sort(axis=1)
        starts = indptr[fc.position[d]]
        indices[starts[:, None] + np.arange(d + 1)] = faces
    return indptr, indices


def compute_persistence(fc: FilteredComplex, max_homology_dim: int | None = None) -> list:
    """Persistence diagrams for degrees ``0 .. max_homology_dim``.

    Classes still alive at ``fc.max_scale`` die there; zero-length pairs are
    dropped.
    """
    if max_homology_dim is None:
        max_homology_dim = fc.max_dim
    if max_homology_dim < 0:
        raise ValueError("max_homology_dim must be >= 0")
    indptr, indices = boundary_matrix(fc)
    n = len(fc)
    # faces must enter no later than their cofaces
    owner = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    if np.any(indices >= owner) or np.any(fc.value_of[indices] > fc.value_of[owner]):
        raise ValueError("filtration is not monotone: a face enters after its coface")
    # Reducing the coboundary matrix with dimensions taken low to high gives
    # the same pairs as the boundary matrix, but clearing then skips most
    # columns of the top dimension.
    co_indptr, co_indices = anti_transpose(indptr, indices, n)
    top = int(fc.dim_of.max()) if n else 0
    co_low = reduce_boundary(co_indptr, co_indices, (top - fc.dim_of)[::-1])
    cols = np.nonzero(co_low >= 0)[0]
    born, dead = n - 1 - cols, n - 1 - co_low[cols]
    paired = np.zeros(n, dtype=bool)
    paired[born] = True
    paired[dead] = True
    essential = np.nonzero(~paired)[0]
    birth_cells = np.concatenate([born, essential])
    b_vals = fc.value_of[birth_cells]
    d_vals = np.concatenate([fc.value_of[dead], np.full(len(essential), fc.max_scale)])
    degree = fc.dim_of[birth_cells]
    by_degree = [np.column_stack([b_vals[degree == d], d_vals[degree == d]]) for d in range(max_homology_dim + 1)]
    return [
        PersistenceDiagram.from_pairs(d, np.array(pairs, dtype=float).reshape(-1, 2))
        for d, pairs in enumerate(by_degree)
    ]


def persistence_from_cloud(pc, max_scale: float, max_dim: int = 2) -> list:
    return compute_persistence(build_vr_filtration(pc, max_scale, max_dim), max_dim)


def dominant_count(diagram: PersistenceDiagram, factor: float = 3.0, floor: float = 0.0) -> int:
    """Number of leading features separated from the rest by ``factor``.

    Persistences are ranked p1 >= p2 >= ...; the count is the smallest m with
    p_m >= factor * p_{m+1} (p_{m+1} = 0 past the end) among ranks whose
    persistence is at least ``floor``. Zero when no such gap exists.
    """
    pers = np.sort(diagram.persistence)[::-1]
    pers = np.append(pers, 0.0)
    for m in range(len(pers) - 1):
        if pers[m] < floor:
            break
        if pers[m] >= factor * pers[m + 1]:
            return m + 1
    return 0
