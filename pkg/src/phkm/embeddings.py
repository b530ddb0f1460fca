"""Vectorisations of persistence diagrams for Euclidean k-means."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from phkm.diagrams import PersistenceDiagram

KINDS = ("betti", "landscape", "image")


@dataclass
class EmbeddingVector:
    values: np.ndarray
    kind: str
    grid: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)


def _grid(t_min, t_max, G):
    if not t_min < t_max:
        raise ValueError(f"need t_min < t_max, got [{t_min}, {t_max}]")
    if G < 2:
        raise ValueError(f"grid needs at least 2 samples, got {G}")
    return np.linspace(t_min, t_max, int(G))


def betti_curve(D: PersistenceDiagram, t_min: float, t_max: float, G: int = 100) -> EmbeddingVector:
    """Number of points with ``birth <= t < death`` at G equispaced t."""
    t = _grid(t_min, t_max, G)
    b, d = D.births[:, None], D.deaths[:, None]
    values = ((b <= t) & (t < d)).sum(axis=0).astype(float)
    return EmbeddingVector(values, "betti", {"t_min": t_min, "t_max": t_max, "G": int(G)})


def _tents(D, t):
    # rows: diagram points, columns: grid samples
    return np.maximum(0.0, np.minimum(t[None, :] - D.births[:, None], D.deaths[:, None] - t[None, :]))


def persistence_landscape(D: PersistenceDiagram, K: int = 5, t_min: float = 0.0, t_max: float = 1.0,
                          G: int = 100) -> EmbeddingVector:
    """Layers 1..K of the landscape, each sampled on the grid, layer-major."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    t = _grid(t_min, t_max, G)
    layers = np.zeros((K, len(t)))
    if len(D):
        tents = -np.sort(-_tents(D, t), axis=0)
        depth = min(K, len(D))
        layers[:depth] = tents[:depth]
    return EmbeddingVector(layers.ravel(), "landscape", {"t_min": t_min, "t_max": t_max, "G": int(G), "K": int(K)})


def persistence_image(D: PersistenceDiagram, G: int = 20, sigma: float = 0.1, birth_range=(0.0, 1.0),
                      pers_range=(0.0, 1.0), weight_max: float | None = None) -> EmbeddingVector:
    """Persistence surface integrated over a G x G pixel grid (midpoint rule).

    Points map to (birth, persistence) and carry a Gaussian of width
    ``sigma`` weighted by ``min(persistence / weight_max, 1)``;
    ``weight_max`` defaults to the top of ``pers_range``. Rows index
    persistence, columns index birth; the vector is the row-major flattening.
    """
    if G < 1:
        raise ValueError(f"G must be >= 1, got {G}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    b0, b1 = map(float, birth_range)
    p0, p1 = map(float, pers_range)
    if not (b0 < b1 and p0 < p1):
        raise ValueError("birth_range and pers_range must be nonempty intervals")
    weight_max = p1 if weight_max is None else float(weight_max)
    if not weight_max > 0:
        raise ValueError("weight_max must be positive")
    bw, pw = (b1 - b0) / G, (p1 - p0) / G
    bc = b0 + bw * (np.arange(G) + 0.5)
    pc = p0 + pw * (np.arange(G) + 0.5)
    image = np.zeros((G, G))
    if len(D):
        births, pers = D.births, D.persistence
        w = np.clip(pers / weight_max, 0.0, 1.0)
        norm = 1.0 / (2 * np.pi * sigma ** 2)
        gb = np.exp(-((bc[None, :] - births[:, None]) ** 2) / (2 * sigma ** 2))
        gp = np.exp(-((pc[None, :] - pers[:, None]) ** 2) / (2 * sigma ** 2))
        image = norm * bw * pw * np.einsum("k,ki,kj->ij", w, gp, gb)
    grid = {"G": int(G), "sigma": sigma, "birth_range": [b0, b1], "pers_range": [p0, p1], "weight_max": weight_max}
    return EmbeddingVector(image.ravel(), "image", grid)


def _padded(lo, hi, pad=0.05):
    lo, hi = float(lo), float(hi)
    width = hi - lo
    if width <= 0:
        width = max(abs(lo), abs(hi), 1.0)
        return lo - pad * width, hi + pad * width
    return lo - pad * width, hi + pad * width


def default_grid(diagrams, kind: str, G=None, K: int = 5, sigma=None) -> dict:
    """Grid parameters fitted to a dataset of diagrams (ranges padded 5%)."""
    pts = [D.points for D in diagrams if len(D)]
    pts = np.concatenate(pts) if pts else np.array([[0.0, 1.0]])
    if kind in ("betti", "landscape"):
        t_min, t_max = _padded(pts[:, 0].min(), pts[:, 1].max())
        grid = {"t_min": t_min, "t_max": t_max, "G": int(G or 100)}
        if kind == "landscape":
            grid["K"] = int(K)
        return grid
    if kind == "image":
        pers = pts[:, 1] - pts[:, 0]
        birth_range = _padded(pts[:, 0].min(), pts[:, 0].max())
        pers_range = (0.0, _padded(0.0, pers.max())[1])
        sig = sigma if sigma is not None else 0.05 * (pers_range[1] - pers_range[0])
        return {"G": int(G or 20), "sigma": float(sig), "birth_range": list(birth_range),
                "pers_range": list(pers_range)}
    raise ValueError(f"unknown embedding kind {kind!r}; expected one of {KINDS}")


def embed(D: PersistenceDiagram, kind: str, grid: dict) -> EmbeddingVector:
    if kind == "betti":
        return betti_curve(D, grid["t_min"], grid["t_max"], grid["G"])
    if kind == "landscape":
        return persistence_landscape(D, grid["K"], grid["t_min"], grid["t_max"], grid["G"])
    if kind == "image":
        return persistence_image(D, grid["G"], grid["sigma"], grid["birth_range"], grid["pers_range"],
                                 grid.get("weight_max"))
    raise ValueError(f"unknown embedding kind {kind!r}; expected one of {KINDS}")


def embed_dataset(dataset, kind: str, grids=None, **grid_kwargs):
    """Embed a list of per-degree diagram tuples into one matrix.

    Each degree gets its own grid (fitted to that degree across the dataset
    unless ``grids`` is given) and the per-degree vectors are concatenated.
    Returns ``(matrix, grids)``.
    """
    dataset = [tuple(item) if isinstance(item, (tuple, list)) else (item,) for item in dataset]
    n_deg = len(dataset[0])
    if grids is None:
        grids = [default_grid([item[d] for item in dataset], kind, **grid_kwargs) for d in range(n_deg)]
    rows = [np.concatenate([embed(item[d], kind, grids[d]).values for d in range(n_deg)]) for item in dataset]
    return np.vstack(rows), grids
