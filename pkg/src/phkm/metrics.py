"""Wasserstein distance between diagrams and partial transport between measures.

Both are exact: diagrams go through a min-cost perfect matching on the
diagonal-augmented cost matrix, measures through a balanced transport
problem with one diagonal sink on each side, solved by network simplex.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.optimize import linear_sum_assignment

from phkm.diagrams import (
    DIAGONAL,
    PersistenceDiagram,
    PersistenceMeasure,
    TransportPlan,
    diagonal_projection,
)

# POT probes every installed deep-learning backend on import.
for _name in ("PYTORCH", "TENSORFLOW", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_name}", "1")
import ot  # noqa: E402


def _check_pq(p, q):
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not (q >= 1 or q == math.inf):
        raise ValueError(f"q must lie in [1, inf], got {q}")


def _root(cost: float, p: float) -> float:
    # sqrt is correctly rounded, pow(x, 0.5) is not
    if p == 1:
        return cost
    return math.sqrt(cost) if p == 2 else cost ** (1.0 / p)


def ground_cost(x, y, p: float = 2.0, q: float = 2.0) -> np.ndarray:
    """``||x - y||_q ** p`` along the last axis (broadcasting)."""
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if q == 2 and p == 2:
        return (diff * diff).sum(axis=-1)
    if q == math.inf:
        norm = diff.max(axis=-1)
    elif q == 2:
        norm = np.sqrt((diff * diff).sum(axis=-1))
    elif q == 1:
        norm = diff.sum(axis=-1)
    else:
        norm = (diff ** q).sum(axis=-1) ** (1.0 / q)
    return norm if p == 1 else norm ** p


def pairwise_cost(X, Y, p=2.0, q=2.0) -> np.ndarray:
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    return ground_cost(X[:, None, :], Y[None, :, :], p, q)


def diagonal_cost(X, p=2.0, q=2.0) -> np.ndarray:
    """Cost of sending each point to its diagonal projection."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    return ground_cost(X, diagonal_projection(X), p, q)


def augmented_cost_matrix(X, Y, p=2.0, q=2.0) -> np.ndarray:
    """(m+n) x (m+n) matching costs with diagonal copies on both sides.

    Row ``m + j`` is the diagonal copy for ``Y[j]``; column ``n + i`` the
    diagonal copy for ``X[i]``. Disallowed pairs are ``inf``.
    """
    m, n = len(X), len(Y)
    C = np.full((m + n, m + n), np.inf)
    C[:m, :n] = pairwise_cost(X, Y, p, q)
    C[np.arange(m), n + np.arange(m)] = diagonal_cost(X, p, q)
    C[m + np.arange(n), np.arange(n)] = diagonal_cost(Y, p, q)
    C[m:, n:] = 0.0
    return C


def wasserstein(D1: PersistenceDiagram, D2: PersistenceDiagram, p: float = 2.0, q: float = 2.0):
    """``W_{p,q}`` between two diagrams and the matching that realises it.

    Returns ``(distance, plan)``; in the plan, sources index ``D1.points``
    and targets index ``D2.points``.
    """
    _check_pq(p, q)
    if D1.dimension != D2.dimension:
        raise ValueError(f"homology degrees differ: {D1.dimension} vs {D2.dimension}")
    X, Y = D1.points, D2.points
    m, n = len(X), len(Y)
    if m + n == 0:
        return 0.0, TransportPlan([], 0.0, p, q)
    C = augmented_cost_matrix(X, Y, p, q)
    rows, cols = linear_sum_assignment(C)
    pairs, terms = [], []
    for r, c in zip(rows, cols):
        if r >= m and c >= n:
            continue
        terms.append(C[r, c])
        pairs.append((int(r) if r < m else DIAGONAL, int(c) if c < n else DIAGONAL, 1.0))
    cost = math.fsum(terms)
    return _root(cost, p), TransportPlan(pairs, cost, p, q)


def wasserstein_distance(D1, D2, p=2.0, q=2.0) -> float:
    return wasserstein(D1, D2, p, q)[0]


def total_persistence(D: PersistenceDiagram, p: float = 2.0, q: float = 2.0) -> float:
    _check_pq(p, q)
    return _root(math.fsum(diagonal_cost(D.points, p, q)), p)


def diagram_to_measure(D: PersistenceDiagram) -> PersistenceMeasure:
    if not len(D):
        return PersistenceMeasure(np.zeros((0, 2)), np.zeros(0), D.dimension)
    uniq, counts = np.unique(D.points, axis=0, return_counts=True)
    return PersistenceMeasure(uniq, counts.astype(float), D.dimension)


def _as_measure(obj) -> PersistenceMeasure:
    if isinstance(obj, PersistenceDiagram):
        return diagram_to_measure(obj)
    return obj


def ot_distance(mu, nu, p: float = 2.0, q: float = 2.0):
    """Optimal partial transport ``OT_{p,q}`` and its plan.

    Each side gets one diagonal atom carrying the other side's total mass;
    diagonal-to-diagonal transport is free. Accepts diagrams as well as
    measures.
    """
    _check_pq(p, q)
    mu, nu = _as_measure(mu), _as_measure(nu)
    m, n = len(mu), len(nu)
    if m + n == 0:
        return 0.0, TransportPlan([], 0.0, p, q)
    a = np.append(mu.masses, nu.total_mass)
    b = np.append(nu.masses, mu.total_mass)
    M = np.zeros((m + 1, n + 1))
    M[:m, :n] = pairwise_cost(mu.locations, nu.locations, p, q)
    M[:m, n] = diagonal_cost(mu.locations, p, q)
    M[m, :n] = diagonal_cost(nu.locations, p, q)
    G = ot.emd(a, b, M, numItermax=10_000_000)
    pairs, terms = [], []
    for r, c in zip(*np.nonzero(G > 0)):
        if r == m and c == n:
            continue
        mass = float(G[r, c])
        terms.append(mass * M[r, c])
        pairs.append((int(r) if r < m else DIAGONAL, int(c) if c < n else DIAGONAL, mass))
    cost = max(math.fsum(terms), 0.0)
    return _root(cost, p), TransportPlan(pairs, cost, p, q)


def plan_cost(plan: TransportPlan, X, Y) -> float:
    """Recompute a plan's cost from its pairs (certificate check)."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    terms = []
    for s, t, mass in plan.pairs:
        if s == DIAGONAL and t == DIAGONAL:
            continue
        if s == DIAGONAL:
            c = diagonal_cost(Y[t:t + 1], plan.p, plan.q)[0]
        elif t == DIAGONAL:
            c = diagonal_cost(X[s:s + 1], plan.p, plan.q)[0]
        else:
            c = ground_cost(X[s], Y[t], plan.p, plan.q)
        terms.append(mass * c)
    return math.fsum(terms)
