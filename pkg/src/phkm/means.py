"""Centroids: Frechet means of diagrams under W2 and mean persistence measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from phkm.diagrams import DIAGONAL, PersistenceDiagram, PersistenceMeasure, diagonal_projection
from phkm.metrics import diagram_to_measure, wasserstein


@dataclass
class FrechetState:
    candidate: PersistenceDiagram
    matchings: list
    frechet_value: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def _squared_w2(a: PersistenceDiagram, b: PersistenceDiagram):
    _, plan = wasserstein(a, b, 2.0, 2.0)
    return plan.cost, plan


def frechet_function(D: PersistenceDiagram, diagrams) -> float:
    """Mean squared W2 distance from ``D`` to each of ``diagrams``."""
    diagrams = list(diagrams)
    if not diagrams:
        raise ValueError("frechet_function needs at least one diagram")
    return math.fsum(_squared_w2(D, Di)[0] for Di in diagrams) / len(diagrams)


def _match_all(Y, diagrams):
    costs, plans = zip(*(_squared_w2(Y, Di) for Di in diagrams))
    return math.fsum(costs) / len(diagrams), list(plans)


def _average_step(Y: PersistenceDiagram, diagrams, plans) -> PersistenceDiagram:
    """Move every candidate point to the mean of its matched partners.

    A partner on the diagonal contributes the candidate point's own
    projection. Points that land on the diagonal are dropped.
    """
    if not len(Y):
        return Y
    proj = diagonal_projection(Y.points)
    acc = np.zeros_like(Y.points)
    for Di, plan in zip(diagrams, plans):
        partner = proj.copy()
        for s, t, _ in plan.pairs:
            if s != DIAGONAL and t != DIAGONAL:
                partner[s] = Di.points[t]
        acc += partner
    new = acc / len(diagrams)
    return PersistenceDiagram(Y.dimension, new[new[:, 0] < new[:, 1]])


def _initial_candidate(diagrams, init, seed):
    if isinstance(init, PersistenceDiagram):
        return init
    if init is None or init == "best":
        values = [frechet_function(D, diagrams) for D in diagrams]
        return diagrams[int(np.argmin(values))]
    if init == "random":
        rng = np.random.default_rng(seed)
        return diagrams[int(rng.integers(len(diagrams)))]
    raise ValueError(f"unknown init {init!r}")


def frechet_mean(diagrams, init=None, tol: float = 1e-9, max_iter: int = 100, seed=None) -> FrechetState:
    """Local minimiser of the Frechet function by alternating match/average.

    ``init`` is a starting diagram, ``"best"``/``None`` (the input with the
    smallest Frechet value) or ``"random"`` (an input drawn with ``seed``).
    Iteration stops once the Frechet value drops by less than ``tol``.
    """
    diagrams = list(diagrams)
    if not diagrams:
        raise ValueError("frechet_mean needs at least one diagram")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    dims = {D.dimension for D in diagrams}
    if len(dims) != 1:
        raise ValueError(f"diagrams mix homology degrees {sorted(dims)}")
    Y = _initial_candidate(diagrams, init, seed)
    value, plans = _match_all(Y, diagrams)
    trace = [value]
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        Y_new = _average_step(Y, diagrams, plans)
        new_value, new_plans = _match_all(Y_new, diagrams)
        if new_value > value:
            # roundoff only: the averaging step cannot increase the value
            converged = True
            break
        improvement = value - new_value
        Y, value, plans = Y_new, new_value, new_plans
        trace.append(value)
        if improvement < tol:
            converged = True
            break
    return FrechetState(Y, plans, value, iterations, converged, trace)


def mean_measure(measures) -> PersistenceMeasure:
    """Empirical mean: union of atoms with masses divided by the count."""
    measures = [diagram_to_measure(m) if isinstance(m, PersistenceDiagram) else m for m in measures]
    if not measures:
        raise ValueError("mean_measure needs at least one measure")
    n = len(measures)
    locs = np.concatenate([m.locations for m in measures]) if measures else np.zeros((0, 2))
    masses = np.concatenate([m.masses for m in measures]) / n
    return PersistenceMeasure(locs.reshape(-1, 2), masses, measures[0].dimension).merged()
