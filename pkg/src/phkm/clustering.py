"""k-means over vectors, persistence diagrams and persistence measures.

A *space* bundles a squared distance with a centroid update. Data items are
numpy vectors for :class:`VectorSpace`; for the diagram and measure spaces
an item is either one diagram/measure or a tuple with one per homology
degree, in which case squared distances add up across degrees and means are
taken degree by degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from phkm.diagrams import PersistenceDiagram, PersistenceMeasure
from phkm.means import frechet_mean, mean_measure
from phkm.metrics import diagram_to_measure, ot_distance, wasserstein

DESCENT_SLACK = 1e-9


class InvalidStateError(RuntimeError):
    pass


def _parts(item):
    return tuple(item) if isinstance(item, (tuple, list)) else (item,)


def _pack(parts, like):
    return tuple(parts) if isinstance(like, (tuple, list)) else parts[0]


class VectorSpace:
    name = "vector"

    def prepare(self, item):
        return np.asarray(item, dtype=float)

    def dist2(self, a, b) -> float:
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        return float(d @ d)

    def mean(self, members, previous=None):
        return np.mean(np.stack(members), axis=0)

    def perturb(self, centroid, rng, scale):
        return centroid + rng.normal(0.0, scale, size=np.shape(centroid))

    def spread(self, centroid) -> float:
        return float(np.max(np.abs(centroid))) if np.size(centroid) else 1.0


class DiagramSpace:
    """Persistence diagrams under W2 with Frechet-mean centroids.

    Updates warm-start the Frechet iteration from the previous centroid, so
    the cluster's cost can only go down; without one the best member is the
    starting point.
    """

    name = "diagram"

    def __init__(self, tol: float = 1e-9, max_iter: int = 100):
        self.tol = tol
        self.max_iter = max_iter

    def prepare(self, item):
        return item

    def dist2(self, a, b) -> float:
        return math.fsum(wasserstein(x, y, 2.0, 2.0)[1].cost for x, y in zip(_parts(a), _parts(b)))

    def mean(self, members, previous=None):
        out = []
        for deg, diagrams in enumerate(zip(*(_parts(m) for m in members))):
            init = None if previous is None else _parts(previous)[deg]
            out.append(frechet_mean(diagrams, init, self.tol, self.max_iter).candidate)
        return _pack(out, members[0])

    def perturb(self, centroid, rng, scale):
        out = []
        for D in _parts(centroid):
            pts = D.points + rng.normal(0.0, scale, size=D.points.shape)
            out.append(PersistenceDiagram.from_pairs(D.dimension, pts))
        return _pack(out, centroid)

    def spread(self, centroid) -> float:
        pers = [D.persistence.max() for D in _parts(centroid) if len(D)]
        return max(pers) if pers else 1.0


class MeasureSpace:
    """Persistence measures under OT_{2,2} with empirical-mean centroids."""

    name = "measure"

    def prepare(self, item):
        parts = [diagram_to_measure(x) if isinstance(x, PersistenceDiagram) else x for x in _parts(item)]
        return _pack(parts, item)

    def dist2(self, a, b) -> float:
        return math.fsum(ot_distance(x, y, 2.0, 2.0)[1].cost for x, y in zip(_parts(a), _parts(b)))

    def mean(self, members, previous=None):
        out = [mean_measure(ms) for ms in zip(*(_parts(m) for m in members))]
        return _pack(out, members[0])

    def perturb(self, centroid, rng, scale):
        out = []
        for mu in _parts(centroid):
            loc = mu.locations + rng.normal(0.0, scale, size=mu.locations.shape)
            mass = mu.masses * np.exp(rng.normal(0.0, 0.01, size=mu.masses.shape))
            keep = loc[:, 0] < loc[:, 1]
            out.append(PersistenceMeasure(loc[keep], mass[keep], mu.dimension))
        return _pack(out, centroid)

    def spread(self, centroid) -> float:
        pers = [np.ptp(mu.locations) for mu in _parts(centroid) if len(mu)]
        return max(pers) if pers else 1.0


SPACES = {"vector": VectorSpace, "diagram": DiagramSpace, "measure": MeasureSpace}


def get_space(rep) -> object:
    if isinstance(rep, str):
        aliases = {"pd": "diagram", "pm": "measure", "vec": "vector"}
        key = aliases.get(rep, rep)
        if key not in SPACES:
            raise ValueError(f"unknown representation {rep!r}")
        return SPACES[key]()
    return rep


@dataclass
class ClusterState:
    omega: np.ndarray
    centroids: list
    cost_trace: list
    iterations: int
    converged: bool
    descent: list = field(default_factory=list)
    restart_costs: list = field(default_factory=list)
    repairs: int = 0
    safeguarded: int = 0
    seed: int | None = None

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.omega, axis=0)

    @property
    def cost(self) -> float:
        return self.cost_trace[-1]

    @property
    def k(self) -> int:
        return self.omega.shape[0]


def omega_from_labels(labels, k: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    omega = np.zeros((k, len(labels)), dtype=np.int8)
    omega[labels, np.arange(len(labels))] = 1
    return omega


def distance_table(data, centroids, space) -> np.ndarray:
    """``table[i, j]`` = squared distance from datum j to centroid i."""
    return np.array([[space.dist2(x, z) for x in data] for z in centroids], dtype=float).reshape(
        len(centroids), len(data)
    )


def _check_omega(omega, k=None, n=None):
    omega = np.asarray(omega)
    if omega.ndim != 2:
        raise ValueError("omega must be a k x n matrix")
    if k is not None and omega.shape[0] != k:
        raise ValueError(f"omega has {omega.shape[0]} rows but there are {k} centroids")
    if n is not None and omega.shape[1] != n:
        raise ValueError(f"omega has {omega.shape[1]} columns but there are {n} data")
    if not np.allclose(omega.sum(axis=0), 1.0, atol=1e-12, rtol=0):
        raise ValueError("every column of omega must sum to 1")
    return omega


def cluster_cost(omega, centroids, data, rep="diagram", table=None) -> float:
    """Within-cluster sum of squared distances ``sum_ij omega_ij d^2(D_j, Z_i)``."""
    space = get_space(rep)
    omega = _check_omega(omega, len(centroids), len(data))
    if table is None:
        table = distance_table([space.prepare(x) for x in data], centroids, space)
    return math.fsum((omega * table)[omega != 0])


def _data_distances(data, space):
    n = len(data)
    cache = {}

    def get(i, j):
        if i == j:
            return 0.0
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            cache[key] = space.dist2(data[key[0]], data[key[1]])
        return cache[key]

    return get


def _pp_indices(data, k, space, rng, dist=None):
    n = len(data)
    if k > n:
        raise ValueError(f"k={k} exceeds the number of data ({n})")
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = dist or _data_distances(data, space)
    chosen = [int(rng.integers(n))]
    nearest = np.array([dist(chosen[0], j) for j in range(n)])
    while len(chosen) < k:
        weights = nearest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=weights / total))
        else:
            rest = [j for j in range(n) if j not in chosen]
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, [dist(nxt, j) for j in range(n)])
    return chosen


def kmeans_pp_init(data, k: int, rep="diagram", seed: int = 0) -> list:
    """k-means++ seeding: copies of data items, later picks weighted by d^2."""
    space = get_space(rep)
    prepared = [space.prepare(x) for x in data]
    idx = _pp_indices(prepared, k, space, np.random.default_rng(seed))
    return [prepared[i] for i in idx]


def _assign(table):
    return np.argmin(table, axis=0)


def _repair_empty(labels, table, centroids, data, space):
    """Re-seed empty clusters with the point farthest from its centroid."""
    k, n = table.shape
    repairs = 0
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empty = np.nonzero(counts == 0)[0]
        if not len(empty):
            break
        i = int(empty[0])
        own = table[labels, np.arange(n)]
        movable = counts[labels] > 1
        if not movable.any():
            break
        j = int(np.argmax(np.where(movable, own, -np.inf)))
        centroids[i] = data[j]
        table[i] = [space.dist2(x, data[j]) for x in data]
        labels = _assign(table)
        if np.bincount(labels, minlength=k)[i] == 0:
            labels[j] = i
        repairs += 1
    return labels, repairs


def _cost(labels, table):
    return math.fsum(table[labels, np.arange(table.shape[1])])


def _single_run(data, k, space, rng, max_iter, dist):
    n = len(data)
    seeds = _pp_indices(data, k, space, rng, dist)
    centroids = [data[i] for i in seeds]
    table = np.array([[dist(i, j) for j in range(n)] for i in seeds], dtype=float)
    labels = _assign(table)
    labels, repairs = _repair_empty(labels, table, centroids, data, space)
    cost = _cost(labels, table)
    trace = [cost]
    descent = []
    converged = False
    safeguarded = 0
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        new_table = np.empty_like(table)
        for i in range(k):
            mask = labels == i
            members = [data[j] for j in np.nonzero(mask)[0]]
            cand = space.mean(members, centroids[i])
            row = np.array([space.dist2(x, cand) for x in data])
            if math.fsum(row[mask]) > math.fsum(table[i, mask]):
                # the update never raises the cluster's cost
                safeguarded += 1
                row = table[i]
            else:
                centroids[i] = cand
            new_table[i] = row
        table = new_table
        after_update = _cost(labels, table)
        new_labels = _assign(table)
        new_labels, r = _repair_empty(new_labels, table, centroids, data, space)
        repairs += r
        after_assign = _cost(new_labels, table)
        descent.append({"before": cost, "after_update": after_update, "after_assign": after_assign})
        cost = after_assign
        trace.append(cost)
        if np.array_equal(new_labels, labels):
            converged = True
            labels = new_labels
            break
        labels = new_labels
    return ClusterState(
        omega_from_labels(labels, k),
        centroids,
        trace,
        iterations,
        converged,
        descent,
        repairs=repairs,
        safeguarded=safeguarded,
    )


def kmeans(data, k: int, rep="diagram", seed: int = 0, tol: float = 1e-9, max_iter: int = 100, n_init: int = 1) -> ClusterState:
    """Lloyd-style k-means with k-means++ seeding in an arbitrary space.

    Alternates assignment (lowest index wins ties) and centroid update until
    the assignment no longer changes. With ``n_init > 1`` the lowest-cost
    run is returned and every run's final cost is kept in
    ``restart_costs``. ``tol`` is passed to the Frechet mean of the diagram
    space.
    """
    space = get_space(rep)
    if isinstance(space, DiagramSpace):
        space.tol = tol
    data = [space.prepare(x) for x in data]
    if not data:
        raise ValueError("no data to cluster")
    if k > len(data):
        raise ValueError(f"k={k} exceeds the number of data ({len(data)})")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    rng = np.random.default_rng(seed)
    dist = _data_distances(data, space)
    best = None
    costs = []
    for r in range(n_init):
        state = _single_run(data, k, space, rng, max_iter, dist)
        state.seed = seed
        costs.append(state.cost)
        if best is None or state.cost < best.cost:
            best = state
    best.restart_costs = costs
    return best


def check_descent(state: ClusterState, slack: float = DESCENT_SLACK) -> bool:
    """Both per-iteration inequalities of the monotone descent argument."""
    for step in state.descent:
        if step["after_update"] > step["before"] + slack:
            return False
        if step["after_assign"] > step["after_update"] + slack:
            return False
    return True


@dataclass
class KKTReport:
    is_partial_optimal_assignment: bool
    is_partial_optimal_centroids: bool
    multipliers: np.ndarray
    max_first_order_violation: float
    details: list

    def to_json(self) -> dict:
        return {
            "is_partial_optimal_assignment": bool(self.is_partial_optimal_assignment),
            "is_partial_optimal_centroids": bool(self.is_partial_optimal_centroids),
            "multipliers": [float(m) for m in self.multipliers],
            "max_first_order_violation": float(self.max_first_order_violation),
            "details": self.details,
        }


def verify_partial_optimality(state: ClusterState, data, rep="diagram", perturbation_budget: int = 20,
                              seed: int = 0, tol: float = 1e-6, require_converged: bool = True) -> KKTReport:
    """Check both blocks of partial optimality and report KKT quantities.

    The assignment block is checked exactly: no datum is closer to another
    centroid than to its own. The centroid block is checked numerically:
    vectors by the gradient of the cluster cost, diagrams and measures by
    comparing the cluster cost against random perturbations of the centroid
    and against one more run of the mean from it. Multipliers are
    ``-min_i d^2(D_j, Z_i)``.
    """
    if require_converged and not state.converged:
        raise InvalidStateError("partial optimality is only defined for a converged state")
    space = get_space(rep)
    data = [space.prepare(x) for x in data]
    omega = _check_omega(state.omega, len(state.centroids), len(data))
    table = distance_table(data, state.centroids, space)
    labels = np.argmax(omega, axis=0)
    own = table[labels, np.arange(len(data))]
    best = table.min(axis=0)
    assignment_ok = bool(np.all(own <= best))
    multipliers = -best
    residual = table + multipliers
    slackness = float(np.max(np.abs(omega * residual))) if residual.size else 0.0
    rng = np.random.default_rng(seed)
    details = []
    centroid_ok = True
    worst = slackness
    for i, z in enumerate(state.centroids):
        members = [data[j] for j in np.nonzero(labels == i)[0]]
        info = {"cluster": i, "size": len(members)}
        if not members:
            details.append(info)
            continue
        base = math.fsum(table[i, labels == i])
        info["cost"] = base
        if isinstance(space, VectorSpace):
            grad = 2.0 * np.sum(np.asarray(z) - np.stack(members), axis=0)
            violation = float(np.linalg.norm(grad))
            info["gradient_norm"] = violation
            ok = violation <= tol * max(1.0, space.spread(z) * len(members))
        else:
            scale = 1e-3 * space.spread(z)
            trial_costs = []
            for _ in range(perturbation_budget):
                cand = space.perturb(z, rng, scale)
                trial_costs.append(math.fsum(space.dist2(x, cand) for x in members))
            rerun = space.mean(members, z)
            rerun_cost = math.fsum(space.dist2(x, rerun) for x in members)
            lowest = min(trial_costs + [rerun_cost])
            violation = max(0.0, base - lowest)
            info.update(perturbed_min=min(trial_costs) if trial_costs else None, rerun_cost=rerun_cost)
            ok = violation <= tol * max(1.0, base)
        info["violation"] = violation
        info["ok"] = bool(ok)
        centroid_ok = centroid_ok and ok
        worst = max(worst, violation)
        details.append(info)
    return KKTReport(assignment_ok, centroid_ok, multipliers, worst, details)


def directional_derivative(omega0, v, centroids, data, rep="diagram", table=None) -> float:
    """``sum_ij v_ij d^2(D_j, Z_i)`` at the supplied minimising centroids.

    ``v`` must be feasible at ``omega0``: columns sum to zero and entries
    are nonnegative wherever ``omega0`` is zero. Because Frechet means are
    not unique, the value at one minimiser bounds the true directional
    derivative from above.
    """
    omega0 = _check_omega(omega0)
    v = np.asarray(v, dtype=float)
    if v.shape != omega0.shape:
        raise ValueError(f"direction shape {v.shape} does not match omega {omega0.shape}")
    if not np.allclose(v.sum(axis=0), 0.0, atol=1e-12, rtol=0):
        raise ValueError("infeasible direction: columns of v must sum to 0")
    if np.any(v[omega0 == 0] < 0):
        raise ValueError("infeasible direction: v must be >= 0 where omega is 0")
    if table is None:
        space = get_space(rep)
        table = distance_table([space.prepare(x) for x in data], centroids, space)
    return math.fsum((v * table).ravel())
