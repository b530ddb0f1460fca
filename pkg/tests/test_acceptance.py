"""Acceptance criteria, one test each, at their stated tolerances.

Every test records PASS or FAIL with a short measurement; the terminal
summary prints one line per criterion.
"""

import math
import os
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest
from conftest import ACCEPTANCE, random_diagram
from test_embeddings import _betti_from_filtration, _brute_landscape
from test_means import grid_oracle

from phkm import means
from phkm.clustering import check_descent, verify_partial_optimality
from phkm.diagrams import PersistenceDiagram
from phkm.embeddings import betti_curve, persistence_landscape
from phkm.evaluation import adjusted_rand_index
from phkm.experiment import (
    ExperimentConfig,
    cluster_representation,
    generate_dataset,
    run_experiment,
)
from phkm.homology import build_vr_filtration, compute_persistence, dominant_count, persistence_from_cloud
from phkm.io import ingest_mesh_dir, read_cloud_csv, write_cloud_csv
from phkm.metrics import diagram_to_measure, ot_distance, wasserstein, wasserstein_distance
from phkm.shapes import PointCloud, sample_torus


@contextmanager
def criterion(n, title):
    info = {}
    try:
        yield info
    except BaseException as exc:
        msg = str(exc).strip().splitlines()
        ACCEPTANCE[n] = ("FAIL", title, info.get("detail") or (msg[0] if msg else type(exc).__name__))
        raise
    ACCEPTANCE[n] = ("PASS", title, info.get("detail", ""))


@pytest.fixture(scope="module")
def noise0():
    """The default desk-scale dataset at noise 0 with full diagrams."""
    cfg = ExperimentConfig(noise=[0.0])
    seed = cfg.repetition_seeds()[0]
    start = time.perf_counter()
    clouds, labels = generate_dataset(cfg, 0.0, seed)
    diagrams = [persistence_from_cloud(pc, cfg.max_scale, cfg.max_dim) for pc in clouds]
    return cfg, seed, labels, diagrams, time.perf_counter() - start


def test_criterion_01_noise_zero_recovery(noise0):
    cfg, seed, labels, diagrams, homology_time = noise0
    with criterion(1, "noise-0 recovery, ARI = 1.0 for every representation") as info:
        data = [tuple(d[k] for k in cfg.degrees) for d in diagrams]
        start = time.perf_counter()
        scores = {}
        for rep in ("pd", "pm", "betti", "landscape", "image"):
            state, _, _ = cluster_representation(cfg, data, rep, seed)
            scores[rep] = adjusted_rand_index(state.labels, labels)
        elapsed = homology_time + time.perf_counter() - start
        info["detail"] = ", ".join(f"{r}={s:g}" for r, s in scores.items()) + f"; {elapsed:.0f} s"
        assert all(s == 1.0 for s in scores.values()), scores
        assert elapsed <= 600


def _pair(x, y):
    dx, dy = abs(x[0] - y[0]), abs(x[1] - y[1])
    return dx * dx + dy * dy


def _to_diagonal(x):
    m = 0.5 * (x[0] + x[1])
    return _pair(x, (m, m))


def brute_force_w2(X, Y):
    """W_{2,2} by enumerating every partial bijection, in plain Python floats."""
    import itertools

    X, Y = [tuple(map(float, x)) for x in X], [tuple(map(float, y)) for y in Y]
    best = math.inf
    for r in range(min(len(X), len(Y)) + 1):
        for xs in itertools.combinations(range(len(X)), r):
            for ys in itertools.permutations(range(len(Y)), r):
                terms = [_pair(X[i], Y[j]) for i, j in zip(xs, ys)]
                terms += [_to_diagonal(X[i]) for i in range(len(X)) if i not in xs]
                terms += [_to_diagonal(Y[j]) for j in range(len(Y)) if j not in ys]
                best = min(best, math.fsum(terms))
    return math.sqrt(best)


def test_criterion_03_metric_correctness():
    with criterion(3, "W2 equals brute-force bijections exactly; symmetric; triangle inequality") as info:
        rng = np.random.default_rng(3)
        mismatches = asym = 0
        for _ in range(200):
            A, B = random_diagram(rng, 4), random_diagram(rng, 4)
            d = wasserstein_distance(A, B)
            mismatches += d != brute_force_w2(A.points, B.points)
            asym += d != wasserstein_distance(B, A)
        worst = -math.inf
        for _ in range(200):
            A, B, C = (random_diagram(rng, 4) for _ in range(3))
            worst = max(worst, wasserstein_distance(A, C) - wasserstein_distance(A, B) - wasserstein_distance(B, C))
        info["detail"] = f"{mismatches} oracle mismatches, {asym} asymmetric, worst triangle excess {worst:.2e}"
        assert mismatches == 0 and asym == 0 and worst <= 1e-9


def test_criterion_04_ot_coincides_with_w():
    with criterion(4, "|OT - W| <= 1e-9 on diagrams for (1,2), (2,2), (2,inf)") as info:
        rng = np.random.default_rng(4)
        worst = 0.0
        for p, q in [(1, 2), (2, 2), (2, math.inf)]:
            for _ in range(100):
                A, B = random_diagram(rng, 5), random_diagram(rng, 5)
                w = wasserstein(A, B, p, q)[0]
                o = ot_distance(diagram_to_measure(A), diagram_to_measure(B), p, q)[0]
                worst = max(worst, abs(o - w))
        info["detail"] = f"max |OT - W| = {worst:.2e}"
        assert worst <= 1e-9


def test_criterion_05_monotone_descent():
    with criterion(5, "descent inequalities on every run, condition (i) on every converged run") as info:
        cfg = ExperimentConfig(per_class=4, points=40, max_dim=1, degrees=[1], restarts=3)
        clouds, labels = generate_dataset(cfg, 1.0, 5)
        data = [tuple(persistence_from_cloud(pc, cfg.max_scale, 1)[k] for k in cfg.degrees) for pc in clouds]
        runs = 0
        for rep in ("pd", "pm", "betti", "landscape", "image"):
            state, items, space = cluster_representation(cfg, data, rep, 0)
            runs += len(state.restart_costs)
            assert check_descent(state), rep
            if state.converged:
                assert verify_partial_optimality(state, items, space, perturbation_budget=5).is_partial_optimal_assignment
        info["detail"] = f"{runs} runs here"


def test_criterion_06_frechet_descent_and_oracle():
    with criterion(6, "Frechet value non-increasing over 100 means; grid oracle within 0.01") as info:
        rng = np.random.default_rng(6)
        worst_rise = -math.inf
        steps = 0
        for _ in range(100):
            diagrams = [random_diagram(rng, 5) for _ in range(int(rng.integers(2, 6)))]
            # drive the raw iteration so no guard can hide an increase
            Y = means._initial_candidate(diagrams, "random", int(rng.integers(1 << 30)))
            value, plans = means._match_all(Y, diagrams)
            for _ in range(100):
                Y = means._average_step(Y, diagrams, plans)
                new_value, plans = means._match_all(Y, diagrams)
                worst_rise = max(worst_rise, new_value - value)
                steps += 1
                if value - new_value < 1e-9:
                    break
                value = new_value
            trace = means.frechet_mean(diagrams).trace
            assert all(b <= a for a, b in zip(trace, trace[1:]))
        st = means.frechet_mean([PersistenceDiagram(1, [[0, 2]]), PersistenceDiagram(1, [[0, 4]])])
        best, _ = grid_oracle([np.array([0.0, 2.0]), np.array([0.0, 4.0])])
        gap = float(np.max(np.abs(best - st.candidate.points[0])))
        info["detail"] = f"{steps} steps, largest rise {worst_rise:.1e}; oracle gap {gap:.3f}"
        assert worst_rise <= 1e-12 and gap <= 0.01


def test_criterion_07_topology_recovery(noise0):
    cfg, _, labels, diagrams, _ = noise0
    with criterion(7, "dominant features at noise 0, 10/10 clouds per class") as info:
        floor = 0.1 * cfg.max_scale
        want = {"circle": {1: 1}, "sphere": {1: 0, 2: 1}, "torus": {1: 2, 2: 1}}
        hits, seen = {}, {}
        top = {}
        for lab, dgms in zip(labels, diagrams):
            kind = cfg.classes[lab]
            counts = {d: dominant_count(dgms[d], 3.0, floor) for d in (1, 2)}
            ok = all(counts[d] == n for d, n in want[kind].items())
            hits[kind] = hits.get(kind, 0) + ok
            seen[kind] = seen.get(kind, 0) + 1
            top.setdefault(kind, np.round(np.sort(dgms[1].persistence)[::-1][:3], 2).tolist())
        info["detail"] = ", ".join(f"{k} {hits[k]}/{seen[k]}" for k in cfg.classes)
        info["detail"] += f"; first torus top H1 persistences {top.get('torus')}"
        assert all(hits[k] == seen[k] for k in cfg.classes)


def test_criterion_08_embedding_oracles():
    with criterion(8, "landscapes equal brute-force tents; Betti curves equal filtration ranks") as info:
        rng = np.random.default_rng(8)
        bad_landscapes = 0
        for _ in range(100):
            D = random_diagram(rng, 5)
            K, G = int(rng.integers(1, 6)), int(rng.integers(2, 50))
            t = np.linspace(0.0, 20.0, G)
            got = persistence_landscape(D, K, 0.0, 20.0, G).values.reshape(K, G)
            bad_landscapes += not np.array_equal(got, _brute_landscape(D.points, K, t))
        bad_curves = 0
        for _ in range(20):
            pts = rng.uniform(-1, 1, size=(int(rng.integers(4, 11)), 2))
            fc = build_vr_filtration(pts, 1.5, 2)
            dgms = compute_persistence(fc, 1)
            t = np.linspace(0.0, 1.45, 30)
            for degree in (0, 1):
                curve = betti_curve(dgms[degree], 0.0, 1.45, 30).values
                bad_curves += not np.array_equal(curve, [_betti_from_filtration(fc, degree, x) for x in t])
        info["detail"] = f"{bad_landscapes} landscape and {bad_curves} Betti mismatches"
        assert bad_landscapes == 0 and bad_curves == 0


def test_criterion_09_ari():
    with criterion(9, "ARI hand cases exact; invariant under 1000 relabelings") as info:
        crossed = adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1])
        # table rows (2,1,0),(0,1,2): index 2, row pairs 6, column pairs 3,
        # expected 6*3/15, max (6+3)/2, so (2 - 6/5) / (9/2 - 6/5) = 8/33
        uneven = adjusted_rand_index([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 2, 2])
        assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
        assert crossed == -0.5
        assert uneven == float(Fraction(8, 33))
        rng = np.random.default_rng(9)
        a, b = rng.integers(0, 3, 40), rng.integers(0, 4, 40)
        base = adjusted_rand_index(a, b)
        changed = 0
        for _ in range(1000):
            pa, pb = rng.permutation(3), rng.permutation(4)
            changed += adjusted_rand_index(pa[a], pb[b]) != base
        info["detail"] = f"crossed 2x2 case = {crossed:g} (listed as -1/3, which the formula does not give); " \
                         f"{changed} relabelings changed the score"
        assert changed == 0


CUBE_OFF = "OFF\n8 6 0\n" + "\n".join(f"{x} {y} {z}" for x in (0, 1) for y in (0, 1) for z in (0, 1)) + "\n"


def test_criterion_10_ingestion_round_trip(tmp_path):
    with criterion(10, "mesh ingestion: round trip and subsampling properties") as info:
        pc = sample_torus(50, 3.0, 1.0, 10)
        write_cloud_csv(pc, tmp_path / "c.csv")
        assert np.array_equal(read_cloud_csv(tmp_path / "c.csv").points, pc.points)
        for cls in ("a", "b"):
            (tmp_path / "m" / cls).mkdir(parents=True)
            for i in range(2):
                (tmp_path / "m" / cls / f"{i}.off").write_text(CUBE_OFF)
        out = ingest_mesh_dir(tmp_path / "m", target=6, seed=2)
        again = ingest_mesh_dir(tmp_path / "m", target=6, seed=2)
        full = {tuple(r) for r in ingest_mesh_dir(tmp_path / "m")[0][0].points}
        assert [lab for _, lab in out] == ["a", "a", "b", "b"]
        for (x, _), (y, _) in zip(out, again):
            rows = [tuple(r) for r in x.points]
            assert isinstance(x, PointCloud) and len(rows) == 6 == len(set(rows)) and set(rows) <= full
            assert np.array_equal(x.points, y.points)
        info["detail"] = f"{len(out)} meshes, {len(full)} vertices each, subsampled to 6 distinct rows, seeded repeat identical"


@pytest.mark.slow
def test_criterion_02_pm_versus_pd_trend():
    with criterion(2, "mean ARI(PM) >= mean ARI(PD) - 0.05 at noise 1, 3, 5 over 20 repetitions") as info:
        cfg = ExperimentConfig(noise=[1.0, 3.0, 5.0], representations=["pd", "pm"], repetitions=20)
        start = time.perf_counter()
        report = run_experiment(cfg, threads=os.cpu_count() or 1)
        means_by = {(c["noise"], c["representation"]): c["mean"] for c in report["cells"]}
        info["detail"] = "; ".join(
            f"noise {s:g}: PD {means_by[(s, 'pd')]:.3f}, PM {means_by[(s, 'pm')]:.3f}" for s in cfg.noise
        ) + f"; {time.perf_counter() - start:.0f} s"
        assert report["failed"] == 0
        for s in cfg.noise:
            assert means_by[(s, "pm")] >= means_by[(s, "pd")] - 0.05, s
