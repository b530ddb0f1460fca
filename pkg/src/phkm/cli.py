"""Command-line entry point ``phkm``.

Exit codes: 0 on success, 1 on invalid arguments or input, 2 when an
experiment finished with failed cells.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from phkm.clustering import (
    ClusterState,
    InvalidStateError,
    check_descent,
    kmeans,
    omega_from_labels,
    verify_partial_optimality,
)
from phkm.diagrams import PersistenceDiagram, PersistenceMeasure
from phkm.embeddings import KINDS, EmbeddingVector, embed, embed_dataset
from phkm.evaluation import adjusted_rand_index
from phkm.experiment import (
    DEFAULT_SHAPE_PARAMS,
    REPRESENTATIONS,
    ExperimentConfig,
    format_table,
    run_experiment,
)
from phkm.homology import persistence_from_cloud
from phkm.io import (
    MANIFEST,
    diagrams_from_json,
    diagrams_to_json,
    load_diagram_dir,
    read_cloud_csv,
    read_diagrams,
    read_manifest,
    read_vectors_csv,
    write_cloud_csv,
    write_diagrams,
    write_manifest,
    write_vectors_csv,
)
from phkm.means import frechet_mean, mean_measure
from phkm.metrics import diagram_to_measure, ot_distance, wasserstein
from phkm.shapes import SHAPES, add_uniform_noise, sample_shape

log = logging.getLogger("phkm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _norm_order(text):
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


# ---- subcommands ----------------------------------------------------------


def cmd_simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = json.loads(args.params) if args.params else {}
    ss = np.random.SeedSequence(args.seed)
    n = len(args.classes) * args.per_class
    base, noise = ss.spawn(2)
    base_seeds = [int(c.generate_state(1)[0]) for c in base.spawn(n)]
    noise_seeds = [int(c.generate_state(1)[0]) for c in noise.spawn(n)]
    labels = {}
    j = 0
    for kind in args.classes:
        for _ in range(args.per_class):
            pc = sample_shape(kind, args.points, base_seeds[j], params.get(kind, DEFAULT_SHAPE_PARAMS[kind]))
            pc = add_uniform_noise(pc, args.noise, noise_seeds[j])
            name = f"cloud_{j:04d}.csv"
            write_cloud_csv(pc, out / name)
            labels[name] = kind
            j += 1
    write_manifest(labels, out / MANIFEST, seed=args.seed, noise=args.noise, points=args.points)
    print(f"wrote {j} clouds to {out}")


def cmd_compute(args):
    src = Path(args.input)
    if src.is_dir():
        files = sorted(src.glob("*.csv"))
        if not files:
            raise UsageError(f"no CSV clouds in {src}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        manifest = src / MANIFEST
        if manifest.exists():
            labels = read_manifest(manifest)["labels"]
            write_manifest({Path(k).stem + ".json": v for k, v in labels.items()}, out / MANIFEST)
        for f in files:
            dgms = persistence_from_cloud(read_cloud_csv(f), args.max_scale, args.max_dim)
            write_diagrams(dgms, out / (f.stem + ".json"))
        print(f"wrote {len(files)} diagram files to {out}")
    else:
        dgms = persistence_from_cloud(read_cloud_csv(src), args.max_scale, args.max_dim)
        write_diagrams(dgms, args.out)
        print(" ".join(f"H{D.dimension}:{len(D)}" for D in dgms))


def _embed_kwargs(args, kind):
    kw = {"G": args.resolution}
    if kind == "landscape":
        kw["K"] = args.layers
    if kind == "image":
        kw["sigma"] = args.sigma
    return kw


def cmd_embed(args):
    names, items = load_diagram_dir(args.input, args.degrees)
    matrix, grids = embed_dataset(items, args.kind, **_embed_kwargs(args, args.kind))
    write_vectors_csv(names, matrix, args.out)
    sidecar = Path(str(args.out) + ".grid.json")
    sidecar.write_text(json.dumps({"kind": args.kind, "degrees": [x.dimension for x in items[0]], "grids": grids},
                                  indent=2))
    print(f"wrote {matrix.shape[0]} x {matrix.shape[1]} vectors to {args.out}")


def _pick_degree(items, degree):
    for x in items:
        if x.dimension == degree:
            return x
    raise UsageError(f"no degree-{degree} record")


def cmd_dist(args):
    a = read_diagrams(args.a)
    b = read_diagrams(args.b)
    degrees = args.degrees or sorted({x.dimension for x in a} & {x.dimension for x in b})
    total = 0.0
    plans = []
    for d in degrees:
        x, y = _pick_degree(a, d), _pick_degree(b, d)
        if args.rep == "pd":
            if isinstance(x, PersistenceMeasure) or isinstance(y, PersistenceMeasure):
                raise UsageError("pd distance needs diagrams, got a measure")
            dist, plan = wasserstein(x, y, args.p, args.q)
        else:
            dist, plan = ot_distance(x, y, args.p, args.q)
        total += plan.cost
        plans.append({"dimension": d, "distance": dist, **plan.to_json()})
        print(f"H{d}: {dist:.12g}")
    if len(degrees) > 1:
        print(f"combined: {total ** (1.0 / args.p):.12g}")
    if args.plan:
        Path(args.plan).write_text(json.dumps(plans, indent=2))


def cmd_mean(args):
    names, items = load_diagram_dir(args.input, args.degrees)
    out = []
    for group in zip(*items):
        if args.rep == "pd":
            state = frechet_mean(list(group), None, args.tol, args.max_iter)
            out.append(state.candidate)
            print(f"H{state.candidate.dimension}: {len(state.candidate)} points, "
                  f"Frechet value {state.frechet_value:.6g} after {state.iterations} iterations")
        else:
            mu = mean_measure([diagram_to_measure(x) if isinstance(x, PersistenceDiagram) else x for x in group])
            out.append(mu)
            print(f"H{mu.dimension}: {len(mu)} atoms, total mass {mu.total_mass:.6g}")
    write_diagrams(out, args.out)


def _load_for_rep(args, rep, degrees, grids=None):
    """Data items for clustering: diagram tuples or embedded vectors."""
    src = Path(args.input)
    if src.is_file() and src.suffix == ".csv":
        if rep not in KINDS:
            raise UsageError("a vector CSV can only be clustered with an embedding representation")
        names, matrix = read_vectors_csv(src)
        return names, list(matrix), "vector", None
    names, items = load_diagram_dir(src, degrees)
    if rep in ("pd", "pm"):
        return names, items, rep, None
    matrix, grids = embed_dataset(items, rep, grids, **({} if grids else _embed_kwargs(args, rep)))
    return names, list(matrix), "vector", grids


def _centroid_json(c, space):
    if space == "vector":
        return [float(v) for v in np.asarray(c)]
    return diagrams_to_json(c if isinstance(c, tuple) else (c,))


def _centroid_from_json(obj, space):
    if space == "vector":
        return np.asarray(obj, dtype=float)
    return diagrams_from_json(obj)


def cmd_cluster(args):
    names, data, space, grids = _load_for_rep(args, args.rep, args.degrees)
    state = kmeans(data, args.k, space, seed=args.seed, n_init=args.restarts, max_iter=args.max_iter)
    report = verify_partial_optimality(state, data, space, seed=args.seed, require_converged=False)
    result = {
        "rep": args.rep,
        "space": space,
        "k": args.k,
        "seed": args.seed,
        "input": str(args.input),
        "degrees": args.degrees,
        "grids": grids,
        "items": names,
        "labels": [int(x) for x in state.labels],
        "cost_trace": state.cost_trace,
        "iterations": state.iterations,
        "converged": state.converged,
        "restart_costs": state.restart_costs,
        "descent": state.descent,
        "monotone": check_descent(state),
        "repairs": state.repairs,
        "safeguarded": state.safeguarded,
        "centroids": [_centroid_json(c, space) for c in state.centroids],
        "kkt": report.to_json(),
    }
    Path(args.out).write_text(json.dumps(result, indent=2))
    print(f"cost {state.cost:.6g} after {state.iterations} iterations "
          f"(converged={state.converged}, partial-optimal assignment={report.is_partial_optimal_assignment})")


def cmd_kkt_check(args):
    result = json.loads(Path(args.result).read_text())
    args.input = args.input or result["input"]
    space = result["space"]
    names, data, _, _ = _load_for_rep(args, result["rep"], result.get("degrees"), result.get("grids"))
    if names != result["items"]:
        raise UsageError("items in the input do not match the stored result")
    centroids = [_centroid_from_json(c, space) for c in result["centroids"]]
    state = ClusterState(omega_from_labels(result["labels"], result["k"]), centroids, result["cost_trace"],
                         result["iterations"], result["converged"])
    try:
        report = verify_partial_optimality(state, data, space, perturbation_budget=args.budget, seed=args.seed)
    except InvalidStateError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(report.to_json(), indent=2))


def cmd_eval(args):
    pred = json.loads(Path(args.pred).read_text())
    truth = read_manifest(args.truth)["labels"]
    by_stem = {Path(k).stem: v for k, v in truth.items()}
    missing = [n for n in pred["items"] if n not in by_stem]
    if missing:
        raise UsageError(f"{len(missing)} predicted items have no ground-truth label, e.g. {missing[0]!r}")
    ari = adjusted_rand_index(pred["labels"], [by_stem[n] for n in pred["items"]])
    print(f"{ari:.6f}")


def cmd_experiment(args):
    base = json.loads(Path(args.config).read_text()) if args.config else {}
    overrides = {
        "noise": args.noise, "representations": args.reps, "repetitions": args.repetitions, "seed": args.seed,
        "per_class": args.per_class, "points": args.points, "k": args.k, "restarts": args.restarts,
        "max_scale": args.max_scale, "max_dim": args.max_dim, "degrees": args.degrees, "out": args.out,
        "classes": args.classes,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if (args.repetitions is not None or args.seed is not None) and "seeds" in base:
        # explicit seeds from the file no longer match the overridden run
        base.pop("seeds")
    cfg = ExperimentConfig.from_dict(base)
    report = run_experiment(cfg, threads=args.threads)
    print(format_table(report))
    if report["failed"]:
        log.error("%d experiment cells failed", report["failed"])
        return 2
    return 0


def cmd_plot(args):
    from phkm import plotting

    if args.what == "diagram":
        plotting.plot_diagram(read_diagrams(args.input), args.out)
    elif args.what == "trace":
        plotting.plot_cost_trace(json.loads(Path(args.input).read_text())["cost_trace"], args.out)
    else:
        items = read_diagrams(args.input)
        D = _pick_degree(items, args.degree) if args.degree is not None else items[0]
        if not isinstance(D, PersistenceDiagram):
            raise UsageError("curves need a diagram, got a measure")
        hi = float(D.deaths.max()) if len(D) else 1.0
        lo = float(D.births.min()) if len(D) else 0.0
        grid = {"t_min": lo, "t_max": hi if hi > lo else lo + 1.0, "G": args.resolution or 100, "K": args.layers}
        vec: EmbeddingVector = embed(D, args.what, grid)
        plotting.plot_curve(vec, args.out)
    print(f"wrote {args.out}")


# ---- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phkm", description="Persistent homology and k-means for diagrams and measures.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="sample labelled circle/sphere/torus clouds")
    s.add_argument("--classes", type=_csv_list(str), default=list(SHAPES))
    s.add_argument("--per-class", type=int, default=10)
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--params", help='JSON shape parameters, e.g. \'{"torus": {"R": 10, "r": 5}}\'')
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compute", help="persistence diagrams of a cloud CSV (or a directory of them)")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--max-scale", type=float, required=True)
    s.add_argument("--max-dim", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_compute)

    def grid_opts(s):
        s.add_argument("--resolution", type=int, default=None, help="grid size G")
        s.add_argument("--layers", type=int, default=5, help="landscape layers K")
        s.add_argument("--sigma", type=float, default=None, help="image Gaussian width")

    s = sub.add_parser("embed", help="vectorise a directory of diagrams")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--degrees", type=_csv_list(int), default=None)
    s.add_argument("--out", required=True)
    grid_opts(s)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("dist", help="W_{p,q} or OT_{p,q} between two diagram files")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--rep", choices=("pd", "pm"), default="pd")
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--q", type=_norm_order, default=2.0)
    s.add_argument("--degrees", type=_csv_list(int), default=None)
    s.add_argument("--plan", help="write the optimal plans here")
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("mean", help="Frechet mean or mean measure of a directory of diagrams")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--rep", choices=("pd", "pm"), default="pd")
    s.add_argument("--degrees", type=_csv_list(int), default=None)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mean)

    s = sub.add_parser("cluster", help="k-means on diagrams, measures or embeddings")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--rep", choices=REPRESENTATIONS, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--restarts", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--degrees", type=_csv_list(int), default=None)
    s.add_argument("--out", required=True)
    grid_opts(s)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("kkt-check", help="re-verify partial optimality of a stored clustering")
    s.add_argument("--result", required=True)
    s.add_argument("--in", dest="input", default=None, help="data location (defaults to the one stored)")
    s.add_argument("--budget", type=int, default=20, help="random perturbations per centroid")
    s.add_argument("--seed", type=int, default=0)
    grid_opts(s)
    s.set_defaults(func=cmd_kkt_check)

    s = sub.add_parser("eval", help="ARI of a clustering against a manifest")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("experiment", help="run the simulated-shape experiment grid")
    s.add_argument("--config", help="JSON config; flags below override its fields")
    s.add_argument("--noise", type=_csv_list(float))
    s.add_argument("--reps", type=_csv_list(str), help=f"subset of {','.join(REPRESENTATIONS)}")
    s.add_argument("--classes", type=_csv_list(str))
    s.add_argument("--repetitions", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--per-class", type=int)
    s.add_argument("--points", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--restarts", type=int)
    s.add_argument("--max-scale", type=float)
    s.add_argument("--max-dim", type=int)
    s.add_argument("--degrees", type=_csv_list(int))
    s.add_argument("--threads", type=int, default=None, help="worker processes (default: PHKM_THREADS or 1)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("plot", help="SVG of a diagram, a curve or a cost trace")
    s.add_argument("what", choices=("diagram", "betti", "landscape", "trace"))
    s.add_argument("--in", dest="input", required=True, help="diagram JSON, or cluster result for 'trace'")
    s.add_argument("--degree", type=int, default=None)
    s.add_argument("--out", required=True)
    grid_opts(s)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        code = args.func(args)
    except (UsageError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"phkm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"phkm {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
