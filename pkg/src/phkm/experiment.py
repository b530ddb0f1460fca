"""Simulated-shape clustering experiments: config, data generation, runner."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from phkm.clustering import check_descent, kmeans
from phkm.embeddings import KINDS, embed_dataset
from phkm.evaluation import adjusted_rand_index
from phkm.homology import persistence_from_cloud
from phkm.shapes import SHAPES, add_uniform_noise, sample_shape


REPRESENTATIONS = ("pd", "pm") + KINDS
DEFAULT_SHAPE_PARAMS = {
    "circle": {"radius": 10.0},
    "sphere": {"radius": 10.0},
    "torus": {"R": 10.0, "r": 5.0},
}


@dataclass
class ExperimentConfig:
    classes: list = field(default_factory=lambda: list(SHAPES))
    shape_params: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_SHAPE_PARAMS)))
    per_class: int = 10
    points: int = 200
    noise: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0])
    representations: list = field(default_factory=lambda: list(REPRESENTATIONS))
    k: int = 3
    restarts: int = 5
    repetitions: int = 1
    seed: int = 0
    seeds: list | None = None
    max_scale: float = 10.0
    max_dim: int = 2
    degrees: list = field(default_factory=lambda: [1, 2])
    grid_resolution: int | None = None
    landscape_layers: int = 5
    image_sigma: float | None = None
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        unknown = [c for c in self.classes if c not in SHAPES]
        if unknown:
            raise ValueError(f"unknown shape classes {unknown}; expected a subset of {SHAPES}")
        bad = [r for r in self.representations if r not in REPRESENTATIONS]
        if bad:
            raise ValueError(f"unknown representations {bad}; expected a subset of {REPRESENTATIONS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.seeds is not None and len(self.seeds) != self.repetitions:
            raise ValueError(f"{len(self.seeds)} seeds given for {self.repetitions} repetitions")
        if any(s < 0 for s in self.noise):
            raise ValueError("noise scales must be >= 0")
        if self.k < 1 or self.k > len(self.classes) * self.per_class:
            raise ValueError(f"k={self.k} is out of range for {len(self.classes) * self.per_class} clouds")
        if self.restarts < 1 or self.per_class < 1 or self.points < 1:
            raise ValueError("restarts, per_class and points must be >= 1")
        if not self.max_scale > 0 or self.max_dim < 0:
            raise ValueError("max_scale must be positive and max_dim >= 0")
        if any(d < 0 or d > self.max_dim for d in self.degrees) or not self.degrees:
            raise ValueError(f"degrees {self.degrees} must be a nonempty subset of 0..max_dim")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def repetition_seeds(self) -> list:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        ss = np.random.SeedSequence(self.seed)
        return [int(c.generate_state(1)[0]) for c in ss.spawn(self.repetitions)]


def generate_dataset(cfg: ExperimentConfig, noise: float, rep_seed: int):
    """Labelled clouds for one repetition at one noise scale.

    The noiseless base clouds depend only on ``rep_seed``, so every noise
    level perturbs the same shapes. Returns ``(clouds, labels)``.
    """
    ss = np.random.SeedSequence(rep_seed)
    base_seq, noise_seq = ss.spawn(2)
    n_clouds = len(cfg.classes) * cfg.per_class
    base_seeds = [int(c.generate_state(1)[0]) for c in base_seq.spawn(n_clouds)]
    noise_root = np.random.SeedSequence([int(noise_seq.generate_state(1)[0]), int(round(noise * 1e6))])
    noise_seeds = [int(c.generate_state(1)[0]) for c in noise_root.spawn(n_clouds)]
    clouds, labels = [], []
    for c, kind in enumerate(cfg.classes):
        params = cfg.shape_params.get(kind, DEFAULT_SHAPE_PARAMS[kind])
        for i in range(cfg.per_class):
            j = c * cfg.per_class + i
            pc = sample_shape(kind, cfg.points, base_seeds[j], params)
            clouds.append(add_uniform_noise(pc, noise, noise_seeds[j]))
            labels.append(c)
    return clouds, labels


def dataset_diagrams(cfg: ExperimentConfig, clouds) -> list:
    out = []
    for pc in clouds:
        dgms = persistence_from_cloud(pc, cfg.max_scale, cfg.max_dim)
        out.append(tuple(dgms[d] for d in cfg.degrees))
    return out


def cluster_representation(cfg: ExperimentConfig, diagrams, rep: str, seed: int):
    """Run k-means on one representation; returns ``(state, data, space_name)``."""
    if rep in ("pd", "pm"):
        data, space = diagrams, rep
    else:
        kwargs = {"G": cfg.grid_resolution}
        if rep == "landscape":
            kwargs["K"] = cfg.landscape_layers
        if rep == "image":
            kwargs["sigma"] = cfg.image_sigma
        matrix, _ = embed_dataset(diagrams, rep, **kwargs)
        data, space = list(matrix), "vector"
    state = kmeans(data, cfg.k, space, seed=seed, n_init=cfg.restarts)
    return state, data, space


def _run_job(cfg: ExperimentConfig, noise: float, repetition: int, rep_seed: int) -> list:
    records = []
    try:
        clouds, labels = generate_dataset(cfg, noise, rep_seed)
        diagrams = dataset_diagrams(cfg, clouds)
    except Exception as exc:  # recorded per cell, the run goes on
        return [{"noise": noise, "representation": r, "repetition": repetition, "error": repr(exc)}
                for r in cfg.representations]
    for rep in cfg.representations:
        rec = {"noise": noise, "representation": rep, "repetition": repetition}
        try:
            state, _, _ = cluster_representation(cfg, diagrams, rep, rep_seed)
            rec.update(
                ari=adjusted_rand_index(state.labels, labels),
                cost=state.cost,
                iterations=state.iterations,
                converged=state.converged,
                monotone=check_descent(state),
            )
        except Exception as exc:
            rec["error"] = repr(exc)
        records.append(rec)
    return records


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PHKM_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """ARI of every representation at every noise scale and repetition.

    Jobs (noise, repetition) are independent; with ``threads > 1`` (default
    from ``PHKM_THREADS``) they run in a process pool. The report lists
    per-cell ``mean``/``sd`` of ARI alongside the raw scores and failures.
    """
    cfg.validate()
    threads = threads or _threads()
    seeds = cfg.repetition_seeds()
    jobs = [(noise, r, seeds[r]) for noise in cfg.noise for r in range(cfg.repetitions)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_job, [cfg] * len(jobs), *zip(*jobs)))
    else:
        results = [_run_job(cfg, *job) for job in jobs]
    records = [rec for batch in results for rec in batch]
    cells = []
    for noise in cfg.noise:
        for rep in cfg.representations:
            recs = [x for x in records if x["noise"] == noise and x["representation"] == rep]
            scores = [x["ari"] for x in recs if "ari" in x]
            failures = [{"repetition": x["repetition"], "error": x["error"]} for x in recs if "error" in x]
            cells.append({
                "noise": noise,
                "representation": rep,
                "mean": float(np.mean(scores)) if scores else None,
                "sd": float(np.std(scores, ddof=1)) if len(scores) > 1 else (0.0 if scores else None),
                "scores": scores,
                "failures": failures,
                "monotone": all(x.get("monotone", True) for x in recs),
            })
    report = {
        "config": cfg.to_dict(),
        "seeds": seeds,
        "cells": cells,
        "records": records,
        "failed": sum(len(c["failures"]) for c in cells),
    }
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report, indent=2))
    return report


def format_table(report: dict) -> str:
    """Noise-by-representation table of ``mean (sd)`` ARI."""
    reps = report["config"]["representations"]
    lines = ["noise  " + "  ".join(f"{r:>15}" for r in reps)]
    for noise in report["config"]["noise"]:
        row = [f"{noise:<6g}"]
        for r in reps:
            cell = next(c for c in report["cells"] if c["noise"] == noise and c["representation"] == r)
            row.append(f"{'failed':>15}" if cell["mean"] is None else f"{cell['mean']:>7.3f} ({cell['sd']:.3f})")
        lines.append(" ".join(row))
    return "\n".join(lines)
