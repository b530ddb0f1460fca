"""File formats: point-cloud CSV, diagram JSON, manifests, and mesh ingestion."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from phkm.diagrams import PersistenceDiagram, PersistenceMeasure
from phkm.shapes import PointCloud

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
MESH_SUFFIXES = (".off", ".obj")


def _columns(d: int) -> list:
    return ["x", "y", "z"][:d] if d <= 3 else [f"x{i}" for i in range(1, d + 1)]


def write_cloud_csv(pc: PointCloud, path) -> None:
    """One point per row under an ``x,y,z`` header; floats written exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_columns(pc.dim))
        for row in pc.points:
            writer.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path, label=None, seed=None) -> PointCloud:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    try:
        points = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if points.ndim != 2 or points.shape[1] != len(header):
        raise ValueError(f"{path}: every row needs {len(header)} coordinates")
    return PointCloud(points, label=label, seed=seed)


def write_manifest(entries: dict, path, **extra) -> None:
    """``entries`` maps file name to class label."""
    payload = {"labels": dict(entries), **extra}
    Path(path).write_text(json.dumps(payload, indent=2))


def read_manifest(path) -> dict:
    payload = json.loads(Path(path).read_text())
    if "labels" not in payload:
        raise ValueError(f"{path}: manifest has no 'labels' mapping")
    return payload


def diagrams_to_json(items) -> list:
    return [x.to_json() for x in items]


def diagrams_from_json(payload) -> tuple:
    """Parse a list of ``{"dimension", "points"[, "masses"]}`` records.

    Records with a ``masses`` key become measures, all others diagrams. A
    single record is accepted in place of a list.
    """
    if isinstance(payload, dict):
        payload = [payload]
    out = []
    for rec in payload:
        if "masses" in rec:
            out.append(PersistenceMeasure.from_json(rec))
        else:
            out.append(PersistenceDiagram.from_json(rec))
    return tuple(out)


def write_diagrams(items, path) -> None:
    Path(path).write_text(json.dumps(diagrams_to_json(items)))


def read_diagrams(path) -> tuple:
    return diagrams_from_json(json.loads(Path(path).read_text()))


def select_degrees(items: tuple, degrees=None) -> tuple:
    """Pick records by homology degree, in the order given."""
    if degrees is None:
        return tuple(items)
    by_dim = {x.dimension: x for x in items}
    missing = [d for d in degrees if d not in by_dim]
    if missing:
        raise ValueError(f"no diagram for degree(s) {missing}")
    return tuple(by_dim[d] for d in degrees)


def load_diagram_dir(path, degrees=None):
    """All ``*.json`` diagram files in a directory except the manifest.

    Returns ``(names, items)`` sorted by file name; ``names`` are file stems.
    """
    path = Path(path)
    if not path.is_dir():
        raise ValueError(f"{path} is not a directory")
    files = sorted(p for p in path.glob("*.json") if p.name != MANIFEST)
    if not files:
        raise ValueError(f"no diagram files in {path}")
    return [p.stem for p in files], [select_degrees(read_diagrams(p), degrees) for p in files]


def write_vectors_csv(names, matrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name"] + [f"v{i}" for i in range(matrix.shape[1])])
        for name, row in zip(names, matrix):
            writer.writerow([name] + [repr(float(v)) for v in row])


def read_vectors_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    names = [r[0] for r in rows[1:]]
    matrix = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
    return names, matrix.reshape(len(names), len(rows[0]) - 1)


# ---- meshes ---------------------------------------------------------------


def _clean_lines(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def parse_off(text: str) -> np.ndarray:
    """Vertex coordinates of an OFF mesh (faces are ignored)."""
    lines = list(_clean_lines(text))
    if not lines or not lines[0].upper().startswith("OFF"):
        raise ValueError("missing OFF header")
    head = lines[0][3:].split()
    rest = lines[1:]
    if not head:
        if not rest:
            raise ValueError("missing OFF counts")
        head, rest = rest[0].split(), rest[1:]
    n_vertices = int(head[0])
    if len(rest) < n_vertices:
        raise ValueError(f"expected {n_vertices} vertices, found {len(rest)} lines")
    return np.array([[float(v) for v in rest[i].split()[:3]] for i in range(n_vertices)], dtype=float).reshape(-1, 3)


def parse_obj(text: str) -> np.ndarray:
    """Vertex coordinates (``v`` records) of a Wavefront OBJ mesh."""
    verts = [line.split()[1:4] for line in _clean_lines(text) if line.split()[0] == "v"]
    if not verts:
        raise ValueError("no vertex records")
    return np.array(verts, dtype=float).reshape(-1, 3)


def ingest_mesh_dir(path, target: int | None = None, seed: int = 0) -> list:
    """Vertex clouds of every OFF/OBJ mesh under ``path/<class>/``.

    With ``target`` set, meshes with more vertices are subsampled uniformly
    without replacement (seeded per file). Unreadable files are skipped
    with a warning. Returns ``(PointCloud, label)`` pairs sorted by path.
    """
    path = Path(path)
    if not path.is_dir():
        raise ValueError(f"{path} is not a directory")
    files = sorted(p for p in path.rglob("*") if p.is_file() and p.suffix.lower() in MESH_SUFFIXES)
    if not files:
        log.warning("no OFF/OBJ meshes found under %s", path)
        return []
    seeds = np.random.SeedSequence(seed).spawn(len(files))
    out = []
    for file, ss in zip(files, seeds):
        rel = file.relative_to(path)
        label = rel.parts[0] if len(rel.parts) > 1 else None
        try:
            text = file.read_text(errors="replace")
            points = parse_off(text) if file.suffix.lower() == ".off" else parse_obj(text)
            if not len(points):
                raise ValueError("no vertices")
        except (ValueError, IndexError, OSError) as exc:
            log.warning("skipping %s: %s", file, exc)
            continue
        if target is not None and len(points) > target:
            rng = np.random.default_rng(ss)
            points = points[np.sort(rng.choice(len(points), size=target, replace=False))]
        out.append((PointCloud(points, label=label, meta={"source": str(rel)}), label))
    return out
