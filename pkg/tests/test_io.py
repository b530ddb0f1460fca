import json
import logging

import numpy as np
import pytest

from phkm.diagrams import PersistenceDiagram, PersistenceMeasure
from phkm.io import (
    MANIFEST,
    diagrams_from_json,
    diagrams_to_json,
    ingest_mesh_dir,
    load_diagram_dir,
    parse_obj,
    parse_off,
    read_cloud_csv,
    read_diagrams,
    read_manifest,
    read_vectors_csv,
    select_degrees,
    write_cloud_csv,
    write_diagrams,
    write_manifest,
    write_vectors_csv,
)
from phkm.shapes import sample_torus

CUBE_OFF = """OFF
# a comment
8 6 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 1 2 3
4 4 5 6 7
4 0 1 5 4
4 2 3 7 6
4 0 3 7 4
4 1 2 6 5
"""

TRIANGLE_OBJ = """# triangle
v 0 0 0
v 1 0 0
vn 0 0 1
v 0 1 0 1.0
f 1 2 3
"""


def test_cloud_round_trip_is_exact(tmp_path):
    pc = sample_torus(40, 3.0, 1.0, seed=2)
    write_cloud_csv(pc, tmp_path / "c.csv")
    back = read_cloud_csv(tmp_path / "c.csv", label="torus")
    assert np.array_equal(back.points, pc.points) and back.label == "torus"


def test_manifest_round_trip(tmp_path):
    write_manifest({"a.csv": "circle", "b.csv": "torus"}, tmp_path / MANIFEST, seed=4)
    m = read_manifest(tmp_path / MANIFEST)
    assert m["labels"] == {"a.csv": "circle", "b.csv": "torus"} and m["seed"] == 4


def test_diagram_json_round_trip(tmp_path):
    items = (PersistenceDiagram(0, [[0, 0.1], [0, 10]]), PersistenceDiagram(1, [[1 / 3, 2 / 3]]),
             PersistenceMeasure([[0, 1]], [0.25], 2))
    write_diagrams(items, tmp_path / "d.json")
    back = read_diagrams(tmp_path / "d.json")
    assert back[0] == items[0] and back[1] == items[1] and back[2] == items[2]
    assert diagrams_from_json(json.loads(json.dumps(diagrams_to_json(items))))[1] == items[1]
    assert select_degrees(back, [1, 2]) == (back[1], back[2])
    with pytest.raises(ValueError):
        select_degrees(back, [5])


def test_load_diagram_dir_skips_manifest(tmp_path):
    for i in range(3):
        write_diagrams((PersistenceDiagram(0, [[0, i + 1.0]]), PersistenceDiagram(1, [[0, 1]])), tmp_path / f"x{i}.json")
    write_manifest({"x0.json": "a"}, tmp_path / MANIFEST)
    stems, items = load_diagram_dir(tmp_path, [1])
    assert stems == ["x0", "x1", "x2"] and all(len(t) == 1 for t in items)


def test_vectors_round_trip(tmp_path):
    X = np.random.default_rng(0).normal(size=(3, 4))
    write_vectors_csv(["a", "b", "c"], X, tmp_path / "v.csv")
    names, Y = read_vectors_csv(tmp_path / "v.csv")
    assert names == ["a", "b", "c"] and np.array_equal(X, Y)


def test_parse_off_and_obj():
    assert parse_off(CUBE_OFF).shape == (8, 3)
    assert np.array_equal(parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")[1], [1, 0, 0])
    assert np.array_equal(parse_obj(TRIANGLE_OBJ), [[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    for bad in ("", "PLY\n", "OFF\n5 0 0\n0 0 0\n"):
        with pytest.raises(ValueError):
            parse_off(bad)


def test_ingest_mesh_dir(tmp_path, caplog):
    (tmp_path / "cube").mkdir()
    (tmp_path / "tri").mkdir()
    (tmp_path / "cube" / "a.off").write_text(CUBE_OFF)
    (tmp_path / "cube" / "b.OFF").write_text(CUBE_OFF)
    (tmp_path / "tri" / "t.obj").write_text(TRIANGLE_OBJ)
    (tmp_path / "tri" / "broken.off").write_text("not a mesh")
    (tmp_path / "tri" / "notes.txt").write_text("ignored")
    with caplog.at_level(logging.WARNING):
        out = ingest_mesh_dir(tmp_path, target=5, seed=1)
    assert "broken.off" in caplog.text
    assert [label for _, label in out] == ["cube", "cube", "tri"]
    sizes = [len(pc) for pc, _ in out]
    assert sizes == [5, 5, 3]
    cube = parse_off(CUBE_OFF)
    for pc, _ in out[:2]:
        rows = {tuple(r) for r in pc.points}
        assert len(rows) == 5 and rows <= {tuple(r) for r in cube}
    again = ingest_mesh_dir(tmp_path, target=5, seed=1)
    assert all(np.array_equal(a.points, b.points) for (a, _), (b, _) in zip(out, again))


def test_ingest_empty_dir(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        assert ingest_mesh_dir(tmp_path) == []
    assert "no OFF/OBJ" in caplog.text
    with pytest.raises(ValueError):
        ingest_mesh_dir(tmp_path / "missing")
