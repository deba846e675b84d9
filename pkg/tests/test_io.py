import json

import numpy as np
import pytest
import scipy.sparse as sp
from jsonschema import validate

from dirpart.errors import InputError
from dirpart.graph import PointCloud, lattice_graph
from dirpart.io import (
    REPORT_SCHEMA,
    confidences_csv_text,
    grid_csv_text,
    json_text,
    labels_csv_text,
    read_labels_csv,
    read_labels_map,
    read_matrix_market,
    read_points_csv,
    write_matrix_market,
    write_points_csv,
)
from dirpart.rearrangement import RunConfig, run


def test_matrix_market_roundtrip(tmp_path):
    G = lattice_graph("grid", [3, 4])
    write_matrix_market(tmp_path / "g.mtx", G)
    H = read_matrix_market(tmp_path / "g.mtx")
    assert abs(H.weights - G.weights).max() == 0


def test_matrix_market_general_symmetrized(tmp_path):
    M = sp.coo_matrix(([2.0, 0.5, 3.0], ([0, 1, 2], [1, 0, 2])), shape=(3, 3))
    write_matrix_market(tmp_path / "m.mtx", M)
    G = read_matrix_market(tmp_path / "m.mtx")
    np.testing.assert_array_equal(G.dense(), [[0, 2, 0], [2, 0, 0], [0, 0, 0]])


def test_matrix_market_errors(tmp_path):
    with pytest.raises(InputError, match="no such file"):
        read_matrix_market(tmp_path / "missing.mtx")
    (tmp_path / "bad.mtx").write_text("not a matrix\n")
    with pytest.raises(InputError):
        read_matrix_market(tmp_path / "bad.mtx")


def test_points_roundtrip(tmp_path):
    X = np.random.default_rng(0).normal(size=(7, 3))
    write_points_csv(tmp_path / "p.csv", PointCloud(X))
    np.testing.assert_array_equal(read_points_csv(tmp_path / "p.csv").points, X)
    # headerless files work too
    np.savetxt(tmp_path / "q.csv", X, delimiter=",", fmt="%.17g")
    np.testing.assert_array_equal(read_points_csv(tmp_path / "q.csv").points, X)


def test_points_errors(tmp_path):
    (tmp_path / "e.csv").write_text("x,y\n")
    with pytest.raises(InputError):
        read_points_csv(tmp_path / "e.csv")
    (tmp_path / "n.csv").write_text("1,2\n3,abc\n")
    with pytest.raises(InputError):
        read_points_csv(tmp_path / "n.csv")


def test_labels_roundtrip(tmp_path):
    labels = np.array([2, 0, 1, 1])
    (tmp_path / "l.csv").write_text(labels_csv_text(labels))
    np.testing.assert_array_equal(read_labels_csv(tmp_path / "l.csv"), labels)
    with pytest.raises(InputError):
        read_labels_csv(tmp_path / "l.csv", n=5)


def test_labels_map(tmp_path):
    (tmp_path / "s.csv").write_text("vertex_index,label\n3,1\n0,0\n")
    assert read_labels_map(tmp_path / "s.csv") == {3: 1, 0: 0}
    (tmp_path / "neg.csv").write_text("-1,0\n")
    with pytest.raises(InputError):
        read_labels_map(tmp_path / "neg.csv")


def test_confidences_and_grid_text():
    text = confidences_csv_text([0, 1], np.array([[0.5, 0.25], [0.125, 1.0]]), np.array([[0.0, 1.0], [2.0, 3.0]]))
    lines = text.splitlines()
    assert lines[0] == "vertex_index,x0,x1,label,psi_0,psi_1"
    assert lines[2] == "1,2.0,3.0,1,0.25,1.0"
    assert grid_csv_text(np.array([0, 1, 2, 3, 4, 5]), (2, 3)) == "0,1,2\n3,4,5\n"


def test_report_validates_against_schema():
    rep = run(lattice_graph("path", [8]), RunConfig(k=2, restarts=2, seed=1))
    doc = json.loads(json_text(rep.to_dict()))
    validate(doc, REPORT_SCHEMA)
    bad = dict(doc)
    del bad["labels"]
    with pytest.raises(Exception):
        validate(bad, REPORT_SCHEMA)


def test_json_text_numpy_and_sorted():
    text = json_text({"b": np.int64(1), "a": np.array([1.5])})
    assert text == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
