"""File formats: Matrix Market graphs, CSV point clouds and label files, JSON reports."""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np
import scipy.io

from .errors import InputError
from .graph import PointCloud, SimilarityGraph, symmetrize

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "dirpart run report",
    "type": "object",
    "required": [
        "k", "r", "alpha", "iterations", "converged", "energy_history", "labels",
        "confidences", "representatives", "reseeds", "wall_time_s",
    ],
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "r": {"type": "number", "minimum": 0, "maximum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "energy_history": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "labels": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "confidences": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "representatives": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "reseeds": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["iteration", "cluster", "vertex"],
                "properties": {
                    "iteration": {"type": "integer"},
                    "cluster": {"type": "integer"},
                    "vertex": {"type": "integer"},
                },
            },
        },
        "wall_time_s": {"type": "number", "minimum": 0},
        "restart": {"type": "integer", "minimum": 0},
        "restart_energies": {"type": "array", "items": {"type": "number"}},
        "failed_restarts": {"type": "array", "items": {"type": "integer"}},
        "exact_objective": {"type": "number"},
        "config": {"type": "object"},
    },
}


def _path(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    return p


# -- Matrix Market ----------------------------------------------------------------

def read_matrix_market(path) -> SimilarityGraph:
    """Load a real coordinate Matrix Market file and max-symmetrize it."""
    p = _path(path)
    try:
        M = scipy.io.mmread(str(p))
    except (ValueError, OSError) as exc:
        raise InputError(f"cannot read Matrix Market file {p}: {exc}") from exc
    if np.iscomplexobj(M):
        raise InputError("complex matrices are not supported")
    return symmetrize(M)


def write_matrix_market(path, G_or_matrix, comment: str = "") -> None:
    """Write a graph (as a symmetric matrix) or any sparse matrix (general)."""
    if isinstance(G_or_matrix, SimilarityGraph):
        scipy.io.mmwrite(str(path), G_or_matrix.weights, comment=comment, symmetry="symmetric")
    else:
        scipy.io.mmwrite(str(path), G_or_matrix, comment=comment)


# -- CSV ---------------------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _rows(path):
    with open(_path(path), newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    return rows


def read_points_csv(path, metric: str = "euclidean") -> PointCloud:
    rows = _rows(path)
    if not rows:
        raise InputError(f"{path}: no points")
    try:
        X = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return PointCloud(X, metric=metric)


def write_points_csv(path, cloud: PointCloud) -> None:
    X = cloud.points
    header = ",".join(f"x{i}" for i in range(X.shape[1]))
    np.savetxt(path, X, delimiter=",", header=header, comments="", fmt="%.17g")


def read_labels_map(path) -> dict[int, int]:
    """``vertex_index,label`` rows as a dict (0-based vertices)."""
    out = {}
    for row in _rows(path):
        if len(row) < 2:
            raise InputError(f"{path}: expected 'vertex_index,label' rows")
        try:
            v, lab = int(float(row[0])), int(float(row[1]))
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from exc
        if v < 0 or lab < 0:
            raise InputError(f"{path}: negative vertex index or label")
        out[v] = lab
    return out


def read_labels_csv(path, n: int | None = None) -> np.ndarray:
    """Full labelling; every vertex in ``0..n-1`` must appear exactly once."""
    m = read_labels_map(path)
    if n is None:
        n = max(m) + 1 if m else 0
    if sorted(m) != list(range(n)):
        raise InputError(f"{path}: labels must cover vertices 0..{n - 1} exactly")
    return np.array([m[v] for v in range(n)], dtype=int)


def labels_csv_text(labels) -> str:
    buf = _io.StringIO()
    buf.write("vertex_index,label\n")
    for v, lab in enumerate(np.asarray(labels)):
        buf.write(f"{v},{int(lab)}\n")
    return buf.getvalue()


def confidences_csv_text(labels, confidences, points=None) -> str:
    """One row per vertex: optional coordinates, label and every ``psi_i``."""
    P = np.asarray(confidences)
    k = P.shape[0]
    cols = ["vertex_index"]
    if points is not None:
        cols += [f"x{i}" for i in range(points.shape[1])]
    cols += ["label"] + [f"psi_{i}" for i in range(k)]
    lines = [",".join(cols)]
    for v, lab in enumerate(np.asarray(labels)):
        parts = [str(v)]
        if points is not None:
            parts += [repr(float(x)) for x in points[v]]
        parts += [str(int(lab))] + [repr(float(x)) for x in P[:, v]]
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def grid_csv_text(values, shape) -> str:
    """A lattice vertex function laid out as ``rows x cols``."""
    A = np.asarray(values).reshape(shape)
    fmt = "%d" if np.issubdtype(A.dtype, np.integer) else "%.10g"
    buf = _io.StringIO()
    np.savetxt(buf, A, delimiter=",", fmt=fmt)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
