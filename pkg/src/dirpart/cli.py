"""Command-line interface.

Subcommands: ``partition``, ``eval``, ``oracle``, ``sweep`` and ``gen``.
Exit codes: 0 success, 1 bad input, 2 iteration limit reached without
convergence, 3 eigensolver failure in every restart.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import gen_gmm, gen_moons, gen_sphere_points
from .dirichlet import DEFAULT_BRUTE_FORCE_BUDGET, brute_force_partition, partition_objective
from .eigensolver import DEFAULT_TOL
from .errors import ConvergenceError, InputError
from .graph import DEFAULT_DROP_TOL, METRICS, gaussian_similarity, knn_graph, lattice_graph
from .io import (
    confidences_csv_text,
    grid_csv_text,
    json_text,
    labels_csv_text,
    read_labels_csv,
    read_labels_map,
    read_matrix_market,
    read_points_csv,
    write_points_csv,
)
from .metrics import confusion, purity
from .rearrangement import RunConfig, resolve_alpha, run, sweep

log = logging.getLogger("dirpart")

EXIT_OK, EXIT_INPUT, EXIT_MAX_ITER, EXIT_SOLVER = 0, 1, 2, 3


# -- argument groups -----------------------------------------------------------------

def _graph_args(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--points", type=Path, help="CSV point cloud, one point per row")
    g.add_argument("--similarity", type=Path, help="Matrix Market similarity matrix")
    g.add_argument("--lattice", help="lattice spec kind:dims, e.g. path:10 or torus:30x30")
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian kernel bandwidth (default 1)")
    p.add_argument("--knn", type=int, default=None, help="keep only k nearest neighbours")
    p.add_argument("--unit-weights", action="store_true", help="unit kNN edge weights")
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.add_argument("--drop-tol", type=float, default=DEFAULT_DROP_TOL)


def _run_args(p):
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=float, default=0.0)
    a = p.add_mutually_exclusive_group()
    a.add_argument("--alpha", type=float, default=None)
    a.add_argument("--alpha-scale", type=float, default=None, help="alpha = scale * lambda_2 (default k)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--init", choices=("random", "voronoi"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--semi-labels", type=Path, default=None, help="CSV of fixed vertex_index,label rows")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env DP_THREADS)")


def _out_arg(p):
    p.add_argument("--out", type=Path, default=Path("dirpart_out"), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirpart", description="Dirichlet-eigenvalue graph partitioning")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="run the rearrangement algorithm")
    _graph_args(p)
    _run_args(p)
    _out_arg(p)

    p = sub.add_parser("eval", help="purity, confusion matrix and exact objectives")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    _graph_args(p, required=False)
    p.add_argument("--r", type=float, default=0.0)
    _out_arg(p)

    p = sub.add_parser("oracle", help="exhaustive optimum on a small graph")
    _graph_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--budget", type=int, default=DEFAULT_BRUTE_FORCE_BUDGET)
    _out_arg(p)

    p = sub.add_parser("sweep", help="best run for each alpha on a grid")
    _graph_args(p)
    _run_args(p)
    p.add_argument("--alpha-grid", required=True, help="comma-separated alpha values")
    _out_arg(p)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("kind", choices=("gmm", "moons", "sphere"))
    p.add_argument("--n", type=int, nargs="+", default=None,
                   help="gmm: points per cloud; moons: points per moon; sphere: total points")
    p.add_argument("--n-moons", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--cov-scale", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    _out_arg(p)
    return parser


# -- helpers ---------------------------------------------------------------------

def _load_graph(args):
    """Returns ``(graph, cloud_or_None, lattice_shape_or_None)``."""
    if args.lattice:
        kind, _, rest = args.lattice.partition(":")
        try:
            dims = [int(x) for x in rest.lower().replace(",", "x").split("x")]
        except ValueError as exc:
            raise InputError(f"cannot parse lattice spec {args.lattice!r}") from exc
        G = lattice_graph(kind, dims)
        return G, None, tuple(dims) if len(dims) == 2 else None
    if args.similarity:
        return read_matrix_market(args.similarity), None, None
    if args.points:
        cloud = read_points_csv(args.points, metric=args.metric)
        if args.knn is not None:
            G = knn_graph(cloud, args.knn, args.sigma, weighted=not args.unit_weights, drop_tol=args.drop_tol)
        else:
            G = gaussian_similarity(cloud, args.sigma, drop_tol=args.drop_tol)
        return G, cloud, None
    return None, None, None


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("DP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"DP_THREADS must be an integer, got {env!r}") from None
    return 1


def _config(args, n) -> RunConfig:
    supervision = read_labels_map(args.semi_labels) if args.semi_labels else None
    if supervision and max(supervision) >= n:
        raise InputError(f"supervised vertex {max(supervision)} out of range for n={n}")
    return RunConfig(
        k=args.k, r=args.r, alpha=args.alpha, alpha_scale=args.alpha_scale, tol=args.tol,
        max_iter=args.max_iter, restarts=args.restarts, init=args.init, seed=args.seed,
        supervision=supervision, threads=_threads(args),
    )


def _inputs(args) -> dict:
    keys = ("points", "similarity", "lattice", "sigma", "knn", "unit_weights", "metric", "drop_tol")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _write_all(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


# -- commands ----------------------------------------------------------------------

def cmd_partition(args) -> int:
    G, cloud, shape = _load_graph(args)
    config = _config(args, G.n)
    alpha = resolve_alpha(config, G)
    report = run(G, config, alpha=alpha)
    exact, per_cluster = partition_objective(G, config.r, report.labels, config.k)
    doc = report.to_dict()
    doc["exact_objective"] = exact
    doc["exact_per_cluster"] = per_cluster
    doc["config"] = {**config.to_dict(), "alpha_resolved": alpha, "inputs": _inputs(args),
                     "out": str(args.out), "verbose": args.verbose}
    files = {
        "report.json": json_text(doc),
        "labels.csv": labels_csv_text(report.labels),
        "confidences.csv": confidences_csv_text(report.labels, report.confidences,
                                                None if cloud is None else cloud.points),
    }
    if shape is not None:
        files["labels_grid.csv"] = grid_csv_text(report.labels, shape)
        for i, row in enumerate(report.confidences):
            files[f"psi_{i}_grid.csv"] = grid_csv_text(row, shape)
    _write_all(args.out, files)
    log.info("energy %.6g after %d iterations (converged=%s)", report.energy, report.iterations, report.converged)
    print(f"energy={report.energy:.10g} exact={exact:.10g} iterations={report.iterations} "
          f"converged={report.converged}")
    return EXIT_OK if report.converged else EXIT_MAX_ITER


def cmd_eval(args) -> int:
    pred = read_labels_csv(args.pred)
    truth = read_labels_csv(args.truth)
    if pred.size != truth.size:
        raise InputError(f"prediction has {pred.size} labels, truth has {truth.size}")
    G, _, _ = _load_graph(args)
    cm = confusion(pred, truth)
    doc = {"n": int(pred.size), "purity": purity(pred, truth),
           "confusion": cm.matrix.tolist(),
           "pred_classes": cm.pred_classes.tolist(), "true_classes": cm.true_classes.tolist()}
    if G is not None:
        if G.n != pred.size:
            raise InputError(f"graph has {G.n} vertices but label files have {pred.size}")
        doc["r"] = args.r
        doc["found_objective"] = partition_objective(G, args.r, _compact(pred))[0]
        doc["truth_objective"] = partition_objective(G, args.r, _compact(truth))[0]
    _write_all(args.out, {"metrics.json": json_text(doc), "confusion.csv": cm.to_csv()})
    print(json_text(doc), end="")
    return EXIT_OK


def _compact(labels):
    _, inv = np.unique(labels, return_inverse=True)
    return inv


def cmd_oracle(args) -> int:
    G, _, _ = _load_graph(args)
    labels, value = brute_force_partition(G, args.r, args.k, budget=args.budget)
    doc = {"k": args.k, "r": args.r, "objective": value, "labels": labels.tolist(), "budget": args.budget}
    _write_all(args.out, {"oracle.json": json_text(doc), "oracle_labels.csv": labels_csv_text(labels)})
    print(f"objective={value:.10g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        grid = [float(x) for x in args.alpha_grid.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad --alpha-grid: {exc}") from exc
    if not grid:
        raise InputError("alpha grid is empty")
    G, _, _ = _load_graph(args)
    config = _config(args, G.n)
    rows = sweep(G, config, grid)
    buf = _io.StringIO()
    fields = ["alpha", "energy", "iterations", "converged", "cluster_sizes", "reference_energy", "warning"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({**row, "alpha": repr(row["alpha"]), "energy": repr(row["energy"]),
                    "reference_energy": repr(row["reference_energy"]),
                    "cluster_sizes": " ".join(str(s) for s in row["cluster_sizes"])})
    _write_all(args.out, {"sweep.csv": buf.getvalue()})
    print(buf.getvalue(), end="")
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_MAX_ITER


def cmd_gen(args) -> int:
    if args.kind == "gmm":
        ds = gen_gmm(args.n or (200, 100), cov_scale=args.cov_scale, seed=args.seed)
    elif args.kind == "moons":
        ds = gen_moons(args.n_moons, (args.n or [300])[0], args.noise, seed=args.seed)
    else:
        ds = gen_sphere_points((args.n or [2000])[0], seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    write_points_csv(args.out / "points.csv", ds.cloud)
    files = {"dataset.json": json_text({**ds.spec, "metric": ds.cloud.metric, "n": ds.cloud.n})}
    if ds.labels is not None:
        files["labels.csv"] = labels_csv_text(ds.labels)
    _write_all(args.out, files)
    return EXIT_OK


COMMANDS = {
    "partition": cmd_partition,
    "eval": cmd_eval,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
