"""Relaxed Dirichlet partitioning by eigenvector rearrangement.

Each iteration solves, for every cluster ``i``, the ground state ``psi_i``
of ``Delta_r + alpha * (1 - chi_i)`` and then moves every vertex to the
cluster whose ``psi`` is largest there.  The relaxed energy (sum of the
ground-state eigenvalues) strictly decreases until the labels stop
changing, so the loop always terminates.

Typical use::

    G = lattice_graph("path", [10])
    report = run(G, RunConfig(k=2, r=0, alpha_scale=2, restarts=10, seed=7))
    report.labels
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .eigensolver import DEFAULT_MAX_MATVECS, DEFAULT_TOL, GroundState, ground_state
from .errors import ConvergenceError, DegenerateInputError, InputError
from .graph import SimilarityGraph
from .laplacian import LaplacianOperator, SchrodingerOperator, second_eigenvalue

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("random", "voronoi")


@dataclass
class RunConfig:
    """Everything needed to reproduce a partitioning run.

    ``alpha`` fixes the potential strength directly; otherwise it is
    ``alpha_scale * lambda_2`` with ``alpha_scale`` defaulting to ``k``.
    ``supervision`` maps vertex index to a fixed label.
    """

    k: int
    r: float = 0.0
    alpha: float | None = None
    alpha_scale: float | None = None
    tol: float = DEFAULT_TOL
    max_iter: int = 100
    restarts: int = 1
    init: str = "random"
    seed: int = 0
    supervision: dict[int, int] | None = None
    method: str = "auto"
    max_matvecs: int = DEFAULT_MAX_MATVECS
    threads: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InputError(f"k must be a positive integer, got {self.k}")
        self.k = int(self.k)
        if not 0.0 <= self.r <= 1.0:
            raise InputError(f"r must lie in [0, 1], got {self.r}")
        if self.alpha is not None and self.alpha_scale is not None:
            raise InputError("give either alpha or alpha_scale, not both")
        if self.alpha is not None and not self.alpha > 0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if self.alpha_scale is not None and not self.alpha_scale > 0:
            raise InputError(f"alpha_scale must be positive, got {self.alpha_scale}")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")
        if self.restarts < 1:
            raise InputError("restarts must be at least 1")
        if self.init not in INIT_STRATEGIES:
            raise InputError(f"init must be one of {INIT_STRATEGIES}, got {self.init!r}")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.threads < 1:
            raise InputError("threads must be at least 1")
        if self.supervision is not None:
            sup = {int(v): int(lab) for v, lab in dict(self.supervision).items()}
            bad = [lab for lab in sup.values() if not 0 <= lab < self.k]
            if bad:
                raise InputError(f"supervised label {bad[0]} out of range for k={self.k}")
            self.supervision = sup

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.supervision is not None:
            out["supervision"] = {str(v): lab for v, lab in sorted(self.supervision.items())}
        return out


@dataclass
class PartitionState:
    """Labels, their indicator functions and the matching ground states."""

    labels: np.ndarray
    eigenpairs: list[GroundState]
    iteration: int = 0

    @property
    def k(self) -> int:
        return len(self.eigenpairs)

    @property
    def phis(self) -> np.ndarray:
        return (self.labels[None, :] == np.arange(self.k)[:, None]).astype(float)

    @property
    def energy(self) -> float:
        return float(sum(gs.lam for gs in self.eigenpairs))

    @property
    def confidences(self) -> np.ndarray:
        return np.vstack([gs.psi for gs in self.eigenpairs])


@dataclass
class RunReport:
    k: int
    r: float
    alpha: float
    labels: np.ndarray
    energy_history: list[float]
    confidences: np.ndarray
    representatives: list[int]
    iterations: int
    converged: bool
    reseeds: list[dict] = field(default_factory=list)
    wall_time_s: float = 0.0
    restart: int = 0
    restart_energies: list[float] = field(default_factory=list)
    failed_restarts: list[int] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.energy_history[-1]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "alpha": self.alpha,
            "iterations": self.iterations,
            "converged": self.converged,
            "energy_history": [float(e) for e in self.energy_history],
            "labels": [int(x) for x in self.labels],
            "confidences": [[float(x) for x in row] for row in self.confidences],
            "representatives": [int(x) for x in self.representatives],
            "reseeds": list(self.reseeds),
            "wall_time_s": self.wall_time_s,
            "restart": self.restart,
            "restart_energies": [float(e) for e in self.restart_energies],
            "failed_restarts": list(self.failed_restarts),
        }


# -- relaxed energy and alpha ----------------------------------------------------

def relaxed_energy(G_or_L, r, alpha, phi, *, tol=DEFAULT_TOL, v0=None, method="auto", max_matvecs=DEFAULT_MAX_MATVECS):
    """Ground state of ``Delta_r + alpha*(1 - phi)``; ``phi`` may be fractional."""
    L = G_or_L if isinstance(G_or_L, LaplacianOperator) else LaplacianOperator(G_or_L, r)
    return ground_state(SchrodingerOperator(L, alpha, phi), tol, max_matvecs, v0=v0, method=method)


def resolve_alpha(config: RunConfig, G: SimilarityGraph, r: float | None = None) -> float:
    if config.alpha is not None:
        return float(config.alpha)
    r = config.r if r is None else r
    scale = config.k if config.alpha_scale is None else config.alpha_scale
    lam2 = second_eigenvalue(LaplacianOperator(G, r))
    if lam2 <= 1e-12 * max(1.0, float(G.degrees.max(initial=0.0))):
        raise DegenerateInputError(
            "second Laplacian eigenvalue is zero (graph disconnected); pass an explicit alpha"
        )
    return float(scale * lam2)


# -- initialization ---------------------------------------------------------------

def _supervision_arrays(supervision, n):
    if not supervision:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    idx = np.fromiter(supervision.keys(), dtype=int)
    lab = np.fromiter(supervision.values(), dtype=int)
    if idx.min() < 0 or idx.max() >= n:
        raise InputError(f"supervised vertex index out of range [0, {n})")
    return idx, lab


def _repair(labels, k, rng, fixed):
    """Give every empty label one vertex taken from a cluster that can spare it."""
    counts = np.bincount(labels, minlength=k)
    for lab in np.flatnonzero(counts == 0):
        movable = np.flatnonzero(~fixed & (counts[labels] > 1))
        if movable.size == 0:
            raise InputError(f"cannot populate cluster {lab}: not enough free vertices")
        v = rng.choice(movable)
        counts[labels[v]] -= 1
        labels[v] = lab
        counts[lab] += 1
    return labels


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def init_random(n: int, k: int, seed=None, supervision=None) -> np.ndarray:
    """Uniform random labels, repaired so that all ``k`` labels occur."""
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    labels = rng.integers(0, k, size=n)
    idx, lab = _supervision_arrays(supervision, n)
    labels[idx] = lab
    fixed = np.zeros(n, dtype=bool)
    fixed[idx] = True
    return _repair(labels, k, rng, fixed)


def init_voronoi(G: SimilarityGraph, k: int, seed=None, supervision=None, generators=None) -> np.ndarray:
    """Hop-distance Voronoi cells of ``k`` random generator vertices.

    Ties go to the generator listed first.
    """
    n = G.n
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    if generators is None:
        generators = rng.choice(n, size=k, replace=False)
    generators = np.asarray(generators, dtype=int)
    if generators.shape != (k,) or len(set(generators.tolist())) != k:
        raise InputError("need k distinct generators")
    dist = shortest_path(G.weights, directed=False, unweighted=True, indices=generators)
    dist = np.atleast_2d(dist)
    if np.any(np.isinf(dist.min(axis=0))):
        raise InputError("graph is disconnected: some vertices are unreachable from every generator")
    labels = np.argmin(dist, axis=0)
    idx, lab = _supervision_arrays(supervision, n)
    if idx.size:
        labels[idx] = lab
        fixed = np.zeros(n, dtype=bool)
        fixed[idx] = True
        labels = _repair(labels, k, rng, fixed)
    return labels


# -- the iteration -----------------------------------------------------------------

def solve_state(L, alpha, labels, k, *, tol=DEFAULT_TOL, method="auto", warm=None,
                max_matvecs=DEFAULT_MAX_MATVECS, iteration=0) -> PartitionState:
    """Ground states for the indicator potentials of ``labels``."""
    labels = np.asarray(labels)
    pairs = []
    for i in range(k):
        phi = (labels == i).astype(float)
        v0 = phi / np.sqrt(max(phi.sum(), 1.0)) if warm is None else warm[i]
        op = SchrodingerOperator(L, alpha, phi)
        pairs.append(ground_state(op, tol, max_matvecs, v0=v0, method=method))
    return PartitionState(labels=labels.copy(), eigenpairs=pairs, iteration=iteration)


def assign_labels(confidences, labels, supervision=None):
    """Argmax reassignment.

    A vertex keeps its label when that label attains the maximum; otherwise
    the lowest maximizing index wins.  Supervised vertices never move.
    Returns ``(new_labels, reseeds)``; empty clusters are refilled with the
    least confident movable vertex.
    """
    P = np.asarray(confidences)
    k, n = P.shape
    labels = np.asarray(labels)
    best = P.max(axis=0)
    new = np.argmax(P, axis=0)
    keep = P[labels, np.arange(n)] >= best
    new[keep] = labels[keep]
    idx, lab = _supervision_arrays(supervision, n)
    new[idx] = lab
    fixed = np.zeros(n, dtype=bool)
    fixed[idx] = True
    reseeds = []
    counts = np.bincount(new, minlength=k)
    for c in np.flatnonzero(counts == 0):
        movable = np.flatnonzero(~fixed & (counts[new] > 1))
        if movable.size == 0:
            raise InputError(f"cluster {c} emptied and no vertex can be moved into it")
        v = int(movable[np.argmin(best[movable])])
        counts[new[v]] -= 1
        new[v] = c
        counts[c] += 1
        reseeds.append({"cluster": int(c), "vertex": v})
    return new, reseeds


def rearrangement_step(L, alpha, state: PartitionState, supervision=None, *, tol=DEFAULT_TOL,
                       method="auto", max_matvecs=DEFAULT_MAX_MATVECS):
    """One reassignment plus re-solve.

    Returns ``(next_state, reseeds)``; ``next_state is state`` when the
    labels are a fixed point.
    """
    new, reseeds = assign_labels(state.confidences, state.labels, supervision)
    if np.array_equal(new, state.labels):
        return state, []
    warm = [gs.psi for gs in state.eigenpairs]
    try:
        nxt = solve_state(L, alpha, new, state.k, tol=tol, method=method, warm=warm,
                          max_matvecs=max_matvecs, iteration=state.iteration + 1)
    except ConvergenceError as exc:
        raise ConvergenceError(f"iteration {state.iteration + 1}: {exc}", exc.best_residual) from exc
    return nxt, reseeds


def _initial_labels(G, config, rng):
    if config.init == "voronoi":
        return init_voronoi(G, config.k, rng, config.supervision)
    return init_random(G.n, config.k, rng, config.supervision)


def run_from(L, alpha, labels, config: RunConfig, restart: int = 0) -> RunReport:
    """Iterate from given initial labels until the labels stop changing."""
    t0 = time.perf_counter()
    k = config.k
    opts = dict(tol=config.tol, method=config.method, max_matvecs=config.max_matvecs)
    state = solve_state(L, alpha, labels, k, **opts)
    history = [state.energy]
    reseeds = []
    converged = False
    for _ in range(config.max_iter):
        nxt, events = rearrangement_step(L, alpha, state, config.supervision, **opts)
        if nxt is state:
            converged = True
            break
        for ev in events:
            ev["iteration"] = nxt.iteration
            log.info("restart %d iteration %d: reseeded cluster %d with vertex %d",
                     restart, nxt.iteration, ev["cluster"], ev["vertex"])
        reseeds.extend(events)
        state = nxt
        history.append(state.energy)
    P = state.confidences
    return RunReport(
        k=k,
        r=L.r,
        alpha=alpha,
        labels=state.labels,
        energy_history=history,
        confidences=P,
        representatives=[int(np.argmax(row)) for row in P],
        iterations=len(history) - 1,
        converged=converged,
        reseeds=reseeds,
        wall_time_s=time.perf_counter() - t0,
        restart=restart,
    )


def run(G: SimilarityGraph, config: RunConfig, *, alpha: float | None = None) -> RunReport:
    """Best of ``config.restarts`` independent runs, by final relaxed energy.

    Restart ``j`` draws its initialization from ``default_rng([seed, j])``.
    A restart whose eigensolves fail is skipped; if all fail the last
    :class:`ConvergenceError` propagates.
    """
    t0 = time.perf_counter()
    L = LaplacianOperator(G, config.r)
    if alpha is None:
        alpha = resolve_alpha(config, G)
    if config.k > G.n:
        raise InputError(f"k={config.k} exceeds the number of vertices {G.n}")

    def one(j):
        rng = np.random.default_rng([config.seed, j])
        labels = _initial_labels(G, config, rng)
        try:
            return run_from(L, alpha, labels, config, restart=j)
        except ConvergenceError as exc:
            log.warning("restart %d failed: %s", j, exc)
            return exc

    if config.threads > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(one, range(config.restarts)))
    else:
        results = [one(j) for j in range(config.restarts)]

    reports = [res for res in results if isinstance(res, RunReport)]
    failed = [j for j, res in enumerate(results) if not isinstance(res, RunReport)]
    if not reports:
        raise results[-1]
    best = min(reports, key=lambda rep: (rep.energy, rep.restart))
    best.restart_energies = [float(rep.energy) if isinstance(rep, RunReport) else float("nan") for rep in results]
    best.failed_restarts = failed
    best.wall_time_s = time.perf_counter() - t0
    return best


def sweep(G: SimilarityGraph, config: RunConfig, alphas) -> list[dict]:
    """Lowest-energy run for each ``alpha`` in ``alphas``.

    Energies at different ``alpha`` are not comparable as partition quality.
    Each row also carries the relaxed energy of one fixed reference
    partition (the first restart's initialization), which is monotone in
    ``alpha``.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise InputError("alpha grid is empty")
    L = LaplacianOperator(G, config.r)
    ref = _initial_labels(G, config, np.random.default_rng([config.seed, 0]))
    rows = []
    for a in alphas:
        if not a > 0:
            raise InputError(f"alpha must be positive, got {a}")
        rep = run(G, config, alpha=a)
        fixed = solve_state(L, a, ref, config.k, tol=config.tol, method=config.method).energy
        rows.append({
            "alpha": a,
            "energy": rep.energy,
            "iterations": rep.iterations,
            "converged": rep.converged,
            "cluster_sizes": np.bincount(rep.labels, minlength=config.k).tolist(),
            "reference_energy": fixed,
            "warning": "energies at different alpha are not comparable",
        })
    return rows
