"""Exact Dirichlet eigenvalues of vertex subsets and the partition objective.

``lambda(S)`` is the smallest eigenvalue of the principal submatrix of the
Laplacian indexed by ``S`` (zero boundary values on the complement).
Degrees are always those of the full graph.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .eigensolver import DENSE_THRESHOLD, _smallest
from .errors import DegenerateInputError, InputError
from .graph import SimilarityGraph
from .laplacian import LaplacianOperator

#: brute force refuses instances with k**n above this
DEFAULT_BRUTE_FORCE_BUDGET = 8000


@dataclass
class DirichletResult:
    lam: float
    psi: np.ndarray
    mask: np.ndarray


def as_mask(S, n: int) -> np.ndarray:
    """Boolean mask from a mask or an iterable of vertex indices."""
    arr = np.asarray(S)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise InputError(f"mask must have length {n}")
        return arr.copy()
    idx = np.unique(arr.astype(int).ravel())
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InputError(f"subset indices must lie in [0, {n})")
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    return mask


def _operator(G, r):
    return r if isinstance(r, LaplacianOperator) else LaplacianOperator(G, r)


def dirichlet_eigenvalue(G: SimilarityGraph, r, S, *, method: str = "auto") -> DirichletResult:
    """``lambda(S)`` and its eigenvector, zero off ``S`` and ``D^r``-normalized."""
    L = _operator(G, r)
    mask = as_mask(S, G.n)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise InputError("Dirichlet eigenvalue of an empty subset is undefined")
    H = L.symmetric_matrix()[idx][:, idx]
    if method == "auto":
        method = "dense" if idx.size <= DENSE_THRESHOLD else "sparse"
    _, vecs, _ = _smallest(H, 1, method=method, tol=0.0)
    eta = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    if eta.sum() < 0:
        eta = -eta
    lam = float(eta @ (H @ eta))
    psi = np.zeros(G.n)
    psi[idx] = eta / L.degree_scaling[idx]
    return DirichletResult(lam=lam, psi=psi, mask=mask)


def _check_labels(labels, n, k=None):
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise InputError(f"labels must have length {n}, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise InputError("labels must be integers")
        labels = labels.astype(int)
    if labels.min() < 0:
        raise InputError("labels must be nonnegative")
    if k is None:
        k = int(labels.max()) + 1
    elif labels.max() >= k:
        raise InputError(f"label {labels.max()} out of range for k={k}")
    return labels, k


def partition_objective(G: SimilarityGraph, r, labels, k: int | None = None):
    """Sum of Dirichlet eigenvalues of the clusters.

    Returns ``(total, per_cluster)``.
    """
    labels, k = _check_labels(labels, G.n, k)
    L = _operator(G, r)
    lams = []
    for i in range(k):
        mask = labels == i
        if not mask.any():
            raise InputError(f"cluster {i} is empty")
        lams.append(dirichlet_eigenvalue(G, L, mask).lam)
    return float(sum(lams)), lams


def perimeter_volume_bound(G: SimilarityGraph, r: float, S):
    """Weighted edge boundary, ``r``-volume and their ratio, an upper bound on ``lambda(S)``."""
    mask = as_mask(S, G.n)
    if not mask.any():
        raise InputError("subset must be nonempty")
    inside = mask.astype(float)
    boundary = float(inside @ (G.weights @ (1.0 - inside)))
    with np.errstate(divide="ignore"):
        vol = float(np.sum(G.degrees[mask] ** float(r)))
    if vol <= 0:
        raise DegenerateInputError("subset has zero volume")
    return boundary, vol, boundary / vol


def _restricted_growth(n: int, k: int):
    """Labelings in which each new label is the next unused one (one per partition)."""
    labels = [0] * n

    def rec(pos, used):
        if pos == n:
            if used == k:
                yield labels
            return
        # not enough vertices left to open the remaining labels
        if k - used > n - pos:
            return
        for lab in range(min(used + 1, k)):
            labels[pos] = lab
            yield from rec(pos + 1, max(used, lab + 1))

    yield from rec(1, 1)


def brute_force_partition(G: SimilarityGraph, r: float, k: int, *, budget: int = DEFAULT_BRUTE_FORCE_BUDGET):
    """Exhaustive minimizer of the partition objective.

    Each partition is visited once, via its canonical labeling (vertex 0 in
    cluster 0, clusters numbered by first appearance).  Ties resolve to the
    lexicographically smallest labeling.

    Returns ``(labels, best_value)``.
    """
    n = G.n
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if float(k) ** n > budget:
        raise InputError(f"brute force over k**n = {k}**{n} labelings exceeds budget {budget}")
    L = LaplacianOperator(G, r)
    H = L.symmetric_matrix().toarray()
    if k == 1:
        return np.zeros(n, dtype=int), dirichlet_eigenvalue(G, L, np.ones(n, bool)).lam
    cache: dict[int, float] = {}
    weights = 1 << np.arange(n)

    def lam_of(idx):
        key = int(weights[idx].sum())
        val = cache.get(key)
        if val is None:
            val = float(sla.eigvalsh(H[np.ix_(idx, idx)], subset_by_index=[0, 0])[0])
            cache[key] = val
        return val

    best_val = np.inf
    best = None
    scale = max(1.0, float(np.abs(H).max()))
    for lab in _restricted_growth(n, k):
        arr = np.asarray(lab)
        total = sum(lam_of(np.flatnonzero(arr == i)) for i in range(k))
        if total < best_val - 1e-12 * scale:
            best_val = total
            best = arr.copy()
    return best, float(best_val)
