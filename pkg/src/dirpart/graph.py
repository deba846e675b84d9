"""Weighted similarity graphs: construction, validation and structured lattices.

A :class:`SimilarityGraph` stores a symmetric, nonnegative, zero-diagonal
sparse weight matrix together with its degree vector.  All constructors in
this module return validated graphs; the graph object is never mutated after
construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc
from scipy.spatial import cKDTree

from .errors import InputError

#: kernel values below this are dropped to keep the matrix sparse
DEFAULT_DROP_TOL = 1e-12

METRICS = ("euclidean", "sphere-geodesic")


@dataclass(frozen=True)
class PointCloud:
    """Points in R^dim, one per row.

    ``metric`` selects the distance used by the kernel constructors;
    ``"sphere-geodesic"`` requires unit-norm rows and measures great-circle
    arc length.
    """

    points: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise InputError(f"points must be a 2-d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("point coordinates must be finite")
        if self.metric not in METRICS:
            raise InputError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if self.metric == "sphere-geodesic":
            norms = np.linalg.norm(pts, axis=1)
            bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-9)
            if bad.size:
                raise InputError(
                    f"sphere-geodesic metric needs unit vectors; point {bad[0]} has norm {norms[bad[0]]!r}"
                )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class SimilarityGraph:
    """Undirected weighted graph on ``n`` vertices.

    Use :meth:`from_weights` (strict validation) or :func:`symmetrize`
    (repairs asymmetric input) rather than the raw constructor.
    """

    weights: sp.csr_matrix
    degrees: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        return self.weights.nnz // 2

    @classmethod
    def from_weights(cls, W, *, drop_self_loops: bool = True) -> "SimilarityGraph":
        """Validate a symmetric nonnegative matrix and wrap it.

        Self-loops are removed.  Asymmetric input raises; pass it through
        :func:`symmetrize` instead.
        """
        W = _as_csr(W)
        if drop_self_loops:
            W.setdiag(0.0)
            W.eliminate_zeros()
        if W.nnz and W.data.min() < 0:
            raise InputError("edge weights must be nonnegative")
        if not np.all(np.isfinite(W.data)):
            raise InputError("edge weights must be finite")
        asym = abs(W - W.T)
        if asym.nnz and asym.max() != 0.0:
            raise InputError("weight matrix is not symmetric; use symmetrize()")
        return cls._wrap(W)

    @classmethod
    def _wrap(cls, W: sp.csr_matrix) -> "SimilarityGraph":
        W = W.tocsr()
        W.sort_indices()
        W.eliminate_zeros()
        W.data.setflags(write=False)
        d = np.asarray(W.sum(axis=1)).ravel()
        d.setflags(write=False)
        return cls(weights=W, degrees=d)

    def dense(self) -> np.ndarray:
        return self.weights.toarray()

    def volume(self, mask, r: float = 1.0) -> float:
        """Sum of ``d_i**r`` over the vertices in ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        return float(np.sum(self.degrees[mask] ** r))


def _as_csr(W) -> sp.csr_matrix:
    if sp.issparse(W):
        M = sp.csr_matrix(W, dtype=float, copy=True)
    else:
        arr = np.asarray(W, dtype=float)
        if arr.ndim != 2:
            raise InputError("weight matrix must be 2-d")
        M = sp.csr_matrix(arr)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"weight matrix must be square, got {M.shape}")
    return M


def symmetrize(W) -> SimilarityGraph:
    """Return the graph with weights ``max(W_ij, W_ji)`` and zero diagonal."""
    M = _as_csr(W)
    if M.nnz and M.data.min() < 0:
        raise InputError("entries must be nonnegative")
    if not np.all(np.isfinite(M.data)):
        raise InputError("entries must be finite")
    S = M.maximum(M.T).tocsr()
    S.setdiag(0.0)
    return SimilarityGraph._wrap(S)


# -- kernels -----------------------------------------------------------------

def _pair_sq_dist(cloud: PointCloud, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    X = cloud.points
    if cloud.metric == "euclidean":
        diff = X[i] - X[j]
        return np.einsum("ij,ij->i", diff, diff)
    cos = np.clip(np.einsum("ij,ij->i", X[i], X[j]), -1.0, 1.0)
    return np.arccos(cos) ** 2


def pairwise_distance(cloud: PointCloud, i, j) -> np.ndarray:
    """Distance between points ``i`` and ``j`` under the cloud's metric."""
    i = np.atleast_1d(np.asarray(i))
    j = np.atleast_1d(np.asarray(j))
    return np.sqrt(_pair_sq_dist(cloud, i, j))


def _kernel_graph(cloud, i, j, sigma, drop_tol, weighted=True) -> SimilarityGraph:
    if weighted:
        w = np.exp(-_pair_sq_dist(cloud, i, j) / sigma**2)
    else:
        w = np.ones(len(i))
    keep = (w >= drop_tol) & (i != j)
    i, j, w = i[keep], j[keep], w[keep]
    n = cloud.n
    W = sp.coo_matrix((np.r_[w, w], (np.r_[i, j], np.r_[j, i])), shape=(n, n)).tocsr()
    # duplicate (i,j) pairs get summed by coo->csr; callers pass unique pairs
    return SimilarityGraph._wrap(W)


def _check_sigma(sigma):
    if not (sigma > 0 and np.isfinite(sigma)):
        raise InputError(f"sigma must be positive, got {sigma!r}")


def gaussian_similarity(cloud: PointCloud, sigma: float, *, drop_tol: float = DEFAULT_DROP_TOL) -> SimilarityGraph:
    """Complete graph with weights ``exp(-d(x_i, x_j)**2 / sigma**2)``."""
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    _check_sigma(sigma)
    if cloud.n < 2:
        raise InputError("need at least two points")
    i, j = np.triu_indices(cloud.n, k=1)
    return _kernel_graph(cloud, i, j, sigma, drop_tol)


def knn_graph(
    cloud: PointCloud,
    k_nn: int,
    sigma: float = 1.0,
    *,
    weighted: bool = True,
    drop_tol: float = DEFAULT_DROP_TOL,
) -> SimilarityGraph:
    """Symmetrized k-nearest-neighbour graph.

    Each point is joined to its ``k_nn`` nearest neighbours; the union of
    those directed edges is made undirected (max-symmetrization).  With
    ``weighted=False`` every retained edge has unit weight.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    n = cloud.n
    if not (1 <= k_nn < n):
        raise InputError(f"k_nn must satisfy 1 <= k_nn < n={n}, got {k_nn}")
    if weighted:
        _check_sigma(sigma)
    # chordal distance orders unit vectors the same way as arc length
    tree = cKDTree(cloud.points)
    _, nbr = tree.query(cloud.points, k=k_nn + 1)
    nbr = np.asarray(nbr).reshape(n, k_nn + 1)
    # duplicate points can push i out of its own list; keep the k_nn closest others
    cols = np.empty((n, k_nn), dtype=np.intp)
    for v in range(n):
        others = nbr[v][nbr[v] != v]
        cols[v] = others[:k_nn]
    rows = np.repeat(np.arange(n), k_nn)
    cols = cols.ravel()
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return _kernel_graph(cloud, pairs[:, 0], pairs[:, 1], sigma, drop_tol, weighted=weighted)


# -- lattices ------------------------------------------------------------------

LATTICE_KINDS = ("path", "cycle", "grid", "torus")


def lattice_graph(kind: str, dims) -> SimilarityGraph:
    """Unit-weight nearest-neighbour lattice.

    ``path`` and ``cycle`` take one size; ``grid`` and ``torus`` take two
    (rows, cols).  Vertex ``(a, b)`` of a 2-d lattice has index ``a*cols + b``.
    """
    dims = tuple(int(x) for x in np.atleast_1d(dims))
    if kind not in LATTICE_KINDS:
        raise InputError(f"unknown lattice kind {kind!r}; expected one of {LATTICE_KINDS}")
    if any(x <= 0 for x in dims):
        raise InputError(f"lattice dimensions must be positive, got {dims}")
    if kind in ("path", "cycle"):
        if len(dims) != 1:
            raise InputError(f"{kind} takes one dimension, got {dims}")
        (n,) = dims
        i = np.arange(n - 1)
        j = i + 1
        if kind == "cycle" and n > 2:
            i = np.r_[i, n - 1]
            j = np.r_[j, 0]
    else:
        if len(dims) != 2:
            raise InputError(f"{kind} takes two dimensions, got {dims}")
        a, b = dims
        n = a * b
        idx = np.arange(n).reshape(a, b)
        periodic = kind == "torus"
        if periodic:
            right = np.roll(idx, -1, axis=1)
            down = np.roll(idx, -1, axis=0)
            i = np.r_[idx.ravel(), idx.ravel()]
            j = np.r_[right.ravel(), down.ravel()]
        else:
            i = np.r_[idx[:, :-1].ravel(), idx[:-1, :].ravel()]
            j = np.r_[idx[:, 1:].ravel(), idx[1:, :].ravel()]
    W = sp.coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n)).tocsr()
    # wrap-around on tiny tori can produce the same pair twice
    W.data[:] = 1.0
    return symmetrize(W)


def parse_lattice(spec: str) -> SimilarityGraph:
    """Build a lattice from ``"kind:dims"``, e.g. ``path:10`` or ``torus:30x30``."""
    try:
        kind, _, rest = spec.partition(":")
        dims = [int(x) for x in rest.lower().replace(",", "x").split("x")]
    except ValueError as exc:
        raise InputError(f"cannot parse lattice spec {spec!r}") from exc
    return lattice_graph(kind, dims)


def connected_components(G: SimilarityGraph) -> np.ndarray:
    """Component label for every vertex (labels numbered from 0 in vertex order)."""
    _, labels = _cc(G.weights, directed=False)
    return labels


def is_connected_subset(G: SimilarityGraph, mask) -> bool:
    mask = np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return False
    sub = G.weights[idx][:, idx]
    n_comp, _ = _cc(sub, directed=False)
    return n_comp == 1
