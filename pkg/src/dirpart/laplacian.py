"""Graph Laplacian family ``D^{-r}(D - W)`` and its Schrödinger perturbation.

Both operators are available matrix-free (``apply``) and assembled.  The
non-symmetric Laplacian is similar to the symmetric matrix

    H = D^{1-r} - D^{-r/2} W D^{-r/2} + alpha * diag(1 - phi)

through ``eta = D^{r/2} psi``; every eigenvalue computation goes through
that symmetric form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .errors import DegenerateInputError, InputError
from .graph import SimilarityGraph


def _check_vector(x, n, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"{name} must have shape ({n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} must be finite")
    return x


class LaplacianOperator:
    """``Delta_r = D^{-r}(D - W)`` on a fixed graph."""

    def __init__(self, graph: SimilarityGraph, r: float = 0.0):
        r = float(r)
        if not 0.0 <= r <= 1.0:
            raise InputError(f"r must lie in [0, 1], got {r}")
        if r > 0:
            zero = np.flatnonzero(graph.degrees <= 0)
            if zero.size:
                raise DegenerateInputError(
                    f"vertex {zero[0]} has zero degree; D^-r is undefined for r={r} "
                    "(use r=0 or remove isolated vertices)"
                )
        self.graph = graph
        self.r = r
        d = graph.degrees
        # d**0 == 1 even for isolated vertices
        self._d_neg_r = np.ones_like(d) if r == 0 else d ** (-r)
        self._d_half_r = np.ones_like(d) if r == 0 else d ** (r / 2)
        self._symmetric = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def degree_scaling(self) -> np.ndarray:
        """``d**(r/2)``, mapping psi to eta."""
        return self._d_half_r

    def apply(self, x) -> np.ndarray:
        x = _check_vector(x, self.n)
        g = self.graph
        return self._d_neg_r * (g.degrees * x - g.weights @ x)

    def assembled(self) -> sp.csr_matrix:
        g = self.graph
        L = sp.diags(g.degrees) - g.weights
        return sp.csr_matrix(sp.diags(self._d_neg_r) @ L)

    def symmetric_matrix(self) -> sp.csr_matrix:
        """``D^{1-r} - D^{-r/2} W D^{-r/2}`` as a sparse matrix (cached; do not modify)."""
        if self._symmetric is None:
            self._symmetric = self._build_symmetric()
        return self._symmetric

    def _build_symmetric(self) -> sp.csr_matrix:
        g = self.graph
        s = 1.0 / self._d_half_r
        W = g.weights.tocoo()
        # s_i * s_j is commutative in floating point, so the result is exactly symmetric
        Ws = sp.coo_matrix((W.data * (s[W.row] * s[W.col]), (W.row, W.col)), shape=W.shape)
        return sp.csr_matrix(sp.diags(g.degrees * self._d_neg_r) - Ws)


class SchrodingerOperator:
    """``Delta_r + alpha * diag(1 - phi)``.

    ``phi`` must take values in [0, 1]; out-of-range values raise instead of
    being clamped.
    """

    def __init__(self, base: LaplacianOperator, alpha: float, phi=None):
        alpha = float(alpha)
        if not (alpha >= 0 and np.isfinite(alpha)):
            raise InputError(f"alpha must be a nonnegative finite number, got {alpha}")
        n = base.n
        phi = np.ones(n) if phi is None else _check_vector(phi, n, "phi")
        if phi.size and (phi.min() < 0 or phi.max() > 1):
            raise InputError("phi must take values in [0, 1]")
        self.base = base
        self.alpha = alpha
        self.phi = phi
        self.potential = alpha * (1.0 - phi)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def graph(self) -> SimilarityGraph:
        return self.base.graph

    @property
    def r(self) -> float:
        return self.base.r

    def apply(self, x) -> np.ndarray:
        x = _check_vector(x, self.n)
        return self.base.apply(x) + self.potential * x

    def assembled(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.base.assembled() + sp.diags(self.potential))

    def standard_form(self) -> "StandardForm":
        return StandardForm(self)


@dataclass
class StandardForm:
    """Symmetric similarity transform of a :class:`SchrodingerOperator`."""

    op: SchrodingerOperator

    def __post_init__(self):
        self.scale = self.op.base.degree_scaling
        self._inv_scale = 1.0 / self.scale
        self._matrix = None

    @property
    def n(self) -> int:
        return self.op.n

    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            self._matrix = sp.csr_matrix(self.op.base.symmetric_matrix() + sp.diags(self.op.potential))
        return self._matrix

    def apply(self, eta) -> np.ndarray:
        eta = _check_vector(eta, self.n, "eta")
        return self.scale * self.op.apply(self._inv_scale * eta)

    def linear_operator(self) -> LinearOperator:
        n = self.n
        return LinearOperator((n, n), matvec=lambda v: self.apply(np.ravel(v)), dtype=float)

    def to_psi(self, eta) -> np.ndarray:
        return self._inv_scale * eta

    def to_eta(self, psi) -> np.ndarray:
        return self.scale * psi


def second_eigenvalue(op: LaplacianOperator, *, method: str = "auto") -> float:
    """Second smallest eigenvalue of ``Delta_r``."""
    from .eigensolver import smallest_eigenvalues

    if op.n < 2:
        raise InputError("second eigenvalue needs at least two vertices")
    vals, _ = smallest_eigenvalues(op.symmetric_matrix(), 2, method=method)
    return float(max(vals[1], 0.0))
