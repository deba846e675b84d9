"""Ground states of Schrödinger operators on graphs.

The iterative path runs ARPACK (``scipy.sparse.linalg.eigsh``) in
shift-invert mode on the symmetric standard form, factorizing
``H + shift*I`` once per solve.  The dense path is a full LAPACK
eigendecomposition and doubles as the test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .errors import ConvergenceError, InputError

DEFAULT_TOL = 1e-4
DEFAULT_MAX_MATVECS = 20000
#: below this size the "auto" method uses a dense decomposition
DENSE_THRESHOLD = 500
#: hard guard for the dense oracle
DENSE_LIMIT = 2000
#: a sparse matrix fuller than this is factorized densely
_DENSE_FILL = 0.15


@dataclass
class GroundState:
    """Smallest eigenpair ``(lam, psi)`` with ``psi^T D^r psi = 1`` and ``sum(psi) > 0``."""

    lam: float
    psi: np.ndarray
    residual: float
    iterations: int


def _shift(H) -> float:
    diag = H.diagonal()
    return 1e-8 * max(1.0, float(np.max(np.abs(diag))) if diag.size else 1.0)


def _inverse(H, shift: float) -> LinearOperator:
    n = H.shape[0]
    if sp.issparse(H) and H.nnz < _DENSE_FILL * n * n:
        lu = splu(sp.csc_matrix(H + shift * sp.identity(n)))
        solve = lu.solve
    else:
        A = H.toarray() if sp.issparse(H) else np.array(H, dtype=float)
        A[np.diag_indices(n)] += shift
        try:
            fac = sla.cho_factor(A, check_finite=False)
            solve = lambda b: sla.cho_solve(fac, b, check_finite=False)  # noqa: E731
        except sla.LinAlgError:
            fac = sla.lu_factor(A, check_finite=False)
            solve = lambda b: sla.lu_solve(fac, b, check_finite=False)  # noqa: E731
    return LinearOperator((n, n), matvec=solve, dtype=float)


def _counting(op: LinearOperator):
    count = [0]

    def matvec(v):
        count[0] += 1
        return op.matvec(v)

    return LinearOperator(op.shape, matvec=matvec, dtype=float), count


def smallest_eigenvalues(H, nev: int, *, method: str = "auto", v0=None, tol: float = 0.0, max_matvecs=None):
    """The ``nev`` smallest eigenpairs ``(values, vectors)`` of a symmetric PSD matrix."""
    vals, vecs, _ = _smallest(H, nev, method=method, v0=v0, tol=tol, max_matvecs=max_matvecs)
    return vals, vecs


def _smallest(H, nev, *, method="auto", v0=None, tol=0.0, max_matvecs=None):
    n = H.shape[0]
    if method not in ("auto", "dense", "sparse"):
        raise InputError(f"unknown eigensolver method {method!r}")
    if nev > n:
        raise InputError(f"requested {nev} eigenpairs of a {n}x{n} matrix")
    # ARPACK needs nev < n
    if method == "dense" or (method == "auto" and n <= DENSE_THRESHOLD) or nev >= n - 1:
        A = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=float)
        vals, vecs = sla.eigh(A, subset_by_index=[0, nev - 1], check_finite=False)
        return vals, vecs, 1
    shift = _shift(H)
    opinv, count = _counting(_inverse(H, shift))
    # one eigenpair of a shift-inverted operator needs only a short Krylov space
    ncv = min(n, 10 if nev == 1 else max(2 * nev + 1, 20))
    maxiter = None if max_matvecs is None else max(1, int(max_matvecs) // ncv)
    if v0 is not None:
        v0 = np.asarray(v0, dtype=float)
        if not np.any(v0):
            v0 = None
    try:
        vals, vecs = eigsh(
            sp.csr_matrix(H) if sp.issparse(H) else H,
            k=nev,
            sigma=-shift,
            which="LM",
            OPinv=opinv,
            v0=v0,
            ncv=ncv,
            tol=tol,
            maxiter=maxiter,
        )
    except ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ARPACK did not converge within {max_matvecs} matvecs", best_residual=float("inf")
        ) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order], count[0]


def _finish(op, form, eta, iterations, tol=None) -> GroundState:
    eta = np.asarray(eta, dtype=float)
    eta = eta / np.linalg.norm(eta)
    total = eta.sum()
    if total < 0 or (total == 0 and eta[np.flatnonzero(eta)[0]] < 0):
        eta = -eta
    Heta = form.apply(eta)
    lam = float(eta @ Heta)
    psi = form.to_psi(eta)
    res = form.to_psi(Heta - lam * eta)
    residual = float(np.linalg.norm(res) / np.linalg.norm(psi))
    return GroundState(lam=lam, psi=psi, residual=residual, iterations=iterations)


def ground_state(
    op,
    tol: float = DEFAULT_TOL,
    max_matvecs: int = DEFAULT_MAX_MATVECS,
    *,
    v0=None,
    method: str = "auto",
) -> GroundState:
    """Smallest eigenpair of a :class:`~dirpart.laplacian.SchrodingerOperator`.

    Parameters
    ----------
    op : SchrodingerOperator
    tol : float
        Bound on ``||(Delta_r + V) psi - lam psi|| / ||psi||``.
    max_matvecs : int
        Budget of operator (inverse) applications for the iterative path.
    v0 : array, optional
        Starting guess in psi-coordinates, e.g. the previous iterate.
    method : {"auto", "sparse", "dense"}

    Raises
    ------
    ConvergenceError
        If the residual bound cannot be met within the budget.
    """
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    form = op.standard_form()
    H = form.matrix()
    start = None if v0 is None else form.to_eta(np.asarray(v0, dtype=float))
    inner_tol = max(tol * 1e-4, 1e-14)
    best = np.inf
    for attempt_tol in (inner_tol, 0.0):
        vals, vecs, its = _smallest(H, 1, method=method, v0=start, tol=attempt_tol, max_matvecs=max_matvecs)
        gs = _finish(op, form, vecs[:, 0], its)
        if gs.residual <= tol:
            return gs
        best = min(best, gs.residual)
        start = vecs[:, 0]
    raise ConvergenceError(f"ground state residual {best:.3e} exceeds tol {tol:.3e}", best_residual=best)


def ground_state_dense(op) -> GroundState:
    """Dense-oracle ground state (``n <= 2000``)."""
    if op.n > DENSE_LIMIT:
        raise InputError(f"dense ground state limited to n <= {DENSE_LIMIT}, got n={op.n}")
    form = op.standard_form()
    vals, vecs = sla.eigh(form.matrix().toarray(), subset_by_index=[0, 0])
    return _finish(op, form, vecs[:, 0], 1)
