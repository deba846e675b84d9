"""Clustering scores and the NMF objective identity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dirichlet import dirichlet_eigenvalue
from .errors import InputError
from .graph import SimilarityGraph, is_connected_subset
from .laplacian import LaplacianOperator


def _pair(pred, true):
    pred = np.asarray(pred).ravel()
    true = np.asarray(true).ravel()
    if pred.shape != true.shape:
        raise InputError(f"label arrays differ in length: {pred.size} vs {true.size}")
    if pred.size == 0:
        raise InputError("label arrays are empty")
    return pred, true


def contingency(pred, true, pred_classes=None, true_classes=None):
    """Counts ``C[i, j] = |pred == p_i and true == t_j|`` plus the class lists."""
    pred, true = _pair(pred, true)
    p_cls = np.unique(pred) if pred_classes is None else np.asarray(pred_classes)
    t_cls = np.unique(true) if true_classes is None else np.asarray(true_classes)
    p_idx = np.searchsorted(p_cls, pred)
    t_idx = np.searchsorted(t_cls, true)
    if (np.any(p_idx >= p_cls.size) or np.any(p_cls[np.minimum(p_idx, p_cls.size - 1)] != pred)
            or np.any(t_idx >= t_cls.size) or np.any(t_cls[np.minimum(t_idx, t_cls.size - 1)] != true)):
        raise InputError("labels fall outside the declared classes")
    C = np.zeros((p_cls.size, t_cls.size), dtype=np.int64)
    np.add.at(C, (p_idx, t_idx), 1)
    return C, p_cls, t_cls


def purity(pred, true) -> float:
    """Fraction of points in the majority true class of their predicted cluster."""
    C, _, _ = contingency(pred, true)
    return float(C.max(axis=1).sum() / C.sum())


@dataclass
class ConfusionMatrix:
    """Rows are predicted clusters, columns true classes; each column sums to 1."""

    matrix: np.ndarray
    pred_classes: np.ndarray
    true_classes: np.ndarray

    def to_csv(self) -> str:
        head = "pred\\true," + ",".join(str(t) for t in self.true_classes)
        rows = [f"{p}," + ",".join(f"{x:.6f}" for x in row) for p, row in zip(self.pred_classes, self.matrix)]
        return "\n".join([head, *rows]) + "\n"


def confusion(pred, true, pred_classes=None, true_classes=None) -> ConfusionMatrix:
    C, p_cls, t_cls = contingency(pred, true, pred_classes, true_classes)
    col = C.sum(axis=0)
    empty = np.flatnonzero(col == 0)
    if empty.size:
        raise InputError(f"true class {t_cls[empty[0]]} has no members")
    return ConfusionMatrix(C / col[None, :], p_cls, t_cls)


def nmf_identity_check(G: SimilarityGraph, labels, *, require_connected: bool = True, dense_limit: int = 3000):
    """Check ``||A - U U^T||_F^2 == ||A||_F^2 + 2*sum(lambda_i) - k`` for r = 1.

    ``A = D^{-1/2} W D^{-1/2}`` and ``U = D^{1/2} [psi_1 | ... | psi_k]`` with
    the exact Dirichlet eigenvectors of the labelled clusters.  The left side
    is formed explicitly (densely up to ``dense_limit`` vertices).

    Returns ``(lhs, rhs, abs(lhs - rhs))``.
    """
    labels = np.asarray(labels)
    if labels.shape != (G.n,):
        raise InputError(f"labels must have length {G.n}")
    L = LaplacianOperator(G, 1.0)
    k = int(labels.max()) + 1
    cols, lams = [], []
    for i in range(k):
        mask = labels == i
        if not mask.any():
            raise InputError(f"cluster {i} is empty")
        if require_connected and not is_connected_subset(G, mask):
            raise InputError(f"cluster {i} is not connected")
        res = dirichlet_eigenvalue(G, L, mask)
        cols.append(res.psi)
        lams.append(res.lam)
    s = np.sqrt(G.degrees)
    U = s[:, None] * np.column_stack(cols)
    A = (G.weights.multiply(1.0 / s[:, None]).multiply(1.0 / s[None, :])).tocsr()
    a_sq = float(np.sum(A.data**2))
    if G.n <= dense_limit:
        lhs = float(np.sum((A.toarray() - U @ U.T) ** 2))
    else:
        UtU = U.T @ U
        lhs = a_sq - 2.0 * float(np.sum(U * (A @ U))) + float(np.sum(UtU**2))
    rhs = a_sq + 2.0 * float(sum(lams)) - k
    return lhs, rhs, abs(lhs - rhs)
