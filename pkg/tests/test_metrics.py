import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics.cluster import contingency_matrix

from dirpart.errors import InputError
from dirpart.graph import SimilarityGraph, lattice_graph
from dirpart.metrics import confusion, contingency, nmf_identity_check, purity

from conftest import random_connected_subset, random_connected_weights

label_lists = st.lists(st.integers(0, 4), min_size=1, max_size=40)


class TestPurity:
    def test_relabeled_perfect(self):
        assert purity([2, 2, 0, 1], [0, 0, 1, 2]) == 1.0

    def test_single_cluster(self):
        assert purity([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5

    def test_hand_example(self):
        assert purity([0, 0, 1, 1], ["a", "a", "a", "b"]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            purity([0, 1], [0, 1, 1])
        with pytest.raises(InputError):
            purity([], [])

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_matches_contingency_oracle(self, data):
        pred = data.draw(label_lists)
        true = data.draw(st.lists(st.integers(0, 3), min_size=len(pred), max_size=len(pred)))
        C = contingency_matrix(true, pred)  # rows true, columns pred
        assert purity(pred, true) == pytest.approx(C.max(axis=0).sum() / len(pred), abs=1e-15)
        mine, _, _ = contingency(pred, true)
        np.testing.assert_array_equal(mine, C.T)

    @settings(max_examples=100, deadline=None)
    @given(label_lists, st.permutations(range(5)))
    def test_relabeling_invariance(self, labels, perm):
        labels = np.array(labels)
        true = (labels * 7 + 3) % 4
        assert purity(np.array(perm)[labels], true) == purity(labels, true)
        assert purity(labels, labels) == 1.0


class TestConfusion:
    def test_permutation_matrix(self):
        cm = confusion([1, 1, 0, 0, 2], [0, 0, 1, 1, 2])
        np.testing.assert_array_equal(cm.matrix, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_columns_sum_to_one(self, data):
        pred = data.draw(label_lists)
        true = data.draw(st.lists(st.integers(0, 3), min_size=len(pred), max_size=len(pred)))
        M = confusion(pred, true).matrix
        np.testing.assert_allclose(M.sum(axis=0), 1.0, atol=1e-12)
        assert M.min() >= 0 and M.max() <= 1

    def test_empty_declared_class(self):
        with pytest.raises(InputError, match="no members"):
            confusion([0, 1], [0, 0], true_classes=[0, 1])

    def test_csv(self):
        text = confusion([0, 1], [0, 1]).to_csv()
        assert text.splitlines()[0] == "pred\\true,0,1"
        assert text.splitlines()[1] == "0,1.000000,0.000000"


def _dense_identity_sides(W, labels):
    """Independent dense evaluation of both sides with the r=1 Dirichlet eigenvectors."""
    d = W.sum(axis=1)
    A = W / np.sqrt(np.outer(d, d))
    k = labels.max() + 1
    U = np.zeros((len(d), k))
    lams = []
    for i in range(k):
        idx = np.flatnonzero(labels == i)
        # symmetric form of the restricted r=1 Laplacian is I - A on the block
        vals, vecs = np.linalg.eigh(np.eye(idx.size) - A[np.ix_(idx, idx)])
        U[idx, i] = np.abs(vecs[:, 0])
        lams.append(vals[0])
    lhs = np.sum((A - U @ U.T) ** 2)
    rhs = np.sum(A**2) + 2 * sum(lams) - k
    return lhs, rhs


class TestNMF:
    @pytest.mark.parametrize("seed", range(10))
    def test_random_two_partition(self, seed):
        rng = np.random.default_rng(seed)
        W = random_connected_weights(10, rng, density=0.5)
        G = SimilarityGraph.from_weights(W)
        # a connected S whose complement is also connected
        for _ in range(100):
            mask = random_connected_subset(W, rng, 5)
            labels = (~mask).astype(int)
            try:
                lhs, rhs, gap = nmf_identity_check(G, labels)
                break
            except InputError:
                continue
        assert gap <= 1e-8
        ref_lhs, ref_rhs = _dense_identity_sides(W, labels)
        assert lhs == pytest.approx(ref_lhs, abs=1e-10)
        assert rhs == pytest.approx(ref_rhs, abs=1e-10)

    def test_two_triangles(self):
        W = np.zeros((6, 6))
        for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
            W[a, b] = W[b, a] = 1.0
        lhs, rhs, gap = nmf_identity_check(SimilarityGraph.from_weights(W), np.array([0, 0, 0, 1, 1, 1]))
        # A has six entries 1/2 squared: ||A||^2 = 6 * 2 / 4 = 3, so rhs = 3 - 2
        assert rhs == pytest.approx(1.0, abs=1e-12)
        assert gap <= 1e-12

    def test_disconnected_cluster_rejected(self):
        G = lattice_graph("path", [6])
        with pytest.raises(InputError, match="not connected"):
            nmf_identity_check(G, np.array([0, 1, 0, 1, 1, 1]))
        # the identity itself does not need connectivity
        assert nmf_identity_check(G, np.array([0, 1, 0, 1, 1, 1]), require_connected=False)[2] <= 1e-8

    def test_large_graph_path(self):
        G = lattice_graph("torus", [12, 12])
        labels = (np.arange(144) >= 72).astype(int)
        a = nmf_identity_check(G, labels)
        b = nmf_identity_check(G, labels, dense_limit=10)
        assert a[2] <= 1e-8 and b[2] <= 1e-8
        assert a[0] == pytest.approx(b[0], abs=1e-9)
