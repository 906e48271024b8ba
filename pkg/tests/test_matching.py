import numpy as np
import pytest

from toricsim.matching import (
    Matching,
    MatchingError,
    MatchingGraph,
    brute_force_matching,
    mwpm,
)


def random_weights(rng, n, dyadic=True):
    """Symmetric weight matrix; dyadic values make float sums exact."""
    if dyadic:
        w = rng.integers(1, 1 << 16, size=(n, n)).astype(np.float64) / 256.0
    else:
        w = rng.random((n, n)) * 10.0
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return w


def assert_perfect(pairs, n):
    seen = set()
    for a, b in pairs:
        assert a != b
        seen.update((a, b))
    assert seen == set(range(n))


class TestMwpm:
    def test_empty(self):
        m = mwpm(np.zeros((0, 0)))
        assert m.pairs == () and m.total_weight == 0.0

    def test_two_vertices(self):
        m = mwpm(np.array([[0.0, 3.5], [3.5, 0.0]]))
        assert m.pairs == ((0, 1),) and m.total_weight == 3.5

    def test_four_vertex_example(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        w[0, 2] = w[2, 0] = 2.0
        w[1, 3] = w[3, 1] = 2.0
        w[0, 3] = w[3, 0] = 5.0
        w[1, 2] = w[2, 1] = 5.0
        m = mwpm(w)
        assert set(m.pairs) == {(0, 1), (2, 3)}
        assert m.total_weight == 2.0

    def test_odd_count_rejected(self):
        with pytest.raises(MatchingError):
            mwpm(np.zeros((3, 3)))

    def test_vs_brute_force(self):
        rng = np.random.default_rng(101)
        for _ in range(200):
            n = int(rng.integers(1, 7)) * 2
            w = random_weights(rng, n)
            a = mwpm(w)
            b = brute_force_matching(w)
            assert a.total_weight == b.total_weight
            assert_perfect(a.pairs, n)

    def test_vs_networkx_medium(self):
        nx = pytest.importorskip("networkx")
        rng = np.random.default_rng(103)
        for _ in range(25):
            n = int(rng.integers(7, 31)) * 2
            w = random_weights(rng, n)
            m = mwpm(w)
            assert_perfect(m.pairs, n)
            g = nx.Graph()
            wmax = w.max()
            for i in range(n):
                for j in range(i + 1, n):
                    g.add_edge(i, j, weight=wmax + 1.0 - w[i, j])
            ref_pairs = nx.max_weight_matching(g, maxcardinality=True)
            ref = sum(w[a, b] for a, b in ref_pairs)
            assert m.total_weight == pytest.approx(ref, rel=1e-12)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(107)
        for _ in range(20):
            n = int(rng.integers(2, 9)) * 2
            w = random_weights(rng, n)
            base = set(mwpm(w).pairs)
            scaled = set(mwpm(4.0 * w).pairs)
            # pair sets agree up to co-optimal ties: compare total weights
            assert sum(w[a, b] for a, b in scaled) == pytest.approx(
                sum(w[a, b] for a, b in base), rel=1e-12
            )

    def test_geometric_instances_structure(self):
        rng = np.random.default_rng(109)
        for _ in range(10):
            n = 2 * int(rng.integers(20, 90))
            pts = rng.random((n, 3)) * 12
            w = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
            np.fill_diagonal(w, 0.0)
            m = mwpm(w)
            assert_perfect(m.pairs, n)

    def test_determinism(self):
        rng = np.random.default_rng(113)
        w = random_weights(rng, 40)
        assert mwpm(w).pairs == mwpm(w).pairs


class TestBruteForce:
    def test_pair(self):
        m = brute_force_matching(np.array([[0.0, 1.25], [1.25, 0.0]]))
        assert m.pairs == ((0, 1),)

    def test_size_guard(self):
        with pytest.raises(MatchingError):
            brute_force_matching(np.zeros((14, 14)))

    def test_n10_cross_check(self):
        rng = np.random.default_rng(127)
        for _ in range(100):
            w = random_weights(rng, 10)
            assert mwpm(w).total_weight == brute_force_matching(w).total_weight


class TestMatchingGraph:
    def test_asymmetric_rejected(self):
        w = np.zeros((2, 2))
        w[0, 1] = 1.0
        with pytest.raises(MatchingError):
            MatchingGraph(w)

    def test_n(self):
        assert MatchingGraph(np.zeros((4, 4))).n == 4
