import itertools
import math

import numpy as np
import pytest

from toricsim.graphalg import (
    CsrGraph,
    closed_form_degeneracy,
    dijkstra,
    dijkstra_degeneracy,
    dijkstra_with_predecessors,
    log_closed_form_degeneracy,
    trace_path,
    yen_k_shortest,
    yen_k_shortest_paths,
)


# ---------------------------------------------------------------------------
# oracles


def bellman_ford(n, edges, source):
    dist = [math.inf] * n
    dist[source] = 0.0
    for _ in range(n):
        changed = False
        for u, v, w, *_ in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return dist


def enumerate_chains(n, edges, source, max_len):
    """All loopless chains from source up to max_len hops, as (target, length, delta)."""
    adj = {v: [] for v in range(n)}
    for u, v, w, ov in edges:
        adj[u].append((v, ov))
        adj[v].append((u, ov))
    out = []

    def dfs(v, visited, length, delta):
        out.append((v, length, delta))
        if length == max_len:
            return
        for u, ov in adj[v]:
            if u not in visited:
                visited.add(u)
                dfs(u, visited, length + 1, delta * ov)
                visited.remove(u)

    dfs(source, {source}, 0, 1.0)
    return out


def oracle_degeneracies(n, edges, source):
    """Brute-force hop distances plus first/second-order chain sums."""
    dist = bellman_ford(n, [(u, v, 1.0) for u, v, *_ in edges], source)
    hops = [int(d) if math.isfinite(d) else -1 for d in dist]
    reach = max(h for h in hops if h >= 0)
    chains = enumerate_chains(n, edges, source, reach + 1)
    deg0 = [0.0] * n
    deg1 = [0.0] * n
    for v, length, delta in chains:
        if hops[v] < 0:
            continue
        if length == hops[v]:
            deg0[v] += delta
        elif length == hops[v] + 1:
            deg1[v] += delta
    return hops, deg0, deg1


def enumerate_loopless_path_weights(n, edges, src, dst):
    adj = {v: [] for v in range(n)}
    for u, v, w, *_ in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    weights = []

    def dfs(v, visited, acc):
        if v == dst:
            weights.append(acc)
            return
        for u, w in adj[v]:
            if u not in visited:
                visited.add(u)
                dfs(u, visited, acc + w)
                visited.remove(u)

    dfs(src, {src}, 0.0)
    return sorted(weights)


def random_graph(rng, n, extra_edges, unit_overlap=False, dyadic=True):
    """Connected random graph: a random tree plus extra edges."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    while len(edges) < min(n - 1 + extra_edges, n * (n - 1) // 2):
        u, v = rng.integers(0, n, 2)
        if u != v:
            edges.add((min(int(u), int(v)), max(int(u), int(v))))
    out = []
    for u, v in sorted(edges):
        w = float(rng.integers(1, 64)) / 8.0 if dyadic else float(rng.random() + 0.1)
        ov = 1.0 if unit_overlap else float(rng.integers(1, 32)) / 16.0
        out.append((u, v, w, ov))
    return out


# ---------------------------------------------------------------------------
# dijkstra


class TestDijkstra:
    def test_source_distance_zero(self):
        g = CsrGraph.from_edges(2, [(0, 1, 2.5)])
        assert dijkstra(g, 0)[0] == 0.0

    def test_two_vertex(self):
        g = CsrGraph.from_edges(2, [(0, 1, 2.5)])
        assert dijkstra(g, 0)[1] == 2.5

    def test_unreachable_inf(self):
        g = CsrGraph.from_edges(3, [(0, 1, 1.0)])
        assert np.isinf(dijkstra(g, 0)[2])

    def test_vs_bellman_ford(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            n = int(rng.integers(5, 51))
            edges = random_graph(rng, n, int(rng.integers(0, 2 * n)))
            g = CsrGraph.from_edges(n, edges)
            src = int(rng.integers(0, n))
            ref = bellman_ford(n, edges, src)
            got = dijkstra(g, src)
            assert np.allclose(got, ref)

    def test_predecessor_path_is_shortest(self):
        rng = np.random.default_rng(3)
        edges = random_graph(rng, 20, 30)
        g = CsrGraph.from_edges(20, edges)
        dist, pred = dijkstra_with_predecessors(g, 0)
        wmap = {}
        for u, v, w, _ in edges:
            wmap[(u, v)] = wmap[(v, u)] = w
        for target in range(1, 20):
            path = trace_path(pred, 0, target)
            total = sum(wmap[(path[i], path[i + 1])] for i in range(len(path) - 1))
            assert total == pytest.approx(dist[target], rel=1e-12)


# ---------------------------------------------------------------------------
# degeneracy search


class TestDijkstraDegeneracy:
    def test_triangle(self):
        g = CsrGraph.from_edges(3, [(0, 1, 1, 1.0), (0, 2, 1, 1.0), (1, 2, 1, 1.0)])
        r = dijkstra_degeneracy(g, 0)
        assert r.hops[1] == 1 and r.deg0[1] == 1.0 and r.deg1[1] == 1.0

    def test_square_grid_two_paths(self):
        a, b, c, d = 0.25, 2.0, 0.5, 1.5
        g = CsrGraph.from_edges(
            4, [(0, 1, 1, a), (1, 3, 1, b), (0, 2, 1, c), (2, 3, 1, d)]
        )
        r = dijkstra_degeneracy(g, 0)
        assert r.deg0[3] == pytest.approx(a * b + c * d, rel=1e-12)

    def test_bipartite_deg1_zero(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            # random bipartite graph
            na, nb = int(rng.integers(2, 8)), int(rng.integers(2, 8))
            n = na + nb
            edges = []
            for u in range(na):
                for v in range(na, n):
                    if rng.random() < 0.5:
                        edges.append((u, v, 1.0, float(rng.random() + 0.1)))
            if not edges:
                continue
            g = CsrGraph.from_edges(n, edges)
            r = dijkstra_degeneracy(g, 0)
            assert np.all(r.deg1 == 0.0)

    def test_unit_overlap_counts_vs_enumeration(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(4, 31))
            edges = random_graph(rng, n, int(rng.integers(0, n)), unit_overlap=True)
            g = CsrGraph.from_edges(n, edges)
            src = int(rng.integers(0, n))
            r = dijkstra_degeneracy(g, src)
            hops, deg0, _ = oracle_degeneracies(n, edges, src)
            assert list(r.hops) == hops
            for v in range(n):
                if hops[v] >= 0:
                    assert r.deg0[v] == int(round(deg0[v]))

    def test_weighted_overlaps_vs_enumeration(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(4, 21))
            edges = random_graph(rng, n, int(rng.integers(1, n)))
            g = CsrGraph.from_edges(n, edges)
            src = int(rng.integers(0, n))
            r = dijkstra_degeneracy(g, src)
            hops, deg0, deg1 = oracle_degeneracies(n, edges, src)
            assert list(r.hops) == hops
            for v in range(n):
                if hops[v] >= 0:
                    assert r.deg0[v] == pytest.approx(deg0[v], rel=1e-9)
                    assert r.deg1[v] == pytest.approx(deg1[v], rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# closed-form degeneracy


def cubic_lattice_graph(nx, ny, nt):
    """Open-boundary cubic lattice with unit weights and overlaps."""
    def vid(x, y, t):
        return (x * (ny + 1) + y) * (nt + 1) + t

    edges = []
    for x in range(nx + 1):
        for y in range(ny + 1):
            for t in range(nt + 1):
                if x < nx:
                    edges.append((vid(x, y, t), vid(x + 1, y, t), 1.0, 1.0))
                if y < ny:
                    edges.append((vid(x, y, t), vid(x, y + 1, t), 1.0, 1.0))
                if t < nt:
                    edges.append((vid(x, y, t), vid(x, y, t + 1), 1.0, 1.0))
    n = (nx + 1) * (ny + 1) * (nt + 1)
    return CsrGraph.from_edges(n, edges), vid


class TestClosedFormDegeneracy:
    def test_fig_value(self):
        assert closed_form_degeneracy(3, 2, 0) == 10

    def test_trivial(self):
        assert closed_form_degeneracy(0, 0, 0) == 1

    def test_enumerated(self):
        # orderings of steps xxyt = 4!/2!1!1!
        assert closed_form_degeneracy(2, 1, 1) == 12

    def test_log_matches(self):
        for dx, dy, dt in itertools.product(range(5), repeat=3):
            assert log_closed_form_degeneracy(dx, dy, dt) == pytest.approx(
                math.log(closed_form_degeneracy(dx, dy, dt)), rel=1e-12
            )

    def test_matches_bfs_on_cubic_lattice(self):
        g, vid = cubic_lattice_graph(4, 4, 4)
        r = dijkstra_degeneracy(g, vid(0, 0, 0))
        for dx, dy, dt in itertools.product(range(5), repeat=3):
            v = vid(dx, dy, dt)
            assert r.hops[v] == dx + dy + dt
            assert r.deg0[v] == closed_form_degeneracy(dx, dy, dt)
            assert r.deg1[v] == 0.0  # cubic lattice is bipartite


# ---------------------------------------------------------------------------
# yen k-shortest


class TestYen:
    def test_path_graph_single_route(self):
        g = CsrGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert yen_k_shortest(g, 0, 2, 2) == [2.0]

    def test_diamond(self):
        g = CsrGraph.from_edges(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.5), (2, 3, 1.5)])
        assert yen_k_shortest(g, 0, 3, 2) == [2.0, 3.0]

    def test_unreachable_empty(self):
        g = CsrGraph.from_edges(3, [(0, 1, 1.0)])
        assert yen_k_shortest(g, 0, 2, 3) == []

    def test_first_equals_dijkstra_and_sorted(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            n = int(rng.integers(5, 15))
            edges = random_graph(rng, n, n)
            g = CsrGraph.from_edges(n, edges)
            ws = yen_k_shortest(g, 0, n - 1, 4)
            assert ws == sorted(ws)
            assert ws[0] == pytest.approx(dijkstra(g, 0)[n - 1], rel=1e-12)

    def test_vs_exhaustive_enumeration(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            n = int(rng.integers(4, 21))
            edges = random_graph(rng, n, int(rng.integers(1, n)))
            g = CsrGraph.from_edges(n, edges)
            src, dst = 0, n - 1
            k = 5
            got = yen_k_shortest(g, src, dst, k)
            ref = enumerate_loopless_path_weights(n, edges, src, dst)[:k]
            assert len(got) == len(ref)
            assert got == pytest.approx(ref, rel=1e-9)

    def test_paths_are_loopless_and_distinct(self):
        rng = np.random.default_rng(37)
        edges = random_graph(rng, 12, 14)
        g = CsrGraph.from_edges(12, edges)
        ws, paths = yen_k_shortest_paths(g, 0, 11, 6)
        assert len(set(paths)) == len(paths)
        for p in paths:
            assert len(set(p)) == len(p)
