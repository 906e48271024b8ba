"""Shortest-path machinery for syndrome graphs.

Provides weighted Dijkstra (binary heap), a FIFO breadth-first variant that
accumulates first- and second-order chain-degeneracy factors, Yen's
k-shortest loopless paths, and the closed-form multinomial count of shortest
lattice paths.  Kernels are numba-compiled through :mod:`toricsim._accel`;
all of them operate on CSR adjacency arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._accel import njit

INF = np.inf


@dataclass(frozen=True)
class CsrGraph:
    """Undirected weighted graph in CSR form.

    ``weight`` is the metric used by Dijkstra; ``overlap`` is the per-edge
    multiplier accumulated by the degeneracy search (time overlap on
    contracted syndrome graphs, 1 elsewhere).  Neighbor lists are sorted by
    vertex index so tie-breaking is deterministic.
    """

    indptr: np.ndarray
    nbr: np.ndarray
    weight: np.ndarray
    overlap: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def neighbors(self, v: int) -> list[tuple[int, float, float]]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [
            (int(self.nbr[k]), float(self.weight[k]), float(self.overlap[k]))
            for k in range(lo, hi)
        ]

    def edge_list(self) -> list[tuple[int, int, float, float]]:
        out = []
        for v in range(self.n):
            for u, w, ov in self.neighbors(v):
                if v < u:
                    out.append((v, u, w, ov))
        return out

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple],
    ) -> "CsrGraph":
        """Build from undirected ``(u, v, weight[, overlap])`` tuples."""
        us, vs, ws, os_ = [], [], [], []
        for e in edges:
            u, v, w = e[0], e[1], e[2]
            ov = e[3] if len(e) > 3 else 1.0
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not 0 <= u < n or not 0 <= v < n:
                raise ValueError(f"edge ({u}, {v}) outside vertex range")
            if w < 0:
                raise ValueError(f"negative weight on edge ({u}, {v})")
            us.append(u)
            vs.append(v)
            ws.append(w)
            os_.append(ov)
        src = np.concatenate([np.asarray(us, np.int32), np.asarray(vs, np.int32)])
        dst = np.concatenate([np.asarray(vs, np.int32), np.asarray(us, np.int32)])
        wt = np.concatenate([np.asarray(ws, np.float64)] * 2)
        ov = np.concatenate([np.asarray(os_, np.float64)] * 2)
        order = np.lexsort((dst, src))
        src, dst, wt, ov = src[order], dst[order], wt[order], ov[order]
        if len(src) > 1 and np.any((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])):
            raise ValueError("parallel edges are not supported")
        indptr = np.zeros(n + 1, np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(indptr=indptr, nbr=dst, weight=wt, overlap=ov)


@dataclass(frozen=True)
class DegeneracyResult:
    """Output of the degeneracy-accumulating breadth-first search.

    ``hops[v]`` is the unweighted distance from the source (-1 if
    unreachable); ``deg0[v]`` sums the product of edge overlaps over all
    shortest chains; ``deg1[v]`` does the same over chains one hop longer.
    ``parent[v]`` is the first-discovery tree parent.
    """

    hops: np.ndarray
    deg0: np.ndarray
    deg1: np.ndarray
    parent: np.ndarray


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _dijkstra_kernel(indptr, nbr, weight, source):
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, np.int32)
    done = np.zeros(n, np.uint8)
    cap = max(nbr.shape[0] + 1, 4)
    heap_key = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int32)
    size = 0
    dist[source] = 0.0
    heap_key[0] = 0.0
    heap_v[0] = source
    size = 1
    while size > 0:
        key = heap_key[0]
        u = heap_v[0]
        size -= 1
        heap_key[0] = heap_key[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and heap_key[c + 1] < heap_key[c]:
                c += 1
            if heap_key[c] < heap_key[i]:
                heap_key[i], heap_key[c] = heap_key[c], heap_key[i]
                heap_v[i], heap_v[c] = heap_v[c], heap_v[i]
                i = c
            else:
                break
        if done[u]:
            continue
        done[u] = 1
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            if done[v]:
                continue
            aux = key + weight[k]
            if aux < dist[v]:
                dist[v] = aux
                pred[v] = u
                j = size
                heap_key[j] = aux
                heap_v[j] = v
                size += 1
                while j > 0:
                    par = (j - 1) // 2
                    if heap_key[par] > heap_key[j]:
                        heap_key[par], heap_key[j] = heap_key[j], heap_key[par]
                        heap_v[par], heap_v[j] = heap_v[j], heap_v[par]
                        j = par
                    else:
                        break
            elif aux == dist[v] and pred[v] > u:
                pred[v] = u  # canonical tie-break: smallest predecessor index
    return dist, pred


@njit(cache=True)
def _dijkstra_masked_kernel(indptr, nbr, weight, source, target, vmask, emask):
    # Same as above with blocked vertices/edge slots; stops once target pops.
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, np.int32)
    done = np.zeros(n, np.uint8)
    cap = max(nbr.shape[0] + 1, 4)
    heap_key = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int32)
    if vmask[source]:
        return dist, pred
    dist[source] = 0.0
    heap_key[0] = 0.0
    heap_v[0] = source
    size = 1
    while size > 0:
        key = heap_key[0]
        u = heap_v[0]
        size -= 1
        heap_key[0] = heap_key[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and heap_key[c + 1] < heap_key[c]:
                c += 1
            if heap_key[c] < heap_key[i]:
                heap_key[i], heap_key[c] = heap_key[c], heap_key[i]
                heap_v[i], heap_v[c] = heap_v[c], heap_v[i]
                i = c
            else:
                break
        if done[u]:
            continue
        done[u] = 1
        if u == target:
            break
        for k in range(indptr[u], indptr[u + 1]):
            if emask[k]:
                continue
            v = nbr[k]
            if done[v] or vmask[v]:
                continue
            aux = key + weight[k]
            if aux < dist[v]:
                dist[v] = aux
                pred[v] = u
                j = size
                heap_key[j] = aux
                heap_v[j] = v
                size += 1
                while j > 0:
                    par = (j - 1) // 2
                    if heap_key[par] > heap_key[j]:
                        heap_key[par], heap_key[j] = heap_key[j], heap_key[par]
                        heap_v[par], heap_v[j] = heap_v[j], heap_v[par]
                        j = par
                    else:
                        break
            elif aux == dist[v] and pred[v] > u:
                pred[v] = u
    return dist, pred


@njit(cache=True)
def _degeneracy_kernel(indptr, nbr, overlap, source):
    # FIFO layer-by-layer exploration; the four update cases distinguish
    # first-visit, same-layer-arrival, lateral, and backward edges.
    n = indptr.shape[0] - 1
    hops = np.full(n, -1, np.int32)
    deg0 = np.zeros(n, np.float64)
    deg1 = np.zeros(n, np.float64)
    parent = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int32)
    head = 0
    tail = 0
    hops[source] = 0
    deg0[source] = 1.0
    queue[tail] = source
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        hu = hops[u]
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            ov = overlap[k]
            hv = hops[v]
            if hv == -1:
                hops[v] = hu + 1
                deg0[v] = deg0[u] * ov
                parent[v] = u
                queue[tail] = v
                tail += 1
            elif hv == hu + 1:
                deg0[v] += deg0[u] * ov
            elif hv == hu:
                deg1[v] += deg0[u] * ov
            else:  # hv == hu - 1: pull completed second-order weight forward
                deg1[u] += deg1[v] * ov
    return hops, deg0, deg1, parent


# ---------------------------------------------------------------------------
# public API


def dijkstra(graph: CsrGraph, source: int) -> np.ndarray:
    """Minimum-total-weight distance from ``source`` to every vertex."""
    dist, _ = _dijkstra_kernel(graph.indptr, graph.nbr, graph.weight, source)
    return dist


def dijkstra_with_predecessors(graph: CsrGraph, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Distances plus a canonical shortest-path tree (smallest-index ties)."""
    return _dijkstra_kernel(graph.indptr, graph.nbr, graph.weight, source)


def dijkstra_degeneracy(graph: CsrGraph, source: int) -> DegeneracyResult:
    """Hop distances and first/second-order degeneracy factors from ``source``."""
    hops, deg0, deg1, parent = _degeneracy_kernel(
        graph.indptr, graph.nbr, graph.overlap, source
    )
    return DegeneracyResult(hops=hops, deg0=deg0, deg1=deg1, parent=parent)


def closed_form_degeneracy(dx: int, dy: int, dt: int) -> int:
    """Number of shortest lattice chains taking dx, dy, dt unit steps per axis.

    Exact multinomial ``(dx+dy+dt)! / (dx! dy! dt!)`` as a Python integer;
    use :func:`log_closed_form_degeneracy` where only the logarithm is needed.
    """
    if dx < 0 or dy < 0 or dt < 0:
        raise ValueError("step counts must be nonnegative")
    return math.comb(dx + dy + dt, dx) * math.comb(dy + dt, dt)


def log_closed_form_degeneracy(dx: int, dy: int, dt: int) -> float:
    """Natural log of :func:`closed_form_degeneracy`, safe for large counts."""
    if dx < 0 or dy < 0 or dt < 0:
        raise ValueError("step counts must be nonnegative")
    return _log_multinomial3(dx, dy, dt)


@njit(cache=True)
def _log_multinomial3(dx, dy, dt):
    return (
        math.lgamma(dx + dy + dt + 1.0)
        - math.lgamma(dx + 1.0)
        - math.lgamma(dy + 1.0)
        - math.lgamma(dt + 1.0)
    )


def trace_path(pred: np.ndarray, source: int, target: int) -> list[int]:
    """Vertex sequence source..target along a predecessor tree."""
    path = [target]
    v = target
    while v != source:
        v = int(pred[v])
        if v < 0:
            raise ValueError("target not reached from source")
        path.append(v)
    path.reverse()
    return path


def _edge_slots(graph: CsrGraph, u: int, v: int) -> tuple[int, int]:
    """CSR slot indices of directed entries u->v and v->u (-1 if absent)."""

    def slot(a: int, b: int) -> int:
        lo, hi = graph.indptr[a], graph.indptr[a + 1]
        k = lo + np.searchsorted(graph.nbr[lo:hi], b)
        if k < hi and graph.nbr[k] == b:
            return int(k)
        return -1

    return slot(u, v), slot(v, u)


def yen_k_shortest(
    graph: CsrGraph, src: int, dst: int, k: int
) -> list[float]:
    """Weights of the k shortest loopless src-dst paths, nondecreasing.

    Returns fewer entries when the graph has fewer loopless paths; an empty
    list when ``dst`` is unreachable.  Ties in weight are resolved
    lexicographically by vertex sequence, and candidate paths are
    de-duplicated by their full vertex sequence.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if src == dst:
        raise ValueError("src and dst must differ")
    weights, _ = yen_k_shortest_paths(graph, src, dst, k)
    return weights


def yen_k_shortest_paths(
    graph: CsrGraph, src: int, dst: int, k: int
) -> tuple[list[float], list[tuple[int, ...]]]:
    """As :func:`yen_k_shortest` but also returning the vertex sequences."""
    dist, pred = _dijkstra_kernel(graph.indptr, graph.nbr, graph.weight, src)
    if not np.isfinite(dist[dst]):
        return [], []
    first = tuple(trace_path(pred, src, dst))
    accepted: list[tuple[float, tuple[int, ...]]] = [(float(dist[dst]), first)]
    candidates: dict[tuple[int, ...], float] = {}
    vmask = np.zeros(graph.n, np.uint8)
    emask = np.zeros(len(graph.nbr), np.uint8)

    def edge_weight(u: int, v: int) -> float:
        a, _ = _edge_slots(graph, u, v)
        return float(graph.weight[a])

    while len(accepted) < k:
        prev = accepted[-1][1]
        prefix_w = 0.0
        for j in range(len(prev) - 1):
            spur = prev[j]
            root = prev[: j + 1]
            touched_e = []
            for w_, path in accepted:
                if len(path) > j and path[: j + 1] == root:
                    a, b = _edge_slots(graph, path[j], path[j + 1])
                    if a >= 0:
                        emask[a] = 1
                        emask[b] = 1
                        touched_e.extend((a, b))
            for key in candidates:
                if len(key) > j + 1 and key[: j + 1] == root:
                    a, b = _edge_slots(graph, key[j], key[j + 1])
                    if a >= 0:
                        emask[a] = 1
                        emask[b] = 1
                        touched_e.extend((a, b))
            for v in root[:-1]:
                vmask[v] = 1
            sdist, spred = _dijkstra_masked_kernel(
                graph.indptr, graph.nbr, graph.weight, spur, dst, vmask, emask
            )
            if np.isfinite(sdist[dst]):
                spur_path = trace_path(spred, spur, dst)
                cand = root[:-1] + tuple(spur_path)
                cand_w = prefix_w + float(sdist[dst])
                if cand not in candidates:
                    candidates[cand] = cand_w
            for v in root[:-1]:
                vmask[v] = 0
            for slot_ in touched_e:
                emask[slot_] = 0
            prefix_w += edge_weight(prev[j], prev[j + 1])
        if not candidates:
            break
        best = min(candidates.items(), key=lambda item: (item[1], item[0]))
        del candidates[best[0]]
        accepted.append((best[1], best[0]))
    return [w for w, _ in accepted], [p for _, p in accepted]
