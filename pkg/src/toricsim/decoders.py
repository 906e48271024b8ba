"""Anyon-pairing decoders: weight assignments plus correction extraction.

Five strategies build the complete matching graph over anyon blocks:

* CG        — exact shortest distance in the contracted graph, edges
              weighted by ln((1-p_e)/p_e).
* CG_DEG    — hop count times ln(1/p) minus tau * ln(deg0 + p * deg1),
              the degeneracy factors coming from the chain-counting search.
* BG        — closed-form block distance: periodic Manhattan plus weighted
              time gap between the blocks.
* BG_DEG    — BG plus a path-count degeneracy correction (discrete mode
              only; the count is over the underlying round lattice).
* AP        — periodic Manhattan distance between block time midpoints.

All weights are symmetric and clamped to be nonnegative.  Matched pairs are
resolved to cut-crossing parities: CG variants trace their explicit path
through the contracted graph, BG/AP use the minimal signed displacement
(ties at exactly L/2 take the positive direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from ._accel import njit
from .graphalg import _degeneracy_kernel, _dijkstra_kernel, _dijkstra_masked_kernel
from .matching import (
    MatchingError,
    max_weight_matching_edges,
    mwpm,
    mwpm_dense_fast,
    solve_sparse_exact,
)
from .params import pdelta_from_p, wrap_distance, wrap_signed
from .syndrome import ContractedSyndromeGraph

AP_TIME_WEIGHT_CONTINUOUS = 0.56
BG_TIME_WEIGHT_CONTINUOUS = 1.28


class DecoderKind(str, Enum):
    CG = "CG"
    CG_DEG = "CG_DEG"
    BG = "BG"
    BG_DEG = "BG_DEG"
    AP = "AP"


def default_w_time_ap(s: float) -> float:
    """Optimal AP time weight: 0.56 at s=0, 1.0 at s=1, linear between."""
    return AP_TIME_WEIGHT_CONTINUOUS + (1.0 - AP_TIME_WEIGHT_CONTINUOUS) * s


def default_w_time_bg(s: float) -> float:
    """Optimal BG time weight: 1.28 at s=0, 1.0 at s=1, linear between."""
    return BG_TIME_WEIGHT_CONTINUOUS + (1.0 - BG_TIME_WEIGHT_CONTINUOUS) * s


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder choice plus tunables (None picks the s-dependent default)."""

    kind: DecoderKind = DecoderKind.CG
    tau: float = 1.0
    w_time_ap: float | None = None
    w_time_bg: float | None = None
    nearest: int | None = None  # optional matching-graph sparsification

    def __post_init__(self) -> None:
        if isinstance(self.kind, str) and not isinstance(self.kind, DecoderKind):
            object.__setattr__(self, "kind", DecoderKind(self.kind))
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        for w in (self.w_time_ap, self.w_time_bg):
            if w is not None and w < 0:
                raise ValueError("time weights must be nonnegative")
        if self.nearest is not None and self.nearest < 1:
            raise ValueError("nearest must be a positive count")

    def resolve_w_time(self, s: float) -> float:
        if self.kind == DecoderKind.AP:
            return self.w_time_ap if self.w_time_ap is not None else default_w_time_ap(s)
        if self.kind in (DecoderKind.BG, DecoderKind.BG_DEG):
            return self.w_time_bg if self.w_time_bg is not None else default_w_time_bg(s)
        return 1.0

    def label(self) -> str:
        """Stable CSV label: kind plus any non-default tunables."""
        parts = []
        if self.kind in (DecoderKind.CG_DEG, DecoderKind.BG_DEG) and self.tau != 1.0:
            parts.append(f"tau={self.tau:g}")
        if self.kind == DecoderKind.AP and self.w_time_ap is not None:
            parts.append(f"w_time={self.w_time_ap:g}")
        if self.kind in (DecoderKind.BG, DecoderKind.BG_DEG) and self.w_time_bg is not None:
            parts.append(f"w_time={self.w_time_bg:g}")
        if self.nearest is not None:
            parts.append(f"nearest={self.nearest}")
        if not parts:
            return self.kind.value
        return f"{self.kind.value}[{','.join(parts)}]"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "tau": self.tau,
            "w_time_ap": self.w_time_ap,
            "w_time_bg": self.w_time_bg,
            "nearest": self.nearest,
        }

    @classmethod
    def from_dict(cls, data) -> "DecoderConfig":
        if isinstance(data, str):
            return cls(kind=DecoderKind(data))
        known = {"kind", "tau", "w_time_ap", "w_time_bg", "nearest"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown DecoderConfig keys: {sorted(unknown)}")
        return cls(**{k: (DecoderKind(v) if k == "kind" else v) for k, v in data.items()})


class AnyonBlockCoord(NamedTuple):
    """Anyon block as (x, y, t_start, t_end)."""

    x: int
    y: int
    t1: float
    t2: float

    @property
    def t_mid(self) -> float:
        return 0.5 * (self.t1 + self.t2)


@dataclass(frozen=True)
class Correction:
    """Matched anyon pairs with their homology bookkeeping.

    ``crosses_x[k]`` is the parity of x-cut crossings contributed by pair
    k's representative path; ``displacement`` is the wrapped signed (dx, dy).
    """

    pairs: np.ndarray
    displacement: np.ndarray
    crosses_x: np.ndarray
    crosses_y: np.ndarray
    total_weight: float

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


# ---------------------------------------------------------------------------
# single-pair weight functions (spec surface; decode() uses batched kernels)


def block_coord(graph: ContractedSyndromeGraph, v: int) -> AnyonBlockCoord:
    x, y = graph.block_xy(v)
    return AnyonBlockCoord(x, y, float(graph.t_start[v]), float(graph.t_end[v]))


def cg_weight(graph: ContractedSyndromeGraph, anyon_i: int, anyon_j: int) -> float:
    """Shortest ln((1-p_e)/p_e) distance between two blocks."""
    dist, _ = _dijkstra_kernel(graph.indptr, graph.nbr, graph.edge_cost, anyon_i)
    return float(dist[anyon_j])


def cg_degeneracy_weight(
    graph: ContractedSyndromeGraph,
    anyon_i: int,
    anyon_j: int,
    tau: float = 1.0,
    p: float | None = None,
) -> float:
    """Hop distance scaled by ln(1/p), reduced by the degeneracy bonus."""
    if p is None:
        p = graph.p
    hops, deg0, deg1, _ = _degeneracy_kernel(
        graph.indptr, graph.nbr, graph.edge_overlap, anyon_i
    )
    w = hops[anyon_j] * math.log(1.0 / p) - tau * math.log(
        deg0[anyon_j] + p * deg1[anyon_j]
    )
    return max(w, 0.0)


def bg_weight(
    block_i: AnyonBlockCoord, block_j: AnyonBlockCoord, w_time_bg: float, L: int
) -> float:
    """Closed-form block distance: periodic Manhattan plus weighted time gap."""
    gap = max(block_i.t1 - block_j.t2, block_j.t1 - block_i.t2, 0.0)
    return (
        wrap_distance(block_i.x, block_j.x, L)
        + wrap_distance(block_i.y, block_j.y, L)
        + w_time_bg * gap
    )


def bg_degeneracy_weight(
    block_i: AnyonBlockCoord,
    block_j: AnyonBlockCoord,
    w_time_bg: float,
    tau: float,
    p_delta: float,
    s: float,
    L: int,
) -> float:
    """BG weight minus the path-count bonus over the round lattice.

    Counts shortest paths between the blocks' closest points (or paths with
    no time steps when the blocks overlap), with time measured in rounds of
    spacing s.  Undefined in the continuous limit.
    """
    if s <= 0.0:
        raise ValueError("the BG degeneracy correction requires s > 0")
    dx = wrap_distance(block_i.x, block_j.x, L)
    dy = wrap_distance(block_i.y, block_j.y, L)
    gap = max(block_i.t1 - block_j.t2, block_j.t1 - block_i.t2, 0.0)
    overlap = min(block_i.t2, block_j.t2) - max(block_i.t1, block_j.t1)
    if overlap > 0.0:
        log_deg = math.log(overlap / s) + _log_multinomial2(dx, dy)
    else:
        dt = round(gap / s)
        log_deg = (
            math.lgamma(dx + dy + dt + 1.0)
            - math.lgamma(dx + 1.0)
            - math.lgamma(dy + 1.0)
            - math.lgamma(dt + 1.0)
        )
    w = dx + dy + w_time_bg * gap - tau * log_deg / math.log((1.0 - p_delta) / p_delta)
    return max(w, 0.0)


def _log_multinomial2(a: int, b: int) -> float:
    return math.lgamma(a + b + 1.0) - math.lgamma(a + 1.0) - math.lgamma(b + 1.0)


def ap_weight(
    mid_i: tuple[int, int, float],
    mid_j: tuple[int, int, float],
    w_time_ap: float,
    L: int,
) -> float:
    """Periodic Manhattan distance between anyon midpoints."""
    xi, yi, ti = mid_i
    xj, yj, tj = mid_j
    return (
        wrap_distance(xi, xj, L)
        + wrap_distance(yi, yj, L)
        + w_time_ap * abs(ti - tj)
    )


# ---------------------------------------------------------------------------
# batched weight construction


@njit(cache=True)
def _dijkstra_nearest_anyons(indptr, nbr, cost, source, anyon_index, m_target,
                             out_idx, out_dist):
    # Truncated Dijkstra: stop once m_target other anyons are finalized.
    # Returns (count found, radius); every unfound vertex has distance
    # >= radius (Dijkstra pops in nondecreasing key order).
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    done = np.zeros(n, np.uint8)
    cap = max(nbr.shape[0] + 1, 4)
    heap_key = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int32)
    dist[source] = 0.0
    heap_key[0] = 0.0
    heap_v[0] = source
    size = 1
    found = 0
    radius = np.inf
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
        if u != source and anyon_index[u] >= 0:
            out_idx[found] = anyon_index[u]
            out_dist[found] = key
            found += 1
            if found >= m_target:
                radius = key
                return found, radius
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            if done[v]:
                continue
            aux = key + cost[k]
            if aux < dist[v]:
                dist[v] = aux
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
    return found, radius  # heap exhausted: everything reachable was found


@njit(cache=True)
def _cg_all_pairs(indptr, nbr, cost, anyons):
    na = anyons.shape[0]
    nv = indptr.shape[0] - 1
    wmat = np.zeros((na, na), np.float64)
    preds = np.empty((na, nv), np.int32)
    for a in range(na):
        dist, pred = _dijkstra_kernel(indptr, nbr, cost, anyons[a])
        preds[a, :] = pred
        for b in range(na):
            wmat[a, b] = dist[anyons[b]]
    return wmat, preds


@njit(cache=True)
def _cg_deg_all_pairs(indptr, nbr, overlap, anyons, p, tau):
    # Inline FIFO degeneracy search per anyon with shared scratch buffers.
    na = anyons.shape[0]
    nv = indptr.shape[0] - 1
    wmat = np.zeros((na, na), np.float64)
    parents = np.empty((na, nv), np.int32)
    logp_inv = math.log(1.0 / p)
    hops = np.empty(nv, np.int32)
    deg0 = np.empty(nv, np.float64)
    deg1 = np.empty(nv, np.float64)
    queue = np.empty(nv, np.int32)
    for a in range(na):
        for v in range(nv):
            hops[v] = -1
            deg0[v] = 0.0
            deg1[v] = 0.0
        parent = parents[a]
        source = anyons[a]
        hops[source] = 0
        deg0[source] = 1.0
        parent[source] = -1
        queue[0] = source
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            hu = hops[u]
            d0u = deg0[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = nbr[k]
                hv = hops[v]
                if hv == -1:  # must test first: -1 collides with hu-1 at the source
                    hops[v] = hu + 1
                    deg0[v] = d0u * overlap[k]
                    parent[v] = u
                    queue[tail] = v
                    tail += 1
                elif hv == hu - 1:
                    d1v = deg1[v]
                    if d1v != 0.0:
                        deg1[u] += d1v * overlap[k]
                elif hv == hu + 1:
                    deg0[v] += d0u * overlap[k]
                else:
                    deg1[v] += d0u * overlap[k]
        for b in range(na):
            if b == a:
                continue
            t = anyons[b]
            w = hops[t] * logp_inv - tau * math.log(deg0[t] + p * deg1[t])
            wmat[a, b] = max(w, 0.0)
    return wmat, parents


@njit(cache=True)
def _path_steps(pred_row, block_site, L, src, dst):
    # Walk dst -> src in the predecessor tree; count directed cut crossings
    # and accumulate the signed displacement of the src -> dst path.
    cx = 0
    cy = 0
    dx = 0
    dy = 0
    v = dst
    while v != src:
        u = pred_row[v]
        su = block_site[u]
        sv = block_site[v]
        if su != sv:
            xu, yu = su // L, su % L
            xv, yv = sv // L, sv % L
            if yu == yv:
                step = (xv - xu) % L
                if step == 1:
                    dx += 1
                    if xu == L - 1:
                        cx += 1
                else:
                    dx -= 1
                    if xu == 0:
                        cx += 1
            else:
                step = (yv - yu) % L
                if step == 1:
                    dy += 1
                    if yu == L - 1:
                        cy += 1
                else:
                    dy -= 1
                    if yu == 0:
                        cy += 1
        v = u
    return cx & 1, cy & 1, dx, dy


def _log_factorials(n: int) -> np.ndarray:
    lf = np.zeros(n + 1)
    if n >= 2:
        lf[1:] = np.cumsum(np.log(np.arange(1, n + 1)))
    return lf


def _block_arrays(graph: ContractedSyndromeGraph, anyons: np.ndarray):
    x = (graph.block_site[anyons] // graph.L).astype(np.int64)
    y = (graph.block_site[anyons] % graph.L).astype(np.int64)
    t1 = graph.t_start[anyons]
    t2 = graph.t_end[anyons]
    return x, y, t1, t2


def _wrap_count_matrix(coords: np.ndarray, L: int) -> np.ndarray:
    d = np.abs(coords[:, None] - coords[None, :])
    return np.minimum(d, L - d)


def _uniform_cg_weights(graph, anyons):
    x, y, t1, t2 = _block_arrays(graph, anyons)
    rounds = np.rint(t2 / graph.s).astype(np.int64)
    hops = (
        _wrap_count_matrix(x, graph.L)
        + _wrap_count_matrix(y, graph.L)
        + np.abs(rounds[:, None] - rounds[None, :])
    )
    return hops


def _displacement_matrices(x, y, L):
    dx = (x[None, :] - x[:, None]) % L
    dx = np.where(2 * dx > L, dx - L, dx)
    dy = (y[None, :] - y[:, None]) % L
    dy = np.where(2 * dy > L, dy - L, dy)
    return dx, dy


def build_matching_weights(
    graph: ContractedSyndromeGraph, config: DecoderConfig
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Weight matrix over anyons plus the payload for path extraction."""
    anyons = graph.anyons
    na = len(anyons)
    kind = config.kind
    payload: dict = {}
    if na == 0:
        return np.zeros((0, 0)), anyons, payload
    if kind == DecoderKind.CG:
        if graph.uniform_cubic:
            hops = _uniform_cg_weights(graph, anyons)
            wmat = hops * math.log((1.0 - graph.p) / graph.p)
            payload["closed_form"] = True
        else:
            wmat, preds = _cg_all_pairs(
                graph.indptr, graph.nbr, graph.edge_cost, anyons
            )
            payload["preds"] = preds
    elif kind == DecoderKind.CG_DEG:
        if graph.uniform_cubic:
            x, y, t1, t2 = _block_arrays(graph, anyons)
            rounds = np.rint(t2 / graph.s).astype(np.int64)
            ax = _wrap_count_matrix(x, graph.L)
            ay = _wrap_count_matrix(y, graph.L)
            at = np.abs(rounds[:, None] - rounds[None, :])
            lf = _log_factorials(int((ax + ay + at).max()))
            log_deg0 = lf[ax + ay + at] - lf[ax] - lf[ay] - lf[at]
            # a wrap of exactly L/2 admits shortest chains both ways round
            log_deg0 += math.log(2.0) * (
                (2 * ax == graph.L).astype(np.int64)
                + (2 * ay == graph.L).astype(np.int64)
            )
            wmat = (ax + ay + at) * math.log(1.0 / graph.p) - config.tau * log_deg0
            np.maximum(wmat, 0.0, out=wmat)
            payload["closed_form"] = True
        else:
            wmat, parents = _cg_deg_all_pairs(
                graph.indptr,
                graph.nbr,
                graph.edge_overlap,
                anyons,
                graph.p,
                config.tau,
            )
            payload["preds"] = parents
    elif kind in (DecoderKind.BG, DecoderKind.BG_DEG):
        x, y, t1, t2 = _block_arrays(graph, anyons)
        w_time = config.resolve_w_time(graph.s)
        gap = np.maximum(
            np.maximum(t1[:, None] - t2[None, :], t1[None, :] - t2[:, None]), 0.0
        )
        ax = _wrap_count_matrix(x, graph.L)
        ay = _wrap_count_matrix(y, graph.L)
        wmat = ax + ay + w_time * gap
        if kind == DecoderKind.BG_DEG:
            if graph.s <= 0.0:
                raise ValueError("the BG degeneracy correction requires s > 0")
            overlap = np.minimum(t2[:, None], t2[None, :]) - np.maximum(
                t1[:, None], t1[None, :]
            )
            dt = np.rint(gap / graph.s).astype(np.int64)
            lf = _log_factorials(int((ax + ay + dt).max()))
            log_multi3 = lf[ax + ay + dt] - lf[ax] - lf[ay] - lf[dt]
            log_multi2 = lf[ax + ay] - lf[ax] - lf[ay]
            with np.errstate(divide="ignore", invalid="ignore"):
                log_over = np.log(np.maximum(overlap, 1e-300) / graph.s)
            log_deg = np.where(overlap > 0.0, log_over + log_multi2, log_multi3)
            p_delta = pdelta_from_p(graph.p, graph.s)
            wmat = wmat - config.tau * log_deg / math.log((1.0 - p_delta) / p_delta)
            np.maximum(wmat, 0.0, out=wmat)
        payload["closed_form"] = True
    elif kind == DecoderKind.AP:
        x, y, t1, t2 = _block_arrays(graph, anyons)
        w_time = config.resolve_w_time(graph.s)
        tm = 0.5 * (t1 + t2)
        wmat = (
            _wrap_count_matrix(x, graph.L)
            + _wrap_count_matrix(y, graph.L)
            + w_time * np.abs(tm[:, None] - tm[None, :])
        )
        payload["closed_form"] = True
    else:  # pragma: no cover
        raise ValueError(f"unknown decoder kind {kind}")
    # canonical symmetrization: per-source sweeps differ by float roundoff
    wmat = np.triu(wmat, 1)
    wmat = wmat + wmat.T
    return wmat, anyons, payload


def _cg_sparse_match(
    graph: ContractedSyndromeGraph, anyons: np.ndarray, m_start: int = 10
):
    """CG matching via truncated per-anyon Dijkstra with a dual certificate.

    Each anyon explores until its m nearest anyons are finalized; the pop
    radius lower-bounds every unexplored pair, so the sparse solution can be
    certified optimal for the complete matching graph.  Returns
    (pairs, weights) in anyon indices, or None to fall back to the dense
    all-pairs path.
    """
    na = len(anyons)
    anyon_index = np.full(graph.n_blocks, -1, np.int32)
    anyon_index[anyons] = np.arange(na, dtype=np.int32)
    out_idx = np.empty(na, np.int32)
    out_dist = np.empty(na, np.float64)
    m = m_start
    while m < na - 1:
        radii = np.empty(na)
        found_edges: dict[tuple[int, int], float] = {}
        for a in range(na):
            cnt, radius = _dijkstra_nearest_anyons(
                graph.indptr,
                graph.nbr,
                graph.edge_cost,
                int(anyons[a]),
                anyon_index,
                m,
                out_idx,
                out_dist,
            )
            radii[a] = radius
            for t in range(cnt):
                b = int(out_idx[t])
                key = (a, b) if a < b else (b, a)
                # keep the smaller source's value on double discovery
                if key not in found_edges or key[0] == a:
                    if key not in found_edges:
                        found_edges[key] = float(out_dist[t])
                    elif key[0] == a:
                        found_edges[key] = float(out_dist[t])
        keys = sorted(found_edges)
        eu = np.fromiter((k[0] for k in keys), np.int64, len(keys))
        ev = np.fromiter((k[1] for k in keys), np.int64, len(keys))
        ew = np.fromiter((found_edges[k] for k in keys), np.float64, len(keys))
        bound = np.maximum.outer(radii, radii)
        pairs, certified = solve_sparse_exact(na, eu, ev, ew, bound)
        if certified:
            wmap = dict(zip(keys, ew))
            weights = [wmap[(min(a, b), max(a, b))] for a, b in pairs]
            return pairs, weights
        m = min(na - 1, 2 * m)
    return None


def _cg_pair_crossings(graph: ContractedSyndromeGraph, va: int, vb: int):
    """Trace one canonical CG shortest path between two blocks."""
    vmask = np.zeros(graph.n_blocks, np.uint8)
    emask = np.zeros(len(graph.nbr), np.uint8)
    _, pred = _dijkstra_masked_kernel(
        graph.indptr, graph.nbr, graph.edge_cost, va, vb, vmask, emask
    )
    return _path_steps(pred, graph.block_site, graph.L, va, vb)


def _match_pairs(wmat: np.ndarray, nearest: int | None):
    n = wmat.shape[0]
    if nearest is None or nearest >= n - 1:
        if n >= 40:
            pairs = mwpm_dense_fast(wmat)
            return pairs, None
        return mwpm(wmat).pairs, None
    # sparsified matching: keep each vertex's m lightest partners
    keep = np.zeros((n, n), bool)
    order = np.argsort(wmat, axis=1, kind="stable")
    for i in range(n):
        cnt = 0
        for j in order[i]:
            if j == i:
                continue
            keep[i, j] = keep[j, i] = True
            cnt += 1
            if cnt >= nearest:
                break
    iu, iv = np.nonzero(np.triu(keep, k=1))
    ew = wmat[iu, iv]
    reflected = ew.max() + 1.0 - ew
    mate, _ = max_weight_matching_edges(n, iu, iv, reflected, True, warmstart=True)
    if np.any(mate < 0):
        raise MatchingError("sparsified matching graph has no perfect matching")
    pairs = tuple((int(v), int(mate[v])) for v in range(n) if v < mate[v])
    return pairs, None


def _empty_correction() -> Correction:
    return Correction(
        pairs=np.zeros((0, 2), np.int32),
        displacement=np.zeros((0, 2), np.int32),
        crosses_x=np.zeros(0, bool),
        crosses_y=np.zeros(0, bool),
        total_weight=0.0,
    )


def decode(graph: ContractedSyndromeGraph, config: DecoderConfig) -> Correction:
    """Match anyon pairs and extract their homology contributions."""
    anyons_all = graph.anyons
    if len(anyons_all) % 2 != 0:
        raise MatchingError(f"odd anyon count {len(anyons_all)}")
    if len(anyons_all) == 0:
        return _empty_correction()
    if (
        config.kind == DecoderKind.CG
        and not graph.uniform_cubic
        and config.nearest is None
        and len(anyons_all) > 24
    ):
        sparse = _cg_sparse_match(graph, anyons_all)
        if sparse is not None:
            pairs_idx, weights = sparse
            k = len(pairs_idx)
            out_pairs = np.empty((k, 2), np.int32)
            disp = np.zeros((k, 2), np.int32)
            cx = np.zeros(k, bool)
            cy = np.zeros(k, bool)
            L = graph.L
            for idx, (a, b) in enumerate(pairs_idx):
                va, vb = int(anyons_all[a]), int(anyons_all[b])
                out_pairs[idx] = (va, vb)
                pcx, pcy, pdx, pdy = _cg_pair_crossings(graph, va, vb)
                cx[idx] = bool(pcx)
                cy[idx] = bool(pcy)
                disp[idx] = (wrap_signed(pdx, L), wrap_signed(pdy, L))
            return Correction(
                pairs=out_pairs,
                displacement=disp,
                crosses_x=cx,
                crosses_y=cy,
                total_weight=float(sum(weights)),
            )
    wmat, anyons, payload = build_matching_weights(graph, config)
    na = len(anyons)
    pairs, _ = _match_pairs(wmat, config.nearest)
    k = len(pairs)
    out_pairs = np.empty((k, 2), np.int32)
    disp = np.zeros((k, 2), np.int32)
    cx = np.zeros(k, bool)
    cy = np.zeros(k, bool)
    total = 0.0
    L = graph.L
    preds = payload.get("preds")
    for idx, (a, b) in enumerate(pairs):
        va, vb = int(anyons[a]), int(anyons[b])
        out_pairs[idx] = (va, vb)
        total += wmat[min(a, b), max(a, b)]
        if preds is not None:
            pcx, pcy, pdx, pdy = _path_steps(
                preds[a], graph.block_site, L, va, vb
            )
            cx[idx] = bool(pcx)
            cy[idx] = bool(pcy)
            disp[idx] = (wrap_signed(pdx, L), wrap_signed(pdy, L))
        else:
            xa, ya = graph.block_xy(va)
            xb, yb = graph.block_xy(vb)
            dx = wrap_signed(xb - xa, L)
            dy = wrap_signed(yb - ya, L)
            disp[idx] = (dx, dy)
            cx[idx] = not (0 <= xa + dx < L)
            cy[idx] = not (0 <= ya + dy < L)
    return Correction(
        pairs=out_pairs,
        displacement=disp,
        crosses_x=cx,
        crosses_y=cy,
        total_weight=float(total),
    )
