"""Syndrome graphs: the cubic simple graph and its erasure contraction.

A parity block is the interval between two consecutive successful
measurements at one site; blocks tile (0, horizon] because initialisation
acts as a clean reference at t = 0 and the final measurement at the horizon
is perfect.  Contracting every run of erased attempts yields one vertex per
block; parallel space edges between two adjacent blocks merge into a single
edge whose error probability follows from their time overlap.  In
continuous mode (s = 0) the contracted graph is built directly from the
recorded measurement times.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._accel import njit
from .graphalg import CsrGraph
from .params import CodeParams
from .sampler import CONTINUOUS, DISCRETE, ErrorHistory

SPACE = 0
TIME = 1


@dataclass
class ParityBlock:
    """Interval between consecutive successful measurements at one site."""

    site: int
    t_start: float
    t_end: float
    is_anyon: bool


def time_overlap(block_a: ParityBlock, block_b: ParityBlock) -> float:
    """Signed overlap of two parity blocks; an edge exists only when > 0."""
    return min(block_a.t_end, block_b.t_end) - max(block_a.t_start, block_b.t_start)


def merged_edge_probability(omega: float, p: float) -> float:
    """Flip probability of a merged space edge with time overlap ``omega``.

    Equals the odd-flip probability over omega time units,
    ``(1 - (1 - 2p)^omega) / 2``; exactly ``p`` at omega = 1.
    """
    if omega <= 0:
        raise ValueError(f"overlap {omega} must be positive")
    if not 0.0 <= p < 0.5:
        raise ValueError(f"error probability {p} outside [0, 0.5)")
    if omega == 1.0:
        return p
    return 0.5 * (1.0 - (1.0 - 2.0 * p) ** omega)


@dataclass
class SimpleSyndromeGraph:
    """Cubic space-time graph of potential errors (discrete mode).

    Row r-1 of ``space_flips`` holds the qubit flips of round r; row r-1 of
    ``time_flips`` / ``time_erased`` describes the measurement at round r
    (rounds 1 .. rounds-1; the final round is perfect and has no time edge).
    """

    L: int
    s: float
    p: float
    q: float
    space_flips: np.ndarray
    time_flips: np.ndarray
    time_erased: np.ndarray

    @property
    def n_rounds(self) -> int:
        return self.space_flips.shape[0]

    @property
    def p_delta(self) -> float:
        from .params import pdelta_from_p

        return pdelta_from_p(self.p, self.s)

    @cached_property
    def site_round_parity(self) -> np.ndarray:
        """Per-round parity of the adjacent qubit flips, shape (rounds, L^2)."""
        L, n_rounds = self.L, self.n_rounds
        fx = self.space_flips[:, : L * L].reshape(n_rounds, L, L)
        fy = self.space_flips[:, L * L :].reshape(n_rounds, L, L)
        par = fx ^ np.roll(fx, 1, axis=1) ^ fy ^ np.roll(fy, 1, axis=2)
        return par.reshape(n_rounds, L * L)

    @cached_property
    def vertex_parity(self) -> np.ndarray:
        """Parity of each check vertex (round r compares rounds r-1 and r)."""
        n_sites = self.L * self.L
        mf = np.zeros((self.n_rounds, n_sites), bool)
        mf[: self.n_rounds - 1] = self.time_flips
        mf_prev = np.zeros_like(mf)
        mf_prev[1:] = mf[:-1]
        return self.site_round_parity ^ mf ^ mf_prev

    @cached_property
    def reported_outcomes(self) -> np.ndarray:
        """Measurement outcome bit at every round (valid where successful)."""
        true_par = np.logical_xor.accumulate(self.site_round_parity, axis=0)
        mf = np.zeros_like(true_par)
        mf[: self.n_rounds - 1] = self.time_flips
        return true_par ^ mf

    @property
    def success_mask(self) -> np.ndarray:
        ok = np.ones((self.n_rounds, self.L * self.L), bool)
        ok[: self.n_rounds - 1] = ~self.time_erased
        return ok


def build_simple(history: ErrorHistory) -> SimpleSyndromeGraph:
    """Simple syndrome graph of a discrete history."""
    if history.mode != DISCRETE:
        raise ValueError("the simple syndrome graph requires a discrete history")
    n_rounds = history.n_rounds
    return SimpleSyndromeGraph(
        L=history.L,
        s=history.s,
        p=history.p,
        q=history.q,
        space_flips=history.flips,
        time_flips=history.meas_flip[: n_rounds - 1],
        time_erased=~history.success[: n_rounds - 1],
    )


@dataclass
class ContractedSyndromeGraph:
    """Parity-block graph with merged space edges.

    Vertices are parity blocks; space edges carry the blocks' time overlap
    and the merged flip probability, time edges carry the measurement error
    probability q (and act as overlap 1 in degeneracy sums).  ``edge_cost``
    caches ln((1-p_e)/p_e).
    """

    L: int
    s: float
    p: float
    q: float
    horizon: float
    block_site: np.ndarray
    t_start: np.ndarray
    t_end: np.ndarray
    is_anyon: np.ndarray
    indptr: np.ndarray
    nbr: np.ndarray
    edge_kind: np.ndarray
    edge_overlap: np.ndarray
    edge_prob: np.ndarray
    edge_cost: np.ndarray
    uniform_cubic: bool  # s = 1, q = p, no erasures: weights are uniform

    @property
    def n_blocks(self) -> int:
        return len(self.block_site)

    @property
    def anyons(self) -> np.ndarray:
        return np.nonzero(self.is_anyon)[0].astype(np.int32)

    def block(self, v: int) -> ParityBlock:
        return ParityBlock(
            site=int(self.block_site[v]),
            t_start=float(self.t_start[v]),
            t_end=float(self.t_end[v]),
            is_anyon=bool(self.is_anyon[v]),
        )

    def block_xy(self, v: int) -> tuple[int, int]:
        return divmod(int(self.block_site[v]), self.L)

    def as_csr(self) -> CsrGraph:
        """View for the shortest-path kernels (cost metric, overlap sums)."""
        return CsrGraph(
            indptr=self.indptr,
            nbr=self.nbr,
            weight=self.edge_cost,
            overlap=self.edge_overlap,
        )

    def edges(self) -> list[tuple[int, int, int, float, float]]:
        """Undirected (u, v, kind, overlap, prob) list, u < v."""
        out = []
        for u in range(self.n_blocks):
            for k in range(self.indptr[u], self.indptr[u + 1]):
                v = int(self.nbr[k])
                if u < v:
                    out.append(
                        (
                            u,
                            v,
                            int(self.edge_kind[k]),
                            float(self.edge_overlap[k]),
                            float(self.edge_prob[k]),
                        )
                    )
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "s": self.s,
                "p": self.p,
                "q": self.q,
                "horizon": self.horizon,
                "blocks": [
                    [int(self.block_site[v]), float(self.t_start[v]),
                     float(self.t_end[v]), bool(self.is_anyon[v])]
                    for v in range(self.n_blocks)
                ],
                "edges": self.edges(),
            },
            sort_keys=True,
        )


@njit(cache=True)
def _blocks_and_edges(L, meas_ptr, meas_time, outcome):
    # One block per successful measurement (the block it closes); block j of
    # a site spans (t_{j-1}, t_j] with t_{-1} = 0 and the last t = horizon.
    n_sites = L * L
    nb = meas_ptr[n_sites]
    block_site = np.empty(nb, np.int32)
    t0 = np.empty(nb, np.float64)
    t1 = np.empty(nb, np.float64)
    anyon = np.zeros(nb, np.uint8)
    for v in range(n_sites):
        prev_t = 0.0
        prev_o = np.uint8(0)
        for i in range(meas_ptr[v], meas_ptr[v + 1]):
            block_site[i] = v
            t0[i] = prev_t
            t1[i] = meas_time[i]
            if outcome[i] != prev_o:
                anyon[i] = 1
            prev_t = meas_time[i]
            prev_o = outcome[i]
    cap = 5 * nb + 8
    eu = np.empty(cap, np.int32)
    ev = np.empty(cap, np.int32)
    ekind = np.empty(cap, np.uint8)
    eov = np.empty(cap, np.float64)
    ne = 0
    # time edges between consecutive blocks of a site (the separating
    # measurement is faulty; the final perfect one closes the last block)
    for v in range(n_sites):
        for i in range(meas_ptr[v], meas_ptr[v + 1] - 1):
            eu[ne] = i
            ev[ne] = i + 1
            ekind[ne] = 1
            eov[ne] = 1.0
            ne += 1
    # merged space edges: sweep block lists of lattice-adjacent sites
    for x in range(L):
        for y in range(L):
            va = x * L + y
            for d in range(2):
                if d == 0:
                    vb = ((x + 1) % L) * L + y
                else:
                    vb = x * L + (y + 1) % L
                i = meas_ptr[va]
                j = meas_ptr[vb]
                ia_end = meas_ptr[va + 1]
                jb_end = meas_ptr[vb + 1]
                while i < ia_end and j < jb_end:
                    ov = min(t1[i], t1[j]) - max(t0[i], t0[j])
                    if ov > 0.0:
                        eu[ne] = i
                        ev[ne] = j
                        ekind[ne] = 0
                        eov[ne] = ov
                        ne += 1
                    if t1[i] < t1[j]:
                        i += 1
                    elif t1[j] < t1[i]:
                        j += 1
                    else:
                        i += 1
                        j += 1
    return block_site, t0, t1, anyon, eu[:ne], ev[:ne], ekind[:ne], eov[:ne]


@njit(cache=True)
def _continuous_outcomes(L, flip_ptr, flip_time, meas_ptr, meas_time, meas_errflip):
    # Reported outcome of every successful measurement: parity of adjacent
    # qubit flips at or before the measurement time, xor the outcome error.
    n_sites = L * L
    nsq = L * L
    out = np.zeros(meas_time.shape[0], np.uint8)
    for x in range(L):
        for y in range(L):
            v = x * L + y
            q1 = x * L + y
            q2 = ((x - 1) % L) * L + y
            q3 = nsq + x * L + y
            q4 = nsq + x * L + (y - 1) % L
            total = (
                (flip_ptr[q1 + 1] - flip_ptr[q1])
                + (flip_ptr[q2 + 1] - flip_ptr[q2])
                + (flip_ptr[q3 + 1] - flip_ptr[q3])
                + (flip_ptr[q4 + 1] - flip_ptr[q4])
            )
            buf = np.empty(total, np.float64)
            pos = 0
            for qb in (q1, q2, q3, q4):
                for k in range(flip_ptr[qb], flip_ptr[qb + 1]):
                    buf[pos] = flip_time[k]
                    pos += 1
            buf.sort()
            fi = 0
            par = np.uint8(0)
            for mi in range(meas_ptr[v], meas_ptr[v + 1]):
                t = meas_time[mi]
                while fi < total and buf[fi] <= t:
                    par ^= np.uint8(1)
                    fi += 1
                out[mi] = par ^ meas_errflip[mi]
    return out


def _finish_graph(
    L: int,
    s: float,
    p: float,
    q: float,
    horizon: float,
    uniform_cubic: bool,
    parts,
) -> ContractedSyndromeGraph:
    block_site, t0, t1, anyon, eu, ev, ekind, eov = parts
    nb = len(block_site)
    prob = np.where(
        ekind == TIME,
        q,
        np.where(eov == 1.0, p, 0.5 * (1.0 - (1.0 - 2.0 * p) ** eov)),
    )
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    kind2 = np.concatenate([ekind, ekind])
    ov2 = np.concatenate([eov, eov])
    prob2 = np.concatenate([prob, prob])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    kind2, ov2, prob2 = kind2[order], ov2[order], prob2[order]
    indptr = np.zeros(nb + 1, np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    with np.errstate(divide="ignore"):
        cost = np.log((1.0 - prob2) / prob2)
    return ContractedSyndromeGraph(
        L=L,
        s=s,
        p=p,
        q=q,
        horizon=horizon,
        block_site=block_site,
        t_start=t0,
        t_end=t1,
        is_anyon=anyon.astype(bool),
        indptr=indptr,
        nbr=dst,
        edge_kind=kind2,
        edge_overlap=ov2,
        edge_prob=prob2,
        edge_cost=cost,
        uniform_cubic=uniform_cubic,
    )


def contract(simple: SimpleSyndromeGraph) -> ContractedSyndromeGraph:
    """Contract erased runs into parity blocks and merge parallel edges."""
    L, s = simple.L, simple.s
    n_rounds = simple.n_rounds
    n_sites = L * L
    success = simple.success_mask
    outcomes = simple.reported_outcomes
    succ_t = success.T  # (site, round): row-major scan gives per-site order
    sites, rounds = np.nonzero(succ_t)
    counts = np.bincount(sites, minlength=n_sites)
    meas_ptr = np.zeros(n_sites + 1, np.int64)
    np.cumsum(counts, out=meas_ptr[1:])
    meas_time = (rounds + 1).astype(np.float64) * s
    outcome = outcomes.T[succ_t].astype(np.uint8)
    # closed-form decoding shortcuts also assume a bipartite graph (no
    # second-order chains), which needs even L on the torus
    uniform = bool(
        s == 1.0
        and simple.q == simple.p
        and L % 2 == 0
        and not simple.time_erased.any()
    )
    parts = _blocks_and_edges(L, meas_ptr, meas_time, outcome)
    return _finish_graph(
        L, s, simple.p, simple.q, n_rounds * s, uniform, parts
    )


def build_contracted_direct(history: ErrorHistory) -> ContractedSyndromeGraph:
    """Contracted graph straight from a continuous history's event times."""
    if history.mode != CONTINUOUS:
        raise ValueError("direct construction requires a continuous history")
    L = history.L
    outcome = _continuous_outcomes(
        L,
        history.flip_ptr,
        history.flip_time,
        history.meas_ptr,
        history.meas_time,
        history.meas_errflip.astype(np.uint8),
    )
    parts = _blocks_and_edges(L, history.meas_ptr, history.meas_time, outcome)
    return _finish_graph(
        L, 0.0, history.p, history.q, history.horizon, False, parts
    )


def build_graph(history: ErrorHistory) -> ContractedSyndromeGraph:
    """Mode dispatch: contract(build_simple(h)) or the direct construction."""
    if history.mode == DISCRETE:
        return contract(build_simple(history))
    return build_contracted_direct(history)
