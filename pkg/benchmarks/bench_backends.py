#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-Python fallbacks.

Times the hot kernels (shortest paths, degeneracy search, blossom matching,
graph construction) and a full decode on representative workloads, running
each through both the JIT-compiled entry point and its ``py_func`` fallback
(the path taken when TORICSIM_NUMBA=0).

Usage:
    python benchmarks/bench_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from toricsim._accel import NUMBA_ENABLED, backend_name
from toricsim.decoders import DecoderConfig, DecoderKind, decode
from toricsim.graphalg import _degeneracy_kernel, _dijkstra_kernel
from toricsim.matching import _mwm_kernel
from toricsim.params import CodeParams
from toricsim.sampler import make_trial_rng
from toricsim.experiments import sample_history
from toricsim.syndrome import _blocks_and_edges, build_graph, build_simple, contract


def timeit(fn, min_reps=3, budget=2.0) -> float:
    fn()  # warm up / JIT
    reps = 0
    t0 = time.perf_counter()
    while True:
        fn()
        reps += 1
        dt = time.perf_counter() - t0
        if reps >= min_reps and dt > budget / 4:
            return dt / reps


def row(name: str, jit_s: float, py_s: float) -> None:
    speedup = py_s / jit_s if jit_s > 0 else float("inf")
    print(f"{name:38s} {jit_s*1e3:10.3f} ms {py_s*1e3:12.3f} ms {speedup:9.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    L = 8 if args.quick else 10
    params_s0 = CodeParams(L=L, s=0.0, p=0.0169, seed=7)
    params_s1 = CodeParams(L=L, s=1.0, p=0.0294, seed=7)
    hist = sample_history(params_s0, make_trial_rng(7, 0))
    graph = build_graph(hist)
    anyon = int(graph.anyons[0])

    print(f"backend: {backend_name()} (NUMBA_ENABLED={NUMBA_ENABLED})")
    print(f"workload: L={L}, contracted graph with {graph.n_blocks} blocks, "
          f"{len(graph.nbr)//2} edges, {len(graph.anyons)} anyons")
    print(f"{'kernel':38s} {'numba':>13s} {'python':>15s} {'speedup':>9s}")

    row(
        "dijkstra (full graph)",
        timeit(lambda: _dijkstra_kernel(graph.indptr, graph.nbr, graph.edge_cost, anyon)),
        timeit(
            lambda: _dijkstra_kernel.py_func(
                graph.indptr, graph.nbr, graph.edge_cost, anyon
            ),
            min_reps=1,
        ),
    )
    row(
        "degeneracy search (full graph)",
        timeit(lambda: _degeneracy_kernel(graph.indptr, graph.nbr, graph.edge_overlap, anyon)),
        timeit(
            lambda: _degeneracy_kernel.py_func(
                graph.indptr, graph.nbr, graph.edge_overlap, anyon
            ),
            min_reps=1,
        ),
    )

    n = 80 if args.quick else 150
    rng = np.random.default_rng(3)
    pts = rng.random((n, 3)) * L
    w = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    np.fill_diagonal(w, 0.0)
    iu, iv = np.triu_indices(n, k=1)
    refl = w[iu, iv].max() + 1.0 - w[iu, iv]
    a32 = iu.astype(np.int32)
    b32 = iv.astype(np.int32)
    row(
        f"blossom matching (n={n} complete)",
        timeit(lambda: _mwm_kernel(n, a32, b32, refl, True, True)),
        timeit(lambda: _mwm_kernel.py_func(n, a32, b32, refl, True, True), min_reps=1),
    )

    hist_d = sample_history(CodeParams(L=L, s=0.5, p=0.02, seed=7), make_trial_rng(7, 0))
    simple = build_simple(hist_d)
    success = simple.success_mask
    outcomes = simple.reported_outcomes
    succ_t = success.T
    sites, rounds = np.nonzero(succ_t)
    counts = np.bincount(sites, minlength=L * L)
    meas_ptr = np.zeros(L * L + 1, np.int64)
    np.cumsum(counts, out=meas_ptr[1:])
    meas_time = (rounds + 1).astype(np.float64) * 0.5
    outcome = outcomes.T[succ_t].astype(np.uint8)
    row(
        "contracted-graph construction",
        timeit(lambda: _blocks_and_edges(L, meas_ptr, meas_time, outcome)),
        timeit(
            lambda: _blocks_and_edges.py_func(L, meas_ptr, meas_time, outcome),
            min_reps=1,
        ),
    )

    cfg = DecoderConfig(kind=DecoderKind.CG)
    print()
    print("end-to-end decode (jit backend only; the python path is the same "
          "code uncompiled):")
    for name, g in (("s=0 contracted", graph),
                    ("s=1 uniform", build_graph(sample_history(params_s1, make_trial_rng(7, 0))))):
        for kind in (DecoderKind.CG, DecoderKind.CG_DEG, DecoderKind.BG, DecoderKind.AP):
            t = timeit(lambda: decode(g, DecoderConfig(kind=kind)))
            print(f"  {name:16s} {kind.value:8s} {t*1e3:8.2f} ms")


if __name__ == "__main__":
    main()
