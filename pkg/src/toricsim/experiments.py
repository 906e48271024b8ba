"""Monte Carlo experiments: logical-failure rates, threshold crossings,
pairing-probability ratios, and the gate-overhead formula.

Trials are pure functions of (params, decoder config, trial index); the
worker pool distributes trial ranges and reduces integer counts, so results
are independent of worker count and scheduling.  When several decoders run
over the same parameters they share each trial's sampled history and
syndrome graph, and the per-trial joint outcome pattern is recorded so
decoder comparisons can be bootstrapped as paired samples.
"""

from __future__ import annotations

import math
import multiprocessing
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .decoders import Correction, DecoderConfig, decode
from .graphalg import yen_k_shortest
from .matching import MatchingError
from .params import CodeParams
from .sampler import ErrorHistory, make_trial_rng, sample_continuous, sample_discrete
from .syndrome import ContractedSyndromeGraph, build_graph

RATES_COLUMNS = "decoder,s,L,p,n_trials,n_success,success_rate,std_err"
THRESHOLD_COLUMNS = "decoder,s,L_pair,p_th,p_th_err"
RATIOS_COLUMNS = "decoder,s,L,p,E,mean_ratio,n_pairs,n_graphs"
OVERHEAD_COLUMNS = "s,s_target,R_L"


@dataclass(frozen=True)
class TrialOutcome:
    failure_x: bool
    failure_y: bool
    anyon_count: int
    wall_time: float

    @property
    def success(self) -> bool:
        return not (self.failure_x or self.failure_y)


@dataclass(frozen=True)
class RateEstimate:
    decoder: str
    s: float
    L: int
    p: float
    n_trials: int
    n_success: int

    @property
    def success_rate(self) -> float:
        return self.n_success / self.n_trials

    @property
    def std_err(self) -> float:
        r = self.success_rate
        return math.sqrt(r * (1.0 - r) / self.n_trials)


class NoCrossingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ThresholdEstimate:
    """Crossing abscissa averaged over consecutive lattice-size pairs."""

    p_th: float
    p_th_err: float
    pairs: tuple[tuple[int, int], ...]
    pair_crossings: tuple[float, ...]
    pair_errs: tuple[float, ...]


# ---------------------------------------------------------------------------
# logical failure


def history_cut_parities(history: ErrorHistory) -> tuple[bool, bool]:
    """Parity of physical flips on the x and y homology cuts.

    The x cut sits between columns L-1 and 0 and is crossed by the
    x-directed qubits at x = L-1; similarly for y.
    """
    L = history.L
    x_cut = np.arange(L) + (L - 1) * L  # o=0, x=L-1, y in [0, L)
    y_cut = L * L + np.arange(L) * L + (L - 1)  # o=1, y=L-1
    if history.mode == "discrete":
        hx = int(history.flips[:, x_cut].sum()) & 1
        hy = int(history.flips[:, y_cut].sum()) & 1
    else:
        counts = np.diff(history.flip_ptr)
        hx = int(counts[x_cut].sum()) & 1
        hy = int(counts[y_cut].sum()) & 1
    return bool(hx), bool(hy)


def logical_failure(
    history: ErrorHistory, correction: Correction, L: int
) -> tuple[bool, bool]:
    """Whether the residual (errors + correction) winds around each direction."""
    hx, hy = history_cut_parities(history)
    cx = bool(np.logical_xor.reduce(correction.crosses_x)) if correction.n_pairs else False
    cy = bool(np.logical_xor.reduce(correction.crosses_y)) if correction.n_pairs else False
    return hx ^ cx, hy ^ cy


# ---------------------------------------------------------------------------
# trials


def sample_history(params: CodeParams, rng) -> ErrorHistory:
    if params.s > 0.0:
        return sample_discrete(params, rng)
    return sample_continuous(params, rng)


def run_trial(
    params: CodeParams, decoder_config: DecoderConfig, trial_index: int
) -> TrialOutcome:
    """Sample, build, decode, verify one trial; deterministic in its inputs."""
    t0 = time.perf_counter()
    rng = make_trial_rng(params.seed, trial_index)
    history = sample_history(params, rng)
    graph = build_graph(history)
    correction = decode(graph, decoder_config)
    fx, fy = logical_failure(history, correction, params.L)
    return TrialOutcome(
        failure_x=fx,
        failure_y=fy,
        anyon_count=len(graph.anyons),
        wall_time=time.perf_counter() - t0,
    )


def run_trial_multi(
    params: CodeParams, configs: tuple[DecoderConfig, ...], trial_index: int
) -> list[TrialOutcome]:
    """One sampled history decoded by several decoders (paired outcomes)."""
    rng = make_trial_rng(params.seed, trial_index)
    history = sample_history(params, rng)
    graph = build_graph(history)
    out = []
    for config in configs:
        t0 = time.perf_counter()
        correction = decode(graph, config)
        fx, fy = logical_failure(history, correction, params.L)
        out.append(
            TrialOutcome(
                failure_x=fx,
                failure_y=fy,
                anyon_count=len(graph.anyons),
                wall_time=time.perf_counter() - t0,
            )
        )
    return out


def _rate_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    params_dict, config_dicts, lo, hi = args
    params = CodeParams.from_dict(params_dict)
    configs = tuple(DecoderConfig.from_dict(d) for d in config_dicts)
    k = len(configs)
    n_success = np.zeros(k, np.int64)
    joint = np.zeros(1 << k, np.int64)
    for trial in range(lo, hi):
        outcomes = run_trial_multi(params, configs, trial)
        pattern = 0
        for d, oc in enumerate(outcomes):
            if oc.success:
                n_success[d] += 1
            else:
                pattern |= 1 << d
        joint[pattern] += 1
    return n_success, joint


def run_rate_point(
    params: CodeParams,
    configs: tuple[DecoderConfig, ...],
    n_trials: int,
    workers: int = 1,
    pool=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Success counts per decoder plus joint failure-pattern counts.

    The reduction sums integers, so any worker count gives identical output.
    """
    if len(configs) > 6:
        raise ValueError("joint patterns limited to 6 decoders")
    chunk = max(1, min(n_trials, 250))
    tasks = [
        (params.to_dict(), [c.to_dict() for c in configs], lo, min(lo + chunk, n_trials))
        for lo in range(0, n_trials, chunk)
    ]
    k = len(configs)
    n_success = np.zeros(k, np.int64)
    joint = np.zeros(1 << k, np.int64)
    if workers <= 1 and pool is None:
        results = map(_rate_chunk, tasks)
    elif pool is not None:
        results = pool.imap_unordered(_rate_chunk, tasks)
    else:
        with multiprocessing.get_context("fork").Pool(workers) as own_pool:
            for res in own_pool.imap_unordered(_rate_chunk, tasks):
                n_success += res[0]
                joint += res[1]
            return n_success, joint
    for res in results:
        n_success += res[0]
        joint += res[1]
    return n_success, joint


@dataclass
class GridResult:
    """Success counts for every (decoder, L, p) cell plus joint patterns."""

    decoders: tuple[str, ...]
    s: float
    L_set: tuple[int, ...]
    p_grid: tuple[float, ...]
    n_trials: int
    seed: int
    n_success: np.ndarray  # (n_dec, n_L, n_p)
    joint: np.ndarray  # (n_L, n_p, 2**n_dec)

    def rate(self, d: int, li: int, pi: int) -> float:
        return self.n_success[d, li, pi] / self.n_trials

    def rates(self, d: int) -> np.ndarray:
        return self.n_success[d] / self.n_trials

    def to_dict(self) -> dict:
        return {
            "decoders": list(self.decoders),
            "s": self.s,
            "L_set": list(self.L_set),
            "p_grid": list(self.p_grid),
            "n_trials": self.n_trials,
            "seed": self.seed,
            "n_success": self.n_success.tolist(),
            "joint": self.joint.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridResult":
        return cls(
            decoders=tuple(d["decoders"]),
            s=d["s"],
            L_set=tuple(d["L_set"]),
            p_grid=tuple(d["p_grid"]),
            n_trials=d["n_trials"],
            seed=d["seed"],
            n_success=np.asarray(d["n_success"], np.int64),
            joint=np.asarray(d["joint"], np.int64),
        )

    def rate_estimates(self, configs: tuple[DecoderConfig, ...]) -> list[RateEstimate]:
        out = []
        for d, config in enumerate(configs):
            for li, L in enumerate(self.L_set):
                for pi, p in enumerate(self.p_grid):
                    out.append(
                        RateEstimate(
                            decoder=config.label(),
                            s=self.s,
                            L=L,
                            p=p,
                            n_trials=self.n_trials,
                            n_success=int(self.n_success[d, li, pi]),
                        )
                    )
        return out


def _base_params(L: int, s: float, p: float, proto: CodeParams | None, seed: int) -> CodeParams:
    q = None
    rounds = None
    horizon = None
    if proto is not None:
        q = proto.q if proto.q != proto.p else None
        rounds = proto.rounds
        horizon = proto.horizon
    if s > 0:
        horizon = None
    else:
        rounds = None
    return CodeParams(L=L, s=s, p=p, q=q, rounds=rounds, horizon=horizon, seed=seed)


def run_rate_grid(
    s: float,
    L_set: tuple[int, ...],
    p_grid: tuple[float, ...],
    configs: tuple[DecoderConfig, ...],
    n_trials: int,
    seed: int,
    workers: int = 1,
    progress=None,
) -> GridResult:
    """Shared-history rate grid over lattice sizes and error rates."""
    n_dec = len(configs)
    n_success = np.zeros((n_dec, len(L_set), len(p_grid)), np.int64)
    joint = np.zeros((len(L_set), len(p_grid), 1 << n_dec), np.int64)
    pool = None
    try:
        if workers > 1:
            pool = multiprocessing.get_context("fork").Pool(workers)
        for li, L in enumerate(L_set):
            for pi, p in enumerate(p_grid):
                params = _base_params(L, s, p, None, seed)
                ns, jt = run_rate_point(params, configs, n_trials, workers, pool)
                n_success[:, li, pi] = ns
                joint[li, pi] = jt
                if progress is not None:
                    progress(f"L={L} p={p:.6g}: " + " ".join(
                        f"{configs[d].label()}={ns[d]/n_trials:.4f}" for d in range(n_dec)
                    ))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return GridResult(
        decoders=tuple(c.label() for c in configs),
        s=s,
        L_set=tuple(L_set),
        p_grid=tuple(float(p) for p in p_grid),
        n_trials=n_trials,
        seed=seed,
        n_success=n_success,
        joint=joint,
    )


# ---------------------------------------------------------------------------
# threshold estimation


def _pair_crossing(
    p_grid: np.ndarray, r_small: np.ndarray, r_big: np.ndarray, window: int = 5
) -> float:
    """Crossing abscissa of two success curves via local quadratic fits.

    The smaller lattice wins above threshold, the larger below; the curves'
    quadratic fits over the ``window`` grid points nearest a coarse linear
    estimate are intersected by sign change on a fine mesh.
    """
    d = r_big - r_small
    # coarse estimate: root of the global linear fit of the difference
    slope, icept = np.polyfit(p_grid, d, 1)
    p0 = -icept / slope if slope != 0 else float(p_grid[len(p_grid) // 2])
    p0 = min(max(p0, p_grid[0]), p_grid[-1])
    idx = np.argsort(np.abs(p_grid - p0), kind="stable")[:window]
    idx = np.sort(idx)
    xs = p_grid[idx]
    qa = np.polyfit(xs, r_small[idx], 2)
    qb = np.polyfit(xs, r_big[idx], 2)
    fine = np.linspace(xs[0], xs[-1], 512)
    diff = np.polyval(qb, fine) - np.polyval(qa, fine)
    sign = np.sign(diff)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) == 0:
        if np.any(diff == 0.0):
            return float(fine[np.nonzero(diff == 0.0)[0][0]])
        raise NoCrossingError("no crossing in grid")
    # pick the flip nearest the coarse estimate
    j = flips[np.argmin(np.abs(fine[flips] - p0))]
    x0, x1 = fine[j], fine[j + 1]
    y0, y1 = diff[j], diff[j + 1]
    return float(x0 - y0 * (x1 - x0) / (y1 - y0))


def fit_threshold(
    p_grid,
    rates_by_L: dict[int, np.ndarray],
    n_trials: int,
    seed: int = 0,
    n_bootstrap: int = 200,
    window: int = 5,
) -> ThresholdEstimate:
    """Mean crossing of consecutive-L success curves with bootstrap error."""
    p_grid = np.asarray(p_grid, np.float64)
    L_sorted = sorted(rates_by_L)
    if len(L_sorted) < 2:
        raise ValueError("need at least two lattice sizes")
    pairs = [(L_sorted[i], L_sorted[i + 1]) for i in range(len(L_sorted) - 1)]
    crossings = [
        _pair_crossing(p_grid, rates_by_L[a], rates_by_L[b], window) for a, b in pairs
    ]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB007]))
    boot_means = []
    boot_per_pair = [[] for _ in pairs]
    for _ in range(n_bootstrap):
        resampled = {
            L: rng.binomial(n_trials, np.clip(rates_by_L[L], 0.0, 1.0)) / n_trials
            for L in L_sorted
        }
        vals = []
        for pi, (a, b) in enumerate(pairs):
            try:
                c = _pair_crossing(p_grid, resampled[a], resampled[b], window)
            except NoCrossingError:
                continue
            boot_per_pair[pi].append(c)
            vals.append(c)
        if vals:
            boot_means.append(float(np.mean(vals)))
    err = float(np.std(boot_means)) if len(boot_means) > 1 else float("nan")
    pair_errs = tuple(
        float(np.std(v)) if len(v) > 1 else float("nan") for v in boot_per_pair
    )
    return ThresholdEstimate(
        p_th=float(np.mean(crossings)),
        p_th_err=err,
        pairs=tuple(pairs),
        pair_crossings=tuple(float(c) for c in crossings),
        pair_errs=pair_errs,
    )


PAPER_THRESHOLDS = {
    # (kind, s): paper threshold as a fraction, used only to centre grids
    ("CG", 1.0): 0.02937,
    ("CG", 0.0): 0.01688,
    ("CG_DEG", 1.0): 0.03050,
    ("CG_DEG", 0.0): 0.01699,
    ("BG", 1.0): 0.02937,
    ("BG", 0.0): 0.0120,
    ("BG_DEG", 1.0): 0.02937,
    ("AP", 1.0): 0.02937,
    ("AP", 0.0): 0.0132,
}


def default_p_grid(kind: str, s: float, n_points: int = 12, span: float = 0.4):
    """Linear grid centred on the published threshold for (kind, s)."""
    lo = PAPER_THRESHOLDS.get((kind, 0.0), 0.015)
    hi = PAPER_THRESHOLDS.get((kind, 1.0), 0.029)
    centre = lo + (hi - lo) * s
    return tuple(np.linspace(centre * (1 - span), centre * (1 + span), n_points))


def estimate_threshold(
    L_set,
    p_grid,
    s: float,
    decoder_config: DecoderConfig,
    n_trials: int,
    seed: int = 0,
    workers: int = 1,
    progress=None,
) -> tuple[ThresholdEstimate, GridResult]:
    """Run the rate grid for one decoder and fit the crossing."""
    grid = run_rate_grid(
        s, tuple(L_set), tuple(p_grid), (decoder_config,), n_trials, seed, workers,
        progress,
    )
    est = threshold_from_grid(grid, 0)
    return est, grid


def threshold_from_grid(grid: GridResult, decoder_index: int, window: int = 5) -> ThresholdEstimate:
    rates = {
        L: grid.n_success[decoder_index, li] / grid.n_trials
        for li, L in enumerate(grid.L_set)
    }
    return fit_threshold(
        np.asarray(grid.p_grid),
        rates,
        grid.n_trials,
        seed=grid.seed,
        window=window,
    )


def paired_gap_bootstrap(
    grid: GridResult,
    d_plus: int,
    d_minus: int,
    n_bootstrap: int = 200,
    window: int = 5,
) -> tuple[float, float]:
    """Bootstrap mean and std of p_th(d_plus) - p_th(d_minus).

    Resamples the per-trial joint failure patterns, preserving the
    correlation induced by the shared histories.
    """
    n_dec = len(grid.decoders)
    patterns = np.arange(1 << n_dec)
    succ_plus = (patterns >> d_plus) & 1 == 0
    succ_minus = (patterns >> d_minus) & 1 == 0
    rng = np.random.default_rng(np.random.SeedSequence([grid.seed, 0xD1FF]))
    gaps = []
    for _ in range(n_bootstrap):
        rp: dict[int, np.ndarray] = {}
        rm: dict[int, np.ndarray] = {}
        for li, L in enumerate(grid.L_set):
            rp[L] = np.empty(len(grid.p_grid))
            rm[L] = np.empty(len(grid.p_grid))
            for pi in range(len(grid.p_grid)):
                counts = rng.multinomial(grid.n_trials, grid.joint[li, pi] / grid.n_trials)
                rp[L][pi] = counts[succ_plus].sum() / grid.n_trials
                rm[L][pi] = counts[succ_minus].sum() / grid.n_trials
        try:
            ep = fit_threshold(grid.p_grid, rp, grid.n_trials, seed=grid.seed,
                               n_bootstrap=0, window=window)
            em = fit_threshold(grid.p_grid, rm, grid.n_trials, seed=grid.seed,
                               n_bootstrap=0, window=window)
        except NoCrossingError:
            continue
        gaps.append(ep.p_th - em.p_th)
    if len(gaps) < 2:
        return float("nan"), float("nan")
    return float(np.mean(gaps)), float(np.std(gaps))


# ---------------------------------------------------------------------------
# pairing-probability ratios


def _ratio_chunk(args):
    params_dict, config_dict, e_max, lo, hi = args
    params = CodeParams.from_dict(params_dict)
    config = DecoderConfig.from_dict(config_dict)
    sums = np.zeros(e_max + 1)
    graph_counts = np.zeros(e_max + 1, np.int64)
    pair_counts = np.zeros(e_max + 1, np.int64)
    graphs_used = 0
    for g in range(lo, hi):
        rng = make_trial_rng(params.seed, g)
        history = sample_history(params, rng)
        graph = build_graph(history)
        correction = decode(graph, config)
        if correction.n_pairs == 0:
            continue
        csr = graph.as_csr()
        g_sums = np.zeros(e_max + 1)
        g_counts = np.zeros(e_max + 1, np.int64)
        for a, b in correction.pairs:
            weights = yen_k_shortest(csr, int(a), int(b), e_max + 1)
            l0 = weights[0]
            for e, le in enumerate(weights):
                g_sums[e] += math.exp(l0 - le)
                g_counts[e] += 1
        mask = g_counts > 0
        sums[mask] += g_sums[mask] / g_counts[mask]
        graph_counts[mask] += 1
        pair_counts += g_counts
        graphs_used += 1
    return sums, graph_counts, pair_counts, graphs_used


def pe_ratio_experiment(
    params: CodeParams,
    decoder_config: DecoderConfig,
    e_max: int,
    n_graphs: int,
    workers: int = 1,
    progress=None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Mean relative size of the E-th likeliest pairing route per matched pair.

    For every matched anyon pair the k shortest loopless path weights
    l_0 <= ... <= l_E give ratios exp(l_0 - l_E); these are averaged over
    the graph's matched pairs and then over graphs.  Returns (mean ratio
    per E, number of per-graph contributions per E, graphs used).
    Pairs with fewer than E+1 loopless paths contribute only their
    existing ratios.
    """
    if e_max < 1:
        raise ValueError("e_max must be >= 1")
    chunk = 25
    tasks = [
        (params.to_dict(), decoder_config.to_dict(), e_max, lo, min(lo + chunk, n_graphs))
        for lo in range(0, n_graphs, chunk)
    ]
    sums = np.zeros(e_max + 1)
    graph_counts = np.zeros(e_max + 1, np.int64)
    pair_counts = np.zeros(e_max + 1, np.int64)
    graphs_used = 0
    if workers > 1:
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            results = list(pool.imap_unordered(_ratio_chunk, tasks))
    else:
        results = [_ratio_chunk(t) for t in tasks]
    for s_, gc_, pc_, g_ in results:
        sums += s_
        graph_counts += gc_
        pair_counts += pc_
        graphs_used += g_
        if progress is not None:
            progress(f"ratio graphs done: {graphs_used}")
    with np.errstate(invalid="ignore"):
        means = np.where(graph_counts > 0, sums / graph_counts, np.nan)
    return means, pair_counts, graphs_used


# ---------------------------------------------------------------------------
# gate overhead


def gate_overhead(s: float, s_target: float) -> float:
    """Round-bundling gate-time overhead relative to asynchronous decoding.

    ``log(1 - s_target) / log(1 - s) * s`` for s < 0.99, clamped to 1 above.
    """
    if not 0.0 < s <= 1.0:
        raise ValueError(f"synchronicity {s} outside (0, 1]")
    if not 0.0 < s_target < 1.0:
        raise ValueError(f"target success {s_target} outside (0, 1)")
    if s >= 0.99:
        return 1.0
    return math.log(1.0 - s_target) / math.log(1.0 - s) * s


# ---------------------------------------------------------------------------
# CSV emission


def format_float(v: float) -> str:
    return repr(float(v))


def rates_csv_rows(estimates: list[RateEstimate]) -> list[str]:
    rows = [RATES_COLUMNS]
    for e in estimates:
        rows.append(
            f"{e.decoder},{format_float(e.s)},{e.L},{format_float(e.p)},"
            f"{e.n_trials},{e.n_success},{format_float(e.success_rate)},"
            f"{format_float(e.std_err)}"
        )
    return rows


def threshold_csv_rows(
    entries: list[tuple[str, float, ThresholdEstimate]]
) -> list[str]:
    rows = [THRESHOLD_COLUMNS]
    for decoder, s, est in entries:
        for (a, b), c, err in zip(est.pairs, est.pair_crossings, est.pair_errs):
            rows.append(
                f"{decoder},{format_float(s)},{a}-{b},{format_float(c)},{format_float(err)}"
            )
        rows.append(
            f"{decoder},{format_float(s)},mean,{format_float(est.p_th)},{format_float(est.p_th_err)}"
        )
    return rows


def ratios_csv_rows(
    decoder: str,
    s: float,
    L: int,
    p: float,
    means: np.ndarray,
    counts: np.ndarray,
    n_graphs: int,
) -> list[str]:
    rows = [RATIOS_COLUMNS]
    for e in range(len(means)):
        rows.append(
            f"{decoder},{format_float(s)},{L},{format_float(p)},{e},"
            f"{format_float(means[e])},{int(counts[e])},{n_graphs}"
        )
    return rows


def overhead_csv_rows(s_values, s_target: float) -> list[str]:
    rows = [OVERHEAD_COLUMNS]
    for s in s_values:
        rows.append(
            f"{format_float(s)},{format_float(s_target)},{format_float(gate_overhead(s, s_target))}"
        )
    return rows
