"""Error-history generation.

Discrete mode (0 < s <= 1) performs measurement rounds at time spacing
``s``: every round each qubit flips with probability ``p_delta``, then each
stabiliser attempt succeeds with probability ``s`` and, if successful, its
outcome is flipped with probability ``q``.  The final round is perfect
(always succeeds, no outcome error).  Continuous mode (s = 0) draws Poisson
event counts and uniform event times directly, with a perfect measurement
appended at the horizon for every site.

Qubit indexing: ``q = o * L**2 + x * L + y`` where o = 0 is the x-directed
edge from site (x, y) to (x+1, y) and o = 1 the y-directed edge to (x, y+1).
Site indexing: ``v = x * L + y``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .params import CodeParams

DISCRETE = "discrete"
CONTINUOUS = "continuous"


def make_trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial generator: PCG64 keyed on (master seed, trial).

    Trials can run on any worker in any order and still draw identical
    streams.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, trial_index])))


def poisson_flip_rate(p: float, T: float) -> float:
    """Mean flip count per qubit over a horizon T in the continuous limit."""
    if not 0.0 <= p < 0.5:
        raise ValueError(f"error probability {p} outside [0, 0.5)")
    if T <= 0:
        raise ValueError(f"horizon {T} must be positive")
    return 0.5 * T * math.log(1.0 / (1.0 - 2.0 * p))


@dataclass
class ErrorHistory:
    """Space-time record of qubit flips and measurement attempts.

    Discrete mode stores dense per-round boolean arrays; continuous mode
    stores per-qubit flip times and per-site measurement times in CSR form.
    Measurement lists always end with a perfect measurement at the horizon.
    """

    mode: str
    L: int
    s: float
    p: float
    q: float
    horizon: float
    # discrete-mode arrays
    flips: np.ndarray | None = None  # (rounds, 2 L^2) qubit flip per round
    success: np.ndarray | None = None  # (rounds, L^2) attempt succeeded
    meas_flip: np.ndarray | None = None  # (rounds, L^2) outcome error
    # continuous-mode CSR arrays
    flip_ptr: np.ndarray | None = None
    flip_time: np.ndarray | None = None
    meas_ptr: np.ndarray | None = None
    meas_time: np.ndarray | None = None
    meas_errflip: np.ndarray | None = None

    @property
    def n_rounds(self) -> int:
        if self.mode != DISCRETE:
            raise ValueError("rounds undefined for continuous histories")
        return self.flips.shape[0]

    def qubit_flip_times(self, qubit: int) -> np.ndarray:
        """Ordered flip times of one qubit (round r maps to time r*s)."""
        if self.mode == DISCRETE:
            rounds = np.nonzero(self.flips[:, qubit])[0] + 1
            return rounds * self.s
        lo, hi = self.flip_ptr[qubit], self.flip_ptr[qubit + 1]
        return self.flip_time[lo:hi]

    def site_measurements(self, site: int) -> tuple[np.ndarray, np.ndarray]:
        """(times, reported_outcome_flips) of successful measurements at a site."""
        if self.mode == DISCRETE:
            rounds = np.nonzero(self.success[:, site])[0]
            times = (rounds + 1) * self.s
            return times, self.meas_flip[rounds, site].copy()
        lo, hi = self.meas_ptr[site], self.meas_ptr[site + 1]
        return self.meas_time[lo:hi], self.meas_errflip[lo:hi]

    def erased_rounds(self, site: int) -> np.ndarray:
        """Round indices (1-based) of erased attempts at a site (discrete only)."""
        if self.mode != DISCRETE:
            raise ValueError("erasure applies to discrete attempts only")
        return np.nonzero(~self.success[:, site])[0] + 1

    def adjacent_qubits(self, site: int) -> tuple[int, int, int, int]:
        L = self.L
        x, y = divmod(site, L)
        nsq = L * L
        return (
            x * L + y,  # x-edge at (x, y)
            ((x - 1) % L) * L + y,  # x-edge at (x-1, y)
            nsq + x * L + y,  # y-edge at (x, y)
            nsq + x * L + (y - 1) % L,  # y-edge at (x, y-1)
        )

    def to_json(self) -> str:
        """Debug dump: event lists per qubit and site."""
        n_qubits = 2 * self.L * self.L
        n_sites = self.L * self.L
        payload = {
            "mode": self.mode,
            "L": self.L,
            "s": self.s,
            "p": self.p,
            "q": self.q,
            "horizon": self.horizon,
            "qubit_flips": {
                str(qb): self.qubit_flip_times(qb).tolist()
                for qb in range(n_qubits)
                if len(self.qubit_flip_times(qb))
            },
            "measurements": {
                str(v): [
                    [float(t), bool(f)]
                    for t, f in zip(*self.site_measurements(v))
                ]
                for v in range(n_sites)
            },
        }
        if self.mode == DISCRETE:
            payload["erased_rounds"] = {
                str(v): self.erased_rounds(v).tolist()
                for v in range(n_sites)
                if len(self.erased_rounds(v))
            }
        return json.dumps(payload, sort_keys=True)


def sample_discrete(params: CodeParams, rng: np.random.Generator) -> ErrorHistory:
    """Round-based history: flips, then attempts, final round perfect.

    Draw order is fixed (flip block, success block, outcome block) so a
    given generator state always produces the same history.
    """
    if params.s <= 0.0:
        raise ValueError("discrete sampling requires s > 0")
    L, n_rounds = params.L, params.rounds
    n_qubits, n_sites = 2 * L * L, L * L
    p_delta = params.p_delta
    flips = rng.random((n_rounds, n_qubits)) < p_delta
    success = rng.random((n_rounds, n_sites)) < params.s
    success[-1, :] = True  # final round is perfect
    meas_flip = rng.random((n_rounds, n_sites)) < params.q
    meas_flip[~success] = False  # erased attempts carry no outcome
    meas_flip[-1, :] = False  # ... and no outcome error
    return ErrorHistory(
        mode=DISCRETE,
        L=L,
        s=params.s,
        p=params.p,
        q=params.q,
        horizon=n_rounds * params.s,
        flips=flips,
        success=success,
        meas_flip=meas_flip,
    )


def sample_continuous(params: CodeParams, rng: np.random.Generator) -> ErrorHistory:
    """Poisson event history over (0, T) with a perfect measurement at T."""
    if params.s != 0.0:
        raise ValueError("continuous sampling requires s = 0")
    L = params.L
    T = float(params.horizon)
    n_qubits, n_sites = 2 * L * L, L * L

    flip_counts = rng.poisson(poisson_flip_rate(params.p, T), n_qubits)
    flip_ptr = np.zeros(n_qubits + 1, np.int64)
    np.cumsum(flip_counts, out=flip_ptr[1:])
    flip_time = rng.random(int(flip_ptr[-1])) * T
    for qb in range(n_qubits):
        lo, hi = flip_ptr[qb], flip_ptr[qb + 1]
        flip_time[lo:hi] = np.sort(flip_time[lo:hi])

    meas_counts = rng.poisson(T, n_sites)
    meas_ptr = np.zeros(n_sites + 1, np.int64)
    np.cumsum(meas_counts + 1, out=meas_ptr[1:])  # +1 for the perfect round
    meas_time = np.empty(int(meas_ptr[-1]))
    meas_errflip = np.zeros(int(meas_ptr[-1]), bool)
    raw_times = rng.random(int(meas_counts.sum())) * T
    raw_err = rng.random(int(meas_counts.sum())) < params.q
    pos = 0
    for v in range(n_sites):
        c = int(meas_counts[v])
        lo = meas_ptr[v]
        order = np.argsort(raw_times[pos : pos + c], kind="stable")
        meas_time[lo : lo + c] = raw_times[pos : pos + c][order]
        meas_errflip[lo : lo + c] = raw_err[pos : pos + c][order]
        meas_time[lo + c] = T
        pos += c
    return ErrorHistory(
        mode=CONTINUOUS,
        L=L,
        s=0.0,
        p=params.p,
        q=params.q,
        horizon=T,
        flip_ptr=flip_ptr,
        flip_time=flip_time,
        meas_ptr=meas_ptr,
        meas_time=meas_time,
        meas_errflip=meas_errflip,
    )


def true_parity_at(history: ErrorHistory, site: int, time: float) -> bool:
    """Parity of flips at or before ``time`` on the site's four qubits.

    Flips order before measurements at equal timestamps, matching the
    round ordering (flips first) of the discrete sampler.
    """
    parity = 0
    for qb in history.adjacent_qubits(site):
        times = history.qubit_flip_times(qb)
        parity ^= int(np.searchsorted(times, time, side="right")) & 1
    return bool(parity)


def reported_outcome_at(history: ErrorHistory, site: int, index: int) -> bool:
    """Reported outcome bit of the site's index-th successful measurement."""
    times, errflips = history.site_measurements(site)
    return true_parity_at(history, site, float(times[index])) ^ bool(errflips[index])
