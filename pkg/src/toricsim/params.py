"""Code geometry, simulation parameters, and the probability conversions.

The lattice is an L x L torus with a qubit on every edge and a stabiliser on
every vertex.  Stabiliser measurements are attempted at discrete rounds and
succeed with probability ``s`` (the synchronicity); ``s = 0`` is the fully
continuous limit where successful measurements arrive as a rate-1 Poisson
process.  Physical errors are parameterised per unit time by ``p``; the
per-round flip probability at synchronicity ``s`` is
``p_step = (1 - (1 - 2p)^s) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple


class EdgeKind(Enum):
    """Edge classes of the simple syndrome graph."""

    SPACE_X = 0  # qubit on an x-directed lattice edge
    SPACE_Y = 1  # qubit on a y-directed lattice edge
    TIME = 2  # parity-check interval (measurement error slot)


class SpaceCoord(NamedTuple):
    """Site or plaquette coordinate on the periodic lattice, reduced mod L."""

    x: int
    y: int

    def reduced(self, L: int) -> "SpaceCoord":
        return SpaceCoord(self.x % L, self.y % L)


def wrap_distance(a: int, b: int, L: int) -> int:
    """Distance between two coordinates on a ring of circumference L.

    Returns ``min((a - b) mod L, (b - a) mod L)``; symmetric and at most
    ``L // 2``.
    """
    d = (a - b) % L
    return min(d, L - d)


def wrap_signed(delta: int, L: int) -> int:
    """Reduce a coordinate difference to the signed range (-L/2, L/2].

    Ties at exactly L/2 take the positive sign.
    """
    d = delta % L
    if 2 * d > L:
        return d - L
    return d


def odd_flip_probability(per_step: float, n_steps: float) -> float:
    """Probability of an odd number of flips over ``n_steps`` independent steps.

    Equals ``(1 - (1 - 2*per_step)^n) / 2``; accepts real (non-integer) step
    counts, which arise as time overlaps of parity blocks.
    """
    if not 0.0 <= per_step <= 0.5:
        raise ValueError(f"per-step probability {per_step} outside [0, 0.5]")
    if n_steps < 0:
        raise ValueError(f"negative step count {n_steps}")
    if n_steps == 1:
        return per_step  # exact, avoids float round-trip noise
    return 0.5 * (1.0 - (1.0 - 2.0 * per_step) ** n_steps)


def pdelta_from_p(p: float, s: float) -> float:
    """Per-round flip probability for physical error rate ``p`` at synchronicity ``s``."""
    _check_probability(p)
    if not 0.0 < s <= 1.0:
        raise ValueError(f"synchronicity {s} outside (0, 1]")
    if s == 1.0:
        return p
    return 0.5 * (1.0 - (1.0 - 2.0 * p) ** s)


def p_from_pdelta(p_delta: float, s: float) -> float:
    """Inverse of :func:`pdelta_from_p`: physical error rate from the per-round one."""
    _check_probability(p_delta)
    if not 0.0 < s <= 1.0:
        raise ValueError(f"synchronicity {s} outside (0, 1]")
    if s == 1.0:
        return p_delta
    return 0.5 * (1.0 - (1.0 - 2.0 * p_delta) ** (1.0 / s))


def _check_probability(p: float) -> None:
    if not 0.0 <= p < 0.5:
        raise ValueError(f"error probability {p} outside [0, 0.5)")


def default_rounds(L: int, s: float) -> int:
    """Default number of measurement rounds, round(2/s) * L.

    ``round`` is Python's round-half-to-even, so e.g. s = 0.8 gives 2L.
    """
    return round(2.0 / s) * L


@dataclass(frozen=True)
class CodeParams:
    """Immutable bundle of lattice size, noise rates, and duration.

    ``rounds`` applies to discrete mode (s > 0) and defaults to
    ``round(2/s) * L``; ``horizon`` applies to continuous mode (s = 0) and
    defaults to ``2 * L``.  The measurement error ``q`` defaults to ``p``.
    """

    L: int
    s: float
    p: float
    q: float | None = None
    rounds: int | None = None
    horizon: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.L, int) or self.L < 3:
            raise ValueError(f"lattice side {self.L} must be an integer >= 3")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"synchronicity {self.s} outside [0, 1]")
        _check_probability(self.p)
        if self.q is None:
            object.__setattr__(self, "q", self.p)
        else:
            _check_probability(self.q)
        if self.s == 0.0:
            if self.rounds is not None:
                raise ValueError("continuous mode (s = 0) takes a horizon, not rounds")
            if self.horizon is None:
                object.__setattr__(self, "horizon", 2.0 * self.L)
            elif self.horizon <= 0:
                raise ValueError(f"horizon {self.horizon} must be positive")
        else:
            if self.horizon is not None:
                raise ValueError("discrete mode (s > 0) takes rounds, not a horizon")
            if self.rounds is None:
                object.__setattr__(self, "rounds", default_rounds(self.L, self.s))
            elif not isinstance(self.rounds, int) or self.rounds < 1:
                raise ValueError(f"rounds {self.rounds} must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L * self.L

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def p_delta(self) -> float:
        """Per-round flip probability (discrete mode only)."""
        if self.s == 0.0:
            raise ValueError("p_delta is undefined at s = 0")
        return pdelta_from_p(self.p, self.s)

    @property
    def duration(self) -> float:
        """Total simulated time: rounds * s in discrete mode, horizon at s = 0."""
        if self.s == 0.0:
            return float(self.horizon)
        return self.rounds * self.s

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "s": self.s,
            "p": self.p,
            "q": self.q,
            "rounds": self.rounds,
            "horizon": self.horizon,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CodeParams":
        known = {"L", "s", "p", "q", "rounds", "horizon", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown CodeParams keys: {sorted(unknown)}")
        return cls(**data)
