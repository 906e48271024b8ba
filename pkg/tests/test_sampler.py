import json
import math

import numpy as np
import pytest

from toricsim.params import CodeParams, pdelta_from_p
from toricsim.sampler import (
    CONTINUOUS,
    DISCRETE,
    make_trial_rng,
    poisson_flip_rate,
    reported_outcome_at,
    sample_continuous,
    sample_discrete,
    true_parity_at,
)


def clean_discrete(L=4, s=1.0, p=0.01, rounds=None):
    params = CodeParams(L=L, s=s, p=p, rounds=rounds, seed=1)
    h = sample_discrete(params, make_trial_rng(1, 0))
    h.flips[:] = False
    h.meas_flip[:] = False
    h.success[:] = True
    return h


class TestRng:
    def test_trial_determinism(self):
        params = CodeParams(L=4, s=0.5, p=0.02, seed=42)
        h1 = sample_discrete(params, make_trial_rng(42, 7))
        h2 = sample_discrete(params, make_trial_rng(42, 7))
        assert np.array_equal(h1.flips, h2.flips)
        assert np.array_equal(h1.success, h2.success)
        assert np.array_equal(h1.meas_flip, h2.meas_flip)

    def test_trials_differ(self):
        params = CodeParams(L=4, s=0.5, p=0.05, seed=42)
        h1 = sample_discrete(params, make_trial_rng(42, 0))
        h2 = sample_discrete(params, make_trial_rng(42, 1))
        assert not np.array_equal(h1.flips, h2.flips)

    def test_continuous_determinism(self):
        params = CodeParams(L=4, s=0.0, p=0.02, seed=9)
        h1 = sample_continuous(params, make_trial_rng(9, 3))
        h2 = sample_continuous(params, make_trial_rng(9, 3))
        assert np.array_equal(h1.flip_time, h2.flip_time)
        assert np.array_equal(h1.meas_time, h2.meas_time)


class TestDiscrete:
    def test_zero_noise(self):
        params = CodeParams(L=4, s=1.0, p=0.0, seed=1)
        h = sample_discrete(params, make_trial_rng(1, 0))
        assert h.mode == DISCRETE
        assert not h.flips.any()
        assert h.success.all()
        assert not h.meas_flip.any()

    def test_s1_no_erasures(self):
        params = CodeParams(L=4, s=1.0, p=0.1, seed=2)
        h = sample_discrete(params, make_trial_rng(2, 0))
        assert h.success.all()

    def test_final_round_perfect(self):
        params = CodeParams(L=4, s=0.3, p=0.1, seed=3)
        h = sample_discrete(params, make_trial_rng(3, 0))
        assert h.success[-1].all()
        assert not h.meas_flip[-1].any()

    def test_erasure_fraction(self):
        # excluding the perfect final round, attempts succeed w.p. s
        params = CodeParams(L=4, s=0.5, p=0.01, seed=5)
        total = 0
        erased = 0
        for t in range(300):
            h = sample_discrete(params, make_trial_rng(5, t))
            body = h.success[:-1]
            total += body.size
            erased += body.size - int(body.sum())
        frac = erased / total
        sigma = math.sqrt(0.25 / total)
        assert abs(frac - 0.5) < 3 * sigma

    def test_flip_rate_matches_p_delta(self):
        params = CodeParams(L=4, s=0.25, p=0.03, seed=6)
        target = pdelta_from_p(0.03, 0.25)
        total = 0
        flips = 0
        for t in range(200):
            h = sample_discrete(params, make_trial_rng(6, t))
            total += h.flips.size
            flips += int(h.flips.sum())
        sigma = math.sqrt(target * (1 - target) / total)
        assert abs(flips / total - target) < 3 * sigma

    def test_measurement_times_increasing_and_end_at_horizon(self):
        params = CodeParams(L=4, s=0.4, p=0.05, seed=7)
        h = sample_discrete(params, make_trial_rng(7, 1))
        for v in range(16):
            times, _ = h.site_measurements(v)
            assert np.all(np.diff(times) > 0)
            assert times[-1] == pytest.approx(h.horizon)


class TestPoissonRate:
    def test_zero(self):
        assert poisson_flip_rate(0.0, 5.0) == 0.0

    def test_value(self):
        assert poisson_flip_rate(0.01, 2.0) == pytest.approx(
            math.log(1 / 0.98), abs=1e-12
        )
        assert poisson_flip_rate(0.01, 2.0) == pytest.approx(0.0202027, abs=1e-6)

    def test_small_p_limit(self):
        for p in (1e-4, 1e-6):
            assert poisson_flip_rate(p, 1.0) == pytest.approx(p, rel=1e-3)

    def test_domain(self):
        with pytest.raises(ValueError):
            poisson_flip_rate(0.5, 1.0)


class TestContinuous:
    def test_zero_error_still_measures(self):
        params = CodeParams(L=4, s=0.0, p=0.0, seed=11)
        h = sample_continuous(params, make_trial_rng(11, 0))
        assert h.mode == CONTINUOUS
        assert len(h.flip_time) == 0
        assert len(h.meas_time) > 16  # Poisson(T) per site plus perfect rounds

    def test_mean_measurement_count(self):
        params = CodeParams(L=4, s=0.0, p=0.01, seed=12)
        T = params.horizon
        counts = []
        for t in range(100):
            h = sample_continuous(params, make_trial_rng(12, t))
            counts.extend((np.diff(h.meas_ptr) - 1).tolist())  # exclude perfect
        mean = np.mean(counts)
        sigma = math.sqrt(T / len(counts))
        assert abs(mean - T) < 3 * sigma

    def test_final_perfect_measurement(self):
        params = CodeParams(L=4, s=0.0, p=0.05, seed=13)
        h = sample_continuous(params, make_trial_rng(13, 0))
        for v in range(16):
            times, errs = h.site_measurements(v)
            assert times[-1] == params.horizon
            assert not errs[-1]
            assert np.all(np.diff(times) >= 0)

    def test_flip_counts_match_discrete_limit(self):
        # per-qubit flip counts: continuous Poisson vs discrete binomial at
        # small s with matched horizon (chi-square on binned counts)
        scipy_stats = pytest.importorskip("scipy.stats")
        p, L, T, s = 0.05, 3, 4.0, 0.01
        rounds = int(T / s)
        cont = CodeParams(L=L, s=0.0, p=p, horizon=T, seed=14)
        disc = CodeParams(L=L, s=s, p=p, rounds=rounds, seed=15)
        c_counts = []
        d_counts = []
        for t in range(120):
            hc = sample_continuous(cont, make_trial_rng(14, t))
            c_counts.extend(np.diff(hc.flip_ptr).tolist())
            hd = sample_discrete(disc, make_trial_rng(15, t))
            d_counts.extend(hd.flips.sum(axis=0).tolist())
        bins = np.arange(6)
        ch = np.bincount(np.minimum(c_counts, 5), minlength=6)
        dh = np.bincount(np.minimum(d_counts, 5), minlength=6)
        # merge sparse tail bins to keep the chi-square valid
        keep = (ch + dh) >= 10
        ch2 = np.append(ch[keep], ch[~keep].sum())
        dh2 = np.append(dh[keep], dh[~keep].sum())
        stat, pval = scipy_stats.chisquare(ch2, dh2.sum() * ch2.sum() / dh2.sum() * (dh2 / dh2.sum()))
        assert pval > 1e-4


class TestTrueParity:
    def test_no_flips_even(self):
        h = clean_discrete()
        assert true_parity_at(h, site=5, time=2.0) is False

    def test_single_adjacent_flip_odd(self):
        h = clean_discrete()
        # x-edge at (1, 1) with L=4 is adjacent to sites (1,1)=5 and (2,1)=9
        h.flips[2, 1 * 4 + 1] = True  # round 3, time 3.0
        assert true_parity_at(h, 5, 3.0) is True  # flips order before measurement
        assert true_parity_at(h, 9, 3.5) is True
        assert true_parity_at(h, 5, 2.9) is False
        assert true_parity_at(h, 6, 3.5) is False  # non-adjacent site

    def test_double_flip_cancels(self):
        h = clean_discrete()
        h.flips[1, 1 * 4 + 1] = True
        h.flips[3, 1 * 4 + 1] = True
        assert true_parity_at(h, 5, 10.0) is False

    def test_reported_outcome_includes_error(self):
        h = clean_discrete()
        h.meas_flip[2, 5] = True
        assert reported_outcome_at(h, 5, 2) is True
        assert reported_outcome_at(h, 5, 1) is False


class TestJsonDump:
    def test_round_trips_through_json(self):
        params = CodeParams(L=3, s=0.5, p=0.05, seed=21)
        h = sample_discrete(params, make_trial_rng(21, 0))
        payload = json.loads(h.to_json())
        assert payload["mode"] == DISCRETE
        assert payload["L"] == 3
        # every recorded flip time is a positive multiple of s
        for times in payload["qubit_flips"].values():
            assert all(t > 0 and abs(t / 0.5 - round(t / 0.5)) < 1e-12 for t in times)
