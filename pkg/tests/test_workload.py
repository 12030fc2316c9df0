import itertools
import math

import numpy as np
import pytest

from framedvs import CycleDistribution, bin_trace, convolve, soft_deadline
from framedvs.core import CapExceededError, FrameSystem, FrequencyTable, TaskSpec


def system_of(dists, deadline=1.0, f=(150.0, 1000.0)):
    cpu = FrequencyTable(f, tuple(0.1 * (i + 1) for i in range(len(f))))
    tasks = tuple(TaskSpec(d.support_max, d) for d in dists)
    return FrameSystem(tasks, deadline, cpu)


class TestSampling:
    def test_degenerate_always_hits(self):
        d = CycleDistribution.degenerate(100)
        rng = np.random.default_rng(0)
        assert all(d.sample(rng) == 100 for _ in range(50))

    def test_uniform_law_of_large_numbers(self):
        d = CycleDistribution.uniform(1, 10)
        rng = np.random.default_rng(1)
        xs = d.sample_array(rng, 1_000_000)
        assert abs(xs.mean() - 5.5) < 0.01

    def test_fixed_seed_reproduces(self):
        d = CycleDistribution.histogram(50, (0.25, 0.5, 0.25))
        a = d.sample_array(np.random.default_rng(42), 1000)
        b = d.sample_array(np.random.default_rng(42), 1000)
        assert np.array_equal(a, b)

    def test_histogram_draws_upper_edges(self):
        d = CycleDistribution.histogram(50, (0.5, 0.5))
        rng = np.random.default_rng(2)
        assert set(np.unique(d.sample_array(rng, 500))) <= {50, 100}


class TestMoments:
    def test_histogram_mean(self):
        d = CycleDistribution.histogram(50, (0.5, 0.5))
        assert d.mean() == 75.0

    def test_uniform_mean_exact(self):
        assert CycleDistribution.uniform(1, 10).mean() == 5.5

    def test_percentile_uniform(self):
        assert CycleDistribution.uniform(1, 10).percentile(0.2) == 8

    def test_percentile_tiny_eps_is_support_max(self):
        d = CycleDistribution.histogram(100, (0.2, 0.5, 0.3))
        assert d.percentile(1e-9) == d.support_max

    def test_percentile_monotone_in_eps(self):
        d = CycleDistribution.uniform(5, 40)
        vals = [d.percentile(e) for e in (0.01, 0.05, 0.1, 0.3, 0.6, 0.9)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_percentile_eps_validated(self):
        d = CycleDistribution.uniform(1, 4)
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                d.percentile(bad)


class TestBinTrace:
    def test_basic(self):
        d = bin_trace([100, 100, 200], 100)
        assert d.bin_size == 100
        assert d.probs == (2 / 3, 1 / 3)

    def test_single_sample(self):
        d = bin_trace([1], 100)
        assert d.probs == (1.0,)
        assert d.support_max == 100

    def test_support_max_is_rounded_up(self):
        d = bin_trace([101, 205, 330], 100)
        assert d.support_max == math.ceil(330 / 100) * 100

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bin_trace([], 10)


class TestConvolve:
    def test_two_uniforms(self):
        u = CycleDistribution.uniform(1, 2)
        c = convolve([u, u])
        assert dict(zip(c.values, c.probs)) == pytest.approx({2: 0.25, 3: 0.5, 4: 0.25})

    def test_degenerate_shifts_support(self):
        u = CycleDistribution.uniform(1, 3)
        c = convolve([u, CycleDistribution.degenerate(10)])
        assert c.values == (11, 12, 13)
        assert c.probs == pytest.approx(u.atoms()[1].tolist())

    def test_all_degenerate_single_mass(self):
        c = convolve([CycleDistribution.degenerate(w) for w in (100, 200, 300)])
        assert c.values == (600,)
        assert c.probs == (1.0,)

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            dists = []
            for _ in range(int(rng.integers(2, 4))):
                k = int(rng.integers(1, 4))
                vals = sorted({int(v) for v in rng.integers(1, 60, k)})
                p = rng.uniform(0.1, 1, len(vals))
                p = p / p.sum()
                dists.append(
                    CycleDistribution.from_points(
                        {v: float(x) for v, x in zip(vals, p)}
                    )
                )
            got = convolve(dists)
            expect: dict[int, float] = {}
            supports = [list(zip(*d.atoms())) for d in dists]
            for combo in itertools.product(*supports):
                s = sum(int(v) for v, _ in combo)
                pr = math.prod(float(p) for _, p in combo)
                expect[s] = expect.get(s, 0.0) + pr
            assert dict(zip(got.values, got.probs)) == pytest.approx(expect, abs=1e-12)

    def test_order_invariant(self):
        a = CycleDistribution.uniform(1, 5)
        b = CycleDistribution.histogram(3, (0.4, 0.6))
        c = CycleDistribution.degenerate(7)
        x = convolve([a, b, c])
        y = convolve([c, a, b])
        assert x.values == y.values
        assert x.probs == pytest.approx(y.probs, abs=1e-12)

    def test_mean_additivity(self):
        a = CycleDistribution.uniform(10, 500)
        b = CycleDistribution.histogram(40, (0.1, 0.2, 0.3, 0.4))
        c = convolve([a, b])
        assert c.mean() == pytest.approx(a.mean() + b.mean(), rel=1e-9)

    def test_cap(self):
        a = CycleDistribution.uniform(1, 100_000)
        with pytest.raises(CapExceededError):
            convolve([a, a], cap=1000)


class TestRanges:
    def test_histogram_contiguous_merges(self):
        d = CycleDistribution.histogram(100, (0.3, 0.7))
        assert d.ranges() == ((0.0, 200.0),)

    def test_histogram_gap_preserved(self):
        d = CycleDistribution.histogram(100, (0.5, 0.0, 0.5))
        assert d.ranges() == ((0.0, 100.0), (200.0, 300.0))

    def test_uniform_single_range(self):
        assert CycleDistribution.uniform(5, 20).ranges() == ((5.0, 20.0),)

    def test_points_degenerate(self):
        d = CycleDistribution.from_points({3: 0.4, 9: 0.6})
        assert d.ranges() == ((3.0, 3.0), (9.0, 9.0))


class TestTruncated:
    def test_moves_tail_mass(self):
        d = CycleDistribution.from_points({10: 0.5, 20: 0.3, 30: 0.2})
        t = d.truncated(20)
        assert dict(zip(t.values, t.probs)) == pytest.approx({10: 0.5, 20: 0.5})

    def test_noop_above_max(self):
        d = CycleDistribution.uniform(1, 10)
        assert d.truncated(10) is d


class TestSoftDeadline:
    def test_degenerate_keeps_deadline(self):
        sys0 = system_of([CycleDistribution.degenerate(w) for w in (100, 200)], deadline=2.0)
        r = soft_deadline(sys0, 0.05)
        assert r.frame_percentile == r.frame_wcec == 300
        assert r.adjusted_deadline == 2.0

    def test_two_uniform_tasks_half_eps(self):
        sys0 = system_of([CycleDistribution.uniform(1, 2)] * 2, deadline=1.0, f=(1.0, 10.0))
        r = soft_deadline(sys0, 0.5)
        # sum distribution {2: .25, 3: .5, 4: .25}: smallest c with P[sum<c] > .5 is 4
        assert r.frame_percentile == 4
        assert r.adjusted_deadline == 1.0

    def test_invariants(self):
        sys0 = system_of(
            [CycleDistribution.uniform(50, 300), CycleDistribution.histogram(40, (0.2, 0.3, 0.5))],
            deadline=0.5,
        )
        for eps in (0.01, 0.2, 0.7):
            r = soft_deadline(sys0, eps)
            assert all(k <= t.wcec for k, t in zip(r.kappa, sys0.tasks))
            assert r.frame_percentile <= r.frame_wcec
            assert r.adjusted_deadline >= sys0.deadline

    def test_eps_validated(self):
        sys0 = system_of([CycleDistribution.uniform(1, 4)])
        with pytest.raises(ValueError):
            soft_deadline(sys0, 0.0)
