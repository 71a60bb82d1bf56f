"""Mechanism behavior: deterministic traces, budget accounting, adjacency."""

import itertools
from fractions import Fraction as F

import pytest

from dpcert.budget import Credits, Ledger, OverspendError
from dpcert.mechanisms import (
    AboveThreshold,
    AboveThresholdStream,
    BudgetExhaustedError,
    Query,
    QueryCache,
    SensitivityError,
    SparseVector,
    adaptive_count,
    at_transcript,
    auto_avg,
    clip_bound,
    clip_sum,
    count_query,
    create_query,
    laplace_add_noise,
    map_cache,
    rnm,
    row_hamming_adjacent,
    svt_stream,
    value_bounded_adjacent,
)
from dpcert.noise import SamplingNoise
from dpcert.sampling import LaplaceSampler

EVEN = count_query("even", lambda r: r % 2 == 0)


def noiseless(budget=F(100)):
    """Deterministic noise source: nonpositive scale gates are exercised
    with a ledger attached."""
    return SamplingNoise(LaplaceSampler(0), Ledger(Credits(budget)))


def seeded(seed, budget=F(100)):
    return SamplingNoise(LaplaceSampler(seed), Ledger(Credits(budget)))


class TestAdjacency:
    def test_row_hamming_substitution(self):
        assert row_hamming_adjacent([1, 2, 3], [1, 2, 4])
        assert row_hamming_adjacent([1, 2, 3], [3, 2, 1])  # equal as multisets
        assert not row_hamming_adjacent([1, 2, 3], [1, 4, 5])

    def test_row_hamming_insertion(self):
        assert row_hamming_adjacent([1, 2], [1, 2, 3])
        assert not row_hamming_adjacent([1], [1, 2, 3])

    def test_symmetry(self):
        dbs = [(0,), (0, 1), (1, 2), (0, 1, 2)]
        for x, y in itertools.product(dbs, repeat=2):
            assert row_hamming_adjacent(x, y) == row_hamming_adjacent(y, x)
            assert value_bounded_adjacent(x, y) == value_bounded_adjacent(y, x)

    def test_value_bounded(self):
        assert value_bounded_adjacent([1, 2], [1, 3])
        assert not value_bounded_adjacent([1, 2], [2, 3])
        assert not value_bounded_adjacent([1], [1, 2])


class TestAboveThreshold:
    def test_deterministic_true(self):
        ns = noiseless()
        at = AboveThreshold(ns, F(-1), 3)
        q = count_query("ge0", lambda r: True)  # value 5 on a 5-row db
        assert at.run(ns, q, [1, 2, 3, 4, 5]) is True

    def test_deterministic_false(self):
        ns = noiseless()
        at = AboveThreshold(ns, F(-1), 3)
        assert at.run(ns, EVEN, [1, 2, 3, 4, 5]) is False  # count 2 < 3

    def test_init_charges_half(self):
        ns = noiseless()
        AboveThreshold(ns, F(10), 3)
        assert ns.ledger.entries == [("at-init", Credits(F(5)))]

    def test_release_charge_only_on_true(self):
        ns = noiseless()
        at = AboveThreshold(ns, F(-2), 3)
        at.run(ns, EVEN, [1, 2, 3, 4, 5])  # False
        assert [label for label, _ in ns.ledger.entries] == ["at-init"]
        at.run(ns, EVEN, [2, 2, 2, 2, 2])  # count 5 >= 3 -> True
        assert [label for label, _ in ns.ledger.entries] == ["at-init", "at-release"]
        assert ns.ledger.spent.eps == 0  # eps<=0: charges are 0 anyway

    def test_total_charge_bounded_by_eps(self):
        ns = seeded(4, budget=F(10))
        at = AboveThreshold(ns, F(10), 3)
        for _ in range(20):
            if at.run(ns, EVEN, [2, 2, 2, 2]):
                break
        assert ns.ledger.spent.eps <= F(10)

    def test_sensitivity_gate(self):
        ns = noiseless()
        at = AboveThreshold(ns, F(1), 0)
        bad = Query("bad", lambda db: 2 * len(db), F(2))
        with pytest.raises(SensitivityError):
            at.run(ns, bad, [1])

    def test_transcript_stops_at_first_true(self):
        ns = noiseless()
        high = count_query("all", lambda r: True)
        out = at_transcript(ns, F(-1), 1, [EVEN, high, high], [1, 3, 5])
        assert out == (False, True)  # evens 0 < 1; all 3 >= 1; third never runs

    def test_stream_raises_after_halt(self):
        ns = noiseless()
        high = count_query("all", lambda r: True)
        stream = AboveThresholdStream(ns, F(-1), 1, [high, high], [1, 2])
        assert next(stream) is True
        with pytest.raises(StopIteration):
            next(stream)


class TestSparseVector:
    def test_counter_initialization(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-1), 0, 1)
        assert sv.counter == 0

    def test_counter_decrements_on_true(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-1), 1, 3)
        high = count_query("all", lambda r: True)
        assert sv.run(ns, high, [5, 5]) is True
        assert sv.counter == 1

    def test_no_reinit_when_counter_zero(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-1), 1, 1)
        high = count_query("all", lambda r: True)
        inits_before = sum(1 for l, _ in ns.ledger.entries if l == "at-init")
        assert sv.run(ns, high, [5, 5]) is True
        inits_after = sum(1 for l, _ in ns.ledger.entries if l == "at-init")
        assert inits_after == inits_before  # stale instance kept
        assert sv.counter == 0

    def test_false_changes_nothing(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-1), 5, 2)
        low = EVEN
        assert sv.run(ns, low, [1, 3]) is False
        assert sv.counter == 1
        assert [l for l, _ in ns.ledger.entries] == ["at-init"]

    def test_exactly_one_reinit_for_one_true(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-2), 1, 2)
        high = count_query("all", lambda r: True)
        sv.run(ns, EVEN, [1, 3])      # False
        sv.run(ns, EVEN, [1, 3])      # False
        sv.run(ns, high, [5, 5, 5])   # True -> re-init charged
        labels = [l for l, _ in ns.ledger.entries]
        assert labels == ["at-init", "at-release", "at-init"]

    def test_worst_case_budget_n_eps(self):
        eps = F(2)
        n = 3
        ns = seeded(9, budget=n * eps)
        sv = SparseVector(ns, eps, 0, n)
        high = count_query("all", lambda r: True)
        for _ in range(n):
            sv.run(ns, high, [9, 9, 9])
        assert ns.ledger.spent.eps <= n * eps

    def test_halting_mode(self):
        ns = noiseless()
        sv = SparseVector(ns, F(-1), 1, 1, halt_when_exhausted=True)
        high = count_query("all", lambda r: True)
        assert sv.run(ns, high, [5]) is True
        with pytest.raises(BudgetExhaustedError):
            sv.run(ns, high, [5])


class TestSvtStream:
    def test_single_release(self):
        ns = noiseless()
        high = count_query("all", lambda r: True)
        out = svt_stream(ns, F(-1), 1, 1, lambda bs: high, [4, 4])
        assert out == [True]

    def test_low_then_high(self):
        ns = noiseless()
        high = count_query("all", lambda r: True)

        def qs(bs):
            return EVEN if not bs else high

        out = svt_stream(ns, F(-1), 1, 1, qs, [1, 3, 5])
        assert out == [False, True]

    def test_adaptive_stream_sees_history(self):
        ns = noiseless()
        seen = []
        high = count_query("all", lambda r: True)

        def qs(bs):
            seen.append(tuple(bs))
            return high

        svt_stream(ns, F(-1), 0, 2, qs, [7])
        assert seen == [(), (True,)]  # most recent first

    def test_stream_ends_when_exhausted(self):
        ns = noiseless()
        out = svt_stream(ns, F(-1), 5, 2, lambda bs: EVEN if len(bs) < 3 else None, [1])
        assert out == [False, False, False]


class TestAutoAvg:
    def test_clip_sum(self):
        assert clip_sum(2, [1, 5, 3]) == 1 + 2 + 2

    def test_create_query_range_and_sensitivity(self):
        # brute force over small adjacent dbs
        dbs = [tuple(db) for n in range(3) for db in itertools.product(range(5), repeat=n)]
        for b in (1, 2, 3):
            q = create_query(b)
            for db in dbs:
                assert -len(db) <= q.fn(db) <= 0
            worst = 0
            for x in dbs:
                for y in dbs:
                    if row_hamming_adjacent(x, y):
                        worst = max(worst, abs(q.fn(x) - q.fn(y)))
            assert worst <= 1

    def test_deterministic_trace(self):
        ns = noiseless()
        res = auto_avg(ns, [1, 2, 4], F(-1), [1, 1, 1])
        assert res.value == 1 and not res.count_degenerate

    def test_clip_bound_picks_first_stable(self):
        ns = noiseless()
        assert clip_bound(ns, [1, 2, 4], F(-1), [1, 1, 1]) == 1
        ns = noiseless()
        assert clip_bound(ns, [1, 2, 4], F(-1), [4, 4]) == 4  # fallback: last

    def test_bad_bounds_rejected(self):
        ns = noiseless()
        with pytest.raises(ValueError):
            clip_bound(ns, [], F(1), [1])
        with pytest.raises(ValueError):
            clip_bound(ns, [2, 2], F(1), [1])

    def test_budget_three_eps(self):
        eps = F(1)
        ns = seeded(21, budget=3 * eps)
        auto_avg(ns, [1, 2, 4, 8], eps, [3, 1, 4, 1, 5])
        assert ns.ledger.spent.eps <= 3 * eps

    def test_degenerate_count_flagged(self):
        # empty db: count 0, eps<=0 noise keeps it 0 -> sentinel
        ns = noiseless()
        res = auto_avg(ns, [1, 2], F(-1), [])
        assert res.value == 0 and res.count_degenerate


class TestRnm:
    def test_single_query(self):
        ns = noiseless()
        q = count_query("c", lambda r: True)
        assert rnm(ns, [q], F(-1), [1, 2]) == 0

    def test_deterministic_argmax(self):
        ns = noiseless()
        qs = [Query(f"v{i}", (lambda v: lambda db: v)(x), F(1)) for i, x in enumerate([3, 9, 5])]
        assert rnm(ns, qs, F(-1), []) == 1

    def test_tie_breaks_low(self):
        ns = noiseless()
        qs = [Query(f"v{i}", (lambda v: lambda db: v)(7), F(1)) for i in range(2)]
        assert rnm(ns, qs, F(-1), []) == 0

    def test_constant_charge(self):
        for n in (1, 2, 5):
            ns = seeded(n, budget=F(1))
            qs = [count_query(f"ge{i}", (lambda t: lambda r: r >= t)(i)) for i in range(n)]
            rnm(ns, qs, F(1), [0, 1, 2])
            assert ns.ledger.spent.eps == F(1)  # eps, not n*eps/2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rnm(noiseless(), [], F(1), [1])


class TestAdaptiveCount:
    def test_zero_budget_refuses_everything(self):
        ns = noiseless()
        preds = [lambda r: r > 0, lambda r: r > 1, lambda r: r > 2]
        out = adaptive_count(ns, F(1, 10), F(1, 2), 0, 0, preds, [1, 2, 3])
        assert out == [None, None, None]

    def test_exact_coarse_budget_no_precise(self):
        # threshold far above anything the seeded noise can reach
        ns = seeded(0)
        out = adaptive_count(ns, F(1, 10), F(1, 2), 10**6, F(1, 10), [lambda r: r > 0], [1])
        assert len(out) == 1
        coarse, precise = out[0]
        assert isinstance(coarse, int) and precise is None

    def test_precise_follows_promising_coarse(self):
        # nonpositive scales: free, deterministic counts
        ns = noiseless()
        out = adaptive_count(ns, F(0), F(0), 2, F(1), [lambda r: r > 0], [1, 1, 1])
        coarse, precise = out[0]
        assert coarse == 3 and precise == 3

    def test_total_cost_within_budget(self):
        for seed in range(10):
            budget = F(7, 10)
            ns = seeded(seed, budget=budget)
            preds = [(lambda t: lambda r: r >= t)(t) for t in range(5)]
            adaptive_count(ns, F(1, 10), F(2, 5), 1, budget, preds, [0, 1, 2, 3])
            assert ns.ledger.spent.eps <= budget


class TestQueryCache:
    def test_fresh_cache_empty(self):
        ns = noiseless()
        cache = QueryCache(laplace_add_noise(ns, F(1)), [1, 2, 3])
        assert cache.entries == {}

    def test_repeat_returns_identical_value_free(self):
        ns = seeded(5, budget=F(1))
        cache = QueryCache(laplace_add_noise(ns, F(1)), [1, 2, 3])
        v1 = cache.run(EVEN)
        spent = ns.ledger.spent.eps
        v2 = cache.run(EVEN)
        assert v1 == v2
        assert ns.ledger.spent.eps == spent  # second call free

    def test_distinct_databases_independent(self):
        ns = seeded(5)
        c1 = QueryCache(laplace_add_noise(ns, F(1)), [2, 4])
        c2 = QueryCache(laplace_add_noise(ns, F(1)), [1, 3, 5])
        c1.run(EVEN)
        assert c2.entries == {}

    def test_map_cache_unique_charging(self):
        eps = F(1, 2)
        q1, q2 = EVEN, count_query("pos", lambda r: r > 0)
        ns = seeded(1, budget=F(10))
        map_cache(laplace_add_noise(ns, eps), [q1, q2, q1], [1, 2])
        assert ns.ledger.spent.eps == 2 * eps

    def test_map_cache_empty(self):
        ns = noiseless()
        assert map_cache(laplace_add_noise(ns, F(1)), [], [1]) == []
        assert ns.ledger.spent.eps == 0

    def test_all_duplicates_single_charge(self):
        ns = seeded(2, budget=F(1))
        out = map_cache(laplace_add_noise(ns, F(1)), [EVEN] * 4, [2, 3])
        assert len(set(out)) == 1
        assert ns.ledger.spent.eps == F(1)

    def test_noiseless_cache_returns_exact_value(self):
        ns = noiseless()
        cache = QueryCache(laplace_add_noise(ns, F(-1)), [2, 4, 6])
        assert cache.run(EVEN) == 3


class TestLedgerViolationSurfacing:
    def test_overspend_raises_through_mechanism(self):
        eps = F(10)
        ns = SamplingNoise(LaplaceSampler(0), Ledger(Credits(F(1))))
        with pytest.raises(OverspendError):
            AboveThreshold(ns, eps, 0)  # init needs 5 > 1
