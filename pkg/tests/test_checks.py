"""Certification checks: DP verdicts, composition laws, adaptive adversaries."""

import random
from fractions import Fraction as F

import pytest

from dpcert.checks import (
    ChoiceInstance,
    InstanceInvalid,
    all_adjacent_pairs,
    all_databases,
    at_factory,
    check_bind_lifting,
    check_choice_composition,
    check_dp,
    check_laplace_choice,
    check_laplace_shift,
    check_metric_composition,
    check_post_processing,
    check_seq_composition,
    check_svt_adaptive,
    laplace_release_factory,
    random_choice_instance,
    random_subdist,
    rnm_factory,
)
from dpcert.couplings import coupling_divergence, relation_from_pairs
from dpcert.dist import SubDist, dist_ret
from dpcert.enumerate import EnumConfig
from dpcert.mechanisms import SensitivityError, clip_sum, count_query

COUNT = count_query("pos", lambda r: r > 0)
CFG14 = EnumConfig(radius=14)


class TestCheckDp:
    def test_laplace_passes_at_own_eps(self):
        pairs = [((0,), (1,)), ((1,), (2,))]
        rep = check_dp(
            laplace_release_factory(F(1), COUNT),
            pairs,
            F(1),
            0.0,
            EnumConfig(radius=30),
        )
        assert rep.passed
        assert not rep.budget_exceeded

    def test_laplace_fails_at_half_eps(self):
        pairs = [((0,), (1,))]
        rep = check_dp(
            laplace_release_factory(F(1), COUNT),
            pairs,
            F(1, 2),
            0.0,
            EnumConfig(radius=30),
        )
        div_fails = [v for v in rep.failed_verdicts() if v.kind == "divergence"]
        assert div_fails and rep.worst_divergence > 0.01

    def test_non_adjacent_pair_rejected(self):
        with pytest.raises(ValueError):
            check_dp(
                laplace_release_factory(F(1), COUNT),
                [((0,), (5, 5, 5))],
                F(1),
                0.0,
                CFG14,
            )

    def test_budget_audit_flags_overspend(self):
        # mechanism charges more than the eps under test
        def factory(db):
            def mech(ns):
                ns.charge("expensive", F(3))
                return ns.laplace(F(1), len(db))

            return mech

        rep = check_dp(factory, [((0,), (0, 1))], F(1), 0.0, EnumConfig(radius=25))
        assert rep.budget_exceeded and not rep.passed
        assert all(v.passed for v in rep.verdicts)  # divergence itself fine

    def test_report_jsonable_shape(self):
        rep = check_dp(
            laplace_release_factory(F(1), COUNT), [((0,), (1,))], F(1), 0.0, CFG14
        )
        data = rep.to_jsonable()
        assert set(data) >= {"eps", "delta", "pass", "verdicts", "ledger"}
        assert all({"pair", "divergence", "tail", "pass"} <= set(v) for v in data["verdicts"])

    def test_jobs_parallel_same_result(self):
        pairs = all_adjacent_pairs(all_databases(2, 2))
        fac = laplace_release_factory(F(1), COUNT)
        serial = check_dp(fac, pairs, F(1), 0.0, CFG14)
        threaded = check_dp(fac, pairs, F(1), 0.0, CFG14, jobs=3)
        assert [v.pair for v in serial.verdicts] == [v.pair for v in threaded.verdicts]
        assert [v.divergence for v in serial.verdicts] == [
            v.divergence for v in threaded.verdicts
        ]


class TestAboveThresholdCheck:
    def test_transcript_private_at_budget(self):
        qs = [count_query("ge2", lambda r: r >= 2), count_query("ge1", lambda r: r >= 1)]
        pairs = [((0, 2), (0, 3)), ((1,), (2,))]
        rep = check_dp(at_factory(F(1), 1, qs), pairs, F(1), 0.0, EnumConfig(radius=25))
        assert rep.passed
        assert rep.max_spend_eps == F(1)  # budget is eps, not per-query


class TestSequentialComposition:
    def test_two_releases_pass_at_sum(self):
        f = laplace_release_factory(F(1, 2), COUNT)

        def g_factory(db, b):
            x = sum(1 for r in db if r >= 2)

            def mech(ns):
                ns.charge("second", F(1, 2))
                return ns.laplace(F(1, 2), x + (1 if b else 0))

            return mech

        pairs = [((1, 2), (1, 3))]
        assert check_seq_composition(f, g_factory, pairs, F(1, 2), 0.0, F(1, 2), 0.0, CFG14)

    def test_fails_below_sum(self):
        f = laplace_release_factory(F(1), COUNT)

        def g_factory(db, b):
            x = len(db)

            def mech(ns):
                ns.charge("second", F(1))
                return ns.laplace(F(1), x)

            return mech

        pairs = [((1,), (1, 2))]
        # checked at 1.5 eps total instead of 2.0
        assert not check_seq_composition(
            f, g_factory, pairs, F(3, 4), 0.0, F(3, 4), 0.0, EnumConfig(radius=25)
        )

    def test_constant_second_stage_needs_only_first(self):
        f = laplace_release_factory(F(1), COUNT)

        def g_factory(db, b):
            return lambda ns: 0

        pairs = [((0,), (1,))]
        assert check_seq_composition(f, g_factory, pairs, F(1), 0.0, F(0), 0.0, EnumConfig(radius=25))

    def test_randomized_suite(self):
        rng = random.Random(23)
        for _ in range(25):
            e1 = F(rng.randint(1, 4), 4)
            e2 = F(rng.randint(1, 4), 4)
            t1 = rng.randint(0, 2)
            q1 = count_query(f"ge{t1}", (lambda t: lambda r: r >= t)(t1))
            f = laplace_release_factory(e1, q1)

            def g_factory(db, b, e2=e2):
                x = sum(1 for r in db if r <= 1)

                def mech(ns):
                    ns.charge("second", e2)
                    return ns.laplace(e2, x + (b % 2))

                return mech

            db = tuple(rng.randint(0, 3) for _ in range(rng.randint(1, 2)))
            other = db + (rng.randint(0, 3),)
            assert check_seq_composition(
                f, g_factory, [(db, other)], e1, 0.0, e2, 0.0, EnumConfig(radius=16)
            )


class TestPostProcessing:
    @pytest.mark.parametrize("g", [lambda v: v % 2, lambda v: v, lambda v: 0, lambda v: min(max(v, 0), 3)])
    def test_maps_preserve_dp(self, g):
        f = laplace_release_factory(F(1), COUNT)
        pairs = [((0, 1), (1, 1))]
        assert check_post_processing(f, g, pairs, F(1), 0.0, EnumConfig(radius=25))

    def test_divergence_never_increases(self):
        # data-processing inequality, checked exactly on enumerated dists
        from dpcert.couplings import hockey_stick
        from dpcert.enumerate import enumerate_mechanism

        f = laplace_release_factory(F(1), COUNT)
        cfg = EnumConfig(radius=20)
        g = lambda v: v % 3
        for x, y in [((0,), (1,)), ((2, 2), (2, 3))]:
            rx = enumerate_mechanism(f(x), cfg)
            ry = enumerate_mechanism(f(y), cfg)
            gx = rx.dist.map(g)
            gy = ry.dist.map(g)
            for eps in (0.3, 1.0):
                assert hockey_stick(gx, gy, eps) <= hockey_stick(rx.dist, ry.dist, eps) + 1e-12


class TestMetricComposition:
    def test_clip_sum_passes(self):
        universe = all_databases(2, 4)
        for bound in (1, 2, 3):
            assert check_metric_composition(
                lambda db, b=bound: clip_sum(b, db),
                bound,
                F(1),
                universe,
                EnumConfig(radius=40),
            )

    def test_identity_count_reduces_to_laplace(self):
        universe = all_databases(2, 3)
        assert check_metric_composition(
            lambda db: sum(1 for r in db if r > 0), 1, F(1), universe, EnumConfig(radius=30)
        )

    def test_sensitivity_violation_distinct_failure(self):
        universe = all_databases(2, 3)
        with pytest.raises(SensitivityError):
            check_metric_composition(
                lambda db: 2 * sum(1 for r in db if r > 0), 1, F(1), universe, CFG14
            )


class TestChoiceComposition:
    def test_disjointness_enforced(self):
        mu = SubDist({0: 0.5, 1: 0.5})
        inst = ChoiceInstance(
            mu1=mu,
            mu2=mu,
            f={0: dist_ret(0), 1: dist_ret(1)},
            g={0: dist_ret(0), 1: dist_ret(1)},
            xi=frozenset({1}),
            phi1=frozenset({(1, 0)}),
            phi2=frozenset({(0, 0)}),  # shares right element 0 across the split
            psi=frozenset({(0, 0), (1, 1)}),
            eps1=0.0,
            eps2=0.0,
            eps1p=0.0,
            eps2p=0.0,
        )
        with pytest.raises(InstanceInvalid):
            check_choice_composition(inst)

    def test_full_xi_degenerates_to_sequential(self):
        rng = random.Random(5)
        carrier = range(4)
        mu1 = random_subdist(rng, carrier)
        mu2 = random_subdist(rng, carrier)
        f = {a: random_subdist(rng, carrier) for a in carrier}
        g = {b: random_subdist(rng, carrier) for b in carrier}
        phi = frozenset((a, b) for a in carrier for b in carrier if (a + b) % 2 == 0)
        psi = frozenset((a, b) for a in carrier for b in carrier if a <= b)
        inst = ChoiceInstance(
            mu1=mu1, mu2=mu2, f=f, g=g,
            xi=frozenset(carrier),  # one branch empty
            phi1=phi, phi2=frozenset(),
            psi=psi, eps1=0.5, eps2=0.0, eps1p=0.3, eps2p=0.0,
        )
        outcome = check_choice_composition(inst)
        assert outcome.holds
        # with phi2 empty, premise (ii) needs the whole mass of mu1 as delta
        assert outcome.premise_deltas[1] == pytest.approx(mu1.mass(), abs=1e-12)

    def test_random_instances_hold(self):
        rng = random.Random(41)
        checked = 0
        while checked < 60:
            inst = random_choice_instance(rng)
            if inst is None:
                continue
            assert check_choice_composition(inst).holds
            checked += 1


class TestLaplaceRules:
    def test_shift_rule_instances(self):
        assert check_laplace_shift(F(1, 2), 0, 1, 1, 0, 25)  # aligned: free
        assert check_laplace_shift(F(1, 2), 0, 0, 1, 1, 25)  # one eps
        assert check_laplace_shift(F(1, 2), 1, 0, 1, 2, 25)  # worst case: two eps

    def test_shift_rule_parameter_gate(self):
        with pytest.raises(ValueError):
            check_laplace_shift(F(1), 0, 0, 2, 1, 20)

    def test_choice_rule_at_stated_budget(self):
        assert check_laplace_choice(F(1, 2), 0, 0, 1, 25)

    def test_choice_rule_tight(self):
        assert not check_laplace_choice(F(1, 2), 0, 0, 1, 25, budget=F(1, 2))

    def test_choice_rule_degenerate_scale(self):
        assert check_laplace_choice(F(-1), 0, 2, 2, 5)

    def test_choice_rule_mean_gate(self):
        with pytest.raises(ValueError):
            check_laplace_choice(F(1), 0, 0, 2, 10)


class TestBindLifting:
    def test_random_instances(self):
        rng = random.Random(29)
        for _ in range(40):
            carrier = range(rng.randint(2, 5))
            mu1 = random_subdist(rng, carrier)
            mu2 = random_subdist(rng, carrier)
            f = {a: random_subdist(rng, carrier) for a in carrier}
            g = {b: random_subdist(rng, carrier) for b in carrier}
            phi = frozenset(
                (a, b) for a in carrier for b in carrier if rng.random() < 0.5
            )
            psi = frozenset(
                (a, b) for a in carrier for b in carrier if rng.random() < 0.5
            )
            assert check_bind_lifting(
                mu1, mu2, phi, f, g, psi, rng.uniform(0, 1), rng.uniform(0, 1)
            )


class TestSvtAdaptive:
    POOL = [
        count_query("ge1", lambda r: r >= 1),
        count_query("ge2", lambda r: r >= 2),
    ]

    def test_constant_adversary_depth_one(self):
        rep = check_svt_adaptive(
            F(4), 1, 1, self.POOL, [((1, 2), (1, 1))], EnumConfig(radius=8), depth=1
        )
        assert rep.passed

    def test_depth_two_all_adversaries_pass_at_budget(self):
        rep = check_svt_adaptive(
            F(4), 1, 2, self.POOL, [((1, 2), (2, 2))], EnumConfig(radius=8), depth=2
        )
        assert rep.passed
        # 2 histories of length <2 over pool 2 -> 2^3 = 8 adversaries
        audits = [v for v in rep.verdicts if v.kind == "ledger"]
        assert len(audits) == 8

    def test_tightness_probe_fails(self):
        rep = check_svt_adaptive(
            F(4), 1, 2, self.POOL, [((1, 2), (2, 2))], EnumConfig(radius=8), depth=2,
            eps_check=F(4),
        )
        assert not rep.passed
        assert rep.failed_verdicts()

    def test_adversary_cap(self):
        from dpcert.checks import AdversaryCapError

        with pytest.raises(AdversaryCapError):
            check_svt_adaptive(
                F(1), 0, 1, self.POOL * 2, [((0,), (1,))], EnumConfig(radius=5),
                depth=4, max_adversaries=100,
            )
