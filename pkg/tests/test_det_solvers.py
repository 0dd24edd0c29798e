import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from adaptive_contracts import (EnumerationTooLarge, InfeasibleTarget, PreconditionViolated,
                                brute_force_optimal, isop_dual_check,
                                prune_unpaid_inspections, solve_constant_actions, solve_isop)
from adaptive_contracts.det_solvers import (candidate_atoms, policies_up_to, policy_vector,
                                            resolve_targets)
from adaptive_contracts.minpay import minpay_total_cost
from adaptive_contracts.model import (Contract, Setting, agent_utilities,
                                      expected_inspection_costs, expected_payments,
                                      expected_rewards)
from instances import break_even, random_isop_setting, random_setting, randomization_gap


class TestHelpers:
    def test_policy_order(self):
        assert list(policies_up_to(3, 2)) == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
        assert_allclose(policy_vector(3, (0, 2)), [1, 0, 1])

    def test_resolve_targets(self):
        s = randomization_gap()
        assert resolve_targets(s, "best") == [0, 1, 2]
        assert resolve_targets(s, 1) == [1]
        with pytest.raises(IndexError):
            resolve_targets(s, 5)
        with pytest.raises(ValueError):
            resolve_targets(s, "worst")


class TestKnownInstances:
    def test_randomization_gap(self):
        rep = brute_force_optimal(randomization_gap(), 2)
        assert rep.contract.inspected == (0,)
        assert_allclose(rep.contract.t[0][0], 50 / 3, atol=1e-4)
        assert_allclose(rep.total_cost, 6.6, atol=1e-4)
        assert rep.algorithm == "brute-force"

    def test_break_even_best(self):
        s = break_even()
        rep = brute_force_optimal(s)
        assert_allclose(rep.utility, 0.0, atol=1e-9)
        assert np.isnan(rep.cost_table).sum() == 0
        assert rep.cost_table[0] == 0.0

    def test_infeasible_target(self):
        s = Setting([[1.0], [1.0]], ([[1.0], [1.0]],), [0, 1], [1], [[1]])
        with pytest.raises(InfeasibleTarget):
            brute_force_optimal(s, 1)

    def test_guard(self):
        ell = 21
        s = Setting(np.full((2, ell), 1 / ell), tuple([[[1.0], [1.0]]] * ell), [0, 1],
                    np.ones(ell), np.zeros((ell, 1)))
        with pytest.raises(EnumerationTooLarge):
            brute_force_optimal(s)

    def test_report_dict(self):
        d = brute_force_optimal(randomization_gap(), 2).to_dict(randomization_gap())
        assert d["target_label"] == "a3"
        assert d["implementable"] == [None, None, True]
        assert_allclose(d["total_cost"], 6.6, atol=1e-4)


class TestOracleEquivalence:
    def test_constant_actions(self):
        rng = np.random.default_rng(12)
        for _ in range(60):
            s = random_setting(rng, n=int(rng.integers(2, 4)), ell=int(rng.integers(1, 6)))
            a = brute_force_optimal(s)
            b = solve_constant_actions(s)
            assert_allclose(b.utility, a.utility, atol=1e-6)
            assert len(b.contract.inspected) <= s.n - 1

    def test_isop_matches_brute_force(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            s = random_isop_setting(rng)
            target = s.n - 1
            try:
                a = brute_force_optimal(s, target)
            except InfeasibleTarget:
                with pytest.raises(InfeasibleTarget):
                    solve_isop(s)
                continue
            b = solve_isop(s)
            assert_allclose(b.total_cost, a.total_cost, atol=1e-6)
            assert np.count_nonzero(b.contract.s > 1e-9) <= 1
            assert sum(np.count_nonzero(t > 1e-9) for t in b.contract.t) <= 1

    def test_isop_dual_check(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            s = random_isop_setting(rng)
            for k in range(s.ell):
                assert isop_dual_check(s, policy_vector(s.ell, (k,)))
            assert isop_dual_check(s, np.zeros(s.ell))

    def test_isop_precondition(self):
        with pytest.raises(PreconditionViolated):
            solve_isop(Setting([[0.4, 0.6], [0.6, 0.4]],
                               ([[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]),
                               [0, 1], [1, 1], [[0, 1], [0, 1]]))

    def test_isop_warning(self):
        s = randomization_gap().replace(c=[0, 2, 1], r=[[10, 0], [0, 10]])
        s = s.replace(q0=[[0.7, 0.3], [0.5, 0.5], [0.4, 0.6]],
                      qk=([[0.7, 0.3], [0.5, 0.5], [0.4, 0.6]],) * 2)
        rep = solve_isop(s)
        assert rep.warnings == ("targeted action is not the most expensive one",)

    def test_candidate_atoms(self):
        s = randomization_gap()
        assert candidate_atoms(s, [0, 0], 2) == [1]
        assert candidate_atoms(s, [1, 0], 2) == [1, 3]
        assert candidate_atoms(s, [1, 1], 2) == [5]


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_report_is_consistent(self, seed):
        rng = np.random.default_rng(seed)
        s = random_setting(rng)
        rep = brute_force_optimal(s)
        i = rep.target
        ua = agent_utilities(s, rep.contract)
        assert ua[i] >= ua.max() - 1e-7
        assert_allclose(rep.payment, expected_payments(s, rep.contract)[i], atol=1e-9)
        assert_allclose(rep.inspection_cost, expected_inspection_costs(s, rep.contract)[i])
        # No single-target solve beats the overall choice.
        for j in range(s.n):
            assert rep.cost_table[j] >= 0 or np.isinf(rep.cost_table[j])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_prune_preserves_transfers(self, seed):
        rng = np.random.default_rng(seed)
        s = random_setting(rng)
        p = rng.integers(0, 2, s.ell).astype(float)
        t = tuple(np.where(rng.random(mk) < 0.5, 0.0, rng.uniform(0, 2, mk)) for mk in s.m)
        t = tuple(row if rng.random() < 0.5 else np.zeros_like(row) for row in t)
        ct = Contract(p, rng.uniform(0, 2, s.ell), t)
        pruned = prune_unpaid_inspections(s, ct)
        assert_allclose(expected_payments(s, pruned), expected_payments(s, ct), atol=1e-12)
        assert np.all(expected_inspection_costs(s, pruned)
                      <= expected_inspection_costs(s, ct) + 1e-12)

    def test_best_never_below_single_targets(self):
        rng = np.random.default_rng(15)
        for _ in range(30):
            s = random_setting(rng)
            rep = brute_force_optimal(s)
            for i in range(s.n):
                c = min(minpay_total_cost(s, policy_vector(s.ell, sub), i)
                        for sub in policies_up_to(s.ell, s.ell))
                assert rep.utility >= expected_rewards(s)[i] - c - 1e-7
