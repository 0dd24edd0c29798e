import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import linprog

from adaptive_contracts.lp_core import LpProblem, LpStatus, kkt_residuals, solve_lp
from instances import vertex_enumeration


class TestSmallProblems:
    def test_lower_bound_only(self):
        # min x  s.t.  x >= 3, written as -x <= -3
        sol = solve_lp(LpProblem([1.0], [[-1.0]], [-3.0]))
        assert sol.status is LpStatus.OPTIMAL
        assert_allclose(sol.x, [3.0])
        assert_allclose(sol.objective, 3.0)

    def test_infeasible(self):
        sol = solve_lp(LpProblem([0.0], [[1.0]], [-1.0]))
        assert sol.status is LpStatus.INFEASIBLE
        assert sol.phase1_objective > 1e-7

    def test_unbounded_has_ray(self):
        # min -x - y  s.t.  x - y <= 1
        problem = LpProblem([-1.0, -1.0], [[1.0, -1.0]], [1.0])
        sol = solve_lp(problem)
        assert sol.status is LpStatus.UNBOUNDED
        assert np.all(problem.A_ub @ sol.ray <= 1e-9)
        assert np.all(sol.ray >= -1e-12)
        assert problem.c @ sol.ray < 0

    def test_maximise_textbook(self):
        c = np.array([3, 2])
        A_ub = np.array([[2, 1], [1, 1], [1, 0]])
        b_ub = np.array([10, 8, 4])
        sol = solve_lp(LpProblem(-c, A_ub, b_ub))
        assert_allclose(sol.x, [2.0, 6.0])

    def test_degenerate(self):
        c = np.array([2, 1])
        A_ub = np.array([[3, 1], [1, -1], [0, 1]])
        b_ub = np.array([6, 2, 3])
        sol = solve_lp(LpProblem(-c, A_ub, b_ub))
        assert_allclose(sol.x, [1.0, 3.0])

    def test_klee_minty(self):
        c = -np.array([100.0, 10.0, 1.0])
        A_ub = np.array([[1, 0, 0], [20, 1, 0], [200, 20, 1]])
        b_ub = np.array([1, 100, 10000])
        sol = solve_lp(LpProblem(c, A_ub, b_ub))
        assert_allclose(sol.x, [0.0, 0.0, 10000.0], atol=1e-9)

    def test_beale_cycling_example(self):
        # Cycles under the textbook largest-coefficient rule without anti-cycling.
        c = np.array([-0.75, 150, -0.02, 6])
        A_ub = np.array([[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]])
        b_ub = np.array([0, 0, 1])
        sol = solve_lp(LpProblem(c, A_ub, b_ub))
        assert sol.optimal
        assert_allclose(sol.objective, -0.05, atol=1e-9)

    def test_equalities_and_free_variables(self):
        # min x + 2y  s.t.  x + y = 1 with x free: x = 1 - y, objective 1 + y.
        problem = LpProblem([1.0, 2.0], None, None, [[1.0, 1.0]], [1.0], [-np.inf, 0.0])
        sol = solve_lp(problem)
        assert sol.optimal
        assert_allclose(sol.x, [1.0, 0.0], atol=1e-12)

    def test_free_variable_negative_optimum(self):
        # min x  s.t.  x >= -2 written as -x <= 2, x free
        sol = solve_lp(LpProblem([1.0], [[-1.0]], [2.0], lb=[-np.inf]))
        assert_allclose(sol.x, [-2.0])

    def test_redundant_equalities(self):
        problem = LpProblem([1.0, 1.0], None, None, [[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
        sol = solve_lp(problem)
        assert sol.optimal
        assert_allclose(sol.objective, 1.0)

    def test_break_even_min_pay_lp(self):
        # Always inspect; pay (t1, t2) on outcomes; action 2 must beat action 1.
        # IC: T_1 - c_1 <= T_2 - c_2  ->  t1 - t2 <= -1.
        sol = solve_lp(LpProblem([0.0, 1.0], [[1.0, -1.0]], [-1.0]))
        assert_allclose(sol.objective, 1.0)
        assert_allclose(sol.x, [0.0, 1.0])

    def test_empty_problem(self):
        sol = solve_lp(LpProblem(np.zeros(0)))
        assert sol.optimal and sol.x.size == 0

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            LpProblem([1.0, 2.0], [[1.0]], [1.0])
        with pytest.raises(ValueError):
            LpProblem([np.nan])


def _random_bounded_lp(rng):
    nv = int(rng.integers(1, 9))
    rows = int(rng.integers(1, 6))
    A = rng.normal(size=(rows, nv)).round(2)
    b = rng.normal(size=rows).round(2) + rng.uniform(0, 1.5, rows)
    # A box row keeps the region bounded so vertex enumeration is exact.
    A = np.vstack([A, np.ones(nv)])
    b = np.append(b, rng.uniform(1, 10))
    c = rng.normal(size=nv).round(2)
    if rng.random() < 0.3:
        A_eq = rng.normal(size=(1, nv)).round(2)
        b_eq = np.array([rng.normal()]).round(2)
    else:
        A_eq, b_eq = None, None
    return c, A, b, A_eq, b_eq


class TestRandomAgainstOracles:
    def test_vertex_enumeration_500(self):
        rng = np.random.default_rng(20240501)
        n_feasible = 0
        for _ in range(500):
            c, A, b, A_eq, b_eq = _random_bounded_lp(rng)
            sol = solve_lp(LpProblem(c, A, b, A_eq, b_eq))
            expected = vertex_enumeration(c, A, b, A_eq, b_eq)
            if expected is None:
                assert sol.status is LpStatus.INFEASIBLE
            else:
                n_feasible += 1
                assert sol.optimal
                assert_allclose(sol.objective, expected, atol=1e-6)
        assert n_feasible > 250

    def test_kkt_and_strong_duality(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            c, A, b, A_eq, b_eq = _random_bounded_lp(rng)
            problem = LpProblem(c, A, b, A_eq, b_eq)
            sol = solve_lp(problem)
            if not sol.optimal:
                continue
            res = kkt_residuals(problem, sol)
            assert res["primal"] <= 1e-7
            assert res["dual"] <= 1e-9
            assert res["stationarity"] <= 1e-7
            assert res["complementarity"] <= 1e-6
            assert res["gap"] <= 1e-6

    def test_matches_highs_on_values(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            c, A, b, A_eq, b_eq = _random_bounded_lp(rng)
            sol = solve_lp(LpProblem(c, A, b, A_eq, b_eq))
            ref = linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=b_eq, method="highs")
            if ref.status == 0:
                assert sol.optimal
                assert_allclose(sol.objective, ref.fun, atol=1e-6)

    def test_unbounded_rays_are_certificates(self):
        rng = np.random.default_rng(3)
        seen = 0
        for _ in range(300):
            nv = int(rng.integers(1, 6))
            A = rng.normal(size=(int(rng.integers(1, 4)), nv))
            b = rng.uniform(0, 1, A.shape[0])
            c = rng.normal(size=nv)
            problem = LpProblem(c, A, b)
            sol = solve_lp(problem)
            if sol.status is LpStatus.UNBOUNDED:
                seen += 1
                assert np.all(A @ sol.ray <= 1e-9)
                assert np.all(sol.ray >= -1e-12)
                assert c @ sol.ray < -1e-12
            else:
                assert sol.optimal  # x = 0 is feasible, so never infeasible
        assert seen > 20
