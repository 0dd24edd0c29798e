"""Dense two-phase simplex for small linear programs.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= lb            (lb entries may be -inf)

Every optimizer in the package funnels through :func:`solve_lp`. Instances
are tiny (a handful of rows, tens of columns), so a dense tableau with an
anti-cycling fallback is both simpler and faster than a general-purpose
solver for this workload.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-12
FEAS_TOL = 1e-9
PHASE1_TOL = 1e-7


class NumericalFailure(RuntimeError):
    """Raised when the simplex cannot make progress on a well-formed problem."""


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        nv = c.size
        A_ub, b_ub = _rows(self.A_ub, self.b_ub, nv, "inequality")
        A_eq, b_eq = _rows(self.A_eq, self.b_eq, nv, "equality")
        lb = np.zeros(nv) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        if lb.size != nv:
            raise ValueError("lower bound vector has wrong length")
        if np.any(np.isposinf(lb)) or np.any(np.isnan(lb)):
            raise ValueError("lower bounds must be finite or -inf")
        for arr in (c, A_ub, b_ub, A_eq, b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP coefficients must be finite")
        for name, val in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub),
                          ("A_eq", A_eq), ("b_eq", b_eq), ("lb", lb)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.c.size


def _rows(A, b, nv, what):
    if A is None or (np.size(A) == 0 and (b is None or np.size(b) == 0)):
        return np.zeros((0, nv)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape != (b.size, nv):
        raise ValueError(f"{what} block has shape {A.shape}, expected ({b.size}, {nv})")
    return A, b


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    ineq_duals: np.ndarray | None = None
    eq_duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    ray: np.ndarray | None = None
    phase1_objective: float = 0.0
    iterations: int = 0
    bland_used: bool = False
    basis: tuple[int, ...] = field(default=())

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve ``problem`` with a two-phase dense simplex.

    Dual values follow the sign convention ``c = -A_ub.T @ y_ub + A_eq.T @ y_eq + z``
    with ``y_ub >= 0`` and ``z >= 0`` on variables with a finite lower bound, so
    that at an optimum ``c @ x == -b_ub @ y_ub + b_eq @ y_eq + lb @ z``.
    """
    return _Simplex(problem).run()


class _Simplex:
    def __init__(self, problem: LpProblem):
        self.problem = problem
        nv = problem.n_vars
        lb = problem.lb
        finite = np.isfinite(lb)
        shift = np.where(finite, lb, 0.0)
        # x = shift + P @ y, y >= 0; free variables split into y+ and y-
        free = np.flatnonzero(~finite)
        P = np.zeros((nv, nv + free.size))
        P[:, :nv] = np.eye(nv)
        for col, j in enumerate(free):
            P[j, nv + col] = -1.0
        self.P, self.shift = P, shift
        ny = P.shape[1]
        A_ub, A_eq = problem.A_ub @ P, problem.A_eq @ P
        b_ub = problem.b_ub - problem.A_ub @ shift
        b_eq = problem.b_eq - problem.A_eq @ shift
        m_ub, m_eq = b_ub.size, b_eq.size
        m = m_ub + m_eq
        # standard form: [A_ub I; A_eq 0] [y; slack] = b
        M = np.zeros((m, ny + m_ub))
        M[:m_ub, :ny] = A_ub
        M[:m_ub, ny:] = np.eye(m_ub)
        M[m_ub:, :ny] = A_eq
        h = np.concatenate([b_ub, b_eq])
        self.sign = np.where(h < 0, -1.0, 1.0)
        self.M = M * self.sign[:, None]
        self.h = h * self.sign
        self.cost = np.concatenate([problem.c @ P, np.zeros(m_ub)])
        self.m_ub, self.m_eq, self.ny = m_ub, m_eq, ny
        self.iterations = 0
        self.bland_used = False

    # --- tableau mechanics -------------------------------------------------

    def _pivot(self, T, r, col):
        T[r] /= T[r, col]
        colv = T[:, col].copy()
        colv[r] = 0.0
        T -= np.outer(colv, T[r])

    def _iterate(self, T, basis, allowed, nrows):
        """Run simplex pivots on tableau ``T`` (objective in last row).

        Returns ``None`` on optimality or the entering column on unboundedness.
        """
        n_total = T.shape[1] - 1
        switch_after = 5 * (nrows + n_total)
        hard_cap = 50 * (nrows + n_total) + 1000
        local = 0
        while True:
            obj = T[-1, :n_total]
            cand = np.flatnonzero((obj < -FEAS_TOL) & allowed)
            if cand.size == 0:
                return None
            bland = local >= switch_after
            if bland:
                self.bland_used = True
                col = int(cand[0])
            else:
                col = int(cand[np.argmin(obj[cand])])
            colv = T[:nrows, col]
            pos = np.flatnonzero(colv > PIVOT_TOL)
            if pos.size == 0:
                return col
            ratios = T[pos, -1] / colv[pos]
            best = ratios.min()
            ties = pos[ratios <= best + FEAS_TOL * max(1.0, abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: basis[i]))
            else:
                r = int(ties[np.argmax(colv[ties])])
            if abs(T[r, col]) < PIVOT_TOL:
                raise NumericalFailure("pivot element below tolerance")
            self._pivot(T, r, col)
            basis[r] = col
            local += 1
            self.iterations += 1
            if local > hard_cap:
                raise NumericalFailure("simplex iteration cap exceeded")

    # --- driver ------------------------------------------------------------

    def run(self) -> LpSolution:
        M, h = self.M, self.h
        m, ncols = M.shape
        # equilibrate: rows then columns, only to steer pivoting
        rscale = np.max(np.abs(M), axis=1) if ncols else np.ones(m)
        rscale[rscale == 0] = 1.0
        Ms = M / rscale[:, None]
        hs = h / rscale
        cscale = np.max(np.abs(Ms), axis=0) if m else np.ones(ncols)
        cscale[cscale == 0] = 1.0
        Ms = Ms / cscale[None, :]
        cost_s = self.cost / cscale

        # slacks of unflipped inequality rows can start basic
        basis = [-1] * m
        for r in range(self.m_ub):
            if self.sign[r] > 0:
                basis[r] = self.ny + r
        art_rows = [r for r in range(m) if basis[r] < 0]
        n_art = len(art_rows)
        T = np.zeros((m + 1, ncols + n_art + 1))
        T[:m, :ncols] = Ms
        T[:m, -1] = hs
        for a, r in enumerate(art_rows):
            T[r, ncols + a] = 1.0
            basis[r] = ncols + a
        # slack columns were rescaled; renormalise their basic rows
        for r in range(m):
            if basis[r] < ncols:
                T[r] /= T[r, basis[r]]

        phase1 = 0.0
        if n_art:
            T[-1, ncols:ncols + n_art] = 1.0
            for r in art_rows:
                T[-1] -= T[r]
            allowed = np.ones(ncols + n_art, dtype=bool)
            self._iterate(T, basis, allowed, m)
            phase1 = -T[-1, -1]
            if phase1 > PHASE1_TOL:
                return LpSolution(LpStatus.INFEASIBLE, phase1_objective=phase1,
                                  iterations=self.iterations, bland_used=self.bland_used)
            # drive remaining artificials out; drop redundant rows
            keep = []
            for r in range(m):
                if basis[r] >= ncols:
                    row = np.abs(T[r, :ncols])
                    nz = np.flatnonzero(row > 1e-9)
                    if nz.size:
                        col = int(nz[np.argmax(row[nz])])
                        self._pivot(T, r, col)
                        basis[r] = col
                        keep.append(r)
                else:
                    keep.append(r)
            T = np.vstack([T[keep], T[-1:]])
            basis = [basis[r] for r in keep]
            T = np.delete(T, np.s_[ncols:ncols + n_art], axis=1)
        rows = list(range(m)) if not n_art else keep
        nrows = len(rows)

        # phase 2 objective row
        T[-1] = 0.0
        T[-1, :ncols] = cost_s
        for r, b in enumerate(basis):
            if T[-1, b] != 0.0:
                T[-1] -= T[-1, b] * T[r]
        allowed = np.ones(ncols, dtype=bool)
        entering = self._iterate(T, basis, allowed, nrows)
        if entering is not None:
            d = np.zeros(ncols)
            d[entering] = 1.0
            d[basis] = -T[:nrows, entering]
            d = d / cscale
            ray = self.P @ d[:self.ny]
            return LpSolution(LpStatus.UNBOUNDED, ray=ray, phase1_objective=phase1,
                              iterations=self.iterations, bland_used=self.bland_used)
        return self._recover(rows, basis, phase1)

    def _recover(self, rows, basis, phase1) -> LpSolution:
        """Recompute primal and dual values from the final basis in original units."""
        M, h, cost = self.M, self.h, self.cost
        ncols = M.shape[1]
        B = M[np.ix_(rows, basis)]
        w = np.zeros(ncols)
        if rows:
            w[basis] = np.linalg.solve(B, h[rows])
            pi_rows = np.linalg.solve(B.T, cost[basis])
        else:
            pi_rows = np.zeros(0)
        w[np.abs(w) < 1e-13] = 0.0
        w = np.maximum(w, 0.0)
        pi = np.zeros(M.shape[0])
        pi[rows] = pi_rows
        pi_orig = pi * self.sign
        prob = self.problem
        x = self.shift + self.P @ w[:self.ny]
        y_ub = -pi_orig[:self.m_ub]
        y_eq = pi_orig[self.m_ub:]
        z = prob.c + prob.A_ub.T @ y_ub - prob.A_eq.T @ y_eq
        z = np.where(np.isfinite(prob.lb), z, 0.0)
        return LpSolution(
            LpStatus.OPTIMAL,
            x=x,
            objective=float(prob.c @ x),
            ineq_duals=y_ub,
            eq_duals=y_eq,
            reduced_costs=z,
            phase1_objective=phase1,
            iterations=self.iterations,
            bland_used=self.bland_used,
            basis=tuple(int(b) for b in basis),
        )


def kkt_residuals(problem: LpProblem, sol: LpSolution) -> dict[str, float]:
    """Primal feasibility, dual feasibility, complementary slackness and duality gap."""
    x = sol.x
    slack = problem.b_ub - problem.A_ub @ x
    finite = np.isfinite(problem.lb)
    primal = max(
        float(np.max(-slack, initial=0.0)),
        float(np.max(np.abs(problem.A_eq @ x - problem.b_eq), initial=0.0)),
        float(np.max((problem.lb - x)[finite], initial=0.0)),
    )
    dual = max(float(np.max(-sol.ineq_duals, initial=0.0)),
               float(np.max(-sol.reduced_costs[finite], initial=0.0)))
    stationarity = problem.c + problem.A_ub.T @ sol.ineq_duals - problem.A_eq.T @ sol.eq_duals - sol.reduced_costs
    comp = max(
        float(np.max(np.abs(sol.ineq_duals * slack), initial=0.0)),
        float(np.max(np.abs(sol.reduced_costs[finite] * (x - problem.lb)[finite]), initial=0.0)),
    )
    dual_obj = (-problem.b_ub @ sol.ineq_duals + problem.b_eq @ sol.eq_duals
                + problem.lb[finite] @ sol.reduced_costs[finite])
    return {
        "primal": primal,
        "dual": dual,
        "stationarity": float(np.max(np.abs(stationarity), initial=0.0)),
        "complementarity": comp,
        "gap": abs(float(sol.objective - dual_obj)),
    }
