"""Cheapest payments that make a target action a best response, for fixed ``p``.

With the inspection vector held fixed the design problem is linear in the
combined-space payment vector ``v = (s, t)``: minimise ``f_i . v`` subject to
``v >= 0`` and one incentive row per rival action. Randomised variants add
linear side constraints on signals inspected with interior probability.

Signals inspected with probability exactly 0 or 1 have one half of their
payments unreachable for *every* action. Those variables are left out of the
LP and filled in afterwards so the returned contract satisfies the variant's
side constraints without changing any action's expected transfer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .combined import combined_distribution, split_payments
from .lp_core import LpProblem, LpSolution, solve_lp
from .model import Contract, Setting, expected_inspection_cost


class Variant(enum.Enum):
    PLAIN = "Plain"
    CONI = "CoNI"
    UMI = "UMI"
    UNI = "UNI"

    @property
    def negative(self) -> bool:
        """Inspection may only lower the transfer (``t <= s``)."""
        return self in (Variant.CONI, Variant.UNI)

    @property
    def uncommitted(self) -> bool:
        """Principal must be indifferent about inspecting (``s = d + E t``)."""
        return self in (Variant.UMI, Variant.UNI)


class Support(enum.Enum):
    FORCED_ZERO = "ForcedZero"
    INTERIOR = "Interior"
    FORCED_ONE = "ForcedOne"


def classify(p) -> tuple[Support, ...]:
    out = []
    for pk in np.asarray(p, dtype=float):
        if pk == 0.0:
            out.append(Support.FORCED_ZERO)
        elif pk == 1.0:
            out.append(Support.FORCED_ONE)
        else:
            out.append(Support.INTERIOR)
    return tuple(out)


@dataclass(frozen=True)
class VariantConstraints:
    """Which side constraints apply, and the support class of every signal."""

    tag: Variant = Variant.PLAIN
    classification: tuple[Support, ...] | None = None

    @classmethod
    def for_policy(cls, tag: Variant | str, p) -> "VariantConstraints":
        return cls(Variant(tag), classify(p))

    def resolve(self, p) -> tuple[Support, ...]:
        derived = classify(p)
        if self.classification is not None and tuple(self.classification) != derived:
            raise ValueError("support classification is inconsistent with p")
        return derived


PLAIN = VariantConstraints()

# Probability differences below this are floating-point noise (e.g. a row
# normalised to 0.9999999999999999 against an exact 1.0). Left in, the LP
# reads them as a real lever and pays astronomically through them.
DIFF_TOL = 1e-12


def incentive_rows(f: np.ndarray, c, i: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """IC rows ``(f_r - f_i) . v <= c_r - c_i`` for every rival ``r``, noise removed."""
    rivals = [r for r in range(f.shape[0]) if r != i]
    A = (f[rivals] - f[i]).reshape(len(rivals), f.shape[1])
    A[np.abs(A) <= DIFF_TOL] = 0.0
    b = np.array([c[r] - c[i] for r in rivals], dtype=float)
    return A, b, rivals


class Infeasible:
    """Marker returned when the target cannot be incentivised under ``p``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFEASIBLE"

    def __bool__(self):
        return False


INFEASIBLE = Infeasible()


@dataclass(frozen=True, eq=False)
class MinPayLp:
    """The assembled LP together with what is needed to read it back."""

    problem: LpProblem
    columns: np.ndarray          # combined-space index of every LP column
    f: np.ndarray                # combined distribution, n x |Omega|
    rival_rows: np.ndarray       # action index of each inequality row that is an IC row
    solution: LpSolution | None = None


def _check_inputs(s: Setting, p, i: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (s.ell,):
        raise ValueError(f"p must have {s.ell} entries")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("inspection probabilities must lie in [0, 1]")
    if not 0 <= i < s.n:
        raise IndexError(f"action index {i} out of range for {s.n} actions")
    return p


def build_minpay_lp(s: Setting, p, i: int, vc: VariantConstraints = PLAIN,
                    clamp: bool = True) -> MinPayLp:
    """Assemble the fixed-policy LP.

    With ``clamp`` the payment variables that action ``i`` reaches with
    probability zero are fixed at zero (dropped). That is without loss: they
    only raise rival actions' transfers. The one exception is an interior
    uncommitted signal that ``i`` never sends, whose indifference equality
    still ties ``s_k`` to ``t_k`` and therefore keeps both.
    """
    p = _check_inputs(s, p, i)
    support = vc.resolve(p)
    cd = combined_distribution(s, p)
    f = cd.f
    ell = s.ell
    offs = ell + np.concatenate([[0], np.cumsum(s.m)[:-1]]).astype(int)
    n_atoms = f.shape[1]

    # Variables reachable by nobody are dropped regardless of ``clamp``.
    keep = np.zeros(n_atoms, dtype=bool)
    for k in range(ell):
        sl = slice(offs[k], offs[k] + s.m[k])
        if support[k] != Support.FORCED_ONE:
            keep[k] = True
        if support[k] != Support.FORCED_ZERO:
            keep[sl] = True
    if clamp:
        reach = f[i] > 0
        protect = np.zeros(n_atoms, dtype=bool)
        for k in range(ell):
            if vc.tag.uncommitted and support[k] == Support.INTERIOR and s.q0[i, k] == 0:
                protect[k] = True
                protect[offs[k]:offs[k] + s.m[k]] = s.qk[k][i] > 0
                if vc.tag.negative:
                    protect[offs[k]:offs[k] + s.m[k]] = True
        keep &= reach | protect

    A_ic, b_ic, rivals = incentive_rows(f, s.c, i)
    A_ub, b_ub = list(A_ic), list(b_ic)
    A_eq, b_eq = [], []
    for k in range(ell):
        if support[k] != Support.INTERIOR:
            continue
        sl = slice(offs[k], offs[k] + s.m[k])
        if vc.tag.negative:
            for j in range(s.m[k]):
                row = np.zeros(n_atoms)
                row[offs[k] + j] = 1.0
                row[k] = -1.0
                A_ub.append(row)
                b_ub.append(0.0)
        if vc.tag.uncommitted:
            row = np.zeros(n_atoms)
            row[k] = 1.0
            row[sl] = -s.qk[k][i]
            A_eq.append(row)
            b_eq.append(s.d[k])

    cols = np.flatnonzero(keep)
    A_ub = np.array(A_ub).reshape(-1, n_atoms)[:, cols]
    A_eq = np.array(A_eq).reshape(-1, n_atoms)[:, cols]
    problem = LpProblem(f[i, cols], A_ub, np.array(b_ub), A_eq, np.array(b_eq))
    return MinPayLp(problem, cols, f, np.array(rivals, dtype=int))


def _complete(s: Setting, p, i: int, vc: VariantConstraints, v: np.ndarray) -> Contract:
    """Fill the payoff-irrelevant halves of boundary signals."""
    sv, tv = split_payments(s, v)
    sv = np.maximum(sv, 0.0)
    tv = [np.maximum(row, 0.0) for row in tv]
    support = classify(p)
    for k, sup in enumerate(support):
        if sup == Support.FORCED_ZERO:
            if vc.tag == Variant.UNI:
                tv[k] = np.full(s.m[k], sv[k])
            elif vc.tag == Variant.UMI:
                tv[k] = np.full(s.m[k], max(0.0, sv[k] - s.d[k]))
            else:
                tv[k] = np.zeros(s.m[k])
        elif sup == Support.FORCED_ONE:
            top = float(tv[k].max()) if tv[k].size else 0.0
            if vc.tag == Variant.UNI:
                sv[k] = s.d[k] + top
            elif vc.tag == Variant.UMI:
                sv[k] = s.d[k] + float(s.qk[k][i] @ tv[k])
            elif vc.tag == Variant.CONI:
                sv[k] = top
            else:
                sv[k] = 0.0
    return Contract(p, sv, tuple(tv))


POLISH_TOL = 1e-9


def _polish(problem: LpProblem, x: np.ndarray, value: float) -> np.ndarray:
    """Among payment vectors within ``POLISH_TOL`` of the optimum, minimise ``sum(v)``.

    Optimal fixed-policy LPs are often degenerate; this picks the optimum
    that promises the least nominal money, which concentrates payment on the
    most informative atoms.
    """
    if problem.n_vars == 0:
        return x
    cap = value + POLISH_TOL * max(1.0, abs(value))
    second = LpProblem(np.ones(problem.n_vars), np.vstack([problem.A_ub, problem.c]),
                       np.append(problem.b_ub, cap), problem.A_eq, problem.b_eq)
    sol = solve_lp(second)
    return sol.x if sol.optimal else x


def _solve(s: Setting, p, i: int, vc: VariantConstraints, clamp: bool, polish: bool = False):
    lp = build_minpay_lp(s, p, i, vc, clamp)
    sol = solve_lp(lp.problem)
    lp = MinPayLp(lp.problem, lp.columns, lp.f, lp.rival_rows, sol)
    if not sol.optimal:
        return lp, INFEASIBLE
    x = _polish(lp.problem, sol.x, sol.objective) if polish else sol.x
    v = np.zeros(lp.f.shape[1])
    v[lp.columns] = x
    p = np.asarray(p, dtype=float)
    return lp, _complete(s, p, i, vc, v)


def minpay_fixed_policy(s: Setting, p, i: int, vc: VariantConstraints = PLAIN,
                        clamp: bool = True, polish: bool = False) -> Contract | Infeasible:
    """Cheapest contract with inspection vector ``p`` that incentivises ``i``.

    Returns :data:`INFEASIBLE` when no payments achieve that. With ``polish``
    ties between optimal payment vectors are broken towards the smallest
    total nominal payment (one extra LP).
    """
    return _solve(s, p, i, vc, clamp, polish)[1]


def minpay_lp(s: Setting, p, i: int, vc: VariantConstraints = PLAIN,
              clamp: bool = True) -> tuple[MinPayLp, Contract | Infeasible]:
    """Like :func:`minpay_fixed_policy` but also returns the solved LP (for duals)."""
    return _solve(s, p, i, vc, clamp)


def minpay_total_cost(s: Setting, p, i: int, vc: VariantConstraints = PLAIN) -> float:
    """``T_i + D_i`` of the cheapest contract, or ``inf`` if ``i`` is not implementable."""
    ct = minpay_fixed_policy(s, p, i, vc)
    if ct is INFEASIBLE:
        return float("inf")
    f = combined_distribution(s, ct.p).f
    v = np.concatenate([ct.s, *ct.t])
    return float(f[i] @ v) + expected_inspection_cost(s, ct, i)


def check_variant_constraints(s: Setting, ct: Contract, i: int, tag: Variant | str,
                              tol: float = 1e-6) -> list[str]:
    """List the side constraints of ``tag`` that ``ct`` violates for target ``i``."""
    tag = Variant(tag)
    problems = []
    if np.any(ct.s < -tol) or any(np.any(row < -tol) for row in ct.t):
        problems.append("negative payment")
    for k in range(s.ell):
        pk = ct.p[k]
        expect = s.d[k] + float(s.qk[k][i] @ ct.t[k])
        if tag.negative and np.any(ct.t[k] > ct.s[k] + tol):
            problems.append(f"signal {k}: outcome payment exceeds signal payment")
        if tag.uncommitted:
            if pk < 1 and ct.s[k] > expect + tol:
                problems.append(f"signal {k}: principal strictly prefers to inspect")
            if pk > 0 and ct.s[k] < expect - tol:
                problems.append(f"signal {k}: principal strictly prefers not to inspect")
    return problems


__all__ = [
    "INFEASIBLE", "Infeasible", "MinPayLp", "PLAIN", "Support", "Variant",
    "VariantConstraints", "build_minpay_lp", "check_variant_constraints", "classify",
    "incentive_rows", "minpay_fixed_policy", "minpay_lp", "minpay_total_cost",
]
