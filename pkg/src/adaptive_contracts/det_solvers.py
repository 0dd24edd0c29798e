"""Optimal contracts with deterministic inspection policies.

Every solver here reduces to the same step: fix ``p in {0, 1}^ell``, solve the
fixed-policy LP from :mod:`minpay`, keep the cheapest. They differ only in
which policies they are allowed to skip:

* :func:`brute_force_optimal` tries all ``2**ell`` policies;
* :func:`solve_constant_actions` tries only policies inspecting at most
  ``n - 1`` signals, which always contains an optimum;
* :func:`solve_isop` tries the ``ell + 1`` policies inspecting at most one
  signal and restricts payments to two atoms, which is exact when outcomes
  are independent of signals and likelihood ratios are monotone.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .combined import combined_distribution, outcome_offsets
from .errors import EnumerationTooLarge, InfeasibleTarget, PreconditionViolated
from .lp_core import LpProblem, LpStatus, solve_lp
from .minpay import (INFEASIBLE, PLAIN, incentive_rows,
                     minpay_fixed_policy, minpay_lp, minpay_total_cost)
from .model import (MONEY_TOL, Contract, Setting, check_isop, check_mlrp,
                    expected_inspection_cost, expected_payment, expected_rewards)

BEST = "best"
Target = Union[int, str]

MAX_BRUTE_FORCE_SIGNALS = 20
IMPROVE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of a contract optimisation.

    ``cost_table[i]`` is the cheapest total cost ``T_i + D_i`` found for action
    ``i`` (``inf`` when not implementable, ``nan`` when not evaluated).
    """

    variant: str
    target: int
    contract: Contract
    payment: float
    inspection_cost: float
    utility: float
    cost_table: np.ndarray
    algorithm: str
    stats: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()
    resolution: float | None = None

    @property
    def total_cost(self) -> float:
        return self.payment + self.inspection_cost

    def to_dict(self, setting: Setting | None = None) -> dict:
        out = {
            "variant": self.variant,
            "algorithm": self.algorithm,
            "target": self.target,
            "contract": self.contract.to_dict(),
            "expected_payment": self.payment,
            "expected_inspection_cost": self.inspection_cost,
            "total_cost": self.total_cost,
            "principal_utility": self.utility,
            "cost_table": [None if not np.isfinite(x) else float(x) for x in self.cost_table],
            "implementable": [bool(np.isfinite(x)) if not np.isnan(x) else None
                              for x in self.cost_table],
            "stats": dict(self.stats),
            "warnings": list(self.warnings),
        }
        if self.resolution is not None:
            out["grid_resolution"] = self.resolution
        if setting is not None:
            out["target_label"] = setting.action_labels[self.target]
        return out

    def replace(self, **changes) -> "SolveReport":
        return dataclasses.replace(self, **changes)


def resolve_targets(s: Setting, target: Target) -> list[int]:
    if isinstance(target, str):
        if target.lower() != BEST:
            raise ValueError(f"target must be an action index or {BEST!r}")
        return list(range(s.n))
    i = int(target)
    if not 0 <= i < s.n:
        raise IndexError(f"action index {i} out of range for {s.n} actions")
    return [i]


def policies_up_to(ell: int, max_size: int) -> Iterable[tuple[int, ...]]:
    """Inspection sets by size, then lexicographically."""
    for size in range(min(max_size, ell) + 1):
        yield from itertools.combinations(range(ell), size)


def policy_vector(ell: int, subset: Iterable[int]) -> np.ndarray:
    p = np.zeros(ell)
    p[list(subset)] = 1.0
    return p


def _total(s: Setting, ct: Contract, i: int) -> tuple[float, float]:
    return expected_payment(s, ct, i), expected_inspection_cost(s, ct, i)


def _best_policy(s: Setting, i: int, policies, vc_for=lambda p: PLAIN):
    """Cheapest contract for ``i`` over ``policies``; first strict minimum wins."""
    best, best_cost, count = None, np.inf, 0
    for subset in policies:
        p = policy_vector(s.ell, subset)
        _, ct = minpay_lp(s, p, i, vc_for(p))
        count += 1
        if ct is INFEASIBLE:
            continue
        cost = sum(_total(s, ct, i))
        if cost < best_cost - IMPROVE_TOL:
            best, best_cost = ct, cost
    return best, best_cost, count


def _assemble(s: Setting, targets: list[int], per_target, algorithm: str,
              variant: str = "det", warnings=(), polish: bool = True) -> SolveReport:
    """Pick the best target from ``{i: (contract, cost, lp_count)}``."""
    R = expected_rewards(s)
    table = np.full(s.n, np.nan)
    chosen, chosen_val, lp_total = None, -np.inf, 0
    for i in targets:
        ct, cost, count = per_target[i]
        lp_total += count
        table[i] = cost
        if ct is None:
            continue
        val = R[i] - cost
        if val > chosen_val + IMPROVE_TOL:
            chosen, chosen_val = i, val
    if chosen is None:
        raise InfeasibleTarget(f"no contract incentivises {s.action_labels[targets[0]]!r}"
                               if len(targets) == 1 else "no action can be incentivised")
    ct = per_target[chosen][0]
    if polish:
        ct = minpay_fixed_policy(s, ct.p, chosen, PLAIN, polish=True)
    T, D = _total(s, ct, chosen)
    return SolveReport(variant, chosen, ct, T, D, float(R[chosen] - T - D), table,
                       algorithm, {"lp_solves": lp_total}, tuple(warnings))


def brute_force_optimal(s: Setting, target: Target = BEST) -> SolveReport:
    """Exhaustive search over all deterministic inspection policies."""
    if s.ell > MAX_BRUTE_FORCE_SIGNALS:
        raise EnumerationTooLarge(
            f"{s.ell} signals exceeds the brute-force limit of {MAX_BRUTE_FORCE_SIGNALS}")
    targets = resolve_targets(s, target)
    per = {i: _best_policy(s, i, policies_up_to(s.ell, s.ell)) for i in targets}
    return _assemble(s, targets, per, "brute-force")


def solve_constant_actions(s: Setting, target: Target = BEST) -> SolveReport:
    """Search only policies inspecting at most ``n - 1`` signals."""
    targets = resolve_targets(s, target)
    per = {i: _best_policy(s, i, policies_up_to(s.ell, s.n - 1)) for i in targets}
    return _assemble(s, targets, per, "constant-actions")


# --- independent signals and outcomes --------------------------------------

def _require_isop(s: Setting) -> None:
    if not check_isop(s):
        raise PreconditionViolated("outcome distributions differ across signals")
    if not check_mlrp(s.q0):
        raise PreconditionViolated("signal distribution lacks monotone likelihood ratios")
    if not check_mlrp(s.qk[0]):
        raise PreconditionViolated("outcome distribution lacks monotone likelihood ratios")


def candidate_atoms(s: Setting, p, i: int) -> list[int]:
    """The (at most two) combined-space atoms an optimal payment uses.

    These are the highest signal that ``i`` can send uninspected, and the top
    outcome of the highest signal that ``i`` can send and gets inspected.
    """
    p = np.asarray(p, dtype=float)
    offs = outcome_offsets(s)
    atoms = []
    reach = s.q0[i] > 0
    uninspected = np.flatnonzero(reach & (p < 1))
    inspected = np.flatnonzero(reach & (p > 0))
    if uninspected.size:
        atoms.append(int(uninspected[-1]))
    if inspected.size:
        k = int(inspected[-1])
        atoms.append(int(offs[k] + s.m[k] - 1))
    return atoms


def _restricted_minpay(s: Setting, p, i: int):
    """Fixed-policy LP with payments only on :func:`candidate_atoms`."""
    f = combined_distribution(s, p).f
    atoms = candidate_atoms(s, p, i)
    A, b, _ = incentive_rows(f, s.c, i)
    sol = solve_lp(LpProblem(f[i, atoms], A[:, atoms], b))
    if not sol.optimal:
        return None
    v = np.zeros(f.shape[1])
    v[atoms] = sol.x
    ell = s.ell
    offs = outcome_offsets(s)
    t = tuple(v[o:o + mk].copy() for o, mk in zip(offs, s.m))
    return Contract(p, v[:ell].copy(), t)


def solve_isop(s: Setting) -> SolveReport:
    """Optimal deterministic contract for the last action under ISOP and MLRP."""
    _require_isop(s)
    i = s.n - 1
    warnings = []
    if s.c[i] < np.max(s.c):
        warnings.append("targeted action is not the most expensive one")
    best, best_cost = None, np.inf
    policies = [()] + [(k,) for k in range(s.ell)]
    for subset in policies:
        ct = _restricted_minpay(s, policy_vector(s.ell, subset), i)
        if ct is None:
            continue
        cost = sum(_total(s, ct, i))
        if cost < best_cost - IMPROVE_TOL:
            best, best_cost = ct, cost
    return _assemble(s, [i], {i: (best, best_cost, len(policies))}, "isop",
                     warnings=warnings, polish=False)


def prune_unpaid_inspections(s: Setting, ct: Contract) -> Contract:
    """Stop inspecting signals whose every outcome pays nothing.

    Such an inspection transfers nothing and costs ``d_k``; not inspecting
    and paying ``s_k = 0`` transfers the same nothing for free.
    """
    ct.check_against(s)
    if not ct.is_deterministic:
        raise ValueError("pruning applies to deterministic policies only")
    p, sv = ct.p.copy(), ct.s.copy()
    t = list(ct.t)
    for k in range(s.ell):
        if p[k] == 1 and np.all(t[k] == 0):
            sv[k] = (1 - p[k]) * sv[k]
            p[k] = 0.0
    return Contract(p, sv, tuple(t))


def isop_dual_check(s: Setting, p) -> bool:
    """Confirm that two dual constraints certify the fixed-policy optimum.

    Solves the dual of the last action's fixed-policy LP twice, once with every
    reachable atom's constraint and once with only the two candidate atoms.
    The check passes when both agree with each other and with the primal
    optimum, i.e. the remaining constraints are never needed.
    """
    _require_isop(s)
    p = np.asarray(p, dtype=float)
    if not np.all((p == 0) | (p == 1)):
        raise ValueError("policy must be deterministic")
    i = s.n - 1
    f = combined_distribution(s, p).f
    A_ic, b_ic, rivals = incentive_rows(f, s.c, i)
    reachable = np.flatnonzero(f[i] > 0)

    def dual_value(atoms):
        # maximise sum_r lam_r (c_i - c_r) s.t. sum_r lam_r (f_i - f_r)[w] <= f_i[w]
        sol = solve_lp(LpProblem(b_ic, -A_ic[:, atoms].T, f[i, atoms]))
        if sol.status == LpStatus.UNBOUNDED:
            return np.inf
        return -sol.objective

    full = dual_value(list(reachable))
    pair = dual_value(candidate_atoms(s, p, i))
    lp, ct = minpay_lp(s, p, i, PLAIN)
    if ct is INFEASIBLE:
        return bool(np.isinf(full) and np.isinf(pair))
    primal = lp.solution.objective
    lam = lp.solution.ineq_duals[:len(rivals)]
    lam_value = float(lam @ -b_ic)
    tol = MONEY_TOL * max(1.0, abs(primal))
    return bool(abs(full - primal) <= tol and abs(pair - primal) <= tol
                and abs(lam_value - primal) <= tol)


__all__ = [
    "BEST", "SolveReport", "brute_force_optimal", "candidate_atoms", "isop_dual_check",
    "policies_up_to", "policy_vector", "prune_unpaid_inspections", "resolve_targets",
    "solve_constant_actions", "solve_isop", "minpay_total_cost",
]
