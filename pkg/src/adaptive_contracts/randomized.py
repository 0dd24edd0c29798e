"""Randomised inspection: committed/uncommitted, mixed/negative variants.

* CoMI (committed, mixed) generally has no optimum; :func:`comi_supremum`
  returns its least upper bound and whether it is attained, and
  :func:`comi_scale_down` builds the approaching sequence.
* CoNI, UMI and UNI have optima but no known efficient algorithm;
  :func:`search_randomized` enumerates which signals are never / sometimes /
  always inspected and grid-searches the interior probabilities.
* :func:`det_to_uni` and :func:`to_always_inspect` are the payment-preserving
  transforms that bracket the variants against deterministic contracts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .det_solvers import BEST, IMPROVE_TOL, SolveReport, Target, resolve_targets
from .errors import InfeasibleTarget, PreconditionViolated, SearchGuardExceeded
from .minpay import (INFEASIBLE, Support, Variant, VariantConstraints,
                     minpay_fixed_policy)
from .model import (MONEY_TOL, Contract, Setting, agent_utilities,
                    expected_inspection_cost, expected_payment, expected_rewards)


# --- committed mixed inspection --------------------------------------------

@dataclass(frozen=True)
class ComiSupremum:
    target: int
    utility: float
    total_cost: float
    attained: bool

    def to_dict(self) -> dict:
        return {"variant": "comi-sup", "target": self.target, "principal_utility": self.utility,
                "total_cost": self.total_cost, "attained": self.attained}


def _comi_for_action(s: Setting, i: int) -> tuple[float, bool]:
    free = s.replace(d=np.zeros(s.ell))
    ct = minpay_fixed_policy(free, np.ones(s.ell), i)
    if ct is INFEASIBLE:
        return np.inf, False
    sup = expected_payment(free, ct, i)
    # Attained iff the free-inspection value survives when every signal that
    # would cost the target something is left uninspected.
    p = np.where(s.q0[i] * s.d > 0, 0.0, 1.0)
    alt = minpay_fixed_policy(s, p, i)
    attained = alt is not INFEASIBLE and (
        expected_payment(s, alt, i) + expected_inspection_cost(s, alt, i)
        <= sup + MONEY_TOL * max(1.0, abs(sup)))
    return sup, bool(attained)


def comi_supremum(s: Setting, target: Target = BEST) -> ComiSupremum:
    """Least upper bound on principal utility with committed mixed inspection.

    Inspection can be made arbitrarily rare while scaling its payments up,
    so the bound is the value of the same setting with free inspection.
    """
    R = expected_rewards(s)
    best = None
    for i in resolve_targets(s, target):
        cost, attained = _comi_for_action(s, i)
        if not np.isfinite(cost):
            continue
        cand = ComiSupremum(i, float(R[i] - cost), float(cost), attained)
        if best is None or cand.utility > best.utility + IMPROVE_TOL:
            best = cand
    if best is None:
        raise InfeasibleTarget(f"no contract incentivises target {target!r}")
    return best


def comi_scale_down(ct: Contract, k: int, p_new: float) -> Contract:
    """Lower ``p_k`` to ``p_new`` while keeping every action's expected transfer.

    The signal payment is scaled by ``(1 - p) / (1 - p_new)`` and the outcome
    payments by ``p / p_new``.
    """
    pk = float(ct.p[k])
    if not 0 < p_new < pk:
        raise ValueError(f"need 0 < p_new < p[{k}] = {pk}, got {p_new}")
    p, sv = ct.p.copy(), ct.s.copy()
    t = list(ct.t)
    sv[k] = sv[k] * (1 - pk) / (1 - p_new)
    t[k] = t[k] * (pk / p_new)
    p[k] = p_new
    return Contract(p, sv, tuple(t))


# --- payment-preserving transforms -----------------------------------------

def det_to_uni(s: Setting, ct: Contract, i: int) -> Contract:
    """Rewrite a deterministic contract so it also satisfies the UNI constraints.

    Uninspected signals get ``t_k := s_k``; inspected ones get
    ``s_k := d_k + max_j t_kj``. Both changes touch only unreachable payments.
    """
    ct.check_against(s)
    if not ct.is_deterministic:
        raise PreconditionViolated("contract must inspect deterministically")
    ua = agent_utilities(s, ct)
    if ua[i] < ua.max() - MONEY_TOL:
        raise PreconditionViolated(f"contract does not incentivise action {i}")
    sv = ct.s.copy()
    t = list(ct.t)
    for k in range(s.ell):
        if ct.p[k] == 0:
            t[k] = np.full(s.m[k], sv[k])
        else:
            sv[k] = s.d[k] + float(np.max(t[k]))
    return Contract(ct.p, sv, tuple(t))


def to_always_inspect(s: Setting, ct: Contract) -> Contract:
    """Inspect every signal, folding each signal payment into its outcome payments."""
    ct.check_against(s)
    t = tuple((1 - ct.p[k]) * ct.s[k] + ct.p[k] * ct.t[k] for k in range(s.ell))
    return Contract(np.ones(s.ell), ct.s, t)


# --- grid search over interior probabilities -------------------------------

@dataclass(frozen=True)
class GridConfig:
    """Nested grid for interior inspection probabilities.

    The first pass uses ``initial_step`` on ``(0, 1)``; each of ``refinements``
    rounds divides the step by ``shrink`` and scans ``+-radius`` steps around
    the incumbent. Full Cartesian grids are used while they stay below
    ``max_points``; beyond that, coordinates are optimised one at a time.
    """

    initial_step: float = 0.05
    refinements: int = 3
    shrink: int = 10
    radius: int = 10
    max_points: int = 20000
    max_signals: int = 6
    max_sweeps: int = 20

    @property
    def resolution(self) -> float:
        return self.initial_step / self.shrink ** self.refinements


def _classifications(ell: int):
    """All support patterns, fewest interior signals first."""
    pats = list(itertools.product((Support.FORCED_ZERO, Support.INTERIOR, Support.FORCED_ONE),
                                  repeat=ell))
    return sorted(pats, key=lambda c: sum(x == Support.INTERIOR for x in c))


class _Search:
    def __init__(self, s: Setting, i: int, variant: Variant, grid: GridConfig):
        self.s, self.i, self.variant, self.grid = s, i, variant, grid
        self.solves = 0
        self.best = None
        self.best_cost = np.inf
        self.coordinatewise = False

    def evaluate(self, p: np.ndarray) -> float:
        self.solves += 1
        ct = minpay_fixed_policy(self.s, p, self.i,
                                 VariantConstraints.for_policy(self.variant, p))
        if ct is INFEASIBLE:
            return np.inf
        cost = expected_payment(self.s, ct, self.i) + expected_inspection_cost(self.s, ct, self.i)
        if cost < self.best_cost - IMPROVE_TOL:
            self.best, self.best_cost = ct, cost
        return cost

    def _axis(self, centre: float | None, step: float) -> np.ndarray:
        if centre is None:
            pts = np.arange(1, round(1 / step)) * step
        else:
            pts = centre + np.arange(-self.grid.radius, self.grid.radius + 1) * step
        pts = np.round(pts, 12)
        return pts[(pts > 0) & (pts < 1)]

    def _scan(self, base: np.ndarray, dims: list[int], axes: list[np.ndarray]):
        """Evaluate a Cartesian or coordinate-wise grid; return the best point."""
        size = int(np.prod([a.size for a in axes]))
        best_p, best_c = None, np.inf
        if size <= self.grid.max_points:
            for combo in itertools.product(*axes):
                p = base.copy()
                p[dims] = combo
                c = self.evaluate(p)
                if c < best_c - IMPROVE_TOL:
                    best_p, best_c = p, c
            return best_p, best_c
        self.coordinatewise = True
        cur = base.copy()
        cur[dims] = [a[a.size // 2] for a in axes]
        cur_c = self.evaluate(cur)
        best_p, best_c = (cur, cur_c) if np.isfinite(cur_c) else (None, np.inf)
        for _ in range(self.grid.max_sweeps):
            moved = False
            for d, ax in zip(dims, axes):
                for x in ax:
                    p = cur.copy()
                    p[d] = x
                    c = self.evaluate(p)
                    if c < cur_c - IMPROVE_TOL:
                        cur, cur_c, moved = p, c, True
            if np.isfinite(cur_c):
                best_p, best_c = cur, cur_c
            if not moved:
                break
        return best_p, best_c

    def run_pattern(self, pattern) -> None:
        base = np.array([1.0 if x == Support.FORCED_ONE else 0.0 for x in pattern])
        dims = [k for k, x in enumerate(pattern) if x == Support.INTERIOR]
        if not dims:
            self.evaluate(base)
            return
        step = self.grid.initial_step
        p, c = self._scan(base, dims, [self._axis(None, step)] * len(dims))
        if p is None:
            return
        for _ in range(self.grid.refinements):
            step /= self.grid.shrink
            q, qc = self._scan(base, dims, [self._axis(p[d], step) for d in dims])
            if q is not None and qc < c - IMPROVE_TOL:
                p, c = q, qc


def search_randomized(s: Setting, target: Target, variant: Variant | str,
                      grid: GridConfig = GridConfig()) -> SolveReport:
    """Best CoNI / UMI / UNI contract found by support enumeration plus grid search."""
    variant = Variant(variant)
    if variant == Variant.PLAIN:
        raise ValueError("use the deterministic solvers for plain contracts")
    if s.ell > grid.max_signals:
        raise SearchGuardExceeded(
            f"{s.ell} signals exceeds the search limit of {grid.max_signals}")
    R = expected_rewards(s)
    targets = resolve_targets(s, target)
    table = np.full(s.n, np.nan)
    chosen, chosen_val, solves, coordwise = None, -np.inf, 0, False
    for i in targets:
        search = _Search(s, i, variant, grid)
        for pattern in _classifications(s.ell):
            search.run_pattern(pattern)
        solves += search.solves
        coordwise |= search.coordinatewise
        table[i] = search.best_cost
        if search.best is None:
            continue
        val = R[i] - search.best_cost
        if val > chosen_val + IMPROVE_TOL:
            chosen, chosen_val, chosen_ct = i, val, search.best
    if chosen is None:
        raise InfeasibleTarget(f"no contract incentivises target {target!r}")
    chosen_ct = minpay_fixed_policy(s, chosen_ct.p, chosen,
                                    VariantConstraints.for_policy(variant, chosen_ct.p),
                                    polish=True)
    T = expected_payment(s, chosen_ct, chosen)
    D = expected_inspection_cost(s, chosen_ct, chosen)
    stats = {"lp_solves": solves, "coordinatewise": coordwise}
    return SolveReport(variant.value, chosen, chosen_ct, T, D, float(R[chosen] - T - D),
                       table, "support-grid-search", stats, (), grid.resolution)


__all__ = [
    "ComiSupremum", "GridConfig", "comi_scale_down", "comi_supremum", "det_to_uni",
    "search_randomized", "to_always_inspect",
]
