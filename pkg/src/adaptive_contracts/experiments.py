"""Reproduction harness for the two case studies.

*AlpacaEval.* Three chat models; the free signal is whether a response is
short or long, the paid inspection is a pairwise quality judgement. The
adaptive optimum is compared with four non-adaptive baselines, and the
comparison is swept over the reward and the inspection cost.

*SWE-Bench.* Six coding models; signals and outcomes are pass counts of
Binomial test suites. Sweeps cover the per-test cost, the split between
initial and refined tests, test correlation and random perturbations.

Sweeps are pure functions of their grids; ``jobs > 1`` farms points out to a
process pool and reassembles results by index.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .det_solvers import BEST, SolveReport, brute_force_optimal, solve_isop
from .errors import InfeasibleTarget
from .generators import (SWEBENCH_PROFILES, ModelProfile, gen_beta_binomial_setting,
                         gen_binomial_setting, perturb_dirichlet)
from .lp_core import LpProblem, solve_lp
from .minpay import INFEASIBLE, incentive_rows, minpay_fixed_policy
from .model import (Contract, Setting, best_response, expected_inspection_cost,
                    expected_payment, expected_rewards, principal_utility)

# --- AlpacaEval -------------------------------------------------------------

ALPACA_REWARDS = (0.17, 0.88, 1.08)
ALPACA_REWARD_CHECK_TOL = 0.015
BASELINES = ("naive", "len", "judge", "len+judge")


def alpaca_setting(reward: float = 2.0, check: bool = True) -> Setting:
    """The three-model AlpacaEval instance.

    Signal 0 is a short response, signal 1 a long one; outcome 1 is a
    favourable judgement, worth ``reward``.
    """
    q0 = [[0.21, 0.79], [0.10, 0.90], [0.11, 0.89]]
    q_short = [[0.78, 0.22], [0.61, 0.39], [0.54, 0.46]]
    q_long = [[0.95, 0.05], [0.56, 0.44], [0.45, 0.55]]
    s = Setting(
        q0, (q_short, q_long), [0.00030, 0.00028, 0.00468], [0.3, 0.3],
        [[0.0, reward], [0.0, reward]],
        ("gpt-3.5-turbo-1106", "gpt-4o-mini-2024-07-18", "gpt-4o-2024-05-13"),
        ("short", "long"))
    if check and reward == 2.0:
        R = expected_rewards(s)
        if np.max(np.abs(R - ALPACA_REWARDS)) > ALPACA_REWARD_CHECK_TOL:
            raise AssertionError(f"signal/outcome pairing is off: R = {R}")
    return s


@dataclass(frozen=True)
class BaselineResult:
    name: str
    utility: float
    target: int


def _best_fixed_policy(s: Setting, p) -> BaselineResult | None:
    """Best target under a fixed inspection vector; ``None`` if nothing is implementable."""
    R = expected_rewards(s)
    best = None
    for i in range(s.n):
        ct = minpay_fixed_policy(s, p, i)
        if ct is INFEASIBLE:
            continue
        u = R[i] - expected_payment(s, ct, i) - expected_inspection_cost(s, ct, i)
        if best is None or u > best.utility + 1e-12:
            best = BaselineResult("", float(u), i)
    return best


def _judge_only(s: Setting) -> BaselineResult:
    """Always inspect; pay by outcome alone, ignoring which signal was sent."""
    if len(set(s.m)) != 1:
        raise ValueError("outcome-only payments need a common outcome space")
    marg = sum(s.q0[:, [k]] * s.qk[k] for k in range(s.ell))
    D = s.q0 @ s.d
    R = expected_rewards(s)
    best = None
    for i in range(s.n):
        A, b, _ = incentive_rows(marg, s.c, i)
        sol = solve_lp(LpProblem(marg[i], A, b))
        if not sol.optimal:
            continue
        u = R[i] - sol.objective - D[i]
        if best is None or u > best.utility + 1e-12:
            best = BaselineResult("judge", float(u), i)
    return best


def alpaca_baselines(s: Setting) -> dict[str, BaselineResult]:
    """Utilities of the four non-adaptive contracts, each optimised over targets."""
    flat = Contract(np.zeros(s.ell), np.full(s.ell, s.c.max()),
                    tuple(np.zeros(mk) for mk in s.m))
    out = {"naive": BaselineResult("naive", principal_utility(s, flat), best_response(s, flat))}
    for name, p in (("len", np.zeros(s.ell)), ("len+judge", np.ones(s.ell))):
        res = _best_fixed_policy(s, p)
        out[name] = BaselineResult(name, res.utility, res.target)
    out["judge"] = _judge_only(s)
    return {k: out[k] for k in BASELINES}


def relative_advantage(adaptive: float, baseline: float) -> float:
    """``(adaptive - baseline) / |baseline|``, zero when both vanish."""
    gap = adaptive - baseline
    if abs(gap) <= 1e-12:
        return 0.0
    return gap / max(abs(baseline), 1e-12)


def describe_policy(s: Setting, ct: Contract) -> str:
    ins = [s.signal_labels[k] for k in ct.inspected]
    return "none" if not ins else "inspect:" + "+".join(ins)


@dataclass(frozen=True)
class AlpacaComparison:
    adaptive: SolveReport
    baselines: dict[str, BaselineResult]

    @property
    def best_baseline(self) -> BaselineResult:
        return max(self.baselines.values(), key=lambda b: b.utility)

    @property
    def advantage(self) -> float:
        return relative_advantage(self.adaptive.utility, self.best_baseline.utility)


def alpaca_compare(s: Setting) -> AlpacaComparison:
    return AlpacaComparison(brute_force_optimal(s, BEST), alpaca_baselines(s))


# --- sweep plumbing ---------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    """One record per grid point, in grid order."""

    experiment: str
    parameter: str
    grid: tuple[float, ...]
    records: tuple[dict, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size and np.any(np.diff(g) <= 0):
            raise ValueError("sweep grid must be strictly increasing")
        if len(self.records) != len(self.grid):
            raise ValueError("need exactly one record per grid point")

    def column(self, name: str) -> list:
        return [rec[name] for rec in self.records]

    @property
    def stem(self) -> str:
        return f"{self.experiment}_{self.parameter}"

    def write_csv(self, path: str | Path) -> None:
        fields = list(self.records[0]) if self.records else [self.parameter]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(self.records)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "parameter": self.parameter,
                "grid": list(self.grid), "records": list(self.records), "meta": self.meta}

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=_json_default))


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _run(fn: Callable, points: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(points) <= 1:
        return [fn(x) for x in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, points))


def _check_grid(grid) -> tuple[float, ...]:
    g = tuple(float(x) for x in grid)
    if not g:
        raise ValueError("sweep grid is empty")
    return g


# --- AlpacaEval sweeps --------------------------------------------------------

def _alpaca_point(s: Setting, what: str, factor: float) -> dict:
    if what == "reward":
        t = s.replace(r=s.r * factor)
    else:
        t = s.replace(d=s.d * factor)
    cmp_ = alpaca_compare(t)
    best = cmp_.best_baseline
    rec = {"factor": factor,
           "value": float(np.nanmax(t.r)) if what == "reward" else float(t.d.max()),
           "adaptive_utility": cmp_.adaptive.utility,
           "adaptive_target": cmp_.adaptive.target,
           "adaptive_policy": describe_policy(t, cmp_.adaptive.contract)}
    for name, b in cmp_.baselines.items():
        rec[f"{name}_utility"] = b.utility
    rec["best_baseline"] = best.name
    rec["advantage"] = cmp_.advantage
    return rec


def sweep_reward(s: Setting, factors, jobs: int = 1) -> SweepResult:
    """Scale every reward by each factor; compare adaptive and baseline utilities."""
    g = _check_grid(factors)
    if min(g) <= 0:
        raise ValueError("reward factors must be positive")
    recs = _run(partial(_alpaca_point, s, "reward"), g, jobs)
    return SweepResult("alpaca", "reward", g, tuple(recs))


def sweep_inspection_cost(s: Setting, factors, jobs: int = 1) -> SweepResult:
    """Scale every inspection cost by each factor; compare adaptive and baselines."""
    g = _check_grid(factors)
    if min(g) <= 0:
        raise ValueError("inspection-cost factors must be positive")
    recs = _run(partial(_alpaca_point, s, "inspection"), g, jobs)
    return SweepResult("alpaca", "inspection_cost", g, tuple(recs))


# --- SWE-Bench ----------------------------------------------------------------

POLICY_CLASSES = ("full-success", "full-failure", "none", "other")


def classify_test_policy(s: Setting, ct: Contract) -> str:
    """Name a test-suite inspection policy by which pass counts it inspects."""
    ins = ct.inspected
    if not ins:
        return "none"
    if ins == (s.ell - 1,):
        return "full-success"
    if ins == (0,):
        return "full-failure"
    return "other"


def _cost_with_surcharge(s: Setting, rep: SolveReport) -> float:
    return rep.total_cost + s.pay_surcharge


def _policy_point(profiles, a, b, delta) -> dict:
    s = gen_binomial_setting(profiles, a, b, delta)
    rep = solve_isop(s)
    return {"delta": delta, "policy": classify_test_policy(s, rep.contract),
            "inspected": " ".join(str(k) for k in rep.contract.inspected),
            "payment": rep.payment, "inspection_cost": rep.inspection_cost,
            "total_cost": _cost_with_surcharge(s, rep)}


def swebench_policy_sweep(profiles: Sequence[ModelProfile] = SWEBENCH_PROFILES,
                          initial_tests: int = 2, refined_tests: int = 8,
                          delta_grid=(1, 3, 10, 30, 100, 300, 1000, 3000),
                          jobs: int = 1) -> SweepResult:
    """Optimal policy for the top model as the per-test cost grows."""
    g = _check_grid(delta_grid)
    recs = _run(partial(_policy_point, tuple(profiles), initial_tests, refined_tests), g, jobs)
    return SweepResult("swebench-policy", "delta", g, tuple(recs),
                       {"initial_tests": initial_tests, "refined_tests": refined_tests})


def policy_regions(result: SweepResult) -> list[str]:
    """Consecutive distinct policy classes along the sweep."""
    out = []
    for pol in result.column("policy"):
        if not out or out[-1] != pol:
            out.append(pol)
    return out


@dataclass(frozen=True)
class Heatmap:
    initial: tuple[int, ...]
    refined: tuple[int, ...]
    costs: np.ndarray          # costs[a_idx, b_idx]
    delta: float

    @property
    def argmin(self) -> tuple[int, int]:
        a, b = np.unravel_index(np.nanargmin(self.costs), self.costs.shape)
        return self.initial[a], self.refined[b]

    def records(self) -> list[dict]:
        return [{"initial_tests": a, "refined_tests": b, "total_cost": float(self.costs[x, y])}
                for x, a in enumerate(self.initial) for y, b in enumerate(self.refined)]

    def to_sweep(self) -> SweepResult:
        recs = self.records()
        return SweepResult("swebench-heatmap", "tests", tuple(range(len(recs))), tuple(recs),
                           {"delta": self.delta, "argmin": list(self.argmin)})


def _heat_cell(profiles, delta, ab) -> float:
    a, b = ab
    if b == 0:
        # No refined tests: inspection reveals nothing, so never inspect.
        s = gen_binomial_setting(profiles, a, 1, delta)
        ct = minpay_fixed_policy(s, np.zeros(s.ell), s.n - 1)
        if ct is INFEASIBLE:
            return float("inf")
        return expected_payment(s, ct, s.n - 1) + s.pay_surcharge
    s = gen_binomial_setting(profiles, a, b, delta)
    try:
        return _cost_with_surcharge(s, solve_isop(s))
    except InfeasibleTarget:
        return float("inf")


def swebench_design_heatmap(profiles: Sequence[ModelProfile] = SWEBENCH_PROFILES,
                            initial_range=range(1, 9), refined_range=range(1, 25),
                            delta: float = 125.0, jobs: int = 1) -> Heatmap:
    """Optimal total cost for every (initial, refined) test-count pair."""
    A, B = tuple(int(a) for a in initial_range), tuple(int(b) for b in refined_range)
    if not A or not B:
        raise ValueError("test-count ranges must be nonempty")
    if min(A) < 1 or min(B) < 0:
        raise ValueError("need at least one initial test and nonnegative refined tests")
    cells = [(a, b) for a in A for b in B]
    vals = _run(partial(_heat_cell, tuple(profiles), delta), cells, jobs)
    return Heatmap(A, B, np.array(vals).reshape(len(A), len(B)), delta)


def _correlation_point(profiles, a, b, delta, rho) -> dict:
    s = gen_beta_binomial_setting(profiles, a, b, delta, rho)
    rep = brute_force_optimal(s, s.n - 1)
    free = brute_force_optimal(s.replace(d=np.zeros(s.ell)), s.n - 1)
    return {"rho": rho, "policy": classify_test_policy(s, rep.contract),
            "n_inspected": len(rep.contract.inspected),
            "total_cost": _cost_with_surcharge(s, rep),
            "free_inspection_cost": _cost_with_surcharge(s, free)}


def swebench_correlation_sweep(profiles: Sequence[ModelProfile] = SWEBENCH_PROFILES,
                               initial_tests: int = 2, refined_tests: int = 8,
                               delta: float = 125.0,
                               rho_grid=(0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8),
                               jobs: int = 1) -> SweepResult:
    """Optimal cost and policy as the two test suites become correlated."""
    g = _check_grid(rho_grid)
    recs = _run(partial(_correlation_point, tuple(profiles), initial_tests, refined_tests,
                        delta), g, jobs)
    return SweepResult("swebench-correlation", "rho", g, tuple(recs),
                       {"initial_tests": initial_tests, "refined_tests": refined_tests,
                        "delta": delta})


def _dirichlet_point(base: Setting, seeds, alpha) -> dict:
    sizes, costs = [], []
    for seed in seeds:
        s = perturb_dirichlet(base, alpha, seed)
        rep = brute_force_optimal(s, s.n - 1)
        sizes.append(len(rep.contract.inspected))
        costs.append(_cost_with_surcharge(s, rep))
    return {"alpha": alpha, "max_inspected": max(sizes),
            "simple_fraction": float(np.mean(np.array(sizes) <= 1)),
            "mean_total_cost": float(np.mean(costs)), "std_total_cost": float(np.std(costs))}


def swebench_dirichlet_sweep(profiles: Sequence[ModelProfile] = SWEBENCH_PROFILES,
                             initial_tests: int = 2, refined_tests: int = 8,
                             delta: float = 125.0, alphas=(10, 100, 1000),
                             seeds=range(100), jobs: int = 1) -> SweepResult:
    """Policy simplicity and cost under random perturbations of the distributions."""
    g = _check_grid(alphas)
    base = gen_binomial_setting(profiles, initial_tests, refined_tests, delta)
    recs = _run(partial(_dirichlet_point, base, tuple(seeds)), g, jobs)
    noiseless = _cost_with_surcharge(base, solve_isop(base))
    return SweepResult("swebench-dirichlet", "alpha", g, tuple(recs),
                       {"noiseless_total_cost": noiseless, "seeds": len(tuple(seeds))})


__all__ = [
    "BASELINES", "BaselineResult", "Heatmap", "SweepResult", "alpaca_baselines",
    "alpaca_compare", "alpaca_setting", "classify_test_policy", "policy_regions",
    "relative_advantage", "swebench_correlation_sweep", "swebench_design_heatmap",
    "swebench_dirichlet_sweep", "swebench_policy_sweep", "sweep_inspection_cost",
    "sweep_reward",
]
