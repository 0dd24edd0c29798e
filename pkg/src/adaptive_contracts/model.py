"""Adaptive contract settings, contracts, and the agent/principal accounting.

A setting describes ``n`` agent actions with costs ``c``; each action induces
a free coarse signal ``k ~ q0[i]`` and, if the principal pays ``d[k]`` to
inspect, a refined outcome ``j ~ qk[k][i]``. Rewards ``r[k, j]`` accrue to
the principal. Cells of ``r`` with ``j >= m[k]`` are NaN (undefined).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PROB_TOL = 1e-9
MONEY_TOL = 1e-6


def _frozen(a, ndim=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Setting:
    """An adaptive contract setting ``(q0, q1..q_ell, c, d, r)``.

    Only shapes are enforced on construction; stochasticity and sign
    conditions are reported by :func:`validate_setting` so that malformed
    instances can still be inspected.
    """

    q0: np.ndarray
    qk: tuple[np.ndarray, ...]
    c: np.ndarray
    d: np.ndarray
    r: np.ndarray
    action_labels: tuple[str, ...] = ()
    signal_labels: tuple[str, ...] = ()
    pay_surcharge: float = 0.0

    def __post_init__(self):
        q0 = _frozen(self.q0, 2)
        n, ell = q0.shape
        qk = tuple(_frozen(q, 2) for q in self.qk)
        if len(qk) != ell:
            raise ValueError(f"need {ell} conditional matrices, got {len(qk)}")
        for k, q in enumerate(qk):
            if q.shape[0] != n or q.shape[1] < 1:
                raise ValueError(f"qk[{k}] has shape {q.shape}, expected ({n}, m_k)")
        c = _frozen(self.c, 1)
        d = _frozen(self.d, 1)
        if c.size != n:
            raise ValueError(f"c has {c.size} entries, expected {n}")
        if d.size != ell:
            raise ValueError(f"d has {d.size} entries, expected {ell}")
        m = tuple(q.shape[1] for q in qk)
        r = np.array(self.r, dtype=float)
        if r.ndim != 2 or r.shape[0] != ell or r.shape[1] < max(m):
            raise ValueError(f"r has shape {r.shape}, expected ({ell}, {max(m)})")
        r = r[:, :max(m)].copy()
        for k, mk in enumerate(m):
            r[k, mk:] = np.nan
        r.setflags(write=False)
        labels_a = tuple(self.action_labels) or tuple(f"a{i + 1}" for i in range(n))
        labels_s = tuple(self.signal_labels) or tuple(f"s{k + 1}" for k in range(ell))
        if len(labels_a) != n or len(labels_s) != ell:
            raise ValueError("label lists do not match dimensions")
        for name, val in (("q0", q0), ("qk", qk), ("c", c), ("d", d), ("r", r),
                          ("action_labels", labels_a), ("signal_labels", labels_s),
                          ("pay_surcharge", float(self.pay_surcharge))):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.q0.shape[0]

    @property
    def ell(self) -> int:
        return self.q0.shape[1]

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(q.shape[1] for q in self.qk)

    @property
    def m_bar(self) -> int:
        return max(self.m)

    def replace(self, **changes) -> "Setting":
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, Setting):
            return NotImplemented
        return (
            np.array_equal(self.q0, other.q0)
            and len(self.qk) == len(other.qk)
            and all(np.array_equal(a, b) for a, b in zip(self.qk, other.qk))
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.d, other.d)
            and np.array_equal(self.r, other.r, equal_nan=True)
            and self.action_labels == other.action_labels
            and self.signal_labels == other.signal_labels
            and self.pay_surcharge == other.pay_surcharge
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Contract:
    """Inspection probabilities ``p``, signal payments ``s``, outcome payments ``t``."""

    p: np.ndarray
    s: np.ndarray
    t: tuple[np.ndarray, ...]

    def __post_init__(self):
        p = _frozen(self.p, 1)
        s = _frozen(self.s, 1)
        t = tuple(_frozen(row, 1) for row in self.t)
        if not (p.size == s.size == len(t)):
            raise ValueError("p, s and t must all have one entry per signal")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    @classmethod
    def zero(cls, setting: Setting, p: Sequence[float] | None = None) -> "Contract":
        p = np.zeros(setting.ell) if p is None else p
        return cls(p, np.zeros(setting.ell), tuple(np.zeros(mk) for mk in setting.m))

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((self.p == 0) | (self.p == 1)))

    @property
    def inspected(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.p > 0))

    def replace(self, **changes) -> "Contract":
        return dataclasses.replace(self, **changes)

    def check_against(self, setting: Setting) -> None:
        if self.p.size != setting.ell or tuple(r.size for r in self.t) != setting.m:
            raise ValueError("contract dimensions do not match setting")

    def __eq__(self, other):
        if not isinstance(other, Contract):
            return NotImplemented
        return (np.array_equal(self.p, other.p) and np.array_equal(self.s, other.s)
                and len(self.t) == len(other.t)
                and all(np.array_equal(a, b) for a, b in zip(self.t, other.t)))

    __hash__ = None

    def to_dict(self) -> dict:
        return {"p": self.p.tolist(), "s": self.s.tolist(), "t": [row.tolist() for row in self.t]}

    @classmethod
    def from_dict(cls, data: dict) -> "Contract":
        return cls(data["p"], data["s"], tuple(data["t"]))


@dataclass(frozen=True)
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    mlrp_q0: bool = False
    mlrp_qk: list[bool] = field(default_factory=list)
    isop: bool = False
    symmetric_isop: bool = False

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return dataclasses.asdict(self) | {"ok": self.ok}


# --- structural predicates -------------------------------------------------

def check_mlrp(M) -> bool:
    """Monotone likelihood ratio in cross-multiplied form.

    For rows ``i < i2`` and columns ``j < j2`` require
    ``M[i2, j] * M[i, j2] <= M[i2, j2] * M[i, j]``.
    """
    M = np.asarray(M, dtype=float)
    n, m = M.shape
    if n < 2 or m < 2:
        return True
    for i in range(n - 1):
        lo, hi = M[i], M[i + 1:]
        # lhs[a, j, j2] = hi[a, j] * lo[j2]; rhs = hi[a, j2] * lo[j]
        lhs = hi[:, :, None] * lo[None, None, :]
        rhs = hi[:, None, :] * lo[None, :, None]
        upper = np.triu(np.ones((m, m), dtype=bool), 1)
        diff = (lhs - rhs)[:, upper]
        scale = np.maximum(lhs, rhs)[:, upper]
        if np.any(diff > PROB_TOL * scale + 1e-300):
            return False
    return True


def check_isop(s: Setting) -> bool:
    if len(set(s.m)) != 1:
        return False
    first = s.qk[0]
    return all(np.allclose(q, first, atol=PROB_TOL, rtol=0) for q in s.qk[1:])


def check_symmetric_isop(s: Setting) -> bool:
    if not check_isop(s):
        return False
    if any(mk != s.ell for mk in s.m):
        return False
    if not np.allclose(s.q0, s.qk[0], atol=PROB_TOL, rtol=0):
        return False
    return bool(np.allclose(s.r, s.r.T, atol=MONEY_TOL, rtol=0))


def validate_setting(s: Setting) -> ValidationReport:
    errors, warnings = [], []

    def stochastic(name, M):
        if np.any(~np.isfinite(M)):
            errors.append(f"{name}: non-finite probability")
            return
        if np.any(M < -PROB_TOL) or np.any(M > 1 + PROB_TOL):
            errors.append(f"{name}: probability outside [0, 1]")
        sums = M.sum(axis=1)
        for i in np.flatnonzero(np.abs(sums - 1) > PROB_TOL):
            errors.append(f"{name}: row {i} not stochastic (sums to {sums[i]:.12g})")

    stochastic("q0", s.q0)
    for k, q in enumerate(s.qk):
        stochastic(f"qk[{k}]", q)
    if not np.all(np.isfinite(s.c)):
        errors.append("c: non-finite action cost")
    elif np.any(s.c < 0):
        errors.append("c: negative action cost")
    if not np.all(np.isfinite(s.d)):
        errors.append("d: non-finite inspection cost")
    elif np.any(s.d < 0):
        errors.append("d: negative inspection cost")
    for k, mk in enumerate(s.m):
        if not np.all(np.isfinite(s.r[k, :mk])):
            errors.append(f"r: undefined or non-finite reward in signal {k}")
    if not np.isfinite(s.pay_surcharge):
        errors.append("pay_surcharge: non-finite")

    if np.any(np.diff(s.c) < 0):
        warnings.append("costs are not nondecreasing in action index")
    mlrp_q0 = check_mlrp(s.q0)
    mlrp_qk = [check_mlrp(q) for q in s.qk]
    if not mlrp_q0:
        warnings.append("mlrp_q0 = false")
    for k, ok in enumerate(mlrp_qk):
        if not ok:
            warnings.append(f"mlrp_qk[{k}] = false")
    isop = check_isop(s)
    sym = check_symmetric_isop(s)
    if not isop:
        warnings.append("isop = false")
    return ValidationReport(errors, warnings, mlrp_q0, mlrp_qk, isop, sym)


# --- accounting ------------------------------------------------------------

def _check_action(s: Setting, i: int) -> None:
    if not 0 <= i < s.n:
        raise IndexError(f"action index {i} out of range for {s.n} actions")


def expected_rewards(s: Setting) -> np.ndarray:
    """``R_i`` for every action."""
    return np.array([
        sum(s.q0[i, k] * float(s.qk[k][i] @ s.r[k, :mk]) for k, mk in enumerate(s.m))
        for i in range(s.n)
    ])


def expected_reward(s: Setting, i: int) -> float:
    _check_action(s, i)
    return float(sum(s.q0[i, k] * (s.qk[k][i] @ s.r[k, :mk]) for k, mk in enumerate(s.m)))


def expected_payments(s: Setting, ct: Contract) -> np.ndarray:
    """``T_i`` for every action."""
    ct.check_against(s)
    per_signal = np.stack([
        (1 - ct.p[k]) * ct.s[k] + ct.p[k] * (s.qk[k] @ ct.t[k]) for k in range(s.ell)
    ], axis=1)
    return np.sum(s.q0 * per_signal, axis=1)


def expected_payment(s: Setting, ct: Contract, i: int) -> float:
    _check_action(s, i)
    return float(expected_payments(s, ct)[i])


def expected_inspection_costs(s: Setting, ct: Contract) -> np.ndarray:
    ct.check_against(s)
    return s.q0 @ (ct.p * s.d)


def expected_inspection_cost(s: Setting, ct: Contract, i: int) -> float:
    _check_action(s, i)
    return float(expected_inspection_costs(s, ct)[i])


def agent_utilities(s: Setting, ct: Contract) -> np.ndarray:
    return expected_payments(s, ct) - s.c


def best_response(s: Setting, ct: Contract, tol: float = MONEY_TOL) -> int:
    """Agent's choice; ties go to the principal's favourite, then lowest index."""
    ua = agent_utilities(s, ct)
    ties = np.flatnonzero(ua >= ua.max() - tol)
    if ties.size == 1:
        return int(ties[0])
    up = expected_rewards(s) - expected_payments(s, ct) - expected_inspection_costs(s, ct)
    best = up[ties].max()
    return int(ties[np.flatnonzero(up[ties] >= best - tol)[0]])


def principal_utility(s: Setting, ct: Contract) -> float:
    i = best_response(s, ct)
    return float(expected_reward(s, i) - expected_payment(s, ct, i) - expected_inspection_cost(s, ct, i))


def first_best(s: Setting) -> float:
    """Welfare under perfect cooperation, ``max_i R_i - c_i``."""
    return float(np.max(expected_rewards(s) - s.c))
