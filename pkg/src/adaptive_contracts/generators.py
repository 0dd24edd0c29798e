"""Parametric instance families.

* :func:`gen_independent_set_instance` turns a graph into a setting whose
  cheapest inspection sets are exactly the vertex covers, so large
  independent sets correspond to cheap contracts.
* :func:`gen_binomial_setting` models delegating a coding task to one of
  several models, judged by ``a`` cheap tests (the signal is the number
  passed) and optionally ``b`` expensive ones (the outcome).
* :func:`gen_beta_binomial_setting` correlates the two test suites through a
  shared latent success rate.
* :func:`perturb_dirichlet` jitters any setting's distributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import betabinom, binom

from .model import Setting


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) out of range")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", tuple(norm))

    @classmethod
    def parse(cls, text: str, n_vertices: int | None = None) -> "Graph":
        """Read an edge list: one ``u v`` pair per line, 0-indexed, ``#`` comments."""
        edges = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"expected 'u v', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        if n_vertices is None:
            n_vertices = 1 + max((max(e) for e in edges), default=-1)
        return cls(n_vertices, tuple(edges))

    def is_vertex_cover(self, cover) -> bool:
        cover = set(cover)
        return all(u in cover or v in cover for u, v in self.edges)


def gen_independent_set_instance(g: Graph, eps: float) -> Setting:
    """Setting whose actions are the edges plus a target, and signals the vertices plus a dummy.

    Outcome 0 ("A") on a vertex signal reveals that an edge action was taken
    and that the vertex touches it; outcome 1 ("B") is what the target
    produces. Covering every edge by inspection is what makes the target
    cheap to incentivise.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    nv, E = g.n_vertices, g.edges
    ell = nv + 1
    n = len(E) + 1
    q0 = np.full((n, ell), 1.0 / ell)
    qk = []
    for v in range(nv):
        q = np.zeros((n, 2))
        for a, (x, y) in enumerate(E):
            q[a] = (1.0, 0.0) if v in (x, y) else (0.0, 1.0)
        q[-1] = (0.0, 1.0)
        qk.append(q)
    dummy = np.zeros((n, 2))
    dummy[:-1] = (1.0, 0.0)
    dummy[-1] = (0.0, 1.0)
    qk.append(dummy)
    c = np.zeros(n)
    c[-1] = eps / ell
    d = np.full(ell, float(ell))
    d[-1] = float(ell) ** 2
    r = np.zeros((ell, 2))
    r[-1, 1] = (nv + eps) * ell
    labels_a = tuple(f"edge{x}-{y}" for x, y in E) + ("target",)
    labels_s = tuple(f"v{v}" for v in range(nv)) + ("dummy",)
    return Setting(q0, tuple(qk), c, d, r, labels_a, labels_s)


@dataclass(frozen=True)
class ModelProfile:
    label: str
    mu: float
    cost: float

    def __post_init__(self):
        if not 0 <= self.mu <= 1:
            raise ValueError(f"{self.label}: success rate must lie in [0, 1]")
        if not self.cost >= 0:
            raise ValueError(f"{self.label}: cost must be nonnegative")


SWEBENCH_PROFILES = (
    ModelProfile("gpt-oss-120b", 0.26, 28.56),
    ModelProfile("GPT-5 nano", 0.348, 19.038),
    ModelProfile("o4-mini", 0.45, 104.99),
    ModelProfile("o3", 0.584, 166.83),
    ModelProfile("GPT-5 mini", 0.598, 17.739),
    ModelProfile("GPT-5", 0.65, 140.19),
)


def _sorted_profiles(profiles: Sequence[ModelProfile]) -> list[ModelProfile]:
    if not profiles:
        raise ValueError("need at least one model profile")
    return sorted(profiles, key=lambda p: (p.mu, p.cost))


def _check_counts(initial_tests: int, refined_tests: int) -> None:
    if initial_tests < 1 or refined_tests < 1:
        raise ValueError("test counts must be at least 1")


def _binomial_rows(mus, trials: int) -> np.ndarray:
    rows = binom.pmf(np.arange(trials + 1)[None, :], trials, np.asarray(mus)[:, None])
    return rows / rows.sum(axis=1, keepdims=True)


def _test_setting(profiles, q0, qk, refined_tests, initial_tests, delta, reward):
    ell, m = q0.shape[1], qk[0].shape[1]
    r = np.zeros((ell, m)) if reward is None else np.asarray(reward, dtype=float)
    return Setting(
        q0, tuple(qk), [p.cost for p in profiles], np.full(ell, delta * refined_tests), r,
        tuple(p.label for p in profiles), tuple(f"{k} passed" for k in range(ell)),
        pay_surcharge=delta * initial_tests)


def gen_binomial_setting(profiles: Sequence[ModelProfile], initial_tests: int,
                         refined_tests: int, delta: float, reward=None) -> Setting:
    """Independent test suites: passes are Binomial in each model's success rate.

    Inspection costs ``delta`` per refined test; the ``delta * initial_tests``
    spent on the free first stage is recorded as ``pay_surcharge``. Rewards
    default to zero because only the cost of the top action is of interest.
    """
    _check_counts(initial_tests, refined_tests)
    profiles = _sorted_profiles(profiles)
    mus = [p.mu for p in profiles]
    q0 = _binomial_rows(mus, initial_tests)
    q = _binomial_rows(mus, refined_tests)
    return _test_setting(profiles, q0, [q] * (initial_tests + 1), refined_tests,
                         initial_tests, delta, reward)


def gen_beta_binomial_setting(profiles: Sequence[ModelProfile], initial_tests: int,
                              refined_tests: int, delta: float, rho: float,
                              reward=None) -> Setting:
    """Test outcomes correlated through a Beta-distributed per-task success rate.

    ``rho`` is the intra-class correlation: the latent rate is
    ``Beta(mu (1 - rho) / rho, (1 - mu)(1 - rho) / rho)``, and the refined
    suite is drawn from the posterior given the ``k`` initial passes.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    _check_counts(initial_tests, refined_tests)
    profiles = _sorted_profiles(profiles)
    scale = (1 - rho) / rho
    a0 = np.array([scale * p.mu for p in profiles])
    b0 = np.array([scale * (1 - p.mu) for p in profiles])
    # A zero-variance prior (mu in {0, 1}) is a point mass; keep it Binomial.
    point = (a0 == 0) | (b0 == 0)
    a0s, b0s = np.where(point, 1.0, a0), np.where(point, 1.0, b0)

    def rows(trials, a, b):
        ks = np.arange(trials + 1)[None, :]
        out = betabinom.pmf(ks, trials, a[:, None], b[:, None])
        exact = _binomial_rows([p.mu for p in profiles], trials)
        out = np.where(point[:, None], exact, out)
        return out / out.sum(axis=1, keepdims=True)

    q0 = rows(initial_tests, a0s, b0s)
    qk = [rows(refined_tests, a0s + k, b0s + (initial_tests - k))
          for k in range(initial_tests + 1)]
    return _test_setting(profiles, q0, qk, refined_tests, initial_tests, delta, reward)


def perturb_dirichlet(s: Setting, alpha: float, seed, smooth: bool = False) -> Setting:
    """Replace every distribution row ``x`` by a draw from ``Dirichlet(alpha * x)``.

    Rows with zero entries are rejected unless ``smooth`` is set, in which
    case they are lifted by 1e-12 and renormalised first.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    rng = np.random.default_rng(seed)

    def prep(M, name):
        M = np.array(M, dtype=float)
        if np.any(M <= 0):
            if not smooth:
                raise ValueError(f"{name} has zero entries; Dirichlet parameters must be positive")
            M = M + 1e-12
            M /= M.sum(axis=1, keepdims=True)
        return M

    def draw(M):
        return np.array([rng.dirichlet(alpha * row) for row in M])

    q0 = draw(prep(s.q0, "q0"))
    qk = tuple(draw(prep(q, f"qk[{k}]")) for k, q in enumerate(s.qk))
    return s.replace(q0=q0, qk=qk)


__all__ = [
    "Graph", "ModelProfile", "SWEBENCH_PROFILES", "gen_beta_binomial_setting",
    "gen_binomial_setting", "gen_independent_set_instance", "perturb_dirichlet",
]
