"""Flatten a two-stage inspection experiment into one outcome space.

For a fixed inspection vector ``p`` every action induces a single
distribution over atoms: the ``ell`` uninspected-signal atoms followed by the
outcome atoms ``(k, j)`` in lexicographic order. Payments become a vector
over the same atoms, so fixed-policy contract design is a classic LP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Contract, Setting


@dataclass(frozen=True, eq=False)
class CombinedDistribution:
    atoms: tuple[tuple, ...]
    f: np.ndarray

    @property
    def signal_atoms(self) -> slice:
        return slice(0, sum(1 for a in self.atoms if a[0] == "signal"))


def atom_index(setting: Setting) -> tuple[tuple, ...]:
    atoms = [("signal", k) for k in range(setting.ell)]
    atoms += [("outcome", k, j) for k, mk in enumerate(setting.m) for j in range(mk)]
    return tuple(atoms)


def outcome_offsets(setting: Setting) -> np.ndarray:
    """Column where signal ``k``'s outcome atoms start."""
    return setting.ell + np.concatenate([[0], np.cumsum(setting.m)[:-1]]).astype(int)


def combined_distribution(setting: Setting, p) -> CombinedDistribution:
    p = np.asarray(p, dtype=float)
    if p.shape != (setting.ell,):
        raise ValueError(f"p must have {setting.ell} entries")
    blocks = [setting.q0 * (1 - p)]
    for k, q in enumerate(setting.qk):
        blocks.append((setting.q0[:, k] * p[k])[:, None] * q)
    f = np.hstack(blocks)
    f.setflags(write=False)
    return CombinedDistribution(atom_index(setting), f)


def combined_payments(setting: Setting, ct: Contract) -> np.ndarray:
    ct.check_against(setting)
    return np.concatenate([ct.s, *ct.t])


def split_payments(setting: Setting, v) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Inverse of :func:`combined_payments`: ``v -> (s, t)``."""
    v = np.asarray(v, dtype=float)
    s = v[:setting.ell]
    offs = outcome_offsets(setting)
    t = tuple(v[o:o + mk] for o, mk in zip(offs, setting.m))
    return s, t
