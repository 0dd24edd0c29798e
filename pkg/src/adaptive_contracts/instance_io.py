"""JSON instance files.

An instance file spells out the setting with labelled actions and signals::

    {
      "schema_version": 1,
      "actions": [{"label": "a1", "cost": 0.0}, ...],
      "signals": [{"label": "s1", "inspection_cost": 1.0, "outcomes": 2}, ...],
      "q0": [[...], ...],                 # n x ell
      "qk": [[[...], ...], ...],          # ell matrices, n x m_k
      "rewards": [[..., null], ...],      # ell x max(m_k); null past m_k
      "pay_surcharge": 0.0                # optional
    }

Unknown keys are rejected. Floats are written with ``repr`` precision so a
dump/load round trip is exact.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .model import Contract, Setting

SCHEMA_VERSION = 1


class InstanceError(ValueError):
    """The file is not a well-formed instance."""


def instance_schema() -> dict:
    text = resources.files("adaptive_contracts").joinpath("data/instance.schema.json").read_text()
    return json.loads(text)


def setting_from_dict(data: dict) -> Setting:
    try:
        jsonschema.validate(data, instance_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InstanceError(f"{where}: {exc.message}") from None
    if data["schema_version"] != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema_version {data['schema_version']}")
    actions, signals = data["actions"], data["signals"]
    n, ell = len(actions), len(signals)
    m = [sig["outcomes"] for sig in signals]
    q0 = data["q0"]
    if len(q0) != n or any(len(row) != ell for row in q0):
        raise InstanceError(f"q0 must be {n} x {ell}")
    if len(data["qk"]) != ell:
        raise InstanceError(f"qk must hold {ell} matrices")
    for k, q in enumerate(data["qk"]):
        if len(q) != n or any(len(row) != m[k] for row in q):
            raise InstanceError(f"qk[{k}] must be {n} x {m[k]}")
    rewards = data["rewards"]
    mbar = max(m)
    if len(rewards) != ell or any(len(row) != mbar for row in rewards):
        raise InstanceError(f"rewards must be {ell} x {mbar}")
    for k, row in enumerate(rewards):
        for j, x in enumerate(row):
            if j >= m[k] and x is not None:
                raise InstanceError(f"rewards[{k}][{j}] lies past signal {k}'s outcomes; use null")
            if j < m[k] and x is None:
                raise InstanceError(f"rewards[{k}][{j}] is null but outcome {j} exists")
    r = np.array([[np.nan if x is None else x for x in row] for row in rewards], dtype=float)
    labels_a = [a["label"] for a in actions]
    labels_s = [sg["label"] for sg in signals]
    for what, labels in (("action", labels_a), ("signal", labels_s)):
        if len(set(labels)) != len(labels):
            raise InstanceError(f"duplicate {what} label")
    return Setting(q0, tuple(data["qk"]), [a["cost"] for a in actions],
                   [sg["inspection_cost"] for sg in signals], r, tuple(labels_a),
                   tuple(labels_s), float(data.get("pay_surcharge", 0.0)))


def setting_to_dict(s: Setting) -> dict:
    rewards = [[None if np.isnan(x) else float(x) for x in row] for row in s.r]
    out = {
        "schema_version": SCHEMA_VERSION,
        "actions": [{"label": lab, "cost": float(c)} for lab, c in zip(s.action_labels, s.c)],
        "signals": [{"label": lab, "inspection_cost": float(d), "outcomes": int(mk)}
                    for lab, d, mk in zip(s.signal_labels, s.d, s.m)],
        "q0": s.q0.tolist(),
        "qk": [q.tolist() for q in s.qk],
        "rewards": rewards,
    }
    if s.pay_surcharge:
        out["pay_surcharge"] = float(s.pay_surcharge)
    return out


def loads_setting(text: str) -> Setting:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    return setting_from_dict(data)


def compact_json(text: str) -> str:
    """Put innermost (numeric) arrays on one line."""
    return re.sub(r"\[\s+([^\[\]{}]*?)\s+\]",
                  lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]",
                  text)


def dumps_setting(s: Setting) -> str:
    return compact_json(json.dumps(setting_to_dict(s), indent=2))


def load_setting(path: str | Path) -> Setting:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    return loads_setting(text)


def save_setting(s: Setting, path: str | Path) -> None:
    Path(path).write_text(dumps_setting(s) + "\n")


def load_contract(path: str | Path) -> Contract:
    try:
        data = json.loads(Path(path).read_text())
        if "contract" in data:
            data = data["contract"]
        return Contract.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"cannot read contract from {path}: {exc}") from None


def fixture_path(name: str) -> Path:
    """Path of a shipped example instance (``alpaca``, ``randomization_gap``, ``break_even``)."""
    return Path(str(resources.files("adaptive_contracts").joinpath(f"data/{name}.json")))


def load_fixture(name: str) -> Setting:
    return load_setting(fixture_path(name))


__all__ = [
    "InstanceError", "SCHEMA_VERSION", "compact_json", "dumps_setting", "fixture_path", "instance_schema",
    "load_contract", "load_fixture", "load_setting", "loads_setting", "save_setting",
    "setting_from_dict", "setting_to_dict",
]
