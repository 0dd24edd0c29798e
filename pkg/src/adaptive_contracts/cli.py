"""Command-line interface: ``adaptive-contracts {validate,solve,transform,generate,sweep}``.

Actions are numbered from 1 on the command line and in reports (``--target 3``
is the third action); the library itself is 0-indexed.

Exit codes: 0 success, 2 input error, 3 infeasible target, 4 search or
enumeration guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import det_solvers, experiments, generators, randomized
from .errors import (EnumerationTooLarge, InfeasibleTarget, PreconditionViolated,
                     SearchGuardExceeded)
from .instance_io import (InstanceError, compact_json, dumps_setting, load_contract,
                          load_setting)
from .minpay import check_variant_constraints
from .model import (Setting, agent_utilities, best_response, expected_inspection_costs,
                    expected_payments, principal_utility, validate_setting)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_GUARD = 0, 2, 3, 4

log = logging.getLogger("adaptive_contracts")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# --- helpers -----------------------------------------------------------------

def _emit(payload: dict, out: str | None) -> None:
    text = compact_json(json.dumps(payload, indent=2, default=experiments._json_default))
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_valid(path: str) -> Setting:
    s = load_setting(path)
    report = validate_setting(s)
    if not report.ok:
        raise CliError("invalid instance: " + "; ".join(report.errors))
    for w in report.warnings:
        log.info("warning: %s", w)
    return s


def _parse_target(s: Setting, text: str):
    if text.lower() == det_solvers.BEST:
        return det_solvers.BEST
    if text in s.action_labels:
        return s.action_labels.index(text)
    try:
        num = int(text)
    except ValueError:
        raise CliError(f"unknown target {text!r}") from None
    if not 1 <= num <= s.n:
        raise CliError(f"target must be between 1 and {s.n}")
    return num - 1


def _parse_grid(text: str | None, default) -> list[float]:
    if text is None:
        return list(default)
    vals = [float(x) for x in text.replace(",", " ").split()]
    if not vals:
        raise CliError("empty grid")
    return vals


def _parse_range(text: str) -> range:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise CliError(f"range must look like LO:HI, got {text!r}") from None
    if hi < lo:
        raise CliError(f"empty range {text!r}")
    return range(lo, hi + 1)


def _report_payload(s: Setting, rep: det_solvers.SolveReport) -> dict:
    out = rep.to_dict(s)
    out["target"] = rep.target + 1
    out["cost_table"] = {s.action_labels[i]: v for i, v in enumerate(out.pop("cost_table"))}
    out.pop("implementable")
    return out


# --- commands ----------------------------------------------------------------

def cmd_validate(args) -> int:
    s = load_setting(args.instance)
    report = validate_setting(s)
    _emit(report.to_dict(), None)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_solve(args) -> int:
    s = _load_valid(args.instance)
    target = _parse_target(s, args.target)
    v = args.variant
    if v == "det":
        algo = {"brute-force": det_solvers.brute_force_optimal,
                "constant-actions": det_solvers.solve_constant_actions}.get(args.algorithm)
        if args.algorithm == "isop":
            if target not in (det_solvers.BEST, s.n - 1):
                raise CliError("the isop algorithm always targets the last action")
            rep = det_solvers.solve_isop(s)
        else:
            rep = algo(s, target)
        payload = _report_payload(s, rep)
    elif v == "comi-sup":
        sup = randomized.comi_supremum(s, target)
        payload = sup.to_dict() | {"target": sup.target + 1,
                                   "target_label": s.action_labels[sup.target]}
    else:
        grid = randomized.GridConfig(initial_step=args.grid_step, refinements=args.refinements)
        rep = randomized.search_randomized(s, target, {"coni": "CoNI", "umi": "UMI",
                                                       "uni": "UNI"}[v], grid)
        payload = _report_payload(s, rep)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_transform(args) -> int:
    s = _load_valid(args.instance)
    ct = load_contract(args.contract)
    try:
        ct.check_against(s)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    op = args.op
    if op == "prune":
        new = det_solvers.prune_unpaid_inspections(s, ct)
    elif op == "always-inspect":
        new = randomized.to_always_inspect(s, ct)
    elif op == "det-to-uni":
        if args.target is None:
            raise CliError("det-to-uni needs --target")
        new = randomized.det_to_uni(s, ct, _parse_target(s, args.target))
    else:
        if args.signal is None or args.p_new is None:
            raise CliError("scale-down needs --signal and --p-new")
        try:
            new = randomized.comi_scale_down(ct, args.signal - 1, args.p_new)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    i = best_response(s, new)
    payload = {
        "contract": new.to_dict(),
        "best_response": i + 1,
        "expected_payments": expected_payments(s, new).tolist(),
        "expected_inspection_costs": expected_inspection_costs(s, new).tolist(),
        "agent_utilities": agent_utilities(s, new).tolist(),
        "principal_utility": principal_utility(s, new),
    }
    if op == "det-to-uni":
        payload["uni_violations"] = check_variant_constraints(s, new, i, "UNI")
    _emit(payload, args.out)
    return EXIT_OK


def _profiles(path: str | None):
    if path is None:
        return generators.SWEBENCH_PROFILES
    try:
        data = json.loads(Path(path).read_text())
        return tuple(generators.ModelProfile(p["label"], float(p["mu"]), float(p["cost"]))
                     for p in data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read profiles from {path}: {exc}") from None


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "graph":
        if args.graph is None:
            raise CliError("--kind graph needs --graph FILE")
        try:
            g = generators.Graph.parse(Path(args.graph).read_text(), args.vertices)
        except OSError as exc:
            raise CliError(f"cannot read {args.graph}: {exc.strerror}") from None
        s = generators.gen_independent_set_instance(g, args.eps)
    elif kind in ("binomial", "beta-binomial"):
        prof = _profiles(args.profiles)
        if kind == "binomial":
            s = generators.gen_binomial_setting(prof, args.initial_tests, args.refined_tests,
                                                args.delta)
        else:
            if args.rho is None:
                raise CliError("--kind beta-binomial needs --rho")
            s = generators.gen_beta_binomial_setting(prof, args.initial_tests,
                                                     args.refined_tests, args.delta, args.rho)
    else:
        if args.base is None or args.seed is None or args.alpha is None:
            raise CliError("--kind dirichlet needs --base, --alpha and --seed")
        s = generators.perturb_dirichlet(_load_valid(args.base), args.alpha, args.seed,
                                         smooth=args.smooth)
    text = dumps_setting(s)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    exp = args.experiment
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs
    if exp == "alpaca":
        s = _load_valid(args.instance) if args.instance else experiments.alpaca_setting()
        if args.parameter == "reward":
            res = experiments.sweep_reward(
                s, _parse_grid(args.grid, (0.25, 0.5, 0.75, 1, 1.5, 2, 3, 5, 10)), jobs)
        else:
            res = experiments.sweep_inspection_cost(
                s, _parse_grid(args.grid, (0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20)), jobs)
    elif exp == "swebench-policy":
        res = experiments.swebench_policy_sweep(
            _profiles(args.profiles), args.initial_tests, args.refined_tests,
            _parse_grid(args.grid, (1, 3, 10, 30, 100, 300, 1000, 3000)), jobs)
        res = experiments.SweepResult(res.experiment, res.parameter, res.grid, res.records,
                                      res.meta | {"regions": experiments.policy_regions(res)})
    elif exp == "swebench-heatmap":
        hm = experiments.swebench_design_heatmap(
            _profiles(args.profiles), _parse_range(args.initial_range),
            _parse_range(args.refined_range), args.delta, jobs)
        res = hm.to_sweep()
    elif exp == "swebench-correlation":
        res = experiments.swebench_correlation_sweep(
            _profiles(args.profiles), args.initial_tests, args.refined_tests, args.delta,
            _parse_grid(args.grid, (0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8)), jobs)
    else:
        res = experiments.swebench_dirichlet_sweep(
            _profiles(args.profiles), args.initial_tests, args.refined_tests, args.delta,
            _parse_grid(args.grid, (10, 100, 1000)), range(args.seeds), jobs)
    csv_path = out_dir / f"{res.stem}.csv"
    res.write_csv(csv_path)
    res.write_json(out_dir / f"{res.stem}.json")
    print(csv_path)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptive-contracts", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file and print its report")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="compute an optimal contract")
    p.add_argument("instance")
    p.add_argument("--variant", choices=["det", "comi-sup", "coni", "umi", "uni"], default="det")
    p.add_argument("--target", default="best", help="action number (1-based), label, or 'best'")
    p.add_argument("--algorithm", choices=["brute-force", "constant-actions", "isop"],
                   default="brute-force", help="deterministic solver (variant det only)")
    p.add_argument("--grid-step", type=float, default=0.05,
                   help="initial grid step for randomized variants")
    p.add_argument("--refinements", type=int, default=3,
                   help="grid refinement rounds for randomized variants")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("transform", help="apply a payment-preserving contract transform")
    p.add_argument("instance")
    p.add_argument("--contract", required=True, help="contract JSON (or a solve report)")
    p.add_argument("--op", required=True,
                   choices=["prune", "always-inspect", "det-to-uni", "scale-down"])
    p.add_argument("--target", help="incentivised action for det-to-uni")
    p.add_argument("--signal", type=int, help="signal number (1-based) for scale-down")
    p.add_argument("--p-new", type=float, help="new inspection probability for scale-down")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("generate", help="write a generated instance file")
    p.add_argument("--kind", required=True,
                   choices=["graph", "binomial", "beta-binomial", "dirichlet"])
    p.add_argument("--graph", help="edge list file, one 'u v' pair per line")
    p.add_argument("--vertices", type=int, help="vertex count (default: max index + 1)")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--profiles", help="JSON list of {label, mu, cost}; default SWE-Bench models")
    p.add_argument("--initial-tests", type=int, default=2)
    p.add_argument("--refined-tests", type=int, default=8)
    p.add_argument("--delta", type=float, default=125.0, help="cost per test")
    p.add_argument("--rho", type=float)
    p.add_argument("--base", help="instance to perturb (dirichlet)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--smooth", action="store_true", help="lift zero probabilities before perturbing")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV + JSON")
    p.add_argument("instance", nargs="?", help="instance for the alpaca sweeps (default: embedded)")
    p.add_argument("--experiment", required=True,
                   choices=["alpaca", "swebench-policy", "swebench-heatmap",
                            "swebench-correlation", "swebench-dirichlet"])
    p.add_argument("--parameter", choices=["reward", "inspection-cost"], default="reward",
                   help="swept quantity for the alpaca experiment")
    p.add_argument("--grid", help="comma-separated grid values")
    p.add_argument("--profiles")
    p.add_argument("--initial-tests", type=int, default=2)
    p.add_argument("--refined-tests", type=int, default=8)
    p.add_argument("--delta", type=float, default=125.0)
    p.add_argument("--initial-range", default="1:8")
    p.add_argument("--refined-range", default="1:24")
    p.add_argument("--seeds", type=int, default=100, help="dirichlet seeds 0..N-1")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InstanceError, ValueError, IndexError, PreconditionViolated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleTarget as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SearchGuardExceeded, EnumerationTooLarge) as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
