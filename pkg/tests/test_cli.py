import json
import subprocess
import sys

import pytest
from numpy.testing import assert_allclose

from adaptive_contracts.cli import main
from adaptive_contracts.instance_io import fixture_path, load_setting, setting_to_dict
from instances import randomization_gap

RANDOMIZATION_GAP = str(fixture_path("randomization_gap"))
BREAK_EVEN = str(fixture_path("break_even"))
ALPACA = str(fixture_path("alpaca"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestValidate:
    def test_fixtures(self, capsys):
        for path in (RANDOMIZATION_GAP, BREAK_EVEN):
            code, out, _ = run(capsys, "validate", path)
            assert code == 0 and json.loads(out)["ok"]

    def test_alpaca_warns_mlrp(self, capsys):
        code, out, _ = run(capsys, "validate", ALPACA)
        assert code == 0
        assert "mlrp_q0 = false" in json.loads(out)["warnings"]

    def test_malformed_probabilities(self, capsys, tmp_path):
        d = setting_to_dict(randomization_gap())
        d["q0"][0] = [0.9, 0.9]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        code, out, _ = run(capsys, "validate", path)
        assert code == 2 and not json.loads(out)["ok"]

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json")
        assert run(capsys, "validate", path)[0] == 2


class TestSolve:
    def test_randomization_gap_det(self, capsys):
        code, out, _ = run(capsys, "solve", RANDOMIZATION_GAP, "--target", "3")
        rep = json.loads(out)
        assert code == 0
        assert rep["target"] == 3 and rep["target_label"] == "a3"
        assert_allclose(rep["total_cost"], 6.6, atol=1e-4)

    def test_randomization_gap_coni(self, capsys):
        code, out, _ = run(capsys, "solve", RANDOMIZATION_GAP, "--variant", "coni", "--target", "a3")
        assert code == 0
        assert_allclose(json.loads(out)["total_cost"], 6.375, atol=0.005)

    def test_comi_sup(self, capsys):
        code, out, _ = run(capsys, "solve", RANDOMIZATION_GAP, "--variant", "comi-sup", "--target", "3")
        rep = json.loads(out)
        assert code == 0 and rep["attained"] is False
        assert_allclose(rep["total_cost"], 6.0, atol=1e-9)

    def test_break_even_best(self, capsys, tmp_path):
        out_path = tmp_path / "rep.json"
        code, _, _ = run(capsys, "solve", BREAK_EVEN, "--out", out_path)
        assert code == 0
        assert_allclose(json.loads(out_path.read_text())["principal_utility"], 0.0, atol=1e-9)

    def test_algorithms_agree(self, capsys):
        path = str(fixture_path("alpaca"))
        vals = []
        for algo in ("brute-force", "constant-actions"):
            vals.append(json.loads(run(capsys, "solve", path, "--algorithm", algo)[1]))
        assert_allclose(vals[0]["principal_utility"], vals[1]["principal_utility"], atol=1e-9)

    def test_infeasible_exit(self, capsys, tmp_path):
        # Action 2 is a costlier copy of action 1: it can never be incentivised.
        d = setting_to_dict(randomization_gap())
        d["q0"][1] = d["q0"][0]
        d["qk"][0][1] = d["qk"][0][0]
        d["qk"][1][1] = d["qk"][1][0]
        d["actions"][1]["cost"] = 0.5
        path = tmp_path / "x.json"
        path.write_text(json.dumps(d))
        code, _, err = run(capsys, "solve", path, "--target", "2")
        assert code == 3 and "infeasible" in err

    def test_bad_target(self, capsys):
        assert run(capsys, "solve", RANDOMIZATION_GAP, "--target", "4")[0] == 2
        assert run(capsys, "solve", RANDOMIZATION_GAP, "--target", "zzz")[0] == 2

    def test_isop_requires_isop(self, capsys):
        assert run(capsys, "solve", ALPACA, "--algorithm", "isop")[0] == 2

    def test_guard_exit(self, capsys, tmp_path):
        ell = 7
        d = {"schema_version": 1,
             "actions": [{"label": "a", "cost": 0.0}, {"label": "b", "cost": 1.0}],
             "signals": [{"label": f"s{k}", "inspection_cost": 1.0, "outcomes": 1}
                         for k in range(ell)],
             "q0": [[1 / ell] * ell] * 2, "qk": [[[1.0], [1.0]]] * ell,
             "rewards": [[0.0]] * ell}
        path = tmp_path / "big.json"
        path.write_text(json.dumps(d))
        assert run(capsys, "solve", path, "--variant", "uni", "--target", "1")[0] == 4


class TestTransform:
    def test_roundtrip_through_report(self, capsys, tmp_path):
        rep = tmp_path / "rep.json"
        run(capsys, "solve", RANDOMIZATION_GAP, "--target", "3", "--out", rep)
        code, out, _ = run(capsys, "transform", RANDOMIZATION_GAP, "--contract", rep,
                           "--op", "det-to-uni", "--target", "3")
        res = json.loads(out)
        assert code == 0 and res["uni_violations"] == [] and res["best_response"] == 3

    def test_scale_down(self, capsys, tmp_path):
        ct = tmp_path / "c.json"
        ct.write_text(json.dumps({"p": [0.5, 0], "s": [1, 1], "t": [[2, 0], [0, 0]]}))
        before = json.loads(run(capsys, "transform", RANDOMIZATION_GAP, "--contract", ct,
                                "--op", "always-inspect")[1])
        after = json.loads(run(capsys, "transform", RANDOMIZATION_GAP, "--contract", ct, "--op",
                               "scale-down", "--signal", "1", "--p-new", "0.1")[1])
        assert_allclose(after["expected_payments"], before["expected_payments"])
        assert run(capsys, "transform", RANDOMIZATION_GAP, "--contract", ct, "--op", "scale-down",
                   "--signal", "1", "--p-new", "0.9")[0] == 2

    def test_dimension_mismatch(self, capsys, tmp_path):
        ct = tmp_path / "c.json"
        ct.write_text(json.dumps({"p": [1], "s": [0], "t": [[0]]}))
        assert run(capsys, "transform", RANDOMIZATION_GAP, "--contract", ct, "--op", "prune")[0] == 2


class TestGenerate:
    def test_triangle(self, capsys, tmp_path):
        g = tmp_path / "tri.txt"
        g.write_text("0 1\n1 2\n0 2\n")
        out = tmp_path / "tri.json"
        assert run(capsys, "generate", "--kind", "graph", "--graph", g, "--eps", 0.5,
                   "--out", out)[0] == 0
        s = load_setting(out)
        assert (s.n, s.ell) == (4, 4)
        assert run(capsys, "validate", out)[0] == 0

    def test_binomial_isop(self, capsys, tmp_path):
        out = tmp_path / "b.json"
        run(capsys, "generate", "--kind", "binomial", "--initial-tests", 2,
            "--refined-tests", 8, "--out", out)
        code, rep, _ = run(capsys, "validate", out)
        assert code == 0 and json.loads(rep)["isop"]

    def test_dirichlet_needs_seed(self, capsys):
        assert run(capsys, "generate", "--kind", "dirichlet", "--base", RANDOMIZATION_GAP,
                   "--alpha", 10)[0] == 2

    def test_dirichlet_reproducible(self, capsys):
        a = run(capsys, "generate", "--kind", "dirichlet", "--base", RANDOMIZATION_GAP,
                "--alpha", 10, "--seed", 1)[1]
        b = run(capsys, "generate", "--kind", "dirichlet", "--base", RANDOMIZATION_GAP,
                "--alpha", 10, "--seed", 1)[1]
        assert a == b

    def test_bad_parameters(self, capsys):
        assert run(capsys, "generate", "--kind", "binomial", "--initial-tests", 0)[0] == 2
        assert run(capsys, "generate", "--kind", "beta-binomial")[0] == 2


class TestSweep:
    def test_swebench_policy(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", "--experiment", "swebench-policy",
                           "--out-dir", tmp_path)
        assert code == 0
        meta = json.loads((tmp_path / "swebench-policy_delta.json").read_text())["meta"]
        assert meta["regions"] == ["full-success", "full-failure", "none"]
        assert (tmp_path / "swebench-policy_delta.csv").exists()

    def test_alpaca_reward(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--experiment", "alpaca", "--grid", "0.5,1.5,5",
                         "--out-dir", tmp_path)
        assert code == 0
        adv = [r["advantage"] for r in
               json.loads((tmp_path / "alpaca_reward.json").read_text())["records"]]
        assert adv[1] > max(adv[0], adv[2])

    def test_heatmap_ranges(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--experiment", "swebench-heatmap",
                         "--initial-range", "1:2", "--refined-range", "1:3",
                         "--out-dir", tmp_path)
        assert code == 0
        assert run(capsys, "sweep", "--experiment", "swebench-heatmap",
                   "--initial-range", "3:1", "--out-dir", tmp_path)[0] == 2

    def test_empty_grid(self, capsys, tmp_path):
        assert run(capsys, "sweep", "--experiment", "alpaca", "--grid", "",
                   "--out-dir", tmp_path)[0] == 2

    def test_unknown_experiment(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--experiment", "nope"])
        assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "adaptive_contracts", "validate", RANDOMIZATION_GAP],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["ok"]
