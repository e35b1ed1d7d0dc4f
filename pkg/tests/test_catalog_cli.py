"""Example catalog consistency and CLI behaviour."""

import itertools
import json
import sys
import numpy as np
import pytest

from toruspoly.catalog import (
    L_over_power,
    S_k,
    binom_L_mod2,
    bilinear_b,
    mother_p,
    mother_q,
    quartic_form,
)
from toruspoly.cli import main
from toruspoly.core import space
from toruspoly.norms import RankWitness, rank_witness_check
from toruspoly.suites import run_suite


class TestCatalog:
    def test_sk_binomial_cross_check(self):
        for n in (3, 6):
            for k in range(1, n + 1):
                assert np.array_equal(
                    S_k(n, k).classical_table(), binom_L_mod2(n, k))

    def test_sk_matches_definition_small(self):
        # direct symmetric sums for small n, k
        sp = space(2, 5)
        for k in (1, 2, 3):
            expected = np.zeros(sp.size, dtype=np.int64)
            for combo in itertools.combinations(range(5), k):
                term = np.ones(sp.size, dtype=np.int64)
                for i in combo:
                    term = term * sp.digits[:, i]
                expected = (expected + term) % 2
            assert np.array_equal(S_k(5, k).classical_table(), expected)

    def test_s4_properties(self):
        P = S_k(6, 4)
        assert P.is_classical()
        assert P.degree() == 4
        w = RankWitness.induced(P, [L_over_power(6, 3)])
        assert rank_witness_check(P, 3, w)

    def test_mothers(self):
        assert mother_p().degree() == 1
        assert mother_q().degree() == 2
        assert mother_q().mul_by_p() == mother_p()

    def test_forms_cached_consistent(self):
        assert quartic_form(4).k == 4
        assert bilinear_b(4).k == 2


def run_cli(*argv, stdin_text=None):
    from io import StringIO
    import contextlib

    old_stdin = sys.stdin
    out = StringIO()
    try:
        if stdin_text is not None:
            sys.stdin = StringIO(stdin_text)
        with contextlib.redirect_stdout(out):
            code = main(list(argv))
    finally:
        sys.stdin = old_stdin
    return code, out.getvalue()


class TestCli:
    def test_eval(self, tmp_path):
        path = tmp_path / "P.json"
        path.write_text(json.dumps(mother_q().to_json()))
        code, out = run_cli("--input", str(path), "eval", "--x", "1")
        assert code == 0
        assert json.loads(out)["value"] == {"num": 1, "exp": 4 - 2}

    def test_root_mulp_round_trip(self, tmp_path):
        p1 = tmp_path / "P.json"
        p1.write_text(json.dumps(L_over_power(3, 2).to_json()))
        code, out = run_cli("--input", str(p1), "root")
        assert code == 0
        p2 = tmp_path / "R.json"
        p2.write_text(out)
        code, out = run_cli("--input", str(p2), "mulp")
        assert code == 0
        payload = json.loads(out)
        payload.pop("text")
        assert payload == L_over_power(3, 2).to_json()

    def test_arank_json(self, tmp_path):
        path = tmp_path / "S4.json"
        path.write_text(json.dumps(S_k(7, 4).to_json()))
        code, out = run_cli("--input", str(path), "arank", "--s", "3", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["bias"] == "1577/8192"
        assert payload["arank"] == pytest.approx(2.3770330552, abs=1e-9)

    def test_norm_exact_field(self, tmp_path):
        from toruspoly.norms import BoundedFunction
        from toruspoly.poly import NCPoly
        f = BoundedFunction.from_phase(NCPoly.from_text(2, 2, "1/2*x1*x2"))
        path = tmp_path / "f.json"
        path.write_text(json.dumps(f.to_json()))
        code, out = run_cli("--input", str(path), "norm", "--d", "2")
        assert code == 0
        assert json.loads(out)["exact_power"] == "1/4"

    def test_witness_check(self, tmp_path):
        payload = {"P": S_k(5, 4).to_json(),
                   "witness": [L_over_power(5, 3).to_json()]}
        path = tmp_path / "w.json"
        path.write_text(json.dumps(payload))
        code, out = run_cli("--input", str(path), "witness-check", "--s", "3")
        assert code == 0
        assert json.loads(out)["certifies_rank_at_most"] == 1

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 2

    def test_budget_exit_3(self, tmp_path):
        path = tmp_path / "S4.json"
        path.write_text(json.dumps(S_k(7, 4).to_json()))
        code, _ = run_cli("--input", str(path), "arank", "--s", "3",
                          "--budget", "10")
        assert code == 3

    def test_check_failure_exit_1(self, tmp_path):
        payload = {"P": json.loads(json.dumps(
            {"p": 2, "n": 2, "alpha": {"num": 0, "exp": 0},
             "terms": [{"exps": [1, 0], "depth": 0, "coeff": 1}]})),
            "witness": [{"p": 2, "n": 2, "alpha": {"num": 0, "exp": 0},
                         "terms": [{"exps": [0, 1], "depth": 0, "coeff": 1}]}]}
        path = tmp_path / "w.json"
        path.write_text(json.dumps(payload))
        code, out = run_cli("--input", str(path), "witness-check", "--s", "1")
        assert code == 1

    def test_cube_check(self, tmp_path):
        payload = {
            "group": {"cyclic_orders": [2],
                      "filtration": [[[0], [1]], [[0], [1]]]},
            "k": 2,
            "cube": [[0], [1], [1], [1]],
        }
        path = tmp_path / "c.json"
        path.write_text(json.dumps(payload))
        code, out = run_cli("--input", str(path), "cube-check")
        assert code == 0
        rep = json.loads(out)
        assert rep["member"] is False and rep["agree"] is True

    def test_equidist(self):
        payload = json.dumps({"orders": [3], "values": [[0], [1], [2]]})
        code, out = run_cli("--input", "-", "equidist", stdin_text=payload)
        assert code == 0
        assert json.loads(out)["max_deviation"] == "0/1"

    def test_verify_exit_code_and_determinism(self):
        code1, out1 = run_cli("verify", "lam", "--seed", "5", "--threads", "1")
        code8, out8 = run_cli("verify", "lam", "--seed", "5", "--threads", "8")
        assert code1 == code8 == 0
        assert out1 == out8

    def test_verify_params(self):
        code, out = run_cli("verify", "lucas", "--param", "n=4",
                            "--param", "k=4")
        assert code == 0
        rep = json.loads(out)
        assert rep["passed"] and rep["params"] == {"n": 4, "k": 4}

    def test_derive_degree_interpolate(self, tmp_path):
        path = tmp_path / "P.json"
        path.write_text(json.dumps(L_over_power(2, 2).to_json()))
        code, out = run_cli("--input", str(path), "derive", "--h", "1,0")
        assert code == 0
        code, out = run_cli("--input", str(path), "degree")
        assert code == 0 and json.loads(out) == {
            "agree": True, "by_derivatives": 2, "degree": 2}
        values = {"p": 2, "n": 1,
                  "values": [{"num": 0, "exp": 0}, {"num": 1, "exp": 2}]}
        code, out = run_cli("--input", "-", "interpolate",
                            stdin_text=json.dumps(values))
        assert code == 0
        assert json.loads(out)["terms"] == [
            {"coeff": 1, "depth": 1, "exps": [1]}]

    def test_explore_and_norm(self, tmp_path):
        from toruspoly.norms import BoundedFunction
        from toruspoly.poly import NCPoly
        f = BoundedFunction.from_phase(NCPoly.from_text(2, 3, "1/2*x1*x2*x3"))
        path = tmp_path / "f.json"
        path.write_text(json.dumps(f.to_json()))
        code, out = run_cli("--input", str(path), "explore", "--s", "2")
        assert code == 0 and json.loads(out)["correlation"] == 0.75
        code, out = run_cli("--input", str(path), "norm", "--d", "3")
        assert code == 0

    def test_decompose(self):
        payload = json.dumps({"values": ["1/2", "3/2", "2", "4"],
                              "factors": [[0, 0, 1, 1]]})
        code, out = run_cli("--input", "-", "decompose", stdin_text=payload)
        assert code == 0
        rep = json.loads(out)
        assert rep["projected"] == ["1", "1", "3", "3"]
        assert rep["energy"] == "5/1"

    def test_weighted_commands(self):
        wp = {"p": 2, "m": 1, "D": [1], "alpha": {"num": 0, "exp": 0},
              "terms": [{"i": [1], "r": 1, "c": 1}]}
        code, out = run_cli("--input", "-", "wdegree",
                            stdin_text=json.dumps(wp))
        assert code == 0 and json.loads(out)["weighted_degree"] == 2
        code, out = run_cli("--input", "-", "wroot",
                            stdin_text=json.dumps(wp))
        assert code == 0
        assert json.loads(out)["terms"] == [{"i": [1], "r": 2, "c": 1}]

    def test_polymap_check(self):
        payload = {
            "H": {"cyclic_orders": [2], "filtration": [[[0], [1]], [[0], [1]]]},
            "G": {"cyclic_orders": [4],
                  "filtration": [[[0], [1], [2], [3]], [[0], [1], [2], [3]],
                                 [[0], [1], [2], [3]]]},
            "map": [[[0], [0]], [[1], [1]]],
            "k_max": 3,
        }
        code, out = run_cli("--input", "-", "polymap-check",
                            stdin_text=json.dumps(payload))
        assert code == 0
        rep = json.loads(out)
        assert rep["polynomial_map"] and rep["preserves_cubes"]


class TestSuiteReports:
    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("no-such-suite")

    def test_report_round_trip(self):
        rep = run_suite("lam", params={"n": 6})
        payload = json.loads(rep.to_bytes().decode())
        assert payload["suite"] == "lam"
        assert payload["passed"] is True
        assert all(c["verdict"] == "pass" for c in payload["checks"])

    def test_timing_flag_only_adds_fields(self):
        rep = run_suite("lam", params={"n": 4})
        base = rep.to_json(include_timing=False)
        timed = rep.to_json(include_timing=True)
        assert "threads" in timed and "threads" not in base
