import io
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cocycle_forge import records
from cocycle_forge.cli import TOL_ENV, build_parser, resolve_tolerances, run
from cocycle_forge.cocycle import PeriodicCocycle
from cocycle_forge.errors import InvalidArgument, ShapeMismatch

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return str(FIXTURES / name)


class TestRecords:
    finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda x: abs(x) > 1e-3)

    @given(hnp.arrays(np.float64, (3, 2, 2), elements=finite))
    def test_round_trip_bit_exact(self, arr):
        try:
            c = PeriodicCocycle(arr)
        except Exception:
            return
        back = records.parse_cocycle(records.dump_cocycle(c))
        assert back.matrices.tobytes() == c.matrices.tobytes()

    def test_canonical_json(self):
        assert records.dumps({"b": 0.1, "a": [1, float("nan"), True]}) == '{"a":[1,null,true],"b":0.10000000000000001}'

    def test_shape_errors(self):
        rec = {"dim": 2, "period": 2, "matrices": [[1, 0, 0, 1]]}
        with pytest.raises(ShapeMismatch):
            records.cocycle_from_record(rec)
        rec = {"dim": 3, "period": 1, "matrices": [[1, 0, 0, 1]]}
        with pytest.raises(ShapeMismatch):
            records.cocycle_from_record(rec)
        with pytest.raises(InvalidArgument):
            records.cocycle_from_record({"dim": 2, "period": 1, "matrices": [[1, 0, 0, 1]], "extra": 1})

    def test_label_kept(self):
        c = records.parse_cocycle((FIXTURES / "diag_2_half.json").read_text())
        assert c.label == "diag(2, 1/2)"
        assert json.loads(records.dump_cocycle(c))["label"] == c.label


class TestCommands:
    def test_spectrum_example(self):
        code, out, _ = cli("spectrum", fx("diag_2_half.json"))
        rep = json.loads(out)
        assert code == 0 and rep["status"] == "ok"
        np.testing.assert_allclose(rep["result"]["spectrum"]["exponents"], [-np.log(2), np.log(2)], atol=1e-15)
        assert rep["command"]["name"] == "spectrum" and len(rep["input_digest"]) == 64

    def test_weaken_example(self):
        code, out, _ = cli("weaken", fx("weaken_example.json"), "--i", 1, "--delta", 0.1, "--eps", 0.4)
        rep = json.loads(out)
        assert code == 0
        assert rep["result"]["endpoint_spectrum"]["exponents"][0] == pytest.approx(-0.05, abs=1e-12)
        assert rep["result"]["verdict"]["passed"]

    def test_blend_infeasible(self):
        code, out, err = cli("blend", fx("blend_infeasible.json"), "--j", 1, "--eps", "1e-6")
        rep = json.loads(out)
        assert code == 2 and rep["reason"] == "InsufficientBudget" and rep["result"] is None
        assert "InsufficientBudget" in err

    def test_csv_curves(self):
        code, out, _ = cli("realify", fx("complex_pair.json"), "--eps", 0.5, "--grid", 11, "--csv")
        rows = out.splitlines()
        assert code == 0 and rows[0] == "t,chi_1,chi_2,chi_3" and len(rows) == 12

    def test_endpoint_file(self, tmp_path):
        target = tmp_path / "end.json"
        code, _, _ = cli("blend", fx("saddle3.json"), "--j", 1, "--eps", 2, "--grid", 11, "--endpoint", target)
        assert code == 0
        end = records.parse_cocycle(target.read_text())
        assert end.period == 2

    def test_chain_csv_and_edges(self, tmp_path):
        edges = tmp_path / "e.csv"
        code, out, _ = cli("chain", "--map", "north_south", "--eps", 0.05, "--res", 32, "--csv", "--edges", edges)
        assert code == 0 and out.startswith("box,i0,c0,class")
        assert edges.read_text().startswith("source,target")

    def test_stdin(self, monkeypatch):
        text = (FIXTURES / "diag_2_half.json").read_text()
        monkeypatch.setattr("sys.stdin", io.TextIOWrapper(io.BytesIO(text.encode())))
        code, out, _ = cli("spectrum", "-")
        assert code == 0
        assert json.loads(out)["input_digest"] == json.loads(cli("spectrum", fx("diag_2_half.json"))[1])["input_digest"]

    def test_timing_only_on_request(self):
        _, out, _ = cli("spectrum", fx("diag_2_half.json"))
        assert "wall_time" not in json.loads(out)
        _, out, _ = cli("spectrum", fx("diag_2_half.json"), "--timing")
        assert json.loads(out)["wall_time"] >= 0

    def test_strongconn_angle_flag(self):
        _, out, _ = cli("strongconn", fx("model_parabolic.json"), "--steps", 1000, "--angle-tol", 1e-3)
        res = json.loads(out)["result"]
        assert res["direction_within_tolerance"] and res["scope"] == "model-level"


class TestErrors:
    @pytest.mark.parametrize("argv", [
        [], ["nope"], ["spectrum"], ["blend", "x.json", "--j", "1"], ["spectrum", "missing.json"],
        ["chain", "--eps", "0.1", "--res", "8"], ["check", "{f}", "--property", "pid"],
        ["dominate", "{f}", "--kmax", "0"], ["spectrum", "{f}", "--tol", "-1"],
    ])
    def test_exit_three(self, argv):
        argv = [a.replace("{f}", fx("saddle3.json")) for a in argv]
        code, out, _ = cli(*argv)
        assert code == 3
        rep = json.loads(out)
        assert rep["status"] == "error" and rep["reason"]

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, out, _ = cli("spectrum", bad)
        assert code == 3 and json.loads(out)["reason"] == "InvalidArgument"

    def test_internal_error_is_four(self, monkeypatch):
        import cocycle_forge.cli as mod

        def boom(ctx):
            raise RuntimeError("bug")
        monkeypatch.setitem(mod.COMMANDS, "spectrum", boom)
        code, out, _ = cli("spectrum", fx("diag_2_half.json"))
        assert code == 4 and json.loads(out)["reason"] == "InternalError"


class TestTolerance:
    def test_env_and_flag(self):
        args = build_parser().parse_args(["spectrum", "x"])
        assert resolve_tolerances(args, {TOL_ENV: "1e-6"}).modulus == 1e-6
        args = build_parser().parse_args(["spectrum", "x", "--tol", "1e-4"])
        assert resolve_tolerances(args, {TOL_ENV: "1e-6"}).modulus == 1e-4
        with pytest.raises(InvalidArgument):
            resolve_tolerances(build_parser().parse_args(["spectrum", "x"]), {TOL_ENV: "abc"})

    def test_flag_position(self):
        a = build_parser().parse_args(["--tol", "1e-5", "spectrum", "x"])
        b = build_parser().parse_args(["spectrum", "x", "--tol", "1e-5"])
        assert a.tol == b.tol == 1e-5

    def test_reported(self, monkeypatch):
        monkeypatch.setenv(TOL_ENV, "1e-7")
        _, out, _ = cli("spectrum", fx("diag_2_half.json"))
        assert json.loads(out)["tolerances"]["exponent"] == 1e-7
