import csv
import io
import json
import subprocess
import sys

import pytest

from singular_elliptic import cli
from singular_elliptic.fundamental_solutions import SingularParams, evaluate
from singular_elliptic.verification import CheckRecord


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


class TestEval:
    def test_json_record(self, capsys):
        code, out, _ = run(capsys, "eval", "--point", "1.2,0.8,1.1", "--alpha", "0.3", "--pole", "1,1.1,0.9",
                           "--no-timestamp")
        assert code == 0
        rec = json.loads(out)
        ref = evaluate(1, SingularParams(0.3, 0.25, 0.25), (1.2, 0.8, 1.1), (1, 1.1, 0.9)).value
        assert rec["value"] == ref
        assert rec["converged"] is True
        assert rec["kind"] == "q1"
        assert "timestamp" not in rec

    def test_against_integral_route(self, capsys):
        from singular_elliptic.fundamental_solutions import geometry, solution_recipe
        from singular_elliptic.lauricella import fa3_integral

        code, out, _ = run(capsys, "eval", "--kind", "q1", "--alpha", "0.25", "--beta", "0.25", "--gamma", "0.25",
                           "--pole", "1,1,1", "--point", "2,2,2")
        rec = json.loads(out)
        params, power, _ = solution_recipe(1, SingularParams(0.25, 0.25, 0.25))
        fr = geometry((2, 2, 2), (1, 1, 1))
        assert code == 0 and rec["converged"] is True
        assert rec["value"] == pytest.approx(fr.r2 ** power * fa3_integral(params, fr.args), rel=1e-7)

    def test_q8_smaller_far_away(self, capsys):
        vals = {}
        for kind in ("q1", "q8"):
            vals[kind] = json.loads(run(capsys, "eval", "--kind", kind, "--point", "0.1,0.2,0.1", "--pole", "3,3,3")[1])
        assert 0 < vals["q8"]["value"] < vals["q1"]["value"]

    def test_timestamp_by_default(self, capsys):
        _, out, _ = run(capsys, "eval", "--point", "1,1,2")
        assert "timestamp" in json.loads(out)

    def test_normalisation_flag(self, capsys):
        _, a, _ = run(capsys, "eval", "--kind", "q3", "--point", "0.4,0.5,2", "--no-timestamp")
        _, b, _ = run(capsys, "eval", "--kind", "q3", "--point", "0.4,0.5,2", "--k3", "2.5", "--no-timestamp")
        assert json.loads(b)["value"] == pytest.approx(2.5 * json.loads(a)["value"], rel=1e-15)

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "eval", "--kind", "q8", "--point", "0.5,0.5,0.5", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][0] == "kind" and rows[1][0] == "q8"
        assert float(rows[1][7]) > 0

    def test_coincident_pole(self, capsys):
        code, _, err = run(capsys, "eval", "--point", "1,1,1", "--pole", "1,1,1")
        assert code == 1
        assert "coincident pole" in err

    def test_parameter_out_of_range(self, capsys):
        code, _, err = run(capsys, "eval", "--point", "1,1,2", "--alpha", "0.5")
        assert code == 1 and "alpha" in err

    def test_bad_point(self, capsys):
        code, _, _ = run(capsys, "eval", "--point", "1,2")
        assert code == 1

    def test_nonconvergence_exit(self, capsys):
        code, _, err = run(capsys, "eval", "--point", "50,50,50", "--max-terms", "1")
        assert code == 2
        assert "not converged" in err

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 1


class TestGrid:
    def test_counts_and_exclusion(self, capsys):
        code, out, _ = run(capsys, "grid", "--x", "0.5,1.5,11", "--y", "0.5,1.5,11", "--z", "0.5,1.5,11",
                           "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["x", "y", "z", "value", "error_estimate", "route"]
        body = rows[1:]
        assert len(body) == 1331
        excluded = [r for r in body if r[3] == "excluded"]
        assert len(excluded) == 1
        assert [float(v) for v in excluded[0][:3]] == [1.0, 1.0, 1.0]

    def test_wider_grid_has_no_node_near_pole(self, capsys):
        # linspace(0.5, 2, 11) steps by 0.15 and misses 1.0; nearest node is 0.087 away
        _, out, _ = run(capsys, "grid", "--x", "0.5,2,11", "--y", "0.5,2,11", "--z", "0.5,2,11",
                        "--format", "csv")
        body = list(csv.reader(io.StringIO(out)))[1:]
        assert len(body) == 1331
        assert sum(r[3] == "excluded" for r in body) == 0

    def test_order_is_z_fastest(self, capsys):
        _, out, _ = run(capsys, "grid", "--x", "1,2,2", "--y", "1,2,2", "--z", "3,4,2", "--format", "csv")
        pts = [tuple(map(float, r[:3])) for r in list(csv.reader(io.StringIO(out)))[1:]]
        assert pts[:3] == [(1.0, 1.0, 3.0), (1.0, 1.0, 4.0), (1.0, 2.0, 3.0)]

    def test_json_and_csv_agree(self, capsys):
        axes = ["--x", "0.4,1.6,3", "--y", "0.7,1.9,2", "--z", "0.2,2.0,3"]
        _, text, _ = run(capsys, "grid", *axes, "--format", "csv")
        _, doc, _ = run(capsys, "grid", *axes, "--format", "json", "--no-timestamp")
        csv_vals = [float(r[3]) for r in list(csv.reader(io.StringIO(text)))[1:]]
        json_vals = [r["value"] for r in json.loads(doc)["rows"]]
        assert csv_vals == json_vals

    def test_deterministic_output(self, capsys):
        axes = ["--x", "0.4,1.6,3", "--y", "0.7,1.9,2", "--z", "0.2,2.0,2", "--no-timestamp"]
        assert run(capsys, "grid", *axes)[1] == run(capsys, "grid", *axes)[1]

    def test_point_pole_exchange(self, capsys):
        a, b = "0.6,1.4,0.9", "1.3,0.5,1.7"

        def value(pt, pole):
            axes = [f"--{ax}" for ax in "xyz"]
            spec = [f"{v},{v},1" for v in pt.split(",")]
            _, out, _ = run(capsys, "grid", "--kind", "q6", "--pole", pole, *sum(zip(axes, spec), ()),
                            "--format", "csv")
            return float(list(csv.reader(io.StringIO(out)))[1][3])

        assert value(a, b) == pytest.approx(value(b, a), rel=1e-12)

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "g.csv"
        code, out, _ = run(capsys, "grid", "--x", "1,2,2", "--y", "1,1,1", "--z", "2,2,1", "--format", "csv",
                           "-o", str(target))
        assert code == 0 and out == ""
        assert target.read_bytes().count(b"\r") == 0
        assert len(target.read_text().splitlines()) == 3

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run(capsys, "grid", "--x", "1,2,2", "--y", "1,1,1", "--z", "2,2,1",
                           "-o", str(tmp_path / "missing" / "g.csv"))
        assert code == 1 and "cannot write" in err

    def test_bad_axis(self, capsys):
        assert run(capsys, "grid", "--x", "0,1,3", "--y", "1,1,1", "--z", "1,1,1")[0] == 1
        assert run(capsys, "grid", "--x", "1,2", "--y", "1,1,1", "--z", "1,1,1")[0] == 1

    def test_workers(self, capsys):
        axes = ["--x", "0.5,1.5,3", "--y", "0.5,1.5,2", "--z", "1,2,2", "--no-timestamp"]
        assert run(capsys, "grid", *axes)[1] == run(capsys, "grid", *axes, "--workers", "2")[1]


class TestConfig:
    def test_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"alpha": 0.1, "beta": 0.2, "pole": [2, 2, 2], "format": "json"}))
        _, out, _ = run(capsys, "eval", "--config", str(cfg), "--point", "1,1,1", "--no-timestamp")
        rec = json.loads(out)
        assert rec["pole"] == [2.0, 2.0, 2.0]
        assert rec["value"] == evaluate(1, SingularParams(0.1, 0.2, 0.25), (1, 1, 1), (2, 2, 2)).value
        _, out, _ = run(capsys, "eval", "--config", str(cfg), "--alpha", "0.3", "--point", "1,1,1",
                        "--no-timestamp")
        assert json.loads(out)["value"] == evaluate(1, SingularParams(0.3, 0.2, 0.25), (1, 1, 1), (2, 2, 2)).value

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"alhpa": 0.1}))
        code, _, err = run(capsys, "eval", "--config", str(cfg), "--point", "1,1,2")
        assert code == 1 and "alhpa" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "eval", "--config", str(tmp_path / "nope.json"), "--point", "1,1,2")
        assert code == 1


class TestVerify:
    def test_fast_suites(self, capsys):
        code, out, _ = run(capsys, "verify", "--suites", "gamma,gauss", "--no-timestamp")
        doc = json.loads(out)
        assert code == 0 and doc["passed"] is True
        assert all({"suite", "case", "measured", "tolerance", "pass"} <= set(r) for r in doc["records"])

    def test_parameters_near_upper_edge(self, capsys):
        code, out, _ = run(capsys, "verify", "--suites", "identities", "--alpha", "0.49", "--no-timestamp")
        assert code == 0 and json.loads(out)["passed"] is True

    def test_failure_exit(self, capsys, monkeypatch):
        def failing(sp, pole, fd, ctrl):
            return [CheckRecord("fake", "always fails", 1.0, 0.0, False)]

        monkeypatch.setitem(cli.SUITES, "fake", failing)
        code, out, _ = run(capsys, "verify", "--suites", "fake", "--format", "csv")
        assert code == 3
        assert "false" in out

    def test_unknown_suite(self, capsys):
        code, _, err = run(capsys, "verify", "--suites", "nope")
        assert code == 1 and "nope" in err


class TestScan:
    def test_gap_shrinks(self, capsys):
        code, out, _ = run(capsys, "scan", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))[1:]
        gaps = [float(r[4]) for r in rows]
        assert code == 0
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 1e-3

    def test_direction_scale_invariant(self, capsys):
        a = run(capsys, "scan", "--direction", "1,2,3", "--no-timestamp")[1]
        b = run(capsys, "scan", "--direction", "2,4,6", "--no-timestamp")[1]
        assert [r["q1"] for r in json.loads(a)["rows"]] == [r["q1"] for r in json.loads(b)["rows"]]

    def test_axis_directions_share_limit(self, capsys):
        a = json.loads(run(capsys, "scan", "--direction", "1,0,0")[1])["rows"]
        b = json.loads(run(capsys, "scan", "--direction", "0,0,1")[1])["rows"]
        assert a[-1]["limit_constant"] == b[-1]["limit_constant"]
        assert a[-1]["compensated"] == pytest.approx(b[-1]["compensated"], rel=2e-3)
        assert a[-1]["relative_gap"] <= 1e-3 and b[-1]["relative_gap"] <= 1e-3

    def test_radii_must_decrease(self, capsys):
        assert run(capsys, "scan", "--radii", "1e-3,1e-2")[0] == 1

    def test_zero_direction(self, capsys):
        assert run(capsys, "scan", "--direction", "0,0,0")[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "singular_elliptic", "eval", "--point", "1,1,2", "--no-timestamp"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["converged"] is True
