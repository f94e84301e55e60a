import csv
import io
import json
import math

import pytest

from oracles import symmetric_hardy_max, two_qubit_symmetric_p
from spinhardy.cli import (
    EXIT_DIMS,
    EXIT_INPUT,
    EXIT_NO_SOLUTION,
    EXIT_OK,
    EXIT_RESOURCE,
    InputError,
    RunReport,
    main,
    parse_axis,
    parse_number,
    run_certify,
)
from spinhardy.scenario import random_scenario


def write(tmp_path, data, name="sc.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def symmetric(two_s=1, theta=1.0):
    tilt = {"theta": theta, "phi": 0.0}
    party = {"a": [0, 0, 1], "a_prime": tilt}
    return {"n": 2, "two_s": two_s, "parties": [party, party]}


class TestDims:
    @pytest.mark.parametrize("two_s,text", [(1, "4s^2 = 1"), (2, "4s^2 = 4"), (3, "4s^2 = 9")])
    def test_relaxed(self, tmp_path, capsys, two_s, text):
        assert main(["dims", write(tmp_path, {"n": 2, "two_s": two_s})]) == EXIT_OK
        out = capsys.readouterr().out
        assert f"dim_M_bar = {two_s ** 2} (expected {text})" in out

    def test_legacy_and_cabello(self, tmp_path, capsys):
        path = write(tmp_path, {"n": 2, "two_s": 2})
        assert main(["dims", path, "--mode", "legacy"]) == EXIT_OK
        assert "dim_M_bar = 2 (expected 2s = 2)" in capsys.readouterr().out
        assert main(["dims", path, "--mode", "cabello"]) == EXIT_OK
        assert "dim_M_bar = 5 (expected 4s^2+1 = 5)" in capsys.readouterr().out

    def test_n_party(self, tmp_path, capsys):
        assert main(["dims", write(tmp_path, {"n": 3, "two_s": 2})]) == EXIT_OK
        assert "dim_M_bar = 20" in capsys.readouterr().out

    def test_degenerate_mismatch(self, tmp_path, capsys):
        party = {"a": [0, 0, 1], "a_prime": [0, 0, 1]}
        path = write(tmp_path, {"n": 2, "two_s": 2, "parties": [party, party]})
        assert main(["dims", path]) == EXIT_DIMS
        assert "mismatch" in capsys.readouterr().err

    def test_report_file(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["dims", write(tmp_path, {"n": 2, "two_s": 1}), "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data["dims"] == data["expected"] == {"M": 3, "M_bar": 1, "M_bar_prime": 0}


class TestInputErrors:
    def test_malformed_json_location(self, tmp_path, capsys):
        path = write(tmp_path, '{"n": 2,\n  "two_s": }')
        assert main(["dims", path]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert f"{path}:2:" in err

    def test_missing_key(self, tmp_path, capsys):
        assert main(["dims", write(tmp_path, {"n": 2})]) == EXIT_INPUT
        assert "two_s" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["dims", str(tmp_path / "nope.json")]) == EXIT_INPUT

    def test_bad_mode(self, tmp_path):
        assert main(["dims", write(tmp_path, {"n": 2, "two_s": 1}), "--mode", "bogus"]) == EXIT_INPUT

    def test_resource_limit(self, tmp_path):
        assert main(["minimal-set", write(tmp_path, {"n": 4, "two_s": 7})]) == EXIT_RESOURCE


class TestCertify:
    @pytest.mark.parametrize("mode", ["hardy", "relaxed", "legacy", "cabello"])
    def test_certified(self, tmp_path, capsys, mode):
        assert main(["certify", write(tmp_path, {"n": 2, "two_s": 2}), "--mode", mode, "--seed", "0"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["certificate"]["certified"] and data["certificate"]["lhv_bound"] == 0
        assert list(data) == ["version", "scenario", "mode", "dims", "solution", "certificate"]

    def test_deterministic(self, tmp_path, capsys):
        path = write(tmp_path, {"n": 2, "two_s": 3})
        main(["certify", path])
        first = capsys.readouterr().out
        main(["certify", path])
        assert capsys.readouterr().out == first

    def test_timing_optional(self, tmp_path, capsys):
        main(["certify", write(tmp_path, {"n": 2, "two_s": 1}), "--timing"])
        assert "timing" in json.loads(capsys.readouterr().out)

    def test_degenerate_exit(self, tmp_path):
        party = {"a": [0, 0, 1], "a_prime": [0, 0, 1]}
        path = write(tmp_path, {"n": 2, "two_s": 1, "parties": [party, party]})
        assert main(["certify", path]) == EXIT_NO_SOLUTION

    def test_report_round_trip(self):
        report = run_certify(random_scenario(2, 2, 3), "cabello")
        again = RunReport.from_dict(json.loads(report.to_json()))
        assert again.to_json() == report.to_json()


class TestScan:
    def read(self, text):
        return list(csv.DictReader(io.StringIO(text)))

    def test_grid(self, tmp_path, capsys):
        path = write(tmp_path, symmetric())
        assert main(["scan", path, "--vary", "a_prime.theta=0:pi:pi/20"]) == EXIT_OK
        rows = self.read(capsys.readouterr().out)
        assert len(rows) == 21
        assert float(rows[0]["p"]) == 0 and rows[0]["certified"] == "0"
        for r in rows:
            theta = float(r["a_prime.theta"])
            assert 0 <= float(r["p"]) <= 1
            assert float(r["p"]) == pytest.approx(two_qubit_symmetric_p(theta), abs=1e-12)

    def test_refine_reaches_oracle(self, tmp_path, capsys):
        path = write(tmp_path, symmetric())
        assert main(["scan", path, "--vary", "a_prime.theta=0:pi:pi/50", "--refine"]) == EXIT_OK
        rows = self.read(capsys.readouterr().out)
        best = rows[-1]
        assert best["refined"] == "1"
        ref, _ = symmetric_hardy_max()
        assert float(best["p"]) == pytest.approx(ref, abs=1e-9)
        assert float(best["p"]) == pytest.approx((5 * math.sqrt(5) - 11) / 2, abs=1e-9)

    def test_cabello_column(self, tmp_path, capsys):
        path = write(tmp_path, symmetric())
        main(["scan", path, "--mode", "cabello", "--vary", "a_prime.theta=0.5:1.5:0.5"])
        rows = self.read(capsys.readouterr().out)
        assert "q" in rows[0] and len(rows) == 3

    def test_empty_grid(self, tmp_path):
        path = write(tmp_path, symmetric())
        assert main(["scan", path, "--vary", "a_prime.theta=1:0:0.1"]) == EXIT_INPUT
        assert main(["scan", path]) == EXIT_INPUT


class TestMinimalSet:
    def test_spin_one_legacy(self, tmp_path, capsys):
        out = tmp_path / "m.json"
        assert main(["minimal-set", write(tmp_path, {"n": 2, "two_s": 2}), "--mode", "legacy",
                     "--out", str(out)]) == EXIT_OK
        text = capsys.readouterr().out
        assert "5 of 7 zero events suffice" in text
        assert text.count("unused") == 2
        data = json.loads(out.read_text())
        assert data["subset"] == [0, 1, 3, 4, 5] and data["exact"]

    def test_cabello_rejected(self, tmp_path):
        assert main(["minimal-set", write(tmp_path, {"n": 2, "two_s": 1}), "--mode", "cabello"]) == EXIT_INPUT


class TestSample:
    def run(self, tmp_path, capsys, *extra):
        assert main(["sample", write(tmp_path, {"n": 2, "two_s": 1}), *extra]) == EXIT_OK
        return capsys.readouterr().out

    def test_seeded_byte_identical(self, tmp_path, capsys):
        a = self.run(tmp_path, capsys, "--shots", "5000", "--seed", "7")
        b = self.run(tmp_path, capsys, "--shots", "5000", "--seed", "7")
        c = self.run(tmp_path, capsys, "--shots", "5000", "--seed", "8")
        assert a == b and a != c

    def test_counts(self, tmp_path, capsys):
        shots = 20000
        data = json.loads(self.run(tmp_path, capsys, "--shots", str(shots), "--seed", "0"))
        assert len(data["tables"]) == 4
        for t in data["tables"]:
            assert sum(t["counts"].values()) == shots
        # the zero events are never observed; the target appears at rate p
        assert data["tables"][0]["counts"]["+1/2,+1/2"] == 0
        assert data["tables"][1]["counts"]["-1/2,-1/2"] == 0
        assert data["tables"][2]["counts"]["-1/2,-1/2"] == 0
        p = data["p"]
        hits = data["tables"][3]["counts"]["-1/2,-1/2"]
        assert abs(hits - shots * p) <= 5 * math.sqrt(shots * p * (1 - p))

    def test_bad_shots(self, tmp_path):
        assert main(["sample", write(tmp_path, {"n": 2, "two_s": 1}), "--shots", "0"]) == EXIT_INPUT


def test_parse_number():
    assert parse_number("pi/2") == pytest.approx(math.pi / 2)
    assert parse_number("-0.25 + 2*pi") == pytest.approx(2 * math.pi - 0.25)
    for bad in ("__import__('os')", "pi/0", "e", ""):
        with pytest.raises(InputError):
            parse_number(bad)


def test_parse_axis():
    ax = parse_axis("1.a.phi=0:pi:pi/4")
    assert (ax.party, ax.setting, ax.angle) == (1, 0, "phi")
    assert len(ax.points()) == 5
    assert parse_axis("a_prime.theta=0:1:0.5").party is None
    for bad in ("b.theta=0:1:0.1", "a.theta=0:1", "x.a.theta=0:1:0.1"):
        with pytest.raises(InputError):
            parse_axis(bad)


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
