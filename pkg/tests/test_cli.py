import csv
import io
import json
from pathlib import Path

import pytest

from normtrace.cli import EXIT_CAP, EXIT_OK, EXIT_USAGE, run

SUITE_DIR = Path(__file__).resolve().parent.parent / "suite"
M2F2 = '{"p":2,"e":1,"factors":[[2,1]]}'
F2F2 = '{"p":2,"e":1,"factors":[[1,1],[1,1]]}'
M2F3 = '{"p":3,"e":1,"factors":[[2,1]]}'


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestCount:
    def test_norm_trace(self, capsys):
        code, out, _ = call(capsys, "count", "--spec", M2F2, "--a", "0", "--b", "1", "--format", "csv")
        assert code == EXIT_OK
        (row,) = rows(out)
        assert row["value"] == "4" and row["bound"] == "2" and row["provenance"] == "both-agree"

    def test_b_zero_goes_to_norm_zero(self, capsys):
        code, out, _ = call(capsys, "count", "--spec", M2F2, "--a", "0", "--b", "0", "--format", "csv")
        (row,) = rows(out)
        assert code == EXIT_OK
        assert row["quantity"] == "N_B(a,0)" and row["value"] == "4"
        assert "known-paper-mismatch" in row["notes"]

    def test_units(self, capsys):
        code, out, _ = call(capsys, "count", "--spec", M2F2, "--a", "1", "--units", "--format", "csv")
        assert code == EXIT_OK and rows(out)[0]["value"] == "2"

    def test_spec_file(self, capsys, tmp_path):
        path = tmp_path / "b.json"
        path.write_text(M2F2)
        code, out, _ = call(capsys, "count", "--spec-file", str(path), "--a", "1", "--b", "1", "--format", "csv")
        assert code == EXIT_OK and rows(out)[0]["value"] == "2"

    def test_output_file(self, capsys, tmp_path):
        dest = tmp_path / "out.csv"
        code, out, _ = call(capsys, "count", "--spec", M2F2, "--a", "0", "--b", "1", "--format", "csv",
                            "--output", str(dest))
        assert code == EXIT_OK and out == ""
        assert rows(dest.read_text())[0]["value"] == "4"


class TestOtherCommands:
    def test_field_table(self, capsys):
        code, out, _ = call(capsys, "field", "--p", "3", "--k", "2")
        assert code == EXIT_OK
        assert out.startswith("# GF(3^2) modulus t^2 + 1")
        assert len([l for l in out.splitlines() if l.endswith("brute")]) == 9

    def test_gauss(self, capsys):
        code, out, _ = call(capsys, "gauss", "--p", "3", "--chi", "1", "--gl", "2", "--hd", "2", "--format", "csv")
        assert code == EXIT_OK
        got = {r["quantity"]: r for r in rows(out)}
        assert got["G_GL2"]["value"] == "-9" and got["G_GL2"]["status"] == "pass"
        assert got["HD_m2"]["value"] == "3"

    def test_kloosterman(self, capsys):
        code, out, _ = call(capsys, "kloosterman", "--spec", M2F2, "--b", "1", "--full", "--format", "csv")
        assert code == EXIT_OK
        got = {r["quantity"]: r for r in rows(out)}
        assert got["K_B"]["value"] == "2" and got["K_B*"]["value"] == "2"

    def test_product_trace(self, capsys):
        code, out, _ = call(capsys, "product-trace", "--spec", M2F2, "--r", "2", "--x", "0,1/1,1", "--format", "csv")
        assert code == EXIT_OK
        data = rows(out)
        assert data[0]["value"] == "2" and data[0]["bound"] == "16"
        assert data[1]["bound"] == "8"
        assert sum(int(r["value"]) for r in data[2:]) == 6

    def test_poly(self, capsys):
        code, out, _ = call(capsys, "poly", "--spec", F2F2, "--f", "0,0,0,1", "--a", "0", "--b", "1", "--format", "csv")
        assert code == EXIT_OK
        assert all(r["notes"] == "reference-only" for r in rows(out))

    def test_structured(self, capsys):
        code, out, _ = call(capsys, "count", "--spec", M2F2, "--a", "0", "--b", "1", "--format", "structured")
        assert code == EXIT_OK
        json.loads(out)

    def test_explore(self, capsys):
        code, out, err = call(capsys, "explore", "--spec", M2F2, "--r", "2", "--format", "csv",
                              "--outside-hypotheses")
        assert code == EXIT_OK
        checks = {r["suite"].split("/")[1] for r in rows(out)}
        assert "conjecture_outside_hypotheses" in checks


class TestVerify:
    def test_whole_suite_dir(self, capsys):
        code, out, _ = call(capsys, "verify", "--spec-dir", str(SUITE_DIR), "--suite", "all", "--format", "csv")
        assert code == EXIT_OK
        statuses = {r["status"] for r in rows(out) if r["suite"] != "suite"}
        assert "fail" not in statuses

    def test_hyphenated_suite_name(self, capsys):
        code, out, _ = call(capsys, "verify", "--spec", M2F2, "--suite", "trace-units", "--format", "csv")
        assert code == EXIT_OK
        assert all(r["suite"].startswith("trace_units/") for r in rows(out))

    def test_byte_identical_across_partitions(self, capsys):
        outs = set()
        for parts in ("1", "3", "8"):
            _, out, _ = call(capsys, "verify", "--spec", M2F2, "--format", "csv", "--partitions", parts)
            outs.add(out)
        assert len(outs) == 1


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        [],
        ["count", "--spec", "bad", "--a", "0", "--b", "1"],
        ["count", "--spec", M2F2, "--a", "0", "--b", "1", "--tolerance", "0.5"],
        ["count", "--spec", M2F2, "--a", "0", "--b", "1", "--tolerance", "0"],
        ["count", "--spec", M2F2, "--a", "7", "--b", "1"],
        ["count", "--a", "0", "--b", "1"],
        ["verify", "--spec", M2F2, "--suite", "nope"],
        ["count", "--spec", M2F2, "--a", "0", "--b", "1", "--partitions", "0"],
    ])
    def test_usage(self, capsys, argv):
        code, _, err = call(capsys, *argv)
        assert code == EXIT_USAGE and err

    def test_cap(self, capsys):
        code, _, err = call(capsys, "kloosterman", "--spec", M2F3, "--b", "1", "--method", "direct",
                            "--max-summands", "10")
        assert code == EXIT_CAP
        assert "exceeds cap" in err

    def test_valid_tolerance_accepted(self, capsys):
        code, _, _ = call(capsys, "count", "--spec", M2F2, "--a", "0", "--b", "1", "--tolerance", "1e-4")
        assert code == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["count", "--spec", M2F2, "--a", "1", "--b", "1"],
    ["kloosterman", "--spec", F2F2, "--b", "1"],
    ["gauss", "--p", "5"],
    ["field", "--p", "2", "--k", "3"],
])
def test_provenance_column(capsys, argv):
    code, out, _ = call(capsys, *argv, "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",")[-1] == "provenance"
