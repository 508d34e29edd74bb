import json

import pytest

from spanset.cli import main


def _report(tmp_path, argv, name="r.json"):
    out = tmp_path / name
    assert main(argv + ["--out", str(out)]) == 0
    return json.loads(out.read_text())


def test_demo_headline(capsys):
    assert main(["span", "pl", "--demo", "ex2"]) == 0
    assert capsys.readouterr().out.strip() == "[0,0.5] ∪ {1}"


def test_fdist_reproducible(tmp_path):
    argv = ["fdist", "--n", "200", "--steps", "100000", "--reps", "300", "--seed", "7"]
    a = _report(tmp_path, argv, "a.json")
    b = _report(tmp_path, argv + ["--threads", "2"], "b.json")
    a.pop("runtime_seconds"), b.pop("runtime_seconds")
    assert a == b
    assert a["seed"] == 7 and a["command"] == "fdist"


def test_m2_report_pieces_sum(tmp_path):
    r = _report(tmp_path, ["moments", "m2", "--d", "3", "--a", "1", "--b", "0.5"])
    res = r["results"]
    assert sum(res["pieces"].values()) == pytest.approx(res["value"], rel=1e-14)


def test_out_directory_and_csv(tmp_path):
    assert main(["span", "lattice", "--d", "2", "--steps", "300", "--format", "csv", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "span_lattice.csv").read_text().splitlines()
    assert lines[0] == "lag" and lines[1] == "0"
    assert main(["converge", "--levels", "2", "3", "--fine-level", "6", "--seeds", "4", "--format", "csv",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "converge.csv").read_text().startswith("parameter,median,q25,q75,n_seeds")


def test_exit_codes(capsys):
    assert main(["fdist", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main(["moments", "energy", "--d", "2", "--alpha", "1.5"]) == 2
    assert main(["moments", "m2", "--d", "2", "--tol", "1e-300"]) == 3
    assert main([]) == 2


@pytest.mark.parametrize("argv", [
    ["gen", "srw", "--d", "3", "--steps", "50"],
    ["gen", "gaussian", "--d", "2", "--horizon", "0.1", "--dt", "0.01"],
    ["span", "eps", "--horizon", "1", "--dt", "0.01", "--window", "0.05,0.5"],
    ["stats", "es1", "--reps", "50", "--steps", "2000"],
    ["stats", "excursions", "--reps", "50", "--steps", "1000"],
    ["stats", "capacity", "--K", "0.9,1", "--reps", "30", "--steps", "500"],
    ["dim", "--steps", "20000", "--seeds", "3"],
    ["moments", "m1", "--d", "3", "--eps", "0.05"],
    ["moments", "mc", "--reps", "20", "--b", "0.5"],
    ["hausdorff", "0,1;3,4", "0,4"],
    ["repro", "--only", "2", "8"],
])
def test_every_command_writes_a_report(tmp_path, argv):
    r = _report(tmp_path, argv)
    assert set(r) == {"command", "parameters", "seed", "results", "runtime_seconds", "version"}
