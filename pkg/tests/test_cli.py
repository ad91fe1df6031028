"""CLI subcommands: exit codes, JSON schema, determinism."""

import json

import pytest

from satmeter.cli import main

TRI = "p cnf 2 3\n1 2 0\n-1 0\n2 0\n"
PAIR = "p cnf 1 2\n1 0\n-1 0\n"


@pytest.fixture
def tri_path(tmp_path):
    p = tmp_path / "tri.cnf"
    p.write_text(TRI)
    return str(p)


@pytest.fixture
def pair_path(tmp_path):
    p = tmp_path / "pair.cnf"
    p.write_text(PAIR)
    return str(p)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_solve_ls_with_oracle(capsys, tri_path):
    code, rep = run_json(capsys, ["solve", "--alg", "ls", "--oracle", tri_path])
    assert code == 0
    assert rep["satisfied"] == 3
    assert rep["opt"] == 3
    assert rep["ratio"] == 1.0
    assert rep["schema_version"] == 1
    assert rep["instance"]["n"] == 2 and rep["instance"]["m"] == 3


def test_solve_half_pair(capsys, pair_path):
    code, rep = run_json(capsys, ["solve", "--alg", "half", pair_path])
    assert code == 0
    assert rep["satisfied"] == 1


def test_solve_all_algorithms_agree_on_satisfiable(capsys, tri_path):
    for alg in ("half", "ls", "chou", "exact"):
        code, rep = run_json(capsys, ["solve", "--alg", alg, tri_path])
        assert code == 0
        assert rep["satisfied"] >= 2
    code, rep = run_json(
        capsys, ["solve", "--alg", "planar-ptas", "--eps", "1/3", tri_path]
    )
    assert code == 0
    assert rep["satisfied"] == 3


def test_solve_deterministic_modulo_timestamp(capsys, tri_path):
    _, a = run_json(capsys, ["solve", "--alg", "chou", tri_path])
    _, b = run_json(capsys, ["solve", "--alg", "chou", tri_path])
    a.pop("timestamp")
    b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_bias_report(capsys, tri_path):
    code, rep = run_json(capsys, ["bias", tri_path])
    assert code == 0
    assert rep["bias"]["b_f"] == "1"
    assert rep["bias"]["neg_vars"] == [1]


def test_partition_report_and_files(capsys, tmp_path):
    chain = tmp_path / "chain8.cnf"
    code = main(
        ["gen-planar", "--kind", "chain", "--size", "8", "--seed", "0",
         "--out", str(chain)]
    )
    assert code == 0
    capsys.readouterr()
    prefix = str(tmp_path / "out")
    code, rep = run_json(
        capsys, ["partition", "--k", "3", "--out-prefix", prefix, str(chain)]
    )
    assert code == 0
    assert rep["partition"]["ok"]
    for path in rep["part_files"]:
        assert path.startswith(prefix)


def test_hashfam_stats(capsys):
    code, rep = run_json(
        capsys, ["hashfam", "--n", "3", "--k", "2", "--a", "1", "--b", "2",
                 "--q", "5"]
    )
    assert code == 0
    assert rep["family_size"] == 25
    assert rep["marginal_counts"] == [15, 15, 15]
    assert rep["pair11_count_vars_1_2"] == 9


def test_oracle_command(capsys, tri_path):
    code, rep = run_json(capsys, ["oracle", tri_path])
    assert code == 0
    assert rep["opt"] == 3
    assert rep["witness"] == "v -1 2 0"


def test_gen_planar_stdout(capsys):
    code = main(["gen-planar", "--kind", "chain", "--size", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("p cnf 4 3")


def test_input_errors_exit_2(capsys, tmp_path):
    assert main(["solve", "--alg", "ls", str(tmp_path / "no.cnf")]) == 2
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 1 1\n1 -1 0\n")
    assert main(["solve", "--alg", "ls", str(bad)]) == 2
    assert main(["gen-planar", "--kind", "grid", "--size", "x"]) == 2
    assert main(["solve", "--alg", "nope", str(bad)]) == 2  # argparse error
    ok = tmp_path / "ok.cnf"
    ok.write_text(TRI)
    assert main(["solve", "--alg", "planar-ptas", str(ok)]) == 2  # no --eps
    assert main(["partition", "--k", "1", str(ok)]) == 2
