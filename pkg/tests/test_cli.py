import json

from kappa3 import _schemas
from kappa3.cli import main
from kappa3.edgelist import write_edgelist
from kappa3.graph import complete_graph
from kappa3.random_models import sample_gnp


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_gnp_full(tmp_path, capsys):
    f = tmp_path / "g.txt"
    code, _, _ = run(capsys, "sample", "--model", "gnp", "--n", "5", "--p", "1", "--seed", "1", "--out", str(f))
    assert code == 0
    assert f.read_text().splitlines()[0] == "5 10"


def test_sample_gnm_empty_and_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for f in (a, b):
        assert run(capsys, "sample", "--model", "gnm", "--n", "4", "--m", "0", "--seed", "3", "--out", str(f))[0] == 0
    assert a.read_text() == "4 0\n" == b.read_text()
    for f in (a, b):
        run(capsys, "sample", "--n", "300", "--k", "1", "--seed", "3", "--out", str(f))
    assert a.read_bytes() == b.read_bytes()


def test_sample_needs_seed(tmp_path, capsys):
    code, _, err = run(capsys, "sample", "--n", "5", "--p", "0.5", "--out", str(tmp_path / "x"))
    assert code == 2 and "--seed" in err


def test_exact_k4(tmp_path, capsys):
    f = tmp_path / "k4.txt"
    write_edgelist(complete_graph(4), f)
    code, out, _ = run(capsys, "exact", "--graph", str(f), "--terminals", "0", "1", "2")
    data = json.loads(out)
    assert code == 0 and data["value"] == 2
    _schemas.validate(data, "exact_set.schema.json")


def test_exact_all_k5(tmp_path, capsys):
    f = tmp_path / "k5.txt"
    write_edgelist(complete_graph(5), f)
    code, out, _ = run(capsys, "exact", "--graph", str(f), "--all")
    data = json.loads(out)
    assert code == 0 and data["kappa3"] == 3 and len(data["witness_S"]) == 3


def test_exact_all_cap(tmp_path, capsys):
    f = tmp_path / "g50.txt"
    write_edgelist(sample_gnp(50, 0.2, 1), f)
    code, _, err = run(capsys, "exact", "--graph", str(f), "--all")
    assert code == 3
    assert "--max-n" in err


def test_bad_graph_file(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("3 2\n0 1\n")
    assert run(capsys, "exact", "--graph", str(f), "--all")[0] == 2


def test_pack_success_and_failure(tmp_path, capsys):
    f = tmp_path / "k15.txt"
    write_edgelist(complete_graph(15), f)
    args = ["pack", "--graph", str(f), "--terminals", "0", "1", "2", "--arity", "2", "--tau", "0",
            "--depth-uv", "1", "--depth-w", "1", "--k", "2"]
    code, out, _ = run(capsys, *args)
    data = json.loads(out)
    assert code == 0 and data["ok"] and data["size"] >= 2
    args[args.index("--depth-uv") + 1] = "4"
    code, out, _ = run(capsys, *args)
    assert code == 1 and json.loads(out)["stage"] == "growth"


def test_pack_needs_constants(tmp_path, capsys):
    f = tmp_path / "k5.txt"
    write_edgelist(complete_graph(5), f)
    code, _, err = run(capsys, "pack", "--graph", str(f), "--terminals", "0", "1", "2")
    assert code == 2 and "--arity" in err


def test_sweep_outputs(tmp_path, capsys):
    csv_path, js = tmp_path / "s.csv", tmp_path / "s.json"
    code, _, _ = run(capsys, "sweep", "--n", "200", "--c-list", "0.5,1,2", "--trials", "10", "--seed", "4",
                     "--csv", str(csv_path), "--json", str(js))
    assert code == 0
    assert len(csv_path.read_text().splitlines()) == 31
    _schemas.validate(json.loads(js.read_text()), "sweep_summary.schema.json")


def test_sweep_infeasible(capsys):
    code, _, err = run(capsys, "sweep", "--n", "10", "--c-list", "1", "--trials", "3", "--seed", "1")
    assert code == 2 and "n >= 16" in err


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--n", "100", "--k", "1", "--seed", "2", "--trials", "2")
    assert code == 0
    _schemas.validate(json.loads(out), "audit_report.schema.json")


def test_selftest_cli(capsys):
    code, out, _ = run(capsys, "selftest", "--size", "10")
    assert code == 0 and json.loads(out)["passed"] is True


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["--help"]) == 0
