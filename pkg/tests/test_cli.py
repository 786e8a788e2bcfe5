from __future__ import annotations

import json

import pytest

from cli_cases import CASES, run_cli, run_twice
from perturbed.cli import main, parse_host


def test_parse_host():
    h = parse_host("random-min-degree:alpha=0.3", 40)
    assert (h.kind, h.n, h.alpha, h.cliques) == ("random-min-degree", 40, 0.3, None)
    assert parse_host("complete", 5).alpha == 1.0
    assert parse_host("disjoint-cliques:alpha=0.2,cliques=4", 40).cliques == 4


@pytest.mark.parametrize("name,argv,out", CASES, ids=[c[0] for c in CASES])
def test_outputs_byte_identical(name, argv, out, tmp_path):
    a, b = run_twice(argv, out, tmp_path)
    assert a and a == b


def test_seed_changes_output(tmp_path):
    argv = ["gen", "gnp", "--n", "30", "--p", "0.3", "--out", "{d}/g.txt"]
    run_cli(argv, tmp_path, seed="1")
    a = (tmp_path / "g.txt").read_bytes()
    run_cli(argv, tmp_path, seed="2")
    assert (tmp_path / "g.txt").read_bytes() != a


def test_embed_then_verify(tmp_path, capsys):
    e, u = tmp_path / "e.json", tmp_path / "u.txt"
    rc = main(["embed", "--target", "factor:K3", "--host", "complete-bipartite:alpha=0.34", "--n", "30",
               "--p", "0.6", "--seed", "1", "--out", str(e), "--union-out", str(u)])
    assert rc == 0
    doc = json.loads(e.read_text())
    assert doc["ok"] and sorted(doc["map"]) == list(range(30))
    assert main(["verify", "--target", "factor:K3", "--n", "30", "--host", str(u), "--map", str(e)]) == 0
    assert json.loads(capsys.readouterr().out)["valid"] is True
    # the bare host (no random rounds) cannot carry the copy
    h = tmp_path / "h.txt"
    assert main(["gen", "host", "--n", "30", "--host", "complete-bipartite:alpha=0.34", "--out", str(h)]) == 0
    assert main(["verify", "--target", "factor:K3", "--n", "30", "--host", str(h), "--map", str(e)]) == 1


def test_embed_failure_exit_code(tmp_path, capsys):
    rc = main(["embed", "--target", "factor:K3", "--host", "complete-bipartite:alpha=0.34", "--n", "30", "--p", "0"])
    assert rc == 2
    io = capsys.readouterr()
    assert json.loads(io.out)["stage"] == "round1" and "round1" in io.err


def test_decompose_and_verify(tmp_path, capsys):
    d = tmp_path / "d.json"
    assert main(["decompose", "--target", "factor:K5", "--n", "15", "--epsilon-op", "0.4", "--out", str(d)]) == 0
    assert main(["verify", "--decomposition", str(d)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_density_and_janson(capsys):
    assert main(["density", "--graph", "K5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["m1"] == "5/2"
    assert main(["janson", "--p", "0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mu"] == pytest.approx(0.5) and doc["delta"] == pytest.approx(12 / 32)


def test_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    svg = tmp_path / "s.svg"
    assert main(["sweep", "--n", "12", "--alpha", "1", "--host", "complete", "--target", "ham-power:k=2",
                 "--p", "1.0", "--trials", "3", "--seed", "0", "--csv", str(out), "--svg", str(svg)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and svg.read_text().lstrip().startswith("<")


def test_bad_input_exit_codes(tmp_path, capsys):
    assert main(["embed", "--target", "factor:K5", "--host", "complete", "--n", "12", "--p", "0.5"]) == 2
    assert main(["verify", "--target", "K3"]) == 2
    assert main(["density", "--graph", str(tmp_path / "missing.txt")]) == 2
    capsys.readouterr()
