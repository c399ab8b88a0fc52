import csv
import json

import numpy as np
import pytest

from menusize import io
from menusize.cli import run
from menusize.core import Menu
from menusize.dist import JointDist, ProductDist, SingleDist
from menusize.experiments import uniform01
from menusize.srev import build_srev_auction
from corpus import random_joint, random_single, wide_product


def test_round_trips(tmp_path):
    rng = np.random.default_rng(1)
    M = Menu.from_arrays(rng.random((5, 3)), rng.random(5) * 7)
    io.write_json(tmp_path / "m.json", io.menu_to_dict(M))
    assert io.load_menu(tmp_path / "m.json") == M
    P = ProductDist(tuple(random_single(rng) for _ in range(3)))
    io.write_json(tmp_path / "p.json", io.dist_to_dict(P))
    assert io.load_dist(tmp_path / "p.json") == P
    J = random_joint(rng, 2)
    io.write_json(tmp_path / "j.json", io.dist_to_dict(J))
    assert io.load_dist(tmp_path / "j.json") == J
    C, _ = build_srev_auction(wide_product(rng, 20), 0.5)
    io.write_json(tmp_path / "c.json", io.compound_to_dict(C))
    C2 = io.load_any_menu(tmp_path / "c.json")
    assert C2.n == C.n and all(a == b for a, b in zip(C.subauctions, C2.subauctions))


def test_zero_entry_optional_on_input():
    M = io.menu_from_dict({"n": 1, "entries": [{"alloc": [1], "price": 2}]})
    assert len(M) == 2 and M.entries[0].is_zero()


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["myerson", "--input", str(bad)]) == 1
    bad.write_text(json.dumps({"items": [{"values": [1, 0], "probs": [0.5, 0.5]}]}))
    assert run(["myerson", "--input", str(bad)]) == 1
    assert "error" in capsys.readouterr().err


def _write(tmp_path, name, obj):
    path = tmp_path / name
    io.write_json(path, obj)
    return str(path)


def test_cli_myerson(tmp_path, capsys):
    item = _write(tmp_path, "item.json", {"values": [0, 1], "probs": [0.5, 0.5]})
    assert run(["myerson", "--input", item]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["items"][0] == {"item": 0, "price": 1.0, "sell_prob": 0.5, "revenue": 0.5}


def test_cli_oracle_simplify_eval_cc(tmp_path, capsys):
    prod = _write(tmp_path, "prod.json", io.dist_to_dict(uniform01(2)))
    menu = str(tmp_path / "opt.json")
    assert run(["oracle", "--input", prod, "--output", menu]) == 0
    assert json.loads(capsys.readouterr().out)["objective"] == pytest.approx(1.0)
    out = str(tmp_path / "small.json")
    rep_path = str(tmp_path / "diag.json")
    assert run(["simplify", "--epsilon", "0.5", "--input", prod, "--output", out, "--report", rep_path]) == 0
    rep = json.loads(capsys.readouterr().out)
    for key in ("eps_tilde", "H", "E", "scale", "grid", "stage_revenue", "entry_counts"):
        assert key in rep
    assert {"X", "P", "chi", "psi"} <= set(rep["grid"])
    assert rep == json.loads(open(rep_path).read())
    assert run(["eval", "--menu", out, "--input", prod]) == 0
    assert json.loads(capsys.readouterr().out)["revenue"] >= 0.5
    assert run(["cc", "--menu", out]) == 0
    cc = json.loads(capsys.readouterr().out)
    assert cc["bits"] == max(0, (cc["menu_size"] - 1).bit_length())


def test_cli_simplify_joint_needs_H(tmp_path, capsys):
    joint = _write(tmp_path, "j.json", io.dist_to_dict(JointDist([[1.0, 2.0], [3.0, 0.5]], [0.5, 0.5])))
    assert run(["simplify", "--epsilon", "0.5", "--input", joint]) == 1
    assert run(["simplify", "--epsilon", "0.5", "--input", joint, "--H", "5"]) == 0


def test_cli_srev_build_deterministic(tmp_path, capsys):
    prod = _write(tmp_path, "p.json", io.dist_to_dict(wide_product(np.random.default_rng(2), 20)))
    args = ["srev-build", "--epsilon", "0.5", "--input", prod, "--output", str(tmp_path / "c.json")]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first
    rep = json.loads(first)
    assert {"buckets", "count_choices", "num_bundles", "revenue"} <= set(rep)
    assert run(["eval", "--menu", str(tmp_path / "c.json"), "--input", prod, "--mode", "exact"]) == 0
    assert json.loads(capsys.readouterr().out)["revenue"] == pytest.approx(rep["revenue"])


def test_cli_lb_demo(tmp_path, capsys):
    curve = tmp_path / "curve.csv"
    gaps = tmp_path / "gaps.csv"
    assert run(["lb-demo", "--n", "16", "--output", str(curve), "--gap-output", str(gaps)]) == 0
    rows = {float(r["price"]): float(r["revenue"]) for r in csv.DictReader(open(curve))}
    assert rows[8.0] == pytest.approx(8 * (1 - (1 - 12870 / 65536) / 2))
    g = list(csv.DictReader(open(gaps)))
    assert [int(r["n"]) for r in g] == [16, 64, 256]
    capsys.readouterr()
    assert run(["lb-demo", "--n", "4"]) == 0
    assert capsys.readouterr().out.startswith("price,revenue\n")


def test_cli_protocol_sim(tmp_path, capsys):
    menu = _write(tmp_path, "m.json", io.menu_to_dict(Menu([((0.5,), 1.0), ((1.0,), 3.0)])))
    assert run(["protocol-sim", "--menu", menu, "--value", "3", "--trials", "20000", "--seed", "4"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["alloc"] - 0.5) <= 4 * rep["alloc_sigma"]


def test_failed_run_leaves_no_output(tmp_path):
    prod = _write(tmp_path, "p.json", io.dist_to_dict(uniform01(12)))
    out = tmp_path / "never.json"
    assert run(["oracle", "--input", prod, "--output", str(out), "--lp-guard", "100"]) == 1
    assert not out.exists()
