import json

import pytest

from duelbench.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_appendix(capsys):
    code, out, _ = run(capsys, "solve", "--builtin", "appendix-example")
    rep = json.loads(out)
    assert code == 0
    assert "PoC <= 0.8334" in rep["summary"]
    assert rep["designated_xstar"]["guarantee"] == pytest.approx(0, abs=1e-12)
    assert "tolerances" in rep and rep["version"].startswith("v")


def test_solve_footnote_table(capsys):
    code, out, _ = run(capsys, "solve", "--builtin", "footnote-example")
    table = json.loads(out)["payoff_table"]
    i, j = table["labels"].index("<a,b,c>"), table["labels"].index("<b,c,a>")
    assert table["rows"][i][j] == pytest.approx(-0.30)


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "ranking",\n "p": [0.5, }')
    code, _, err = run(capsys, "solve", "--input", str(bad))
    assert code == 2
    assert "bad.json:2:" in err


def test_cap_refusal_exit(capsys, tmp_path):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"type": "ranking", "p": [0.1] * 10, "valuation": {"kind": "linear"}}))
    code, _, err = run(capsys, "solve", "--input", str(big))
    assert code == 3 and "cap" in err


def test_alpha_curve_csv(capsys):
    code, out, _ = run(capsys, "alpha-curve", "--k-max", "2")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "k,alpha_k" and len(lines) == 2
    assert float(lines[1].split(",")[1]) == pytest.approx(1 / 2.1, abs=1e-9)


def test_alpha_curve_usage(capsys):
    code, _, _ = run(capsys, "alpha-curve", "--k-max", "1")
    assert code == 2


def test_certify_reports_residual(capsys):
    code, out, _ = run(capsys, "certify-dual")
    rep = json.loads(out)
    assert rep["theta"] == pytest.approx(0.612275)
    assert code == (0 if rep["valid"] else 4)


def test_construct_compression(capsys):
    code, out, _ = run(capsys, "construct", "--epsilon", "0.01")
    rep = json.loads(out)
    assert code == 0 and rep["verified"]
    assert rep["poc_bound"] <= 0.01


def test_construct_bst_small_sample(capsys):
    code, out, _ = run(capsys, "construct", "--beta", "0.6", "--samples", "500", "--seed", "1")
    rep = json.loads(out)
    assert code == 0
    assert (rep["k"], rep["n"]) == (3, 24)
    assert "24" in rep["note"]


def test_construct_needs_parameter(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["construct"])
    assert exc.value.code == 2


def test_check_structure_deterministic(capsys, monkeypatch):
    monkeypatch.setenv("DUELBENCH_THREADS", "1")
    _, a, _ = run(capsys, "check-structure", "--count", "4", "--seed", "9")
    _, b, _ = run(capsys, "check-structure", "--count", "4", "--seed", "9")
    assert a == b
    assert all(row["fail"] == 0 for row in json.loads(a)["lemmas"].values())


def test_zero_one_csv_to_file(capsys, tmp_path):
    out = tmp_path / "z.csv"
    code, _, _ = run(capsys, "zero-one", "--builtin", "appendix-example", "--format", "csv", "--out", str(out))
    assert code == 0
    assert out.read_text().splitlines()[0] == "alpha,poc_alpha"


def test_poc_marginal_path(capsys):
    p = ",".join(["0.1"] * 10)
    code, out, _ = run(capsys, "poc", "--p", p)
    rep = json.loads(out)
    assert code == 0 and rep["path"] == "marginal"
    assert rep["poc"] >= 0.612 - 1e-6
