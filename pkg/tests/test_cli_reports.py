import json
from math import log2, pi
from pathlib import Path

import pytest

from thrifty import config
from thrifty.cli_reports import main, resolve_output

DOCS = Path(__file__).resolve().parents[1] / "docs"


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


# -------------------------
# analytic
# -------------------------
def test_analytic_single_qubit_clifford(capsys):
    doc = _json(capsys, "analytic", "--ensemble", "clifford", "--n", "1", "--m2", "0", "--f", "1", "--r", "1,10,100")
    res = doc["results"]
    assert res["V"] == pytest.approx(0.5)
    assert res["Vstar"] == pytest.approx(0.5)
    assert res["VR"] == pytest.approx({"1": 0.5, "10": 0.5, "100": 0.5})
    assert res["method"] == "closed:clifford-fidelity"
    assert "v_triangle_window" in res["bounds"]
    assert doc["config"]["r"] == [1, 10, 100]


def test_analytic_fourdesign_from_dimension(capsys):
    res = _json(capsys, "analytic", "--ensemble", "fourdesign", "--d", "4")["results"]
    assert res["V"] == pytest.approx(1.0)
    assert res["Vstar"] == pytest.approx(2 / 7)


def test_analytic_target_family(capsys):
    res = _json(
        capsys,
        "analytic", "--ensemble", "simplet", "--k", "1", "--n", "1",
        "--state", "snk", "--state-k", "1", "--theta", str(pi / 4),
    )["results"]
    assert res["Vstar"] == pytest.approx(7 / 32)
    assert "t_window" in res["bounds"]


def test_analytic_imperfect_fidelity_reports_only_v(capsys):
    doc = _json(capsys, "analytic", "--ensemble", "clifford", "--n", "2", "--m2", "0", "--f", "0.5")
    assert doc["results"]["Vstar"] is None
    assert doc["results"]["VR"]["1"] == pytest.approx(doc["results"]["V"])
    assert "note" in doc["diagnostics"]


def test_analytic_dense_pair(capsys, tmp_path):
    pair = {
        "rho": {"real": [[1, 0], [0, 0]]},
        "observable": {"real": [[1, 0], [0, -1]]},
    }
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(pair))
    res = _json(capsys, "analytic", "--pair", str(path))["results"]
    # O = Z on |0>: (d+1 - 1, d * 1)
    assert res["V"] == pytest.approx(2.0)
    assert res["Vstar"] == pytest.approx(2.0)
    assert res["bounds"]["clifford_chain"]["holds"]


def test_analytic_dense_pair_rejects_a_non_state(capsys, tmp_path):
    pair = {
        "rho": {"real": [[1.5, 0], [0, -0.5]]},
        "observable": {"real": [[1, 0], [0, -1]]},
    }
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(pair))
    code, out, err = _run(capsys, "analytic", "--pair", str(path))
    assert code == 2
    assert out == ""
    assert "eigenvalue" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["analytic", "--ensemble", "clifford", "--n", "1"],
        ["analytic", "--n", "2", "--d", "8", "--m2", "0"],
        ["analytic", "--ensemble", "simplet", "--n", "2", "--k", "3", "--m2", "0"],
        ["analytic", "--n", "1", "--m2", "-1"],
        ["analytic", "--n", "1", "--m2", "0", "--format", "csv"],
        ["sre", "--family", "phased_w", "--n", "3", "--thetas", "0,1"],
        ["crossmoment", "--ensemble", "simplet", "--n", "1", "--k", "1"],
    ],
)
def test_bad_input_exits_with_status_2(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


# -------------------------
# sre
# -------------------------
def test_sre_examples(capsys):
    assert _json(capsys, "sre", "--family", "w", "--n", "10")["results"]["M2"] == pytest.approx(3.9658, abs=1e-4)
    res = _json(capsys, "sre", "--family", "snk", "--n", "20", "--k", "2", "--theta", str(pi / 4))["results"]
    assert res["M2"] == pytest.approx(0.830075, abs=1e-6)


def test_sre_direct(capsys):
    res = _json(capsys, "sre", "--family", "w_theta", "--n", "4", "--theta", "0.3", "--direct")["results"]
    assert res["abs_error"] < 1e-9


# -------------------------
# crossmoment
# -------------------------
def test_crossmoment_export(capsys, tmp_path):
    target = tmp_path / "omega.bin"
    doc = _json(capsys, "crossmoment", "--ensemble", "clifford", "--n", "1", "--export", str(target))
    assert target.exists()
    assert doc["diagnostics"]["export"] == str(target)
    res = doc["results"]
    assert res["exact"] and res["samples"] == 24
    assert res["max_deviation_from_closed_form"] < 1e-10
    assert not res["g_unique"]


def test_crossmoment_sampled_with_seed(capsys):
    res = _json(capsys, "crossmoment", "--ensemble", "simplet", "--n", "1", "--k", "1", "--samples", "40", "--seed", "3")[
        "results"
    ]
    assert not res["exact"]
    assert res["samples"] == 40


# -------------------------
# simulate
# -------------------------
def _run_config(tmp_path):
    run = {
        "n": 1,
        "ensemble": {"kind": "clifford", "n": 1},
        "R": 3,
        "num_circuits": 20,
        "seed": 11,
        "target": {"family": "basis", "n": 1},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(run))
    return path


def test_simulate_from_config(capsys, tmp_path):
    doc = _json(capsys, "simulate", "--config", str(_run_config(tmp_path)))
    res = doc["results"]
    assert res["stats"]["circuits"] == 20 and res["stats"]["reuses"] == 3
    assert res["expected_value"] == pytest.approx(0.5)
    assert res["analytic"]["Vstar"] == pytest.approx(0.5)
    assert doc["config"]["run"]["workers"] >= 1


def test_simulate_flags_and_csv(capsys, tmp_path):
    out = tmp_path / "sim.csv"
    code, _, err = _run(
        capsys,
        "simulate", "--ensemble", "simplet", "--n", "2", "--k", "1", "--R", "2",
        "--circuits", "10", "--seed", "1", "--target", "w", "--format", "csv", "-o", str(out),
    )
    assert code == 0, err
    header, row = out.read_text().splitlines()
    assert header.startswith("mean,vR_hat,v_hat,vstar_hat")
    assert header.endswith("expected_value,analytic_V,analytic_Vstar,analytic_VR")
    assert len(row.split(",")) == len(header.split(","))


def test_simulate_same_seed_same_numbers(capsys, tmp_path):
    path = str(_run_config(tmp_path))
    first = _json(capsys, "simulate", "--config", path)
    again = _json(capsys, "simulate", "--config", path)
    assert first["results"] == again["results"]


# -------------------------
# figure / verify / request / schema
# -------------------------
def test_figure_csv(capsys, tmp_path):
    out = tmp_path / "var_types.csv"
    code, _, err = _run(capsys, "figure", "var_types", "--n", "5", "--format", "csv", "--output", str(out))
    assert code == 0, err
    lines = out.read_text().splitlines()
    assert lines[0] == "family,n,M2,Vstar_Cl,Vstar_U51,Vstar_U101"
    assert len(lines) == 1 + 15
    # U[5,1] is undefined below n = 5
    assert lines[1].endswith(",,")


def test_randomized_figure_without_seed_fails(capsys):
    code, _, err = _run(capsys, "figure", "ratio_scatter", "--n", "2")
    assert code == 2
    assert "seed" in err


def test_verify_commutant(capsys):
    doc = _json(capsys, "verify", "commutant", "--cases", "2")
    assert doc["diagnostics"]["passed"] is True
    assert doc["results"]["suite"] == "commutant"
    assert all(check["passed"] for check in doc["results"]["checks"])


def test_request_document(capsys, tmp_path):
    request = {"subcommand": "sre", "params": {"family": "w", "n": 3}, "format": "json"}
    path = tmp_path / "request.json"
    path.write_text(json.dumps(request))
    doc = _json(capsys, "request", str(path))
    assert doc["results"]["M2"] == pytest.approx(log2(27 / 15))
    assert doc["config"]["family"] == "w"


def test_request_rejects_unknown_keys(capsys, tmp_path):
    path = tmp_path / "request.json"
    path.write_text(json.dumps({"subcommand": "sre", "params": {"family": "w", "n": 3, "colour": "red"}}))
    code, _, _ = _run(capsys, "request", str(path))
    assert code == 2


def test_schema_matches_published_copy(capsys):
    published = json.loads((DOCS / "report.schema.json").read_text())
    assert _json(capsys, "schema") == published


def test_bare_output_names_go_to_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path / "results"))
    assert resolve_output("out.json") == tmp_path / "results" / "out.json"
    assert resolve_output("sub/out.json") == Path("sub/out.json")
    code, _, err = _run(capsys, "sre", "--family", "w", "--n", "4", "-o", "sre.json")
    assert code == 0, err
    doc = json.loads((tmp_path / "results" / "sre.json").read_text())
    assert doc["version"]
