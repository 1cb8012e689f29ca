import io
import json

import pytest

from skewlyap import cli


def run(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    return code, out.getvalue()


def test_verify_paper_exit_zero():
    code, text = run("verify-paper")
    doc = json.loads(text)
    assert code == 0 and doc["schema"] == 1
    assert doc["passed"] >= 20 and doc["passed"] == doc["count"]


def test_constants_contains_c_bound():
    code, text = run("constants", "--R", "4", "--R1", "3", "--R2", "2", "--json")
    entry = next(e for e in json.loads(text)["ledger"] if e["name"] == "C < 11.97")
    assert code == 0 and entry["verdict"] == "pass"


def test_unknown_flag_is_usage_error(capsys):
    code, _ = run("estimate", "--bogus", "1")
    assert code == 64
    assert len(capsys.readouterr().err.strip().splitlines()) == 1


def test_invalid_value_is_usage_error():
    assert run("estimate", "--lambda", "2")[0] == 64
    assert run("constants", "--R", "1")[0] == 64


def test_provenance_header():
    code, text = run("estimate", "--N", "10", "--samples", "100", "--seed", "5")
    prov = json.loads(text)["provenance"]
    assert prov["seed"] == 5 and prov["command"] == "estimate" and prov["version"]
    assert prov["flags"]["samples"] == 100


def test_replay_from_header_is_bit_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# persistent settings\nsamples = 300\nN = 25\nlambda = 0.75\n")
    code, first = run("ldt", "--config", str(cfg), "--seed", "9")
    flags = json.loads(first)["provenance"]["flags"]
    argv = ["ldt", "--samples", str(flags["samples"]), "--N", str(flags["N"]),
            "--lambda", str(flags["lam"]), "--E", str(flags["E"]), "--seed", str(flags["seed"]),
            "--mode", flags["mode"]]
    code2, second = run(*argv)
    assert code == code2 == 0
    strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "provenance"}
    assert strip(first) == strip(second)
    assert flags["samples"] == 300 and flags["lam"] == 0.75


def test_explicit_flag_beats_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("samples=300\nN=25\n")
    _, text = run("estimate", "--config", str(cfg), "--N", "12")
    doc = json.loads(text)
    assert doc["N"] == 12 and doc["samples"] == 300


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run("estimate", "--config", str(cfg))[0] == 64


def test_energy_sweep_row_count():
    code, text = run("sweep", "--N", "10", "--samples", "64", "--E-count", "33", "--plot-data")
    rows = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert code == 0 and len(rows) == 33
    assert text.splitlines()[1] == "# E L_N stderr B_N upper95"


def test_empty_sweep_is_header_only():
    _, text = run("sweep", "--lambdas", "", "--plot-data")
    assert all(l.startswith("#") for l in text.splitlines())


def test_emit_plot_data_empty():
    assert cli.emit_plot_data(["E", "L_N"], []) == "# E L_N\n"


def test_coupling_sweep_csv():
    code, text = run("sweep", "--N", "10", "--samples", "64", "--lambdas", "0.5,1", "--csv")
    lines = text.splitlines()
    assert lines[1] == "lambda,L_N,lambda2,L_N_over_lambda2"
    assert len(lines) == 4


def test_certify_threshold_and_status_codes():
    code, text = run("certify", "--variant", "main3", "--threshold-inputs")
    doc = json.loads(text)
    assert code == 0 and doc["verdict"] == "pass"
    assert doc["label"] == "unconditional-given-inputs"


def test_certify_from_file(tmp_path):
    p = tmp_path / "in.json"
    p.write_text(json.dumps({"L_N0": "1/1000", "L_2N0": "7/8000", "B_N0": "0", "B_2N0": "0"}))
    code, text = run("certify", "--variant", "main3", "--input", str(p))
    assert code == 1 and json.loads(text)["first_failure"].startswith("(i)")


def test_certify_rejects_wrong_scale(tmp_path):
    p = tmp_path / "stats.json"
    p.write_text(json.dumps({"stats": {"N": 100, "L_N": 0.1, "stderr_L": 0.0, "L_2N": 0.1,
                                       "stderr_L2": 0.0, "B_N_measure": 0.0, "B_2N_measure": 0.0,
                                       "samples": 10}}))
    assert run("certify", "--variant", "main3", "--input", str(p))[0] == 64


def test_ldt_unresolved_is_exit_2():
    code, text = run("ldt", "--N", "30000", "--samples", "64", "--variant", "main3")
    assert json.loads(text)["initial_conditions"]["iii"]["verdict"] == "statistically-unresolvable"
    assert code == 2


def test_status_code():
    assert cli.status_code(["pass", "pass"]) == 0
    assert cli.status_code(["pass", "indeterminate"]) == 2
    assert cli.status_code(["indeterminate", "fail"]) == 1


def test_other_commands_run():
    assert run("dioph", "--kmax", "1000", "--divisor-max", "1000")[0] == 0
    assert run("weyl", "--K", "38", "--p1", "2", "--p2", "40", "--trials", "2")[0] == 0
    assert run("ap-fuzz", "--trials", "20", "--n-max", "10")[0] == 0
    assert run("verify-harmonic", "--grid", "4096")[0] == 0
