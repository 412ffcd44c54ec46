import json
from pathlib import Path

import pytest

from mgale import cli


def write_config(tmp_path, raw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def body_of(path: Path) -> str:
    """Report content with the timestamped header line stripped."""
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# mgale-report")
    return "\n".join(lines[1:])


def test_suites_catalog():
    suites = cli.list_suites()
    assert len(suites) >= 15
    names = {name for name, _, _ in suites}
    assert "dyadic-approx" in names
    assert "detail-criteria-maximal" in names
    assert "rio" in names


def test_validate_rejects_bad_configs():
    with pytest.raises(cli.ConfigError):
        cli.validate_config({})
    with pytest.raises(cli.ConfigError):
        cli.validate_config({"kind": "nope"})
    with pytest.raises(cli.ConfigError):
        cli.validate_config({"kind": "audit", "output": {"format": "xml"}})
    with pytest.raises(cli.ConfigError):
        cli.validate_config({"kind": "audit", "resolution": 99})


def test_run_audit_writes_passing_json(tmp_path):
    raw = {
        "kind": "audit",
        "parameters": {"suite": "rio", "cases": 50},
        "output": {"path": str(tmp_path / "out"), "format": "json"},
        "seed": 7,
        "resolution": 8,
    }
    rc = cli.main(["run", str(write_config(tmp_path, raw))])
    assert rc == 0
    reports = json.loads(body_of(tmp_path / "out" / "audit_rio.json"))
    assert len(reports) == 50
    assert all(r["passed"] for r in reports)
    assert all(r["seed"] == 7 for r in reports)


def test_run_is_deterministic_given_seed(tmp_path):
    raw = {
        "kind": "audit",
        "parameters": {"suite": "doob", "cases": 30},
        "output": {"path": str(tmp_path / "a"), "format": "csv"},
        "seed": 13,
        "resolution": 7,
    }
    assert cli.main(["run", str(write_config(tmp_path, raw))]) == 0
    raw["output"]["path"] = str(tmp_path / "b")
    assert cli.main(["run", str(write_config(tmp_path, raw))]) == 0
    assert body_of(tmp_path / "a" / "audit_doob.csv") == body_of(tmp_path / "b" / "audit_doob.csv")


def test_missing_config_exits_2(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["run", str(bad)]) == 2


def test_davenport_subcommand(tmp_path):
    rc = cli.main([
        "davenport", "--lambda", "0.75", "--freqs", "pow:2:8",
        "--out", str(tmp_path), "--quadrature-check",
    ])
    assert rc == 0
    gram = body_of(tmp_path / "davenport_gram.csv")
    assert gram.splitlines()[0] == "i,j,freq_i,freq_j,entry"
    summary = body_of(tmp_path / "davenport_summary.csv")
    assert "quadrature_max_err" in summary
    err = float([l for l in summary.splitlines() if l.startswith("quadrature_max_err")][0].split(",")[1])
    assert err < 1e-6


def test_riesz_subcommands(tmp_path):
    rc = cli.main(["riesz", "coeff", "--lambdas", "pow:3:6", "--cs", "0.6", "--k", "1", "4", "--out", str(tmp_path)])
    assert rc == 0
    lines = body_of(tmp_path / "riesz_coeff.csv").splitlines()
    assert lines[0] == "k,re,im"
    assert float(lines[1].split(",")[1]) == pytest.approx(0.3)
    rc = cli.main(["riesz", "sample", "--lambdas", "pow:3:5", "--cs", "0.5", "--count", "64", "--out", str(tmp_path)])
    assert rc == 0
    assert len(body_of(tmp_path / "riesz_sample.csv").splitlines()) == 65


def test_symbolic_subcommand_and_failure_exit(tmp_path):
    rc = cli.main(["symbolic", "audit", "--depth", "6", "--alpha", "1.0", "--out", str(tmp_path / "ok")])
    assert rc == 0
    reports = json.loads(body_of(tmp_path / "ok" / "symbolic_audit.json"))
    assert all(r["passed"] for r in reports)
    # an impossible potential-variation budget must flip the exit code to 1
    raw = {
        "kind": "symbolic",
        "parameters": {
            "lambdas": [3**k for k in range(6)],
            "cs": [0.8] * 6,
            "depth": 6,
            "alpha": 1.0,
            "A": 1e-9,
        },
        "output": {"path": str(tmp_path / "fail"), "format": "json"},
        "seed": 0,
    }
    assert cli.main(["run", str(write_config(tmp_path, raw))]) == 1


def test_dilated_and_ergodic_kinds(tmp_path):
    raw = {
        "kind": "dilated",
        "parameters": {"generator": "sin", "coeffs": "geom:0.5", "freqs": "pow:2:63", "K": 64,
                        "checkpoints": [4, 8, 16, 32], "sample_size": 100},
        "output": {"path": str(tmp_path), "format": "csv"},
        "seed": 3,
    }
    assert cli.main(["run", str(write_config(tmp_path, raw))]) == 0
    osc = body_of(tmp_path / "dilated_oscillation.csv")
    assert osc.splitlines()[0] == "checkpoint,median_osc,q90_osc"
    assert "verdict=converging" in osc
    raw2 = {
        "kind": "ergodic",
        "parameters": {"f": "sin", "coeffs": "geom:0.5", "K": 64, "checkpoints": [4, 8, 16], "sample_size": 100},
        "output": {"path": str(tmp_path), "format": "csv"},
        "seed": 3,
    }
    assert cli.main(["run", str(write_config(tmp_path, raw2))]) == 0
    assert (tmp_path / "ergodic_decay.csv").exists()
