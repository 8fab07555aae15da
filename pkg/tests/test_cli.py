import json

import pytest

from racketchaos.cli import main
from racketchaos.errors import ConfigError
from racketchaos.io import read_csv, write_csv, write_json
from racketchaos.pipeline import ExperimentConfig, all_words

# fixed C keeps each command quick; the estimate is covered elsewhere
FAST = {"overrides": {"C": 28.5}, "codes": ["0", "01"]}


def _cfg(tmp_path, extra=None):
    raw = dict(FAST)
    raw.update(extra or {})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(raw))
    return str(p)


def test_constants_command(tmp_path):
    out = tmp_path / "out"
    assert main(["constants", "--config", _cfg(tmp_path), "--out", str(out)]) == 0
    rep = json.loads((out / "constants.json").read_text())
    assert rep["constants"]["Q"] == 14 and rep["constants"]["m"] == 196
    assert rep["provenance"]["C"] == "override"
    assert all(v > 0 for v in rep["margins"].values())


def test_orbit_command(tmp_path):
    out = tmp_path / "out"
    assert main(["orbit", "--config", _cfg(tmp_path), "--out", str(out)]) == 0
    rows = read_csv(out / "orbit.csv")
    assert len(rows) == 21 and set(rows[0]) == {"n", "t", "v", "E", "gap"}


def test_scaffold_command(tmp_path):
    out = tmp_path / "out"
    assert main(["scaffold", "--config", _cfg(tmp_path), "--out", str(out)]) == 0
    rows = read_csv(out / "scaffold.csv")
    assert {r["kind"] for r in rows} == {"sub", "super", "envelope_lower", "envelope_upper"}
    assert len(read_csv(out / "alpha_beta.csv")) == 101
    assert "n_tilde" in json.loads((out / "scaffold.json").read_text())["super"]


def test_chaos_command_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["chaos", "--config", _cfg(tmp_path), "--out", str(out), "--seed", "3"]) == 0
        outs.append(out)
    for name in ("chaos_01.json", "config_01.csv", "kset.csv", "chaos_summary.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    rep = json.loads((outs[0] / "chaos_01.json").read_text())
    assert rep["shift_verified"] and rep["code_out"] == "10" and rep["separation_margin"] > 0
    header = list(read_csv(outs[0] / "config_01.csv")[0])
    assert header == ["n", "t", "gap", "residual_n", "lower", "upper"]


def test_codes_flag(tmp_path):
    out = tmp_path / "out"
    assert main(["chaos", "--config", _cfg(tmp_path), "--out", str(out), "--codes", "1"]) == 0
    assert (out / "chaos_1.json").exists() and not (out / "chaos_01.json").exists()


def test_hypothesis_violation_exit_code(tmp_path):
    out = tmp_path / "out"
    cfg = _cfg(tmp_path, {"forcing": {"g": 1.0, "cos_coeffs": [0.01]}})
    assert main(["constants", "--config", cfg, "--out", str(out)]) == 2
    err = json.loads((out / "error.json").read_text())
    assert err["kind"] == "HypothesisViolated" and err["module"] == "racket"


def test_bad_config_exit_code(tmp_path):
    assert main(["constants", "--config", _cfg(tmp_path, {"colour": 1})]) == 2


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"codes": ["012"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"overrides": {"Z": 1}})
    cfg = ExperimentConfig.from_dict({"forcing": {"g": 2.0}, "seed": 5})
    assert cfg.g == 2.0 and cfg.seed == 5
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_all_words():
    w = all_words(4)
    assert len(w) == 30 and len(set(w)) == 30 and w[0] == "0" and w[-1] == "1111"


def test_io_round_trip(tmp_path):
    write_csv(tmp_path / "a.csv", ["x", "y"], [(0.1, None), (1, "s")])
    rows = read_csv(tmp_path / "a.csv")
    assert rows == [{"x": "0.1", "y": ""}, {"x": "1", "y": "s"}]
    write_json(tmp_path / "a.json", {"b": float("inf"), "a": [1.5]})
    assert json.loads((tmp_path / "a.json").read_text()) == {"a": [1.5], "b": "inf"}


def test_selftest_command(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["selftest", "--config", _cfg(tmp_path), "--out", str(out)]) == 0
    checks = json.loads((out / "selftest.json").read_text())
    assert len(checks) == 7 and all(c["pass"] for c in checks)
    assert "PASS  symplectic" in capsys.readouterr().out
