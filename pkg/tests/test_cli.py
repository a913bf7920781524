import json

import pytest

from projderiv.cli import main
from projderiv.experiments import (
    ConfigError,
    experiment_ids,
    load_config_file,
    resolve_config,
    run_experiment,
)


def test_list_contains_required_ids(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for required in ("ball_theorem_4_1", "cone_l2_theorem_4_3", "remez_continuity_theorem_4_8", "l1_cases"):
        assert required in out


def test_run_writes_report_and_passes(tmp_path, capsys):
    out = tmp_path / "det.json"
    code = main(["run", "--experiment", "determinants_lemma_4_5", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["experiment"] == "determinants_lemma_4_5"
    stdout = capsys.readouterr().out
    assert "PASS determinants_lemma_4_5" in stdout


def test_reports_identical_modulo_timestamp(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert main(
            ["run", "--experiment", "coefficient_bounds_prop_4_6", "--seed", "3", "--out", str(path)]
        ) == 0
    blobs = []
    for path in paths:
        record = json.loads(path.read_text())
        record.pop("timestamp")
        blobs.append(json.dumps(record, sort_keys=True))
    assert blobs[0] == blobs[1]


def test_unknown_experiment_is_config_error(capsys):
    assert main(["run", "--experiment", "nope"]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    assert main(["run", "--experiment", "l1_cases", "--config", str(cfg)]) == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("seed = 5\nN = 6\n# comment\n")
    config = resolve_config("l1_cases", load_config_file(str(cfg)), {"seed": "9"})
    assert config.seed == 9  # flags beat the file
    assert config.N == 6
    config2 = resolve_config("cone_lp_theorem_4_2")
    assert config2.p == 3.0 and config2.N == 6  # experiment defaults
    with pytest.raises(ConfigError):
        resolve_config("l1_cases", {"bogus_key": "1"})
    with pytest.raises(ConfigError):
        resolve_config("l1_cases", {"K": "2"})


def test_trace_csv_and_no_trace(capsys):
    assert main(["trace", "--experiment", "l1_cases"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0] == "level,radius,direction_index,quotient"
    assert len(lines) > 100
    assert main(["trace", "--experiment", "determinants_lemma_4_5"]) == 2


def test_every_experiment_registered_once():
    ids = experiment_ids()
    assert len(ids) == len(set(ids)) == 12


def test_run_experiment_rejects_unknown():
    cfg = resolve_config("l1_cases")
    cfg.experiment = "missing"
    with pytest.raises(ConfigError):
        run_experiment(cfg)
