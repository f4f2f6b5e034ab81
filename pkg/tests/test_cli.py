import json

import pytest

from realmod import report as R
from realmod.cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from realmod.suites import RunConfig, replay_rows


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    for s in ("ehp", "s5", "k2-smoke", "scott"):
        assert s in out


def test_run_is_byte_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--suite", "k2-smoke", "--backend", "k2", "--report", str(a)]) == EXIT_OK
    assert main(["run", "--suite", "k2-smoke", "--backend", "k2", "--report", str(b),
                 "--format", "json"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["schema"] == R.SCHEMA
    for it in rep["items"]:
        assert {"suite", "item", "anchor", "verdict", "fuel", "cutoff", "probes"} <= set(it)


def test_replay_and_wrong_seed(tmp_path, capsys):
    p = tmp_path / "s5.json"
    assert main(["run", "--suite", "s5", "--seed", "4", "--report", str(p)]) == EXIT_OK
    assert main(["replay", str(p), "--seed", "4"]) == EXIT_OK
    assert main(["replay", str(p), "--seed", "5"]) == EXIT_MISMATCH
    assert "seed mismatch" in capsys.readouterr().err


def test_tampered_counterexample_is_caught(tmp_path):
    p = tmp_path / "s5.json"
    assert main(["run", "--suite", "s5", "--report", str(p)]) == EXIT_OK
    rep = json.loads(p.read_text())
    item = next(i for i in rep["items"] if i["item"] == "refuter")
    item["detail"]["rows"][0]["trace"] = "made up"
    assert len(replay_rows(item, RunConfig(**rep["config"]), limit=3)) == 1
    p.write_text(R.to_json(rep))
    assert main(["replay", str(p)]) == EXIT_MISMATCH


def test_env_fuel_reaches_report(tmp_path, monkeypatch):
    monkeypatch.setenv("REALMOD_FUEL", "30000")
    p = tmp_path / "k.json"
    main(["run", "--suite", "k2-smoke", "--report", str(p)])
    assert {i["fuel"] for i in json.loads(p.read_text())["items"]} == {30000}


def test_bad_report(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"schema": "other"}')
    assert main(["replay", str(p)]) == EXIT_USAGE


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit):
        main(["run", "--suite", "nope"])
