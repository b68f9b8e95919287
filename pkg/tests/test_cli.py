import pytest
from click.testing import CliRunner

from ransim.cli import main, parse_seeds
from ransim.config import parse_config

TINY = """
n_slots = 150
warmup_slots = 50
n_ues = 20
requests_per_slot = 20
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY)
    return p


def test_parse_seeds():
    assert parse_seeds("0..4") == [0, 1, 2, 3, 4]
    assert parse_seeds("3, 1,7") == [3, 1, 7]


def test_validate_echoes_spec(runner, tiny):
    res = runner.invoke(main, ["validate", "--config", str(tiny)])
    assert res.exit_code == 0, res.output
    assert parse_config(res.output) == parse_config(TINY)


def test_validate_zero_dus(runner, tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[topology]\nn_du = 0\n")
    res = runner.invoke(main, ["validate", "--config", str(p)])
    assert res.exit_code != 0 and "InvalidSpec" in res.output


def test_validate_unknown_key(runner, tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[radio]\nfc_ghzz = 3.5\n")
    res = runner.invoke(main, ["validate", "--config", str(p)])
    assert res.exit_code != 0 and "UnknownKey" in res.output and "radio.fc_ghzz" in res.output


def test_run_writes_outputs(runner, tiny, tmp_path):
    out = tmp_path / "out"
    res = runner.invoke(main, ["run", "--config", str(tiny), "--out", str(out), "--scheduler", "PF", "--seed", "3"])
    assert res.exit_code == 0, res.output
    assert (out / "reports" / "ProportionalFair_ues20_seed3.csv").exists()
    assert (out / "deployments" / "ProportionalFair_ues20_seed3.csv").exists()
    assert (out / "plots" / "latency_cdf_ProportionalFair_ues20_seed3.csv").exists()


def test_run_needs_out(runner, tiny, monkeypatch):
    monkeypatch.delenv("RANSIM_OUT_DIR", raising=False)
    res = runner.invoke(main, ["run", "--config", str(tiny)])
    assert res.exit_code != 0


def test_out_dir_from_env(runner, tiny, tmp_path):
    out = tmp_path / "envout"
    res = runner.invoke(main, ["run", "--config", str(tiny)], env={"RANSIM_OUT_DIR": str(out)})
    assert res.exit_code == 0, res.output
    assert (out / "reports" / "OrchestRAN_ues20_seed0.csv").exists()


def _sweep(runner, cfg, out, schedulers="RR,PF,MMF,OrchestRAN", jobs=1):
    return runner.invoke(main, ["sweep", "--config", str(cfg), "--out", str(out), "--schedulers", schedulers,
                                "--seeds", "0..4", "--jobs", str(jobs)])


def test_sweep_product(runner, tiny, tmp_path):
    out = tmp_path / "sw"
    res = _sweep(runner, tiny, out)
    assert res.exit_code == 0, res.output
    assert len(list((out / "reports").glob("*.csv"))) == 20
    assert [p.name for p in out.glob("*.csv")] == ["comparison.csv"]
    text = (out / "comparison.csv").read_text()
    assert "n_ues = 20; seeds = 0,1,2,3,4" in text
    for s in ("RoundRobin", "ProportionalFair", "MaxMinFairness", "OrchestRAN"):
        assert f"\n{s},5," in text
    assert (out / "plots" / "se_vs_load.csv").exists()

    again = tmp_path / "sw2"
    assert _sweep(runner, tiny, again, jobs=2).exit_code == 0
    assert (again / "comparison.csv").read_bytes() == (out / "comparison.csv").read_bytes()


def test_sweep_isolates_bad_cell(runner, tiny, tmp_path):
    out = tmp_path / "sw"
    res = _sweep(runner, tiny, out, schedulers="RR,Lottery,PF")
    assert res.exit_code == 1
    assert "FAILED scheduler=Lottery" in res.output
    assert len(list((out / "reports").glob("*.csv"))) == 10
    assert (out / "comparison.csv").exists()


def test_sweep_load_list(runner, tiny, tmp_path):
    out = tmp_path / "sw"
    res = runner.invoke(main, ["sweep", "--config", str(tiny), "--out", str(out), "--schedulers", "RR,PF",
                               "--seeds", "0", "--loads", "10,20"])
    assert res.exit_code == 0, res.output
    text = (out / "comparison.csv").read_text()
    assert "n_ues = 10;" in text and "n_ues = 20;" in text
