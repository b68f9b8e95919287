import pytest
from hypothesis import given
from hypothesis import strategies as st

from ransim.catalog import default_catalog
from ransim.config import ScenarioSpec, Scheduler, parse_config, parse_scheduler, to_toml
from ransim.errors import InvalidSpec, InvalidValue, ParseError, UnknownKey
from ransim.traffic import Functionality


def test_empty_document_is_paper_scenario():
    spec = parse_config("")
    assert spec == ScenarioSpec()
    t = spec.topology
    assert (t.n_non_rt_ric, t.n_near_rt_ric, t.n_cu, t.n_du, t.n_ru) == (2, 5, 3, 8, 25)
    assert spec.radio.fc_ghz == 28.0 and spec.radio.bandwidth_hz == 4e8
    assert spec.requests_per_slot == 100


def test_negative_requests():
    with pytest.raises(InvalidValue) as ei:
        parse_config("requests_per_slot = -1")
    assert ei.value.path == "requests_per_slot"


@pytest.mark.parametrize("alias,expect", [("PF", Scheduler.PROPORTIONAL_FAIR), ("rr", Scheduler.ROUND_ROBIN),
                                          ("MMF", Scheduler.MAX_MIN_FAIRNESS), ("max_min", Scheduler.MAX_MIN_FAIRNESS),
                                          ("OrchestRAN", Scheduler.ORCHESTRAN), ("RoundRobin", Scheduler.ROUND_ROBIN)])
def test_scheduler_alias(alias, expect):
    assert parse_config(f'scheduler = "{alias}"').scheduler is expect
    assert parse_scheduler(alias) is expect


def test_unknown_scheduler():
    with pytest.raises(InvalidValue):
        parse_config('scheduler = "lottery"')


@pytest.mark.parametrize("doc,path", [("n_slotz = 3", "n_slotz"), ("[radio]\nfc = 3.0", "radio.fc"),
                                      ("[bogus]\nx = 1", "bogus"), ("[traffic.mix]\nVideo = 1.0", "traffic.mix.Video")])
def test_unknown_keys(doc, path):
    with pytest.raises(UnknownKey) as ei:
        parse_config(doc)
    assert ei.value.path == path


def test_parse_error_position():
    with pytest.raises(ParseError) as ei:
        parse_config("n_slots = 10\nseed = = 3\n")
    assert ei.value.line == 2 and ei.value.column is not None


@pytest.mark.parametrize("doc", ['n_slots = "ten"', "check_invariants = 1", "[topology]\nn_du = 2.5",
                                 "[sched]\ngamma = 1.0", "[radio]\nprb_count = 300"])
def test_invalid_values(doc):
    with pytest.raises(InvalidValue):
        parse_config(doc)


def test_validate_rules():
    with pytest.raises(InvalidSpec):
        parse_config("n_slots = 0\nwarmup_slots = 0").validate()
    with pytest.raises(InvalidSpec):
        parse_config("[topology]\nn_du = 0").validate()
    with pytest.raises(InvalidSpec):
        parse_config("n_slots = 10\nwarmup_slots = 10").validate()


def test_mix_and_catalog_sections():
    doc = """
[traffic.mix]
Scheduling = 3
Beamforming = 1

[[catalog]]
id = "tiny"
kind = "ReinforcementLearning"
functionalities = ["Scheduling"]
compute_cost = 1
inference_latency_ms = 0.1
allowed_hosts = ["Du"]
"""
    spec = parse_config(doc)
    assert spec.traffic.mix == {Functionality.SCHEDULING: 3.0, Functionality.BEAMFORMING: 1.0}
    assert [m.id for m in spec.catalog] == ["tiny"]


def test_round_trip_defaults():
    spec = ScenarioSpec()
    assert parse_config(to_toml(spec)) == spec


def test_round_trip_with_catalog_and_sweep():
    spec = parse_config('[sweep]\nschedulers = ["PF", "RR"]\nseeds = [0, 1]\nn_ues = [100, 200]')
    spec = spec.replace(catalog=default_catalog())
    assert parse_config(to_toml(spec)) == spec


@given(st.integers(1, 10_000), st.integers(0, 2**31), st.sampled_from(list(Scheduler)),
       st.floats(0.5, 100.0), st.integers(1, 500))
def test_round_trip_property(n_slots, seed, sched, fc, n_ues):
    spec = parse_config(f'n_slots = {n_slots}\nwarmup_slots = 0\nseed = {seed}\nscheduler = "{sched.value}"\n'
                        f"n_ues = {n_ues}\n[radio]\nfc_ghz = {fc!r}")
    assert parse_config(to_toml(spec)) == spec


def test_scenario_key_ignores_scheduler_and_seed():
    a = ScenarioSpec(seed=1, scheduler=Scheduler.ROUND_ROBIN)
    b = ScenarioSpec(seed=2, scheduler=Scheduler.ORCHESTRAN)
    assert a.scenario_key() == b.scenario_key()
    assert a.scenario_key() != ScenarioSpec(n_ues=100).scenario_key()
