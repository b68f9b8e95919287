"""Scenario configuration: dataclasses with defaults, TOML parsing and echo.

Every section is a frozen dataclass. ``parse_config`` rejects unknown keys
and out-of-domain values with the offending field path, and
``to_toml(parse_config(doc))`` parses back to an equal spec.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import tomli_w

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .catalog import Catalog, ModelDescriptor, ModelKind
from .channel import RadioConfig
from .errors import InvalidSpec, InvalidValue, ParseError, UnknownKey
from .topology import NodeKind
from .traffic import DEFAULT_MIX, Functionality


class Scheduler(str, Enum):
    ROUND_ROBIN = "RoundRobin"
    PROPORTIONAL_FAIR = "ProportionalFair"
    MAX_MIN_FAIRNESS = "MaxMinFairness"
    ORCHESTRAN = "OrchestRAN"


SCHEDULER_ALIASES = {
    "rr": Scheduler.ROUND_ROBIN,
    "roundrobin": Scheduler.ROUND_ROBIN,
    "round_robin": Scheduler.ROUND_ROBIN,
    "pf": Scheduler.PROPORTIONAL_FAIR,
    "proportionalfair": Scheduler.PROPORTIONAL_FAIR,
    "proportional_fair": Scheduler.PROPORTIONAL_FAIR,
    "mmf": Scheduler.MAX_MIN_FAIRNESS,
    "maxmin": Scheduler.MAX_MIN_FAIRNESS,
    "max_min": Scheduler.MAX_MIN_FAIRNESS,
    "maxminfairness": Scheduler.MAX_MIN_FAIRNESS,
    "max_min_fairness": Scheduler.MAX_MIN_FAIRNESS,
    "orchestran": Scheduler.ORCHESTRAN,
    "rl": Scheduler.ORCHESTRAN,
    "adaptive": Scheduler.ORCHESTRAN,
}


def parse_scheduler(name, path="scheduler") -> Scheduler:
    if isinstance(name, Scheduler):
        return name
    if isinstance(name, str):
        hit = SCHEDULER_ALIASES.get(name.strip().lower())
        if hit is not None:
            return hit
    raise InvalidValue(path, f"unknown scheduler {name!r}; known: {sorted(s.value for s in Scheduler)}")


# field checks -----------------------------------------------------------

def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _unit(v):
    return 0.0 <= v <= 1.0


def _f(default, check=None, why=""):
    if isinstance(default, (dict, list, tuple)) and not isinstance(default, tuple):
        return field(default_factory=lambda: type(default)(default), metadata={"check": check, "why": why})
    return field(default=default, metadata={"check": check, "why": why})


@dataclass(frozen=True)
class TopologyConfig:
    n_non_rt_ric: int = _f(2, _nonneg, ">= 0")
    n_near_rt_ric: int = _f(5, _nonneg, ">= 0")
    n_cu: int = _f(3, _nonneg, ">= 0")
    n_du: int = _f(8, _nonneg, ">= 0")
    n_ru: int = _f(25, _nonneg, ">= 0")
    area_side_m: float = _f(1000.0, _positive, "> 0")
    ru_height_m: float = _f(25.0, _positive, "> 0")
    latency_du_ru_ms: float = _f(0.1, _positive, "> 0")
    latency_cu_du_ms: float = _f(1.0, _positive, "> 0")
    latency_near_rt_cu_ms: float = _f(2.0, _positive, "> 0")
    latency_non_rt_near_rt_ms: float = _f(20.0, _positive, "> 0")
    capacity_ru: float = _f(2.0, _nonneg, ">= 0")
    capacity_du: float = _f(8.0, _nonneg, ">= 0")
    capacity_cu: float = _f(16.0, _nonneg, ">= 0")
    capacity_near_rt_ric: float = _f(32.0, _nonneg, ">= 0")
    capacity_non_rt_ric: float = _f(64.0, _nonneg, ">= 0")


@dataclass(frozen=True)
class TrafficConfig:
    mean_rate_bps: float = _f(20e6, _nonneg, ">= 0")
    packet_bits: int = _f(12_000, _positive, "> 0")
    rate_spread: float = _f(0.0, _unit, "in [0, 1]")
    location_constraint_prob: float = _f(0.2, _unit, "in [0, 1]")
    mix: dict = _f({f: p for f, p in DEFAULT_MIX.items()})


@dataclass(frozen=True)
class OrchestratorConfig:
    epoch_slots: int = _f(100, _positive, "> 0")
    allow_cu_host: bool = _f(False)


@dataclass(frozen=True)
class SchedConfig:
    pf_window_slots: float = _f(100.0, lambda v: v >= 1, ">= 1")
    epsilon_start: float = _f(0.3, _unit, "in [0, 1]")
    epsilon_end: float = _f(0.01, _unit, "in [0, 1]")
    epsilon_decay_slots: int = _f(5000, _nonneg, ">= 0")
    alpha: float = _f(0.1, lambda v: 0 < v <= 1, "in (0, 1]")
    gamma: float = _f(0.9, lambda v: 0 <= v < 1, "in [0, 1)")
    w_se: float = _f(1.0, _nonneg, ">= 0")
    w_lat: float = _f(1.0, _nonneg, ">= 0")
    beam_gain_db: float = _f(3.0, _nonneg, ">= 0")
    maxmin_blend_fraction: float = _f(0.5, _unit, "in [0, 1]")


@dataclass(frozen=True)
class SweepConfig:
    schedulers: tuple = _f(())
    seeds: tuple = _f(())
    n_ues: tuple = _f(())


_RADIO_CHECKS = {
    "fc_ghz": (lambda v: 0.5 <= v <= 100, "in [0.5, 100]"),
    "bandwidth_hz": (_positive, "> 0"),
    "prb_count": (_positive, "> 0"),
    "subcarrier_spacing_hz": (_positive, "> 0"),
    "se_cap": (_positive, "> 0"),
    "ue_height_m": (lambda v: 1.0 < v <= 13.0, "in (1, 13]"),
    "min_d2d_m": (_nonneg, ">= 0"),
    "shadow_sigma_los_db": (_nonneg, ">= 0"),
    "shadow_sigma_nlos_db": (_nonneg, ">= 0"),
}


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = _f(0, _nonneg, ">= 0")
    scheduler: Scheduler = Scheduler.ORCHESTRAN
    n_slots: int = _f(7000, _nonneg, ">= 0")
    warmup_slots: int = _f(5000, _nonneg, ">= 0")
    slot_duration_ms: float = _f(1.0, _positive, "> 0")
    requests_per_slot: int = _f(100, _nonneg, ">= 0")
    n_ues: int = _f(200, _nonneg, ">= 0")
    check_invariants: bool = _f(True)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    sched: SchedConfig = field(default_factory=SchedConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    catalog: Catalog | None = None

    def validate(self) -> "ScenarioSpec":
        """Whole-scenario checks beyond per-field domains; raises InvalidSpec."""
        if self.n_slots < 1:
            raise InvalidSpec(f"n_slots must be >= 1, got {self.n_slots}")
        if self.warmup_slots >= self.n_slots:
            raise InvalidSpec(f"warmup_slots ({self.warmup_slots}) must be < n_slots ({self.n_slots})")
        for name in ("n_non_rt_ric", "n_near_rt_ric", "n_cu", "n_du", "n_ru"):
            if getattr(self.topology, name) < 1:
                raise InvalidSpec(f"topology.{name} must be >= 1, got {getattr(self.topology, name)}")
        if self.radio.ue_height_m >= self.topology.ru_height_m:
            raise InvalidSpec("UE height must be below RU height")
        return self

    def replace(self, **changes) -> "ScenarioSpec":
        return dataclasses.replace(self, **changes)

    def scenario_key(self) -> "ScenarioSpec":
        """The spec with run-identity fields blanked, for comparing runs."""
        return dataclasses.replace(self, scheduler=Scheduler.ORCHESTRAN, seed=0, sweep=SweepConfig())


# parsing ----------------------------------------------------------------

def _coerce(value, default, path):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise InvalidValue(path, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidValue(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidValue(path, f"expected a number, got {value!r}")
        return float(value)
    return value


def _section(cls, data: dict, path: str, checks=None):
    if not isinstance(data, dict):
        raise InvalidValue(path, "expected a table")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        full = f"{path}.{key}" if path else key
        if key not in names:
            raise UnknownKey(full)
        f = names[key]
        default = f.default if f.default is not dataclasses.MISSING else None
        v = _coerce(value, default, full)
        check, why = f.metadata.get("check"), f.metadata.get("why", "")
        if checks and key in checks:
            check, why = checks[key]
        if check is not None and not check(v):
            raise InvalidValue(full, f"must be {why}, got {value!r}")
        kwargs[key] = v
    return kwargs


def _enum(enum_cls, value, path):
    try:
        return enum_cls(value)
    except ValueError:
        raise InvalidValue(path, f"expected one of {[e.value for e in enum_cls]}, got {value!r}") from None


def _parse_mix(data, path):
    if not isinstance(data, dict) or not data:
        raise InvalidValue(path, "expected a non-empty table of functionality weights")
    out = {}
    for key, value in data.items():
        try:
            func = Functionality(key)
        except ValueError:
            raise UnknownKey(f"{path}.{key}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
            raise InvalidValue(f"{path}.{key}", f"weight must be a number >= 0, got {value!r}")
        out[func] = float(value)
    if sum(out.values()) <= 0:
        raise InvalidValue(path, "weights must not all be zero")
    return out


_MODEL_KEYS = ("id", "kind", "functionalities", "compute_cost", "inference_latency_ms", "allowed_hosts")


def _parse_catalog(items, path="catalog") -> Catalog:
    if not isinstance(items, list):
        raise InvalidValue(path, "expected an array of tables")
    models = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(item, dict):
            raise InvalidValue(p, "expected a table")
        for key in item:
            if key not in _MODEL_KEYS:
                raise UnknownKey(f"{p}.{key}")
        missing = [k for k in _MODEL_KEYS if k not in item]
        if missing:
            raise InvalidValue(p, f"missing keys {missing}")
        try:
            models.append(ModelDescriptor(
                id=str(item["id"]),
                kind=_enum(ModelKind, item["kind"], f"{p}.kind"),
                functionalities=frozenset(_enum(Functionality, v, f"{p}.functionalities") for v in item["functionalities"]),
                compute_cost=float(item["compute_cost"]),
                inference_latency_ms=float(item["inference_latency_ms"]),
                allowed_hosts=frozenset(_enum(NodeKind, v, f"{p}.allowed_hosts") for v in item["allowed_hosts"]),
            ))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidValue):
                raise
            raise InvalidValue(p, str(exc)) from None
    try:
        return Catalog(tuple(models))
    except ValueError as exc:
        raise InvalidValue(path, str(exc)) from None


def _parse_sweep(data, path="sweep") -> SweepConfig:
    if not isinstance(data, dict):
        raise InvalidValue(path, "expected a table")
    kwargs = {}
    for key, value in data.items():
        full = f"{path}.{key}"
        if key not in ("schedulers", "seeds", "n_ues"):
            raise UnknownKey(full)
        if not isinstance(value, list):
            raise InvalidValue(full, "expected an array")
        if key == "schedulers":
            kwargs[key] = tuple(parse_scheduler(v, full).value for v in value)
        else:
            if any(isinstance(v, bool) or not isinstance(v, int) or v < 0 for v in value):
                raise InvalidValue(full, "expected non-negative integers")
            kwargs[key] = tuple(value)
    return SweepConfig(**kwargs)


_SECTIONS = {
    "topology": TopologyConfig,
    "radio": RadioConfig,
    "traffic": TrafficConfig,
    "orchestrator": OrchestratorConfig,
    "sched": SchedConfig,
}


def spec_from_dict(doc: dict) -> ScenarioSpec:
    doc = dict(doc)
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        if name not in doc:
            continue
        data = dict(doc.pop(name))
        extra = {}
        if cls is TrafficConfig and "mix" in data:
            extra["mix"] = _parse_mix(data.pop("mix"), "traffic.mix")
        sec = _section(cls, data, name, _RADIO_CHECKS if cls is RadioConfig else None)
        try:
            kwargs[name] = cls(**sec, **extra)
        except InvalidSpec as exc:
            raise InvalidValue(name, str(exc)) from None
    if "sweep" in doc:
        kwargs["sweep"] = _parse_sweep(doc.pop("sweep"))
    if "catalog" in doc:
        kwargs["catalog"] = _parse_catalog(doc.pop("catalog"))
    if "scheduler" in doc:
        kwargs["scheduler"] = parse_scheduler(doc.pop("scheduler"))
    kwargs.update(_section(ScenarioSpec, doc, ""))
    return ScenarioSpec(**kwargs)


_POS = re.compile(r"line (\d+), column (\d+)")


def parse_config(document: str | bytes | None) -> ScenarioSpec:
    """Parse a TOML scenario document; absent keys take their defaults."""
    if document is None:
        document = ""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = tomli.loads(document)
    except tomli.TOMLDecodeError as exc:
        m = _POS.search(str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ParseError(str(exc).split(" (at")[0], line, col) from None
    return spec_from_dict(doc)


def load_config(path) -> ScenarioSpec:
    with open(path, "rb") as fh:
        return parse_config(fh.read())


# echo -------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {_plain(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    return obj


def spec_to_dict(spec: ScenarioSpec) -> dict:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(spec):
        value = getattr(spec, f.name)
        if f.name == "catalog":
            if value is not None:
                out["catalog"] = [
                    {k: _plain(getattr(m, k)) for k in _MODEL_KEYS} for m in value
                ]
        elif dataclasses.is_dataclass(value):
            out[f.name] = {g.name: _plain(getattr(value, g.name)) for g in dataclasses.fields(value)}
        else:
            out[f.name] = _plain(value)
    return out


def to_toml(spec: ScenarioSpec) -> str:
    return tomli_w.dumps(spec_to_dict(spec))
