"""Slot-level simulator of an AI-orchestrated O-RAN deployment.

Submodules: ``topology``, ``channel``, ``traffic``, ``catalog``,
``orchestrator``, ``sched``, ``simcore`` and the ``cli`` entry point.
"""

from ._accel import backend
from .config import ScenarioSpec, Scheduler, load_config, parse_config
from .simcore import SimulationReport, compare, run

__version__ = "0.1.0"

__all__ = ["ScenarioSpec", "Scheduler", "SimulationReport", "backend", "compare", "load_config",
           "parse_config", "run"]
