from .engine import Simulation, run, substream
from .metrics import jain, packet_latency, weighted_mean_var, weighted_quantiles
from .report import ComparisonTable, SimulationReport, atomic_write, compare, load_curves, series_csv

__all__ = [
    "Simulation", "run", "substream", "jain", "packet_latency", "weighted_mean_var", "weighted_quantiles",
    "ComparisonTable", "SimulationReport", "atomic_write", "compare", "load_curves", "series_csv",
]
