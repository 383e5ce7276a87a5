"""Simulation of asynchronous wake-up protocols, advising schemes and spanners."""
from .asim import DelayPolicy, RunMetrics, Simulator, run
from .netgraph import Knowledge, Network, WakeSchedule

__all__ = ["DelayPolicy", "Knowledge", "Network", "RunMetrics", "Simulator", "WakeSchedule", "run"]
__version__ = "0.1.0"
