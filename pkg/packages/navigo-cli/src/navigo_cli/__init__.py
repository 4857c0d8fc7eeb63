"""
navigo-sim CLI - scenario runs, sweeps and grid generation.

This package provides the ``navigo-sim`` command for the navigo-core simulator.
"""

__version__ = "0.1.0"

from navigo_core.metrics.report import MetricsReport
from navigo_core.sim.scenario import Scenario

__all__ = ["MetricsReport", "Scenario", "__version__"]
