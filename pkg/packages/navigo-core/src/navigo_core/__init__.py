"""
Navigo - vehicular Named Data Networking simulator.

This package provides the geo-area grid, road graph, NDN engine, Link Adaptation
Layer, forwarding strategies, a deterministic discrete-event simulator, the music
streaming workload and its evaluation metrics.
"""

__version__ = "0.1.0"

from navigo_core.core.models import Data, Interest, Name, Position

__all__ = ["Data", "Interest", "Name", "Position", "__version__"]
