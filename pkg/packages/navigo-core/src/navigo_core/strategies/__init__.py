"""Forwarding strategies."""

from navigo_core.strategies.flood import FloodStrategy
from navigo_core.strategies.navigo import NavigoStrategy
from navigo_core.strategies.registry import (
    build_strategy,
    get_strategy,
    list_strategies,
    register_strategy,
)

__all__ = [
    "FloodStrategy",
    "NavigoStrategy",
    "build_strategy",
    "get_strategy",
    "list_strategies",
    "register_strategy",
]
