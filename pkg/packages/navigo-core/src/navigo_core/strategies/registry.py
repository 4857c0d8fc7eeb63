"""Strategy registry for selecting a forwarding strategy by name."""

import numpy as np

from navigo_core.core.config_service import StrategyConfig
from navigo_core.core.errors import ConfigError
from navigo_core.core.interfaces import EventScheduler, ForwardingStrategy
from navigo_core.ndn.tables import Fib
from navigo_core.strategies.flood import FloodStrategy
from navigo_core.strategies.navigo import NavigoStrategy

# Registry of available strategies, keyed by their config name
STRATEGIES: dict[str, type[ForwardingStrategy]] = {
    NavigoStrategy.name: NavigoStrategy,
    FloodStrategy.name: FloodStrategy,
}


def get_strategy(name: str) -> type[ForwardingStrategy]:
    """
    Look up a strategy class.

    Args:
        name: Registered strategy name, e.g. "navigo" or "flood"

    Returns:
        The strategy class

    Raises:
        ConfigError: If no strategy is registered under ``name``
    """
    try:
        return STRATEGIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown strategy {name!r} (available: {', '.join(list_strategies())})",
            key="strategy_name",
        ) from None


def build_strategy(
    name: str,
    fib: Fib,
    scheduler: EventScheduler,
    rng: np.random.Generator,
    config: StrategyConfig,
) -> ForwardingStrategy:
    """Instantiate the strategy registered under ``name`` for one node."""
    return get_strategy(name)(fib, scheduler, rng, config)


def register_strategy(strategy: type[ForwardingStrategy]) -> None:
    """
    Register a new strategy class under its ``name`` attribute.

    Raises:
        ValueError: If the class has no name
    """
    if not strategy.name:
        raise ValueError(f"{strategy.__name__} has no name")
    STRATEGIES[strategy.name] = strategy


def list_strategies() -> list[str]:
    """Names of all registered strategies, sorted."""
    return sorted(STRATEGIES)
