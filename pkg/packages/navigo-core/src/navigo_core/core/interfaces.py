"""Abstract interfaces between the NDN engine, its strategies and the simulator."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable
from typing import TYPE_CHECKING, Any

import numpy as np

from navigo_core.core.config_service import StrategyConfig
from navigo_core.core.models import Data, Interest, Name

if TYPE_CHECKING:
    from navigo_core.ndn.tables import Fib, FibEntry


class Cancellable(ABC):
    """Handle to something scheduled that can be called off."""

    @abstractmethod
    def cancel(self) -> None:
        pass

    @property
    @abstractmethod
    def cancelled(self) -> bool:
        pass


class EventScheduler(ABC):
    """Simulation clock with integer microsecond time."""

    @property
    @abstractmethod
    def now(self) -> int:
        pass

    @abstractmethod
    def schedule(self, delay_us: int, action: Callable[..., Any], *args: Any) -> Cancellable:
        """
        Run ``action(*args)`` after ``delay_us`` microseconds.

        Raises:
            ValueError: If ``delay_us`` is negative
        """
        pass


class FaceDispatcher(ABC):
    """
    Output side of a forwarder.

    The hosting node routes each face id to the application, the LAL or the backhaul.
    """

    @abstractmethod
    def send_interest(self, interest: Interest, face: int, local: bool) -> bool:
        """
        Emit an Interest on ``face``.

        Args:
            interest: Interest to send
            face: Outgoing face id
            local: True if the Interest came from this node's application

        Returns:
            False if the link refused it (the forwarder then drops its PIT state)
        """
        pass

    @abstractmethod
    def send_data(self, data: Data, face: int, local: bool) -> None:
        """
        Emit a Data packet on ``face``.

        Args:
            data: Data to send
            face: Downstream face id
            local: True if produced here (cache hit or producer), False if relayed
        """
        pass


class ForwardingStrategy(ABC):
    """
    Per-node face selection for Interests that passed the CS and PIT.

    Subclasses implement ``choose_face``; the hooks default to no-ops.
    """

    name: str = ""

    def __init__(
        self,
        fib: Fib,
        scheduler: EventScheduler,
        rng: np.random.Generator,
        config: StrategyConfig,
    ) -> None:
        self.fib = fib
        self.scheduler = scheduler
        self.rng = rng
        self.config = config

    @abstractmethod
    def choose_face(self, interest: Interest, entry: FibEntry | None) -> int:
        """
        Pick the outgoing face.

        Args:
            interest: Interest to forward
            entry: Longest-prefix FIB match, or None

        Returns:
            A face bound in ``entry`` or the V2V face for flooding
        """
        pass

    def after_send(self, interest: Interest, prefix: Name, face: int, local: bool) -> None:
        """Called once the link accepted the Interest on ``face``."""

    def on_satisfied(self, interest_name: Name, prefix: Name, face: int | None) -> None:
        """Called when Data consumed the PIT entry the Interest was sent from."""
