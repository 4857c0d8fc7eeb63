"""Geolocation-guided forwarding: exploit bound GeoFaces, explore by flooding."""

from __future__ import annotations

import logging

import numpy as np

from navigo_core.core.config_service import StrategyConfig
from navigo_core.core.interfaces import Cancellable, EventScheduler, ForwardingStrategy
from navigo_core.core.models import FIRST_GEOFACE_ID, V2V_FACE, Interest, Name
from navigo_core.ndn.tables import Fib, FibEntry
from navigo_core.sim.events import ms_to_us

logger = logging.getLogger(__name__)


class NavigoStrategy(ForwardingStrategy):
    """
    Face selection and FIB maintenance.

    - No FIB entry: flood on the V2V face (exploration).
    - Two or more faces: round-robin.
    - One face: use it with probability p, otherwise flood.

    Every Interest this node originates on a GeoFace arms a deadline T. If no Data
    comes back in time the face is unbound from the prefix. Data satisfied through a
    face lifts the deadlines of every Interest still pending for the same prefix on
    that face.
    """

    name = "navigo"

    def __init__(
        self,
        fib: Fib,
        scheduler: EventScheduler,
        rng: np.random.Generator,
        config: StrategyConfig,
    ) -> None:
        super().__init__(fib, scheduler, rng, config)
        self._deadlines: dict[tuple[Name, int], dict[int, Cancellable]] = {}
        self.unbinds = 0

    def choose_face(self, interest: Interest, entry: FibEntry | None) -> int:
        if entry is None or not entry.faces:
            return V2V_FACE
        faces = entry.faces
        if len(faces) >= 2:
            index = entry.cursor % len(faces)
            entry.cursor = (index + 1) % len(faces)
            return faces[index]
        if float(self.rng.random()) < self.config.exploit_probability:
            return faces[0]
        return V2V_FACE

    def after_send(self, interest: Interest, prefix: Name, face: int, local: bool) -> None:
        if not local or face < FIRST_GEOFACE_ID:
            return
        event = self.scheduler.schedule(
            ms_to_us(self.config.deadline_ms), self.on_deadline, interest, prefix, face
        )
        self._deadlines.setdefault((prefix, face), {})[interest.nonce] = event

    def on_deadline(self, interest: Interest, prefix: Name, face: int) -> None:
        """Unbind ``face`` from ``prefix``: no Data arrived within T."""
        pending = self._deadlines.get((prefix, face))
        if pending is None or interest.nonce not in pending:
            return
        del pending[interest.nonce]
        if not pending:
            del self._deadlines[(prefix, face)]
        if self.fib.unbind(prefix, face):
            self.unbinds += 1
            logger.debug(f"Deadline expired for {interest.name}: face {face} unbound from {prefix}")

    def on_satisfied(self, interest_name: Name, prefix: Name, face: int | None) -> None:
        if face is None:
            return
        lifted = self._deadlines.pop((prefix, face), {})
        for event in lifted.values():
            event.cancel()
        if lifted:
            logger.debug(f"{interest_name} satisfied: lifted {len(lifted)} deadlines on {face}")

    def outstanding(self, prefix: Name, face: int) -> int:
        """Armed deadlines for ``prefix`` on ``face``."""
        return len(self._deadlines.get((prefix, face), {}))
