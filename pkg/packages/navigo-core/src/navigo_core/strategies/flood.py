"""Flooding baseline: every Interest goes out on the V2V face."""

from navigo_core.core.interfaces import ForwardingStrategy
from navigo_core.core.models import V2V_FACE, Interest
from navigo_core.ndn.tables import FibEntry


class FloodStrategy(ForwardingStrategy):
    """Ignores the FIB; Interests carry no destination area and spread in all directions."""

    name = "flood"

    def choose_face(self, interest: Interest, entry: FibEntry | None) -> int:
        return V2V_FACE
