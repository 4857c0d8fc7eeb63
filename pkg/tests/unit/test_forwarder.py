"""Tests for the NDN forwarding pipeline."""

import numpy as np
import pytest

from navigo_core.core.config_service import StrategyConfig
from navigo_core.core.interfaces import FaceDispatcher
from navigo_core.core.models import APP_FACE, BACKHAUL_FACE, V2V_FACE, Data, Interest, Name
from navigo_core.ndn.forwarder import Forwarder, InterestOutcome
from navigo_core.ndn.tables import ContentStore, Fib, Pit
from navigo_core.sim.events import Scheduler
from navigo_core.strategies.navigo import NavigoStrategy

CHUNK = Name.parse("/provider/song1/chunk0")
PREFIX = Name.parse("/provider/song1")


class RecordingDispatcher(FaceDispatcher):
    """Collects what the forwarder sends."""

    def __init__(self, accept: bool = True) -> None:
        self.accept = accept
        self.interests: list[tuple[Interest, int, bool]] = []
        self.data: list[tuple[Data, int, bool]] = []

    def send_interest(self, interest, face, local):
        self.interests.append((interest, face, local))
        return self.accept

    def send_data(self, data, face, local):
        self.data.append((data, face, local))


@pytest.fixture
def scheduler():
    return Scheduler()


@pytest.fixture
def dispatcher():
    return RecordingDispatcher()


@pytest.fixture
def forwarder(scheduler, dispatcher):
    fib = Fib()
    strategy = NavigoStrategy(fib, scheduler, np.random.default_rng(0), StrategyConfig())
    return Forwarder(
        node_id=0,
        cs=ContentStore(1_000_000),
        pit=Pit(),
        fib=fib,
        strategy=strategy,
        dispatcher=dispatcher,
        scheduler=scheduler,
    )


def interest(nonce: int) -> Interest:
    return Interest(name=CHUNK, nonce=nonce, routable_prefix=PREFIX)


def chunk_data() -> Data:
    return Data(name=CHUNK, payload_size=1024, routable_prefix=PREFIX)


class TestInterestPipeline:
    """Test the Interest path."""

    def test_empty_fib_floods(self, forwarder, dispatcher):
        """Test that an unknown prefix is flooded on the V2V face."""
        outcome = forwarder.on_interest(interest(1), APP_FACE)

        assert outcome is InterestOutcome.FORWARDED
        assert dispatcher.interests == [(interest(1), V2V_FACE, True)]

    def test_cs_hit_answers_locally(self, forwarder, dispatcher):
        """Test that a cached chunk is returned on the ingress face."""
        forwarder.cs.insert(chunk_data())

        outcome = forwarder.on_interest(interest(1), V2V_FACE)

        assert outcome is InterestOutcome.CS_HIT
        assert dispatcher.data == [(chunk_data(), V2V_FACE, True)]
        assert dispatcher.interests == []

    def test_cs_hit_hook_rewrites_reply(self, forwarder, dispatcher):
        """Test that the CS hit hook can stamp the returned Data."""
        forwarder.on_cs_hit = lambda d: Data(d.name, d.payload_size, provider_area="here")
        forwarder.cs.insert(chunk_data())

        forwarder.on_interest(interest(1), V2V_FACE)

        assert dispatcher.data[0][0].provider_area == "here"

    def test_aggregation_sends_once(self, forwarder, dispatcher):
        """Test that a second requester is aggregated, not forwarded."""
        forwarder.on_interest(interest(1), APP_FACE)

        outcome = forwarder.on_interest(interest(2), V2V_FACE)

        assert outcome is InterestOutcome.AGGREGATED
        assert len(dispatcher.interests) == 1

    def test_duplicate_nonce(self, forwarder):
        """Test that a looping Interest is dropped."""
        forwarder.on_interest(interest(1), V2V_FACE)

        assert forwarder.on_interest(interest(1), V2V_FACE) is InterestOutcome.DUPLICATE

    def test_static_route_wins(self, forwarder, dispatcher):
        """Test that a static route bypasses the strategy."""
        forwarder.add_static_route(Name.parse("/provider"), BACKHAUL_FACE)

        forwarder.on_interest(interest(1), V2V_FACE)

        assert dispatcher.interests[0][1] == BACKHAUL_FACE

    def test_refused_send_clears_pit(self, scheduler):
        """Test that a refused send leaves no pending state behind."""
        fib = Fib()
        strategy = NavigoStrategy(fib, scheduler, np.random.default_rng(0), StrategyConfig())
        fwd = Forwarder(
            0, ContentStore(10_000), Pit(), fib, strategy, RecordingDispatcher(False), scheduler
        )

        assert fwd.on_interest(interest(1), APP_FACE) is InterestOutcome.REFUSED
        assert len(fwd.pit) == 0

    def test_withdraw_allows_reexpression(self, forwarder, dispatcher):
        """Test that after withdrawing, a new nonce from the app is forwarded again."""
        forwarder.on_interest(interest(1), APP_FACE)
        forwarder.withdraw(CHUNK, APP_FACE)

        assert forwarder.on_interest(interest(2), APP_FACE) is InterestOutcome.FORWARDED
        assert len(dispatcher.interests) == 2

    def test_reexpression_forwarded_while_relay_pending(self, forwarder, dispatcher):
        """Test that the app's retry goes out although a neighbour's request is pending."""
        forwarder.on_interest(interest(1), APP_FACE)
        forwarder.on_interest(interest(2), V2V_FACE)
        forwarder.withdraw(CHUNK, APP_FACE)

        outcome = forwarder.on_interest(interest(3), APP_FACE)

        assert outcome is InterestOutcome.FORWARDED
        assert len(dispatcher.interests) == 2
        assert dispatcher.interests[1] == (interest(3), V2V_FACE, True)
        assert forwarder.pit.get(CHUNK, 0).downstream == {APP_FACE, V2V_FACE}

    def test_app_request_forwarded_over_relayed_entry(self, forwarder, dispatcher):
        """Test that the app's first request for a name a neighbour asked for is sent."""
        forwarder.on_interest(interest(1), V2V_FACE)

        assert forwarder.on_interest(interest(2), APP_FACE) is InterestOutcome.FORWARDED
        assert len(dispatcher.interests) == 2


class TestDataPipeline:
    """Test the Data path."""

    def test_data_to_every_downstream(self, forwarder, dispatcher):
        """Test that Data reaches both requesters, is cached and clears the PIT."""
        forwarder.on_interest(interest(1), APP_FACE)
        forwarder.on_interest(interest(2), 300)

        faces = forwarder.on_data(chunk_data(), V2V_FACE)

        assert faces == [APP_FACE, 300]
        assert len(dispatcher.data) == 2
        assert CHUNK in forwarder.cs
        assert len(forwarder.pit) == 0

    def test_unsolicited_dropped(self, forwarder, dispatcher):
        """Test that Data without a PIT entry is neither forwarded nor cached."""
        assert forwarder.on_data(chunk_data(), V2V_FACE) == []
        assert CHUNK not in forwarder.cs
        assert dispatcher.data == []

    def test_data_after_expiry_dropped(self, forwarder, scheduler):
        """Test that Data arriving after the PIT lifetime is dropped."""
        forwarder.on_interest(interest(1), APP_FACE)
        scheduler.run(forwarder.pit.lifetime_us)

        assert forwarder.on_data(chunk_data(), V2V_FACE) == []

    def test_purge(self, forwarder, scheduler):
        """Test that periodic purging removes stale entries."""
        forwarder.on_interest(interest(1), APP_FACE)
        scheduler.run(forwarder.pit.lifetime_us + 1)

        assert forwarder.purge() == 1
