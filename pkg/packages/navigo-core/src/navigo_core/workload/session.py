"""
Music streaming client.

``StreamSession`` is the per-song state machine: it decides which chunks to request,
tracks the playback position and flags buffer underruns. ``ConsumerApp`` drives a
session on one vehicle: it expresses Interests through the node's forwarder, arms the
application timeout, ticks playback and moves on to the next song.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from navigo_core.core.interfaces import Cancellable, EventScheduler
from navigo_core.core.models import APP_FACE, Data, Interest, SourceKind
from navigo_core.metrics.log import (
    INTEREST_EXPRESSED,
    INTEREST_SATISFIED,
    SONG_FINISHED,
    EventLog,
)
from navigo_core.sim.events import US_PER_MS, ms_to_us
from navigo_core.workload.catalog import Catalog, ZipfPopularity

if TYPE_CHECKING:
    from navigo_core.ndn.forwarder import Forwarder

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DataArrived:
    chunk: int


@dataclass(frozen=True)
class PlaybackTick:
    pass


@dataclass(frozen=True)
class Timeout:
    chunk: int


SessionEvent = DataArrived | PlaybackTick | Timeout


@dataclass
class SessionActions:
    """
    What the application must do after one session step.

    Attributes:
        request: Chunks to request for the first time
        reexpress: Chunks to request again with a fresh nonce
        start_playback: Schedule the next playback tick
        underflow: The step ran into an empty buffer
        finished: The last chunk has been played
    """

    request: list[int] = field(default_factory=list)
    reexpress: list[int] = field(default_factory=list)
    start_playback: bool = False
    underflow: bool = False
    finished: bool = False


class StreamSession:
    """
    Sequential chunk fetching with a bounded pipeline and a bounded playout buffer.

    Chunk k covers play time [k * chunk_ms, (k + 1) * chunk_ms). It is requested only
    once the pipeline has a free slot and its end lies within ``buffer_ms`` of the
    playing position. Playback starts with chunk 0, advances one chunk per tick and
    pauses when the next chunk is missing.
    """

    def __init__(
        self,
        song: int,
        chunks: int,
        chunk_ms: float,
        pipeline_limit: int = 20,
        buffer_ms: float = 30_000.0,
    ) -> None:
        self.song = song
        self.chunks = chunks
        self.chunk_ms = chunk_ms
        self.pipeline_limit = pipeline_limit
        self.buffer_ms = buffer_ms
        self.next_chunk_to_request = 0
        self.pending: set[int] = set()
        self.received: set[int] = set()
        self.current_chunk = 0
        self.playing = False
        self.underflow_flag = False
        self.underflows = 0
        self.finished = False

    @property
    def playing_position_ms(self) -> float:
        return self.current_chunk * self.chunk_ms

    @property
    def buffered_ms(self) -> float:
        """Content received ahead of the playing position."""
        ahead = sum(1 for c in self.received if c >= self.current_chunk)
        return ahead * self.chunk_ms

    def start(self) -> SessionActions:
        return SessionActions(request=self._fill())

    def step(self, event: SessionEvent) -> SessionActions:
        if self.finished:
            return SessionActions(finished=True)
        if isinstance(event, DataArrived):
            return self._on_data(event.chunk)
        if isinstance(event, PlaybackTick):
            return self._on_tick()
        return self._on_timeout(event.chunk)

    def _on_data(self, chunk: int) -> SessionActions:
        if chunk not in self.pending:
            return SessionActions()
        self.pending.discard(chunk)
        self.received.add(chunk)
        actions = SessionActions(request=self._fill())
        if not self.playing and chunk == self.current_chunk:
            self.playing = True
            actions.start_playback = True
        return actions

    def _on_tick(self) -> SessionActions:
        if not self.playing:
            return SessionActions()
        self.received.discard(self.current_chunk)
        self.current_chunk += 1
        if self.current_chunk >= self.chunks:
            self.playing = False
            self.finished = True
            return SessionActions(finished=True)
        actions = SessionActions(request=self._fill())
        if self.current_chunk in self.received:
            actions.start_playback = True
        else:
            self.playing = False
            self.underflows += 1
            if not self.underflow_flag:
                self.underflow_flag = True
                actions.underflow = True
        return actions

    def _on_timeout(self, chunk: int) -> SessionActions:
        if chunk in self.pending:
            return SessionActions(reexpress=[chunk])
        return SessionActions()

    def _fill(self) -> list[int]:
        issued = []
        limit = self.playing_position_ms + self.buffer_ms
        while (
            len(self.pending) < self.pipeline_limit
            and self.next_chunk_to_request < self.chunks
            and (self.next_chunk_to_request + 1) * self.chunk_ms <= limit + 1e-9
        ):
            chunk = self.next_chunk_to_request
            self.pending.add(chunk)
            issued.append(chunk)
            self.next_chunk_to_request += 1
        return issued


@dataclass
class _Outstanding:
    first_issue: int
    last_issue: int
    expressions: int = 1
    timeout: Cancellable | None = None


class ConsumerApp:
    """
    Streaming client on one vehicle.

    Plays songs back to back until ``stop``; a scripted app plays its listed songs
    in order and then goes quiet.
    """

    def __init__(
        self,
        node_id: int,
        forwarder: Forwarder,
        scheduler: EventScheduler,
        rng: np.random.Generator,
        catalog: Catalog,
        popularity: ZipfPopularity | None,
        timeout_ms: float,
        pipeline_limit: int,
        buffer_ms: float,
        chunk_ms: float,
        log: EventLog | None = None,
        playlist: list[int] | None = None,
        on_song_start: Callable[[int], None] | None = None,
    ) -> None:
        self.node_id = node_id
        self.forwarder = forwarder
        self.scheduler = scheduler
        self.rng = rng
        self.catalog = catalog
        self.popularity = popularity
        self.timeout_us = ms_to_us(timeout_ms)
        self.pipeline_limit = pipeline_limit
        self.buffer_ms = buffer_ms
        self.chunk_us = max(1, round(chunk_ms * US_PER_MS))
        self.chunk_ms = chunk_ms
        self.log = log
        self.playlist = list(playlist) if playlist is not None else None
        self.on_song_start = on_song_start
        self.session: StreamSession | None = None
        self.songs_started = 0
        self.active = False
        self._outstanding: dict[int, _Outstanding] = {}
        self._tick: Cancellable | None = None

    def start(self) -> None:
        if self.active:
            return
        self.active = True
        self._next_song()

    def stop(self) -> None:
        """Trip over: the song in progress ends unfinished."""
        if not self.active:
            return
        self.active = False
        if self.session is not None and not self.session.finished:
            self._record_song(self.session, completed=False)
        self._cancel_all()
        self.session = None

    def on_data(self, data: Data) -> None:
        session = self.session
        parsed = self.catalog.parse(data.name)
        if not self.active or session is None or parsed is None or parsed[0] != session.song:
            return
        chunk = parsed[1]
        outstanding = self._outstanding.pop(chunk, None)
        if outstanding is None:
            return
        if outstanding.timeout is not None:
            outstanding.timeout.cancel()
        now = self.scheduler.now
        if self.log is not None:
            lineage = data.lineage
            self.log.record(
                INTEREST_SATISFIED,
                now,
                node=self.node_id,
                name=str(data.name),
                song=session.song,
                session=self.songs_started,
                rtt_ms=(now - outstanding.last_issue) / US_PER_MS,
                first_issue=outstanding.expressions == 1,
                source_kind=lineage.source_kind.value if lineage else SourceKind.ORIGIN.value,
                source_node=lineage.source_node if lineage else None,
                packet_id=lineage.packet_id if lineage else None,
            )
        self._apply(session.step(DataArrived(chunk)))

    # ---- internals ----

    def _next_song(self) -> None:
        if not self.active:
            return
        if self.playlist is not None:
            if not self.playlist:
                self.active = False
                self.session = None
                return
            song = self.playlist.pop(0)
        elif self.popularity is not None:
            song = self.popularity.draw(self.rng)
        else:
            raise RuntimeError(f"node {self.node_id}: no playlist and no popularity model")
        self.songs_started += 1
        self.session = StreamSession(
            song,
            self.catalog.chunks_per_song,
            self.chunk_ms,
            self.pipeline_limit,
            self.buffer_ms,
        )
        logger.debug(f"node {self.node_id}: starting song {song}")
        if self.on_song_start is not None:
            self.on_song_start(song)
        self._apply(self.session.start())

    def _apply(self, actions: SessionActions) -> None:
        session = self.session
        if session is None:
            return
        if actions.underflow:
            logger.debug(f"node {self.node_id}: buffer underrun in song {session.song}")
        if actions.finished:
            self._record_song(session, completed=True)
            self._cancel_all()
            self._next_song()
            return
        if actions.start_playback:
            self._tick = self.scheduler.schedule(self.chunk_us, self._on_tick)
        for chunk in actions.reexpress:
            self._express(session, chunk, first=False)
        for chunk in actions.request:
            self._express(session, chunk, first=True)

    def _on_tick(self) -> None:
        if self.session is not None:
            self._apply(self.session.step(PlaybackTick()))

    def _on_timeout(self, song: int, chunk: int) -> None:
        session = self.session
        if session is None or session.song != song:
            return
        self.forwarder.withdraw(self.catalog.chunk_name(song, chunk), APP_FACE)
        self._apply(session.step(Timeout(chunk)))

    def _express(self, session: StreamSession, chunk: int, first: bool) -> None:
        now = self.scheduler.now
        name = self.catalog.chunk_name(session.song, chunk)
        interest = Interest(
            name=name,
            nonce=int(self.rng.integers(0, 2**63)),
            routable_prefix=self.catalog.prefix(session.song),
        )
        outstanding = self._outstanding.get(chunk)
        if outstanding is None or first:
            outstanding = _Outstanding(first_issue=now, last_issue=now)
            self._outstanding[chunk] = outstanding
        else:
            outstanding.last_issue = now
            outstanding.expressions += 1
        if self.log is not None:
            self.log.record(
                INTEREST_EXPRESSED,
                now,
                node=self.node_id,
                name=str(name),
                song=session.song,
                first_issue=first,
            )
        self.forwarder.on_interest(interest, APP_FACE)
        if self._outstanding.get(chunk) is outstanding:
            outstanding.timeout = self.scheduler.schedule(
                self.timeout_us, self._on_timeout, session.song, chunk
            )

    def _record_song(self, session: StreamSession, completed: bool) -> None:
        if self.log is None:
            return
        self.log.record(
            SONG_FINISHED,
            self.scheduler.now,
            node=self.node_id,
            song=session.song,
            completed=completed,
            underflow=session.underflow_flag,
            chunks_played=session.current_chunk,
        )

    def _cancel_all(self) -> None:
        for outstanding in self._outstanding.values():
            if outstanding.timeout is not None:
                outstanding.timeout.cancel()
        self._outstanding.clear()
        if self._tick is not None:
            self._tick.cancel()
            self._tick = None


def window_chunks(buffer_ms: float, chunk_ms: float) -> int:
    """Chunks that fit in the playout buffer."""
    return math.floor(buffer_ms / chunk_ms + 1e-9)
