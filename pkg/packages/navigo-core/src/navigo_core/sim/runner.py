"""Simulation assembly and execution."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from navigo_core.core.config_service import RsuConfig, SessionSpec
from navigo_core.core.models import BACKHAUL_FACE, Position
from navigo_core.metrics.log import QUEUE_DEPTH, EventLog
from navigo_core.metrics.report import MetricsReport, compute_report, write_report
from navigo_core.sim.channel import BroadcastChannel
from navigo_core.sim.events import Scheduler, ms_to_us, s_to_us
from navigo_core.sim.node import Node, NodeKind
from navigo_core.sim.scenario import Scenario
from navigo_core.utils.files import run_dir_name
from navigo_core.workload.catalog import Catalog, ZipfPopularity
from navigo_core.workload.producer import OriginServer, consumer_prebind
from navigo_core.workload.session import ConsumerApp

logger = logging.getLogger(__name__)

ORIGIN_NODE_ID = -1


@dataclass
class RunOutputs:
    """Files written by ``write_outputs``."""

    run_dir: Path
    report: Path
    events: Path | None
    series: list[Path]


class Simulation:
    """
    One deterministic run of a scenario.

    Node ids: RSUs first, in config order, then vehicles by first appearance. Every
    random draw comes from a single generator seeded with the scenario seed.
    """

    def __init__(self, scenario: Scenario) -> None:
        config = scenario.config
        self.scenario = scenario
        self.config = config
        self.scheduler = Scheduler()
        self.rng = np.random.default_rng(config.seed)
        self.log = EventLog()
        self.horizon = s_to_us(config.duration_s)
        self.catalog = Catalog.from_config(config.workload)
        self.channel = BroadcastChannel(self.scheduler, scenario.graph, config.radio, self.log)
        self._packet_ids = itertools.count(1)
        self.origin = OriginServer(
            ORIGIN_NODE_ID, self.catalog, self.scheduler, self._next_packet_id, self.log
        )
        self.nodes: list[Node] = []
        self.vehicle_nodes: dict[str, Node] = {}
        self.apps: list[ConsumerApp] = []
        self._popularity: ZipfPopularity | None = None
        for rsu in config.rsus:
            self._add_rsu(rsu)
        for vehicle in scenario.trace.vehicles():
            self._add_vehicle(vehicle)
        if config.workload.sessions:
            self._script_consumers(config.workload.sessions)
        else:
            self._draw_consumers()
        self.report: MetricsReport | None = None

    # ---- assembly ----

    def _next_packet_id(self) -> int:
        return next(self._packet_ids)

    def _make_node(
        self, label: str, kind: NodeKind, position: Callable[[int], Position | None]
    ) -> Node:
        node = Node(
            node_id=len(self.nodes),
            label=label,
            kind=kind,
            position=position,
            config=self.config,
            scheduler=self.scheduler,
            rng=self.rng,
            graph=self.scenario.graph,
            grid=self.scenario.grid,
            channel=self.channel,
            next_packet_id=self._next_packet_id,
            log=self.log,
            origin=self.origin if kind is NodeKind.RSU else None,
        )
        self.nodes.append(node)
        return node

    def _add_rsu(self, rsu: RsuConfig) -> None:
        here = Position(rsu.x, rsu.y)
        node = self._make_node(rsu.rsu_id, NodeKind.RSU, lambda _t: here)
        node.forwarder.add_static_route(self.catalog.root, BACKHAUL_FACE)
        self.origin.attach_rsu(node.node_id, rsu, node.deliver_from_backhaul)

    def _add_vehicle(self, vehicle: str) -> None:
        trace = self.scenario.trace

        def position(t_us: int) -> Position | None:
            return trace.position_at(vehicle, t_us / 1_000_000)

        self.vehicle_nodes[vehicle] = self._make_node(vehicle, NodeKind.VEHICLE, position)

    @property
    def popularity(self) -> ZipfPopularity:
        if self._popularity is None:
            self._popularity = ZipfPopularity.from_config(self.config.workload)
        return self._popularity

    def _make_app(self, node: Node, playlist: list[int] | None) -> ConsumerApp:
        workload = self.config.workload
        app = ConsumerApp(
            node_id=node.node_id,
            forwarder=node.forwarder,
            scheduler=self.scheduler,
            rng=self.rng,
            catalog=self.catalog,
            popularity=self.popularity if playlist is None else None,
            timeout_ms=self.config.strategy.deadline_ms,
            pipeline_limit=workload.pipeline_limit,
            buffer_ms=workload.buffer_ms,
            chunk_ms=workload.chunk_play_ms,
            log=self.log,
            playlist=playlist,
        )
        node.app = app
        self.apps.append(app)
        return app

    def _schedule_app(self, app: ConsumerApp, vehicle: str, start_s: float) -> None:
        first, last = self.scenario.trace.window(vehicle)
        start = max(s_to_us(first), s_to_us(start_s))
        stop = s_to_us(last)
        if start >= min(stop, self.horizon):
            logger.debug(f"{vehicle}: leaves before its session starts, no consumer")
            return
        self.scheduler.schedule_at(start, app.start)
        if stop < self.horizon:
            self.scheduler.schedule_at(stop, app.stop)

    def _draw_consumers(self) -> None:
        vehicles = list(self.vehicle_nodes)
        count = round(self.config.workload.consumer_fraction * len(vehicles))
        if count == 0:
            return
        chosen = sorted(int(i) for i in self.rng.choice(len(vehicles), size=count, replace=False))
        stagger = self.config.workload.start_stagger_s
        for index in chosen:
            vehicle = vehicles[index]
            offset = float(self.rng.uniform(0.0, stagger)) if stagger > 0 else 0.0
            first, _ = self.scenario.trace.window(vehicle)
            app = self._make_app(self.vehicle_nodes[vehicle], playlist=None)
            self._schedule_app(app, vehicle, first + offset)
        logger.info(f"{count} of {len(vehicles)} vehicles stream music")

    def _script_consumers(self, sessions: tuple[SessionSpec, ...]) -> None:
        by_vehicle: dict[str, list[SessionSpec]] = {}
        for spec in sorted(sessions, key=lambda s: (s.start_s, s.vehicle)):
            by_vehicle.setdefault(spec.vehicle, []).append(spec)
        for vehicle, specs in by_vehicle.items():
            node = self.vehicle_nodes[vehicle]
            app = self._make_app(node, playlist=[s.song for s in specs])
            prebinds = {s.song: s.prebind_area for s in specs if s.prebind_area}
            if prebinds:
                app.on_song_start = _Prebind(node, self.catalog, prebinds)
            self._schedule_app(app, vehicle, specs[0].start_s)

    # ---- execution ----

    def run(self) -> MetricsReport:
        """Execute every event up to the horizon and compute the report."""
        logger.info(
            f"Run {self.config.name!r} started: {len(self.nodes)} nodes, "
            f"{len(self.apps)} consumers, {self.config.duration_s:g} s, seed {self.config.seed}"
        )
        self._every(ms_to_us(self.config.ndn.purge_interval_ms), self._maintain)
        self._every(ms_to_us(self.config.radio.queue_sample_ms), self._sample_queues)
        self.scheduler.run(self.horizon)
        for app in self.apps:
            app.stop()
        for node in self.nodes:
            node.record_fib_width()
        self.report = compute_report(self.log)
        logger.info(
            f"Run {self.config.name!r} finished after {self.scheduler.executed} events: "
            f"success rate {self.report.success_rate}, "
            f"{self.report.frames_sent} frames on the air"
        )
        return self.report

    def _every(self, period_us: int, action: Callable[[], None]) -> None:
        def tick() -> None:
            action()
            if self.scheduler.now + period_us <= self.horizon:
                self.scheduler.schedule(period_us, tick)

        if period_us <= self.horizon:
            self.scheduler.schedule(period_us, tick)

    def _maintain(self) -> None:
        for node in self.nodes:
            node.maintain()

    def _sample_queues(self) -> None:
        now = self.scheduler.now
        for node in self.nodes:
            if node.position() is not None:
                self.log.record(QUEUE_DEPTH, now, node=node.node_id, depth=node.tx_queue_depth())

    def write_outputs(self, output_dir: Path) -> RunOutputs:
        """
        Write the report, its CSV series and the event log under ``output_dir``.

        Raises:
            RuntimeError: If the simulation has not run
        """
        if self.report is None:
            raise RuntimeError("Simulation has not been run")
        config = self.config
        run_dir = output_dir / run_dir_name(config.name, config.strategy_name, config.seed)
        written = write_report(self.report, run_dir, series=config.output.write_series)
        events = None
        if config.output.write_events:
            events = run_dir / "events.jsonl"
            self.log.write_jsonl(events)
        return RunOutputs(run_dir, written[0], events, written[1:])


class _Prebind:
    """Binds a song's prefix to its configured area when that song starts."""

    def __init__(self, node: Node, catalog: Catalog, areas: dict[int, str | None]) -> None:
        self.node = node
        self.catalog = catalog
        self.areas = areas

    def __call__(self, song: int) -> None:
        area = self.areas.get(song)
        if area:
            consumer_prebind(self.node.fib, self.node.lal, self.catalog.prefix(song), area)


def run(scenario: Scenario) -> MetricsReport:
    """Run ``scenario`` once and return its report."""
    return Simulation(scenario).run()
