"""Mobility traces: CSV and SUMO FCD XML ingestion, linear interpolation playback."""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from lxml import etree

from navigo_core.core.errors import TraceError
from navigo_core.core.models import Position
from navigo_core.geo.road_graph import RoadGraph

logger = logging.getLogger(__name__)

TRACE_CSV_HEADER = ["time_s", "vehicle_id", "x_m", "y_m", "speed_mps"]


@dataclass(frozen=True)
class TraceSample:
    time_s: float
    vehicle_id: str
    x: float
    y: float
    speed: float = 0.0


@dataclass(frozen=True)
class _Track:
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray

    @property
    def first(self) -> float:
        return float(self.times[0])

    @property
    def last(self) -> float:
        return float(self.times[-1])


class MobilityTrace:
    """
    Per-vehicle sample tracks.

    A vehicle exists only inside its [first, last] sample window; between samples its
    position is linearly interpolated.
    """

    def __init__(self, samples: Iterable[TraceSample]) -> None:
        grouped: dict[str, list[TraceSample]] = {}
        for s in samples:
            grouped.setdefault(s.vehicle_id, []).append(s)
        self._tracks: dict[str, _Track] = {}
        for vehicle, track in grouped.items():
            times = np.array([s.time_s for s in track], dtype=float)
            if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
                raise TraceError(f"Sample times of vehicle {vehicle!r} are not strictly increasing")
            xs = np.array([s.x for s in track], dtype=float)
            ys = np.array([s.y for s in track], dtype=float)
            if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
                raise TraceError(f"Vehicle {vehicle!r} has a non-finite position")
            self._tracks[vehicle] = _Track(times, xs, ys)

    def vehicles(self) -> list[str]:
        """Vehicle ids ordered by first appearance, then id."""
        return sorted(self._tracks, key=lambda v: (self._tracks[v].first, v))

    def window(self, vehicle: str) -> tuple[float, float]:
        track = self._track(vehicle)
        return track.first, track.last

    def position_at(self, vehicle: str, t_s: float) -> Position | None:
        """
        Interpolated position, or None outside the vehicle's sample window.

        Raises:
            TraceError: For an unknown vehicle
        """
        track = self._track(vehicle)
        if t_s < track.first or t_s > track.last:
            return None
        return Position(
            float(np.interp(t_s, track.times, track.xs)),
            float(np.interp(t_s, track.times, track.ys)),
        )

    def off_road(self, graph: RoadGraph, tolerance_m: float) -> list[tuple[str, float, float]]:
        """Samples farther than ``tolerance_m`` from every road: (vehicle, time, distance)."""
        result = []
        for vehicle in self.vehicles():
            track = self._tracks[vehicle]
            for t, x, y in zip(track.times, track.xs, track.ys):
                d = graph.project(Position(float(x), float(y))).distance
                if d > tolerance_m:
                    result.append((vehicle, float(t), d))
        return result

    def samples(self) -> list[TraceSample]:
        out = []
        for vehicle in self.vehicles():
            track = self._tracks[vehicle]
            for t, x, y in zip(track.times, track.xs, track.ys):
                out.append(TraceSample(float(t), vehicle, float(x), float(y)))
        return sorted(out, key=lambda s: (s.time_s, s.vehicle_id))

    def _track(self, vehicle: str) -> _Track:
        try:
            return self._tracks[vehicle]
        except KeyError:
            raise TraceError(f"Unknown vehicle: {vehicle!r}") from None

    def __len__(self) -> int:
        return len(self._tracks)


def read_trace_csv(path: Path) -> MobilityTrace:
    """
    Read ``time_s,vehicle_id,x_m,y_m,speed_mps`` rows.

    Raises:
        TraceError: On a bad header or unparsable row
    """
    samples = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACE_CSV_HEADER:
            raise TraceError(f"Trace header must be {','.join(TRACE_CSV_HEADER)}")
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(TRACE_CSV_HEADER):
                raise TraceError(f"row {row_no}: expected 5 fields, got {len(row)}")
            try:
                samples.append(
                    TraceSample(float(row[0]), row[1].strip(), float(row[2]), float(row[3]),
                                float(row[4]))
                )
            except ValueError as e:
                raise TraceError(f"row {row_no}: unparsable value ({e})") from None
    logger.debug(f"Read {len(samples)} trace samples from {path}")
    return MobilityTrace(samples)


def read_fcd_xml(path: Path) -> MobilityTrace:
    """
    Read a SUMO floating-car-data export.

    Raises:
        TraceError: On malformed XML or a vehicle element missing attributes
    """
    samples = []
    try:
        for _, step in etree.iterparse(str(path), events=("end",), tag="timestep"):
            t = float(step.get("time"))
            for vehicle in step.iterfind("vehicle"):
                samples.append(
                    TraceSample(
                        t,
                        vehicle.get("id"),
                        float(vehicle.get("x")),
                        float(vehicle.get("y")),
                        float(vehicle.get("speed", "0")),
                    )
                )
            step.clear()
    except etree.XMLSyntaxError as e:
        raise TraceError(f"Malformed FCD file {path}: {e}") from e
    except (TypeError, ValueError) as e:
        raise TraceError(f"Bad timestep or vehicle element in {path}: {e}") from e
    logger.debug(f"Read {len(samples)} FCD samples from {path}")
    return MobilityTrace(samples)


def load_trace(path: Path) -> MobilityTrace:
    """Dispatch on suffix: ``.xml`` is FCD, anything else CSV."""
    if not Path(path).exists():
        raise TraceError(f"Trace file not found: {path}")
    if Path(path).suffix.lower() == ".xml":
        return read_fcd_xml(path)
    return read_trace_csv(path)


def write_trace_csv(path: Path, samples: Iterable[TraceSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_CSV_HEADER)
        for s in samples:
            writer.writerow(
                [f"{s.time_s:.3f}", s.vehicle_id, f"{s.x:.2f}", f"{s.y:.2f}", f"{s.speed:.2f}"]
            )
