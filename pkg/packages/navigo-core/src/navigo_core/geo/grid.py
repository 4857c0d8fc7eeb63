"""MGRS-style planar grid: positions to geo-area labels and back."""

from __future__ import annotations

import math
from dataclasses import dataclass

from navigo_core.core.errors import GeoDomainError, LabelParseError
from navigo_core.core.models import Position

MIN_PRECISION = 1
MAX_PRECISION = 5


@dataclass(frozen=True)
class GeoArea:
    """
    One axis-aligned square cell of the grid.

    Attributes:
        label: "<TAG> <easting-digits> <northing-digits>"
        precision_digits: Digits per axis in the label
        cell_size: Side of the cell in meters
        i: Easting cell index
        j: Northing cell index
    """

    label: str
    precision_digits: int
    cell_size: float
    i: int
    j: int

    @property
    def min_corner(self) -> Position:
        return Position(self.i * self.cell_size, self.j * self.cell_size)

    @property
    def max_corner(self) -> Position:
        """Exclusive upper corner."""
        return Position((self.i + 1) * self.cell_size, (self.j + 1) * self.cell_size)

    @property
    def center(self) -> Position:
        return Position((self.i + 0.5) * self.cell_size, (self.j + 0.5) * self.cell_size)

    def contains(self, pos: Position) -> bool:
        """Half-open containment test."""
        lo, hi = self.min_corner, self.max_corner
        return lo.x <= pos.x < hi.x and lo.y <= pos.y < hi.y

    def __str__(self) -> str:
        return self.label


class GeoGrid:
    """
    Local Cartesian grid with MGRS-style labels.

    Cells at precision ``k`` have side ``base_extent / 10**k``. With the default
    200 km base extent, three digits give 200 m cells. Cell bounds are half-open,
    ``[min, max)``, so every point maps to exactly one cell.
    """

    def __init__(
        self,
        tag: str = "11SLT",
        base_extent: float = 200_000.0,
        world_width: float = 2_100.0,
        world_height: float = 2_100.0,
        default_precision: int = 3,
    ) -> None:
        if not tag or " " in tag:
            raise GeoDomainError(f"Grid tag must be a non-empty token without spaces: {tag!r}")
        if base_extent <= 0:
            raise GeoDomainError("base_extent must be positive")
        if not (0 < world_width <= base_extent and 0 < world_height <= base_extent):
            raise GeoDomainError("world bounds must be positive and within base_extent")
        self._check_precision(default_precision)
        self.tag = tag
        self.base_extent = float(base_extent)
        self.world_width = float(world_width)
        self.world_height = float(world_height)
        self.default_precision = default_precision

    def cell_size(self, precision: int) -> float:
        """Side length in meters of cells at ``precision``."""
        self._check_precision(precision)
        return self.base_extent / 10**precision

    def contains(self, pos: Position) -> bool:
        """Check whether ``pos`` lies inside the world bounds."""
        return (
            pos.is_finite()
            and 0.0 <= pos.x <= self.world_width
            and 0.0 <= pos.y <= self.world_height
            and pos.x < self.base_extent
            and pos.y < self.base_extent
        )

    def area_of(self, pos: Position, precision: int | None = None) -> GeoArea:
        """
        Map a position to the cell that contains it.

        Args:
            pos: Position inside the world bounds
            precision: Label digits per axis; defaults to the grid's default precision

        Returns:
            The containing GeoArea

        Raises:
            GeoDomainError: If ``pos`` is outside the world or precision unsupported
        """
        k = self.default_precision if precision is None else precision
        size = self.cell_size(k)
        if not self.contains(pos):
            raise GeoDomainError(f"Position ({pos.x}, {pos.y}) outside world bounds")
        return self._make_area(_cell_index(pos.x, size), _cell_index(pos.y, size), k)

    def bounds_of(self, area: GeoArea | str) -> tuple[Position, Position]:
        """
        Return the (min, max) corners of a cell; max edges are exclusive.

        Raises:
            LabelParseError: If a label string is malformed
        """
        cell = self.parse_label(area) if isinstance(area, str) else area
        return cell.min_corner, cell.max_corner

    def center_of(self, area: GeoArea | str) -> Position:
        """Center point of a cell."""
        cell = self.parse_label(area) if isinstance(area, str) else area
        return cell.center

    def coarsen(self, area: GeoArea, new_precision: int) -> GeoArea:
        """
        Drop label digits, returning the enclosing coarser cell.

        Raises:
            GeoDomainError: If ``new_precision`` is finer than the area's precision
        """
        self._check_precision(new_precision)
        if new_precision > area.precision_digits:
            raise GeoDomainError(
                f"Cannot refine precision {area.precision_digits} to {new_precision}"
            )
        factor = 10 ** (area.precision_digits - new_precision)
        return self._make_area(area.i // factor, area.j // factor, new_precision)

    def parse_label(self, label: str) -> GeoArea:
        """
        Parse "<TAG> <easting> <northing>" back into a GeoArea.

        Raises:
            LabelParseError: If the label is malformed or carries another tag
        """
        parts = label.split(" ")
        if len(parts) != 3:
            raise LabelParseError(f"Expected three space-separated fields: {label!r}")
        tag, easting, northing = parts
        if tag != self.tag:
            raise LabelParseError(f"Unknown grid tag {tag!r} (expected {self.tag!r})")
        if not (easting.isdigit() and northing.isdigit()) or len(easting) != len(northing):
            raise LabelParseError(f"Easting/northing must be equal-width digits: {label!r}")
        precision = len(easting)
        if not MIN_PRECISION <= precision <= MAX_PRECISION:
            raise LabelParseError(f"Unsupported precision {precision} in {label!r}")
        return self._make_area(int(easting), int(northing), precision)

    def _make_area(self, i: int, j: int, precision: int) -> GeoArea:
        width = precision
        label = f"{self.tag} {i:0{width}d} {j:0{width}d}"
        return GeoArea(
            label=label,
            precision_digits=precision,
            cell_size=self.base_extent / 10**precision,
            i=i,
            j=j,
        )

    @staticmethod
    def _check_precision(precision: int) -> None:
        if not MIN_PRECISION <= precision <= MAX_PRECISION:
            raise GeoDomainError(
                f"Precision {precision} outside [{MIN_PRECISION}, {MAX_PRECISION}]"
            )


def _cell_index(coord: float, size: float) -> int:
    # floor division corrected against float rounding at cell edges
    index = math.floor(coord / size)
    if index * size > coord:
        index -= 1
    elif (index + 1) * size <= coord:
        index += 1
    return index
