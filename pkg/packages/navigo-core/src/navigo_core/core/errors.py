"""Exception hierarchy for navigo-sim."""


class NavigoError(Exception):
    """Base class for every error raised by navigo-sim."""


class GeoDomainError(NavigoError, ValueError):
    """Position or precision outside the supported grid domain."""


class LabelParseError(NavigoError, ValueError):
    """GeoArea label that does not follow "<TAG> <easting> <northing>"."""


class RoadGraphError(NavigoError, ValueError):
    """Invalid road topology input.

    Attributes:
        row: 1-based data row of the road file that caused the error, if known
    """

    def __init__(self, message: str, row: int | None = None) -> None:
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class HeaderError(NavigoError, ValueError):
    """Malformed L2.5 header bytes."""


class TraceError(NavigoError, ValueError):
    """Malformed mobility trace or query for an unknown vehicle."""


class ConfigError(NavigoError, ValueError):
    """Scenario configuration failed validation.

    Attributes:
        key: Dotted path of the offending key, if known
    """

    def __init__(self, message: str, key: str | None = None) -> None:
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class CalibrationError(NavigoError, ValueError):
    """Zipf calibration target cannot be met."""
