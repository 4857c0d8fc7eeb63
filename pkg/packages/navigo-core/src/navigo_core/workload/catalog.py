"""Song catalog naming and Zipf popularity."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from navigo_core.core.config_service import WorkloadConfig
from navigo_core.core.errors import CalibrationError
from navigo_core.core.models import Data, Lineage, Name

logger = logging.getLogger(__name__)

MIN_CALIBRATION_SONGS = 10
_SHARE_TOLERANCE = 1e-7
_MAX_ALPHA = 64.0


@dataclass(frozen=True)
class Catalog:
    """
    Chunk names ``/<provider>/song<i>/chunk<j>`` with routable prefix ``/<provider>/song<i>``.

    Attributes:
        provider: First name component
        n_songs: Number of songs
        chunks_per_song: Dense chunk indices per song
        payload_bytes: Data payload of every chunk
    """

    provider: str = "provider"
    n_songs: int = 100
    chunks_per_song: int = 1700
    payload_bytes: int = 1024

    @classmethod
    def from_config(cls, config: WorkloadConfig) -> Catalog:
        return cls(config.provider, config.n_songs, config.chunks_per_song, config.payload_bytes)

    @cached_property
    def root(self) -> Name:
        return Name((self.provider,))

    def prefix(self, song: int) -> Name:
        return self.root.append(f"song{song}")

    def chunk_name(self, song: int, chunk: int) -> Name:
        return self.prefix(song).append(f"chunk{chunk}")

    def parse(self, name: Name) -> tuple[int, int] | None:
        """(song, chunk) of a catalog chunk name, None for anything else."""
        parts = name.components
        if len(parts) != 3 or parts[0] != self.provider:
            return None
        song_part, chunk_part = parts[1], parts[2]
        if not (song_part.startswith("song") and chunk_part.startswith("chunk")):
            return None
        try:
            song, chunk = int(song_part[4:]), int(chunk_part[5:])
        except ValueError:
            return None
        if not (0 <= song < self.n_songs and 0 <= chunk < self.chunks_per_song):
            return None
        return song, chunk

    def __contains__(self, name: object) -> bool:
        return isinstance(name, Name) and self.parse(name) is not None

    def make_data(self, name: Name, lineage: Lineage | None = None) -> Data | None:
        """Data for a catalog chunk; None if the name is not in the catalog."""
        parsed = self.parse(name)
        if parsed is None:
            return None
        return Data(
            name=name,
            payload_size=self.payload_bytes,
            routable_prefix=self.prefix(parsed[0]),
            lineage=lineage,
        )


def zipf_probabilities(n: int, alpha: float) -> np.ndarray:
    """Probability of each rank 1..n (index 0 is rank 1)."""
    weights = np.arange(1, n + 1, dtype=float) ** -alpha
    return weights / weights.sum()


def top_share(n: int, alpha: float, top_fraction: float) -> float:
    """Request share carried by the ``top_fraction`` most popular items."""
    k = _top_count(n, top_fraction)
    return float(zipf_probabilities(n, alpha)[:k].sum())


def calibrate_alpha(n_songs: int, top_fraction: float = 0.12, mass: float = 0.88) -> float:
    """
    Find the Zipf exponent giving the top ``top_fraction`` of songs ``mass`` of requests.

    The share is increasing in alpha, from k/n at alpha=0 toward 1, so bisection on a
    doubling bracket converges.

    Raises:
        CalibrationError: If n_songs < 10 or mass is outside (k/n, 1)
    """
    if n_songs < MIN_CALIBRATION_SONGS:
        raise CalibrationError(f"Need at least {MIN_CALIBRATION_SONGS} songs, got {n_songs}")
    k = _top_count(n_songs, top_fraction)
    if k >= n_songs or not k / n_songs < mass < 1.0:
        raise CalibrationError(
            f"Top {k} of {n_songs} songs cannot carry a share of {mass}"
        )
    lo, hi = 0.0, 1.0
    while top_share(n_songs, hi, top_fraction) < mass:
        lo, hi = hi, hi * 2
        if hi > _MAX_ALPHA:
            raise CalibrationError(f"No exponent below {_MAX_ALPHA} reaches share {mass}")
    for _ in range(200):
        mid = (lo + hi) / 2
        share = top_share(n_songs, mid, top_fraction)
        if abs(share - mass) <= _SHARE_TOLERANCE:
            lo = hi = mid
            break
        if share < mass:
            lo = mid
        else:
            hi = mid
    alpha = (lo + hi) / 2
    logger.debug(f"Calibrated alpha={alpha:.6f} for n={n_songs}, top {k} -> {mass}")
    return alpha


class ZipfPopularity:
    """Song popularity; song 0 is the most popular."""

    def __init__(self, n_songs: int, alpha: float) -> None:
        if n_songs < 1 or alpha < 0:
            raise CalibrationError(f"Invalid Zipf parameters n={n_songs}, alpha={alpha}")
        self.n_songs = n_songs
        self.alpha = alpha
        self.probabilities = zipf_probabilities(n_songs, alpha)
        self._cdf = np.cumsum(self.probabilities)

    @classmethod
    def from_config(cls, config: WorkloadConfig) -> ZipfPopularity:
        alpha = config.zipf_alpha
        if alpha is None:
            alpha = calibrate_alpha(config.n_songs, config.top_fraction, config.top_mass)
        return cls(config.n_songs, alpha)

    def draw(self, rng: np.random.Generator) -> int:
        index = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return min(index, self.n_songs - 1)

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.n_songs, size=size, p=self.probabilities)


def _top_count(n: int, top_fraction: float) -> int:
    return max(1, int(round(top_fraction * n)))
