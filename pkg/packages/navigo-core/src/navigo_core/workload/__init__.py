"""Music-streaming workload: catalog, popularity, streaming client and origin server."""

from navigo_core.workload.catalog import (
    Catalog,
    ZipfPopularity,
    calibrate_alpha,
    top_share,
    zipf_probabilities,
)
from navigo_core.workload.producer import OriginServer, consumer_prebind
from navigo_core.workload.session import (
    ConsumerApp,
    DataArrived,
    PlaybackTick,
    SessionActions,
    StreamSession,
    Timeout,
    window_chunks,
)

__all__ = [
    "Catalog",
    "ConsumerApp",
    "DataArrived",
    "OriginServer",
    "PlaybackTick",
    "SessionActions",
    "StreamSession",
    "Timeout",
    "ZipfPopularity",
    "calibrate_alpha",
    "consumer_prebind",
    "top_share",
    "window_chunks",
    "zipf_probabilities",
]
