"""Tests for catalog naming and Zipf popularity."""

import numpy as np
import pytest

from navigo_core.core.config_service import WorkloadConfig
from navigo_core.core.errors import CalibrationError
from navigo_core.core.models import Name
from navigo_core.workload.catalog import (
    Catalog,
    ZipfPopularity,
    calibrate_alpha,
    top_share,
    zipf_probabilities,
)


@pytest.fixture
def catalog():
    return Catalog(provider="provider", n_songs=5, chunks_per_song=3, payload_bytes=512)


class TestCatalog:
    """Test chunk names."""

    def test_names(self, catalog):
        """Test chunk names and their routable prefix."""
        assert str(catalog.chunk_name(2, 1)) == "/provider/song2/chunk1"
        assert str(catalog.prefix(2)) == "/provider/song2"
        assert catalog.prefix(2).is_prefix_of(catalog.chunk_name(2, 1))

    def test_parse(self, catalog):
        """Test that only names inside the catalog parse."""
        assert catalog.parse(Name.parse("/provider/song4/chunk2")) == (4, 2)
        assert catalog.parse(Name.parse("/provider/song5/chunk0")) is None
        assert catalog.parse(Name.parse("/provider/song1/chunk3")) is None
        assert catalog.parse(Name.parse("/other/song1/chunk0")) is None
        assert catalog.parse(Name.parse("/provider/songX/chunk0")) is None
        assert catalog.parse(Name.parse("/provider/song1")) is None

    def test_make_data(self, catalog):
        """Test that catalog Data carries its payload size and prefix."""
        data = catalog.make_data(catalog.chunk_name(1, 0))

        assert data is not None
        assert data.payload_size == 512
        assert data.routable_prefix == catalog.prefix(1)
        assert catalog.make_data(Name.parse("/provider/song9/chunk0")) is None

    def test_contains(self, catalog):
        """Test membership."""
        assert catalog.chunk_name(0, 0) in catalog
        assert "not a name" not in catalog


class TestZipf:
    """Test popularity and its calibration."""

    def test_probabilities_sum_to_one(self):
        """Test the rank distribution."""
        p = zipf_probabilities(100, 1.2)

        assert p.sum() == pytest.approx(1.0)
        assert np.all(np.diff(p) < 0)

    def test_alpha_zero_is_uniform(self):
        """Test that exponent zero gives the uniform share."""
        assert top_share(100, 0.0, 0.12) == pytest.approx(0.12)

    @pytest.mark.parametrize("n_songs", [10, 100, 1000])
    def test_calibration_hits_target(self, n_songs):
        """Test that the calibrated exponent gives the top 12% of songs 88% of requests."""
        alpha = calibrate_alpha(n_songs)

        assert top_share(n_songs, alpha, 0.12) == pytest.approx(0.88, abs=1e-6)

    def test_calibration_too_few_songs(self):
        """Test that fewer than ten songs cannot be calibrated."""
        with pytest.raises(CalibrationError, match="at least 10"):
            calibrate_alpha(9)

    def test_calibration_unreachable_mass(self):
        """Test that a target below the uniform share is refused."""
        with pytest.raises(CalibrationError):
            calibrate_alpha(100, top_fraction=0.5, mass=0.4)

    def test_draws_favor_top_songs(self):
        """Test that sampling follows the distribution."""
        popularity = ZipfPopularity(100, calibrate_alpha(100))
        rng = np.random.default_rng(3)

        draws = np.array([popularity.draw(rng) for _ in range(20_000)])

        assert np.mean(draws < 12) == pytest.approx(0.88, abs=0.01)
        assert np.bincount(draws).argmax() == 0

    def test_from_config_fixed_alpha(self):
        """Test that a configured exponent skips calibration."""
        popularity = ZipfPopularity.from_config(WorkloadConfig(n_songs=20, zipf_alpha=0.8))

        assert popularity.alpha == 0.8
        assert popularity.n_songs == 20

    def test_invalid_parameters(self):
        """Test that an empty catalog is rejected."""
        with pytest.raises(CalibrationError):
            ZipfPopularity(0, 1.0)
