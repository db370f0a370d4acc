"""Tests for radar parameter handling and derived metrics."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tbddma import RadarParams, SPEED_OF_LIGHT, derive_metrics, steering_vector


def make_params(**overrides):
    base = dict(
        carrier_freq_hz=79e9,
        bandwidth_hz=300e6,
        chirp_time_s=12e-6,
        num_pulses=512,
        num_tx=8,
        num_rx=12,
        fast_time_samples=512,
    )
    base.update(overrides)
    return RadarParams(**base)


class TestConstants:
    def test_speed_of_light_value(self):
        assert SPEED_OF_LIGHT == 2.998e8


class TestRadarParams:
    def test_wavelength(self):
        p = make_params()
        assert p.wavelength == pytest.approx(SPEED_OF_LIGHT / 79e9, rel=1e-12)

    def test_chirp_rate(self):
        p = make_params()
        assert p.chirp_rate == pytest.approx(300e6 / 12e-6, rel=1e-12)

    def test_sample_rate(self):
        p = make_params()
        assert p.sample_rate == pytest.approx(512 / 12e-6, rel=1e-12)

    def test_default_spacings(self):
        # dense transmit array, receive spacing stretched to fill the
        # virtual aperture without holes
        p = make_params()
        assert p.tx_spacing_wavelengths == 0.5
        assert p.rx_spacing_wavelengths == pytest.approx(8 * 0.5)

    def test_explicit_rx_spacing_kept(self):
        p = make_params(rx_spacing_wavelengths=0.5)
        assert p.rx_spacing_wavelengths == 0.5

    def test_frozen(self):
        p = make_params()
        with pytest.raises(dataclasses.FrozenInstanceError):
            p.bandwidth_hz = 1e9

    @pytest.mark.parametrize(
        "name",
        [
            "carrier_freq_hz",
            "bandwidth_hz",
            "chirp_time_s",
            "num_pulses",
            "num_tx",
            "num_rx",
            "fast_time_samples",
            "tx_spacing_wavelengths",
        ],
    )
    def test_rejects_nonpositive(self, name):
        with pytest.raises(ValueError, match=name):
            make_params(**{name: 0})

    def test_rejects_nonpositive_rx_spacing(self):
        with pytest.raises(ValueError, match="rx_spacing_wavelengths"):
            make_params(rx_spacing_wavelengths=-1.0)


class TestMetrics:
    def test_typical_automotive_values(self):
        p = make_params(fast_time_samples=900)
        m = derive_metrics(p)
        assert m.range_resolution_m == pytest.approx(0.4997, abs=1e-3)
        assert m.max_velocity_mps == pytest.approx(79.07, abs=0.01)
        assert m.velocity_resolution_mps == pytest.approx(0.309, abs=1e-3)

    def test_max_range_short_chirp(self):
        # sampling faster over a shorter sweep stretches the beat band
        p = make_params(chirp_time_s=1.5e-6, fast_time_samples=900)
        m = derive_metrics(p)
        assert m.max_range_m == pytest.approx(224.85, abs=0.5)

    def test_range_identity(self):
        p = make_params(fast_time_samples=700)
        m = derive_metrics(p)
        assert m.max_range_m == pytest.approx(
            m.range_resolution_m * p.fast_time_samples / 2, rel=1e-12
        )

    def test_velocity_identity(self):
        p = make_params(num_pulses=384)
        m = derive_metrics(p)
        assert m.max_velocity_mps == pytest.approx(
            m.velocity_resolution_mps * p.num_pulses / 2, rel=1e-12
        )

    def test_formulas(self):
        p = make_params()
        m = derive_metrics(p)
        assert m.range_resolution_m == pytest.approx(
            SPEED_OF_LIGHT / (2 * p.bandwidth_hz), rel=1e-12
        )
        assert m.max_velocity_mps == pytest.approx(
            p.wavelength / (4 * p.chirp_time_s), rel=1e-12
        )

    def test_metrics_frozen(self):
        m = derive_metrics(make_params())
        with pytest.raises(dataclasses.FrozenInstanceError):
            m.max_range_m = 1.0


class TestSteeringVector:
    def test_quarter_cycle_phases(self):
        a = steering_vector(4, 0.5, 0.5)
        expect = np.exp(-1j * np.pi * np.arange(4) / 2)
        np.testing.assert_allclose(a, expect, atol=1e-12)

    def test_broadside_is_ones(self):
        np.testing.assert_allclose(steering_vector(6, 0.5, 0.0), np.ones(6))

    def test_unit_modulus(self):
        a = steering_vector(9, 1.5, -0.3)
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)

    @given(
        n=st.integers(min_value=1, max_value=32),
        d=st.floats(min_value=0.1, max_value=8.0),
        s=st.floats(min_value=-1.0, max_value=1.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_geometric_progression(self, n, d, s):
        a = steering_vector(n, d, s)
        assert a.shape == (n,)
        assert a[0] == pytest.approx(1.0)
        if n > 1:
            ratios = a[1:] / a[:-1]
            np.testing.assert_allclose(ratios, ratios[0], atol=1e-9)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            steering_vector(0, 0.5, 0.0)
        with pytest.raises(ValueError):
            steering_vector(4, 0.5, 1.5)
