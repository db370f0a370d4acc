"""Radar parameter container and first-order performance metrics.

All quantities are SI unless the name says otherwise. Slow time is indexed by
pulse q = 0..Q-1, fast time by sample p = 0..P-1, transmit elements by
m = 0..M-1 and receive elements by n = 0..N-1 (all 0-based).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# 4-significant-figure value; keeps derived metrics aligned with the usual
# automotive-radar quick figures (v_max ~ 79.06 m/s at 79 GHz / 12 us PRI).
SPEED_OF_LIGHT = 2.998e8


@dataclass(frozen=True)
class RadarParams:
    """Static description of one FMCW MIMO coherent processing interval.

    carrier_freq_hz : chirp start/carrier frequency f_c
    bandwidth_hz    : swept bandwidth B of each chirp
    chirp_time_s    : pulse repetition interval T_p (one chirp per PRI)
    num_pulses      : Q, pulses in the CPI
    num_tx          : M, transmit elements (ULA)
    num_rx          : N, receive elements (ULA)
    fast_time_samples : P, complex samples taken per PRI
    tx_spacing_wavelengths : transmit element spacing d_t in wavelengths
    rx_spacing_wavelengths : receive element spacing d_r in wavelengths;
        defaults to M * d_t so the virtual array is filled
    """

    carrier_freq_hz: float
    bandwidth_hz: float
    chirp_time_s: float
    num_pulses: int
    num_tx: int
    num_rx: int
    fast_time_samples: int = 1024
    tx_spacing_wavelengths: float = 0.5
    rx_spacing_wavelengths: float | None = field(default=None)

    def __post_init__(self):
        positive = {
            "carrier_freq_hz": self.carrier_freq_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "chirp_time_s": self.chirp_time_s,
            "num_pulses": self.num_pulses,
            "num_tx": self.num_tx,
            "num_rx": self.num_rx,
            "fast_time_samples": self.fast_time_samples,
            "tx_spacing_wavelengths": self.tx_spacing_wavelengths,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.rx_spacing_wavelengths is None:
            object.__setattr__(
                self, "rx_spacing_wavelengths",
                self.num_tx * self.tx_spacing_wavelengths)
        elif not self.rx_spacing_wavelengths > 0:
            raise ValueError("rx_spacing_wavelengths must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def chirp_rate(self) -> float:
        """Sweep slope beta = B / T_p in Hz/s."""
        return self.bandwidth_hz / self.chirp_time_s

    @property
    def sample_rate(self) -> float:
        """Fast-time sampling rate f_s = P / T_p."""
        return self.fast_time_samples / self.chirp_time_s


@dataclass(frozen=True)
class Metrics:
    """First-order resolution and ambiguity limits of a CPI."""

    range_resolution_m: float
    max_range_m: float
    velocity_resolution_mps: float
    max_velocity_mps: float


def derive_metrics(params: RadarParams) -> Metrics:
    """Resolution and unambiguous limits for one CPI.

    Delta_R = c / 2B, R_max = c f_s T_p / 4B, Delta_v = lambda / 2 Q T_p and
    v_max = lambda / 4 T_p. R_max / Delta_R == P / 2 holds exactly.
    """
    c = SPEED_OF_LIGHT
    lam = params.wavelength
    t_p = params.chirp_time_s
    return Metrics(
        range_resolution_m=c / (2.0 * params.bandwidth_hz),
        max_range_m=c * params.sample_rate * t_p / (4.0 * params.bandwidth_hz),
        velocity_resolution_mps=lam / (2.0 * params.num_pulses * t_p),
        max_velocity_mps=lam / (4.0 * t_p),
    )


def steering_vector(num_elements: int, spacing_wavelengths: float,
                    sin_theta: float) -> np.ndarray:
    """ULA steering vector, entry m = exp(-j 2 pi spacing m sin_theta).

    Element 0 is the phase reference. sin_theta must lie in [-1, 1].
    """
    if num_elements < 1:
        raise ValueError(f"num_elements must be >= 1, got {num_elements}")
    if not np.isfinite(sin_theta) or abs(sin_theta) > 1.0:
        raise ValueError(f"sin_theta must be in [-1, 1], got {sin_theta!r}")
    m = np.arange(num_elements)
    return np.exp(-2j * np.pi * spacing_wavelengths * m * sin_theta)


if __name__ == "__main__":
    p = RadarParams(carrier_freq_hz=79e9, bandwidth_hz=300e6,
                    chirp_time_s=12e-6, num_pulses=512, num_tx=8, num_rx=12)
    m = derive_metrics(p)
    print(f"lambda = {p.wavelength*1e3:.4f} mm, f_s = {p.sample_rate/1e6:.1f} MHz")
    print(f"dR = {m.range_resolution_m:.4f} m  Rmax = {m.max_range_m:.2f} m")
    print(f"dv = {m.velocity_resolution_mps:.4f} m/s  vmax = {m.max_velocity_mps:.2f} m/s")
