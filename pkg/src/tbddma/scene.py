"""Multi-target scene synthesis of the dechirped receive data cube.

The cube holds IF samples directly: carrier-rate waveform synthesis is skipped
because dechirping reduces every target to a product of three tones, one per
axis (fast time, slow time, element index). For a target at range R, velocity
v, direction sin(theta), the sample at receiver n, fast-time p, pulse q is

    sigma * [a_t(theta) @ W[:, q]] * exp(-2j pi nu p) * exp(-2j pi fd q)
          * exp(-2j pi n d_r sin(theta))

with nu = (2 R B / c + fd) / P the beat frequency (Doppler-coupled) and
fd = 2 v T_p / lambda the normalized Doppler shift.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modmat import PhaseModulationMatrix
from .params import SPEED_OF_LIGHT, RadarParams, derive_metrics, steering_vector


class Fading(Enum):
    FIXED = "fixed"
    SWERLING_I = "swerling1"


@dataclass(frozen=True)
class Target:
    """Point target. mean_amplitude is the RMS amplitude for Swerling I."""

    range_m: float
    velocity_mps: float
    sin_angle: float = 0.0
    mean_amplitude: float = 1.0
    fading: Fading = Fading.FIXED

    def __post_init__(self):
        if self.range_m < 0:
            raise ValueError(f"range_m must be nonnegative, got {self.range_m}")
        if abs(self.sin_angle) > 1.0:
            raise ValueError(f"sin_angle must be in [-1, 1], got {self.sin_angle}")
        if not self.mean_amplitude > 0:
            raise ValueError("mean_amplitude must be positive")


@dataclass(frozen=True)
class NoiseConfig:
    """input_snr_db = None disables noise. The seed also drives fading draws.

    SNR is per sample and per receive element: the power of a unit-amplitude
    single-transmitter echo over the noise power, before any FFT gain.
    """

    input_snr_db: float | None
    seed: int = 0


@dataclass(frozen=True)
class DataCube:
    """Receive samples indexed (receiver n, fast-time p, pulse q)."""

    samples: np.ndarray
    params: RadarParams
    modulation: PhaseModulationMatrix

    def __post_init__(self):
        n, p, q = self.samples.shape
        if (n, p, q) != (self.params.num_rx, self.params.fast_time_samples,
                         self.params.num_pulses):
            raise ValueError(
                f"cube shape {self.samples.shape} does not match params "
                f"({self.params.num_rx}, {self.params.fast_time_samples}, "
                f"{self.params.num_pulses})")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("cube contains non-finite samples")
        self.samples.setflags(write=False)


def normalized_doppler(params: RadarParams, velocity_mps: float) -> float:
    """f_d * T_p = 2 v T_p / lambda."""
    return 2.0 * velocity_mps * params.chirp_time_s / params.wavelength


def simulate_rx(params: RadarParams, W: PhaseModulationMatrix, targets,
                noise: NoiseConfig, dtype=np.complex128) -> DataCube:
    """Synthesize the dechirped cube for a list of targets under coding W.

    All random draws (one fading coefficient per Swerling target, then the
    noise block) happen serially in target-list order from a single seeded
    generator, so results are reproducible regardless of how the deterministic
    accumulation below is vectorized. dtype complex64 roughly halves runtime
    and memory for Monte Carlo use.
    """
    M, Q, P, N = params.num_tx, params.num_pulses, params.fast_time_samples, params.num_rx
    if W.entries.shape != (M, Q):
        raise ValueError(f"W shape {W.entries.shape} does not match params ({M}, {Q})")

    r_max = derive_metrics(params).max_range_m
    for t in targets:
        if t.range_m >= r_max:
            warnings.warn(f"target at {t.range_m} m beyond unambiguous range "
                          f"{r_max:.1f} m; beat frequency folds", stacklevel=2)

    rng = np.random.default_rng(noise.seed)
    sigmas = []
    for t in targets:
        if t.fading is Fading.SWERLING_I:
            g = rng.standard_normal() + 1j * rng.standard_normal()
            sigmas.append(t.mean_amplitude * g / np.sqrt(2.0))
        else:
            sigmas.append(complex(t.mean_amplitude))

    p_idx = np.arange(P)
    q_idx = np.arange(Q)
    cube = np.zeros((N, P, Q), dtype=dtype)
    for t, sigma in zip(targets, sigmas):
        fd = normalized_doppler(params, t.velocity_mps)
        nu = (2.0 * t.range_m * params.bandwidth_hz / SPEED_OF_LIGHT + fd) / P
        tx = steering_vector(M, params.tx_spacing_wavelengths, t.sin_angle)
        rx = steering_vector(N, params.rx_spacing_wavelengths, t.sin_angle)
        slow = (tx @ W.entries) * np.exp(-2j * np.pi * fd * q_idx)
        fast = np.exp(-2j * np.pi * nu * p_idx)
        cube += (sigma * rx[:, None, None] * fast[None, :, None]
                 * slow[None, None, :]).astype(dtype)

    if noise.input_snr_db is not None:
        scale = np.sqrt(10.0 ** (-noise.input_snr_db / 10.0) / 2.0)
        float_dtype = np.float32 if dtype == np.complex64 else np.float64
        re = rng.standard_normal(cube.shape, dtype=float_dtype)
        im = rng.standard_normal(cube.shape, dtype=float_dtype)
        cube += (scale * (re + 1j * im)).astype(dtype)

    return DataCube(cube, params, W)


def select_pulses(cube: DataCube, W: PhaseModulationMatrix) -> DataCube:
    """Decimate a cube by the pulse selection of a beam-selected matrix.

    Models forming the beam-selected receive signal at the receiver: the cube
    must have been simulated with the W matrix's source slot count worth of
    virtual pulses, and W.pulse_selection picks the kept columns.
    """
    if W.pulse_selection is None:
        raise ValueError("W carries no pulse selection")
    vsel = W.pulse_selection
    if vsel.max() >= cube.params.num_pulses:
        raise ValueError(
            f"selection needs {vsel.max() + 1} source pulses, cube has "
            f"{cube.params.num_pulses}")
    new_params = dataclasses.replace(cube.params, num_pulses=len(vsel))
    return DataCube(np.ascontiguousarray(cube.samples[:, :, vsel]), new_params, W)
