"""Built-in experiment configurations with file emission.

Four canned setups around a 79 GHz, 300 MHz, 8-transmitter, 12-receiver
array exercise the toolkit end to end: plain DDMA against TDMA, ambiguity
recovery with a half-empty Doppler spectrum, beam-selected DDMA where the
recovery order matters, and the two beamspace designs (fast-time SDP,
slow-time DFT beam selection). Each writes deterministic figure-equivalent
data files and returns the manifest.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .modmat import ddma_matrix, empty_spectrum_matrix, tb_ddma_matrix, tdma_matrix
from .params import SPEED_OF_LIGHT, Metrics, RadarParams, derive_metrics
from .rdproc import (DetectionConfig, RangeDopplerMap, binary_detection,
                     demultiplex, detect_and_estimate, estimate_threshold,
                     range_doppler_map)
from .scene import (DataCube, Fading, NoiseConfig, Target, normalized_doppler,
                    select_pulses, simulate_rx)
from .tbdesign import TBDesignConfig, beampattern, design_tb, slow_time_tb_pattern, \
    taylor_window

CARRIER_HZ = 79e9
BANDWIDTH_HZ = 300e6
NUM_TX = 8
NUM_RX = 12
NUM_PULSES = 512

EXAMPLE3_BEAMS = (1, 2, 3, 4, 13, 14, 15, 16)
EXAMPLE4_BEAMS = (1, 2, 3, 4, 5, 22, 23, 24)
EXAMPLE4_SLOTS = 24


@dataclass
class ResultBundle:
    """What a run produced: derived metrics, detections, and output files."""

    metrics: Metrics | None
    detections: list = field(default_factory=list)
    files: dict[str, Path] = field(default_factory=dict)


def standard_params(chirp_time_s: float, fast_time_samples: int,
                    num_pulses: int = NUM_PULSES, num_rx: int = NUM_RX) -> RadarParams:
    return RadarParams(carrier_freq_hz=CARRIER_HZ, bandwidth_hz=BANDWIDTH_HZ,
                       chirp_time_s=chirp_time_s, num_pulses=num_pulses,
                       num_tx=NUM_TX, num_rx=num_rx,
                       fast_time_samples=fast_time_samples)


def noncoherent_sum(maps) -> RangeDopplerMap:
    """Root of the summed per-receiver power, as a map for export/peak work."""
    power = np.zeros(maps[0].values.shape)
    for m in maps:
        power += np.abs(m.values) ** 2
    return RangeDopplerMap(np.sqrt(power), maps[0].range_axis_m, maps[0].doppler_axis)


def _slice_csv(path: Path, doppler: np.ndarray, values: np.ndarray,
               floor: float = 1e-12) -> Path:
    db = 20.0 * np.log10(np.maximum(np.abs(values), floor))
    np.savetxt(path, np.column_stack([doppler, db]), fmt=fileio.CSV_FLOAT,
               delimiter=",", header="doppler_norm,value_db", comments="")
    return path


def _example1(seed: int, out: Path, fast_time: int | None, plot: bool) -> ResultBundle:
    # short chirp: unambiguous range limit ~225 m, so the map is clipped there
    params = standard_params(1.5e-6, fast_time or 900)
    targets = [
        Target(50.0, 0.0, fading=Fading.SWERLING_I),
        Target(100.0, 40.0, fading=Fading.SWERLING_I),
        Target(150.0, -40.0, fading=Fading.SWERLING_I),
    ]
    cube = simulate_rx(params, ddma_matrix(NUM_TX, params.num_pulses), targets,
                       NoiseConfig(None, seed))
    summed = noncoherent_sum(range_doppler_map(cube, "hann"))
    half = params.fast_time_samples // 2
    clipped = RangeDopplerMap(summed.values[:half], summed.range_axis_m[:half],
                              summed.doppler_axis)
    files = {
        "ddma_map_csv": fileio.write_map_csv(out / "ex1_ddma_map.csv", clipped),
        "ddma_map_rdmx": fileio.write_matrix(out / "ex1_ddma_map.rdmx", clipped.values),
    }

    # TDMA needs the long-range trio; only every M-th pulse carries a given
    # transmitter, so the per-element map has Q/M Doppler bins
    params_t = standard_params(1.5e-6, fast_time or 4096, num_rx=1)
    targets_t = [Target(400.0, 0.0), Target(800.0, 40.0), Target(1200.0, -40.0)]
    cube_t = simulate_rx(params_t, tdma_matrix(NUM_TX, params_t.num_pulses),
                         targets_t, NoiseConfig(-10.0, seed))
    sub = np.ascontiguousarray(cube_t.samples[:, :, 0::NUM_TX])
    params_sub = dataclasses.replace(params_t, num_pulses=params_t.num_pulses // NUM_TX)
    cube_sub = DataCube(sub, params_sub, tdma_matrix(NUM_TX, params_sub.num_pulses))
    map_t = range_doppler_map(cube_sub, "hann")[0]
    files["tdma_map_csv"] = fileio.write_map_csv(out / "ex1_tdma_map.csv", map_t)
    return ResultBundle(derive_metrics(params), [], files)


def example2_setup(seed: int, fast_time: int | None = None):
    """The half-empty-spectrum rig: shared by reproduce(2) and the bundled scenario."""
    params = standard_params(12e-6, fast_time or 1024)
    W = empty_spectrum_matrix(NUM_TX, 2 * NUM_TX, params.num_pulses)
    targets = [
        Target(400.0, 40.0, fading=Fading.SWERLING_I),
        Target(800.0, -35.0, fading=Fading.SWERLING_I),
        Target(1200.0, -15.0, fading=Fading.SWERLING_I),
    ]
    return params, W, targets, NoiseConfig(-10.0, seed)


def _example2(seed: int, out: Path, fast_time: int | None, plot: bool) -> ResultBundle:
    params, W, targets, noise = example2_setup(seed, fast_time)
    cube = simulate_rx(params, W, targets, noise)
    cfg = DetectionConfig()
    maps = range_doppler_map(cube, cfg.window)
    threshold = estimate_threshold(maps, cfg.threshold_scale)
    fused = binary_detection(maps, threshold)
    detections = detect_and_estimate(cube, cfg)
    summed = noncoherent_sum(maps)
    files = {
        "map_csv": fileio.write_map_csv(out / "ex2_map.csv", summed),
        "map_rdmx": fileio.write_matrix(out / "ex2_map.rdmx", summed.values),
        "binary_rdmx": fileio.write_matrix(out / "ex2_binary.rdmx",
                                           fused.matrix.astype(np.complex64)),
        "detections_csv": fileio.write_detections_csv(
            out / "ex2_detections.csv", detections, params),
    }
    return ResultBundle(derive_metrics(params), detections, files)


def example3_velocities(params: RadarParams) -> list[float]:
    # Doppler picked as exact rationals so the pair separation is exactly 1/8
    fractions = (0.25, -9.0 / 40.0, -0.1)
    scale = params.wavelength / (2.0 * params.chirp_time_s)
    return [f * scale for f in fractions]


def _example3(seed: int, out: Path, fast_time: int | None, plot: bool) -> ResultBundle:
    params = standard_params(12e-6, fast_time or 1024)
    W_tb = tb_ddma_matrix(NUM_TX, 2 * NUM_TX, params.num_pulses, EXAMPLE3_BEAMS)
    v1, v2, v3 = example3_velocities(params)
    targets = [Target(400.0, v1), Target(800.0, v2), Target(1200.0, v3)]

    # physical beam-selected transmission: Doppler slices of the second and
    # third target land in the same demultiplexed position
    cube_p = simulate_rx(params, W_tb, targets, NoiseConfig(None, seed))
    summed = noncoherent_sum(range_doppler_map(cube_p, "hann"))
    files = {"map_csv": fileio.write_map_csv(out / "ex3_map.csv", summed)}
    subs = demultiplex(summed, W_tb)
    # row of each target: strongest row of the summed map near its folded beat
    P = params.fast_time_samples
    for label, target in (("t2", targets[1]), ("t3", targets[2])):
        beat = (2.0 * target.range_m * params.bandwidth_hz / SPEED_OF_LIGHT
                + normalized_doppler(params, target.velocity_mps))
        row = int(np.round(beat)) % P
        window = [(row + d) % P for d in (-2, -1, 0, 1, 2)]
        row = window[int(np.argmax([summed.values[r].max() for r in window]))]
        best = max(subs, key=lambda s: float(np.abs(s.values[row]).max()))
        files[f"slice_{label}_csv"] = _slice_csv(
            out / f"ex3_slice_{label}.csv", best.doppler_axis, best.values[row])

    # virtual-pulse flow: run recovery on the uncoded half-empty spectrum at
    # the full virtual pulse count, then resample down to the selected pulses
    params_v = dataclasses.replace(params, num_pulses=2 * params.num_pulses)
    W_es = empty_spectrum_matrix(NUM_TX, 2 * NUM_TX, params_v.num_pulses)
    cube_v = simulate_rx(params_v, W_es, targets, NoiseConfig(-10.0, seed))
    detections = detect_and_estimate(cube_v)
    select_pulses(cube_v, W_tb)  # the resampled cube is the physical one's model
    files["recovered_detections_csv"] = fileio.write_detections_csv(
        out / "ex3_recovered_detections.csv", detections, params_v)
    return ResultBundle(derive_metrics(params), detections, files)


def _example4(seed: int, out: Path, fast_time: int | None, plot: bool) -> ResultBundle:
    cfg = TBDesignConfig(num_tx=NUM_TX, num_waveforms=4, region=0.5,
                         randomization_seed=seed)
    tb = design_tb(cfg)
    fast_pattern = beampattern(tb.matrix, cfg.spacing_wavelengths, cfg.grid)
    W = tb_ddma_matrix(NUM_TX, EXAMPLE4_SLOTS, NUM_PULSES, EXAMPLE4_BEAMS)
    slow_pattern = slow_time_tb_pattern(W, taylor_window(NUM_TX))
    files = {
        "tb_matrix_rdmx": fileio.write_matrix(out / "ex4_tb_matrix.rdmx", tb.matrix),
        "fast_pattern_csv": fileio.write_pattern_csv(out / "ex4_fast_pattern.csv",
                                                     fast_pattern),
        "slow_pattern_csv": fileio.write_pattern_csv(out / "ex4_slow_pattern.csv",
                                                     slow_pattern),
    }
    if plot:
        files["fast_pattern_svg"] = fileio.write_pattern_svg(
            out / "ex4_fast_pattern.svg", fast_pattern, "fast-time TB pattern")
        files["slow_pattern_svg"] = fileio.write_pattern_svg(
            out / "ex4_slow_pattern.svg", slow_pattern, "slow-time DFT TB pattern")
    return ResultBundle(None, [], files)


_EXAMPLES = {1: _example1, 2: _example2, 3: _example3, 4: _example4}


def resolve_out_dir(out_dir=None) -> Path:
    out = Path(out_dir or os.environ.get("TBDDMA_OUT_DIR") or "tbddma_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def reproduce(example_id: int, seed: int = 0, out_dir=None,
              fast_time_samples: int | None = None, plot: bool = True) -> ResultBundle:
    """Run one of the built-in examples; returns the emitted-file manifest."""
    if example_id not in _EXAMPLES:
        raise ValueError(f"example_id must be 1..4, got {example_id}")
    out = resolve_out_dir(out_dir)
    return _EXAMPLES[example_id](seed, out, fast_time_samples, plot)
