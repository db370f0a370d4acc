"""Slow-time coded FMCW MIMO radar toolkit.

Construction of slow-time phase modulation matrices (TDMA, DDMA and variants,
Hadamard, beam-selected DDMA), dechirped data-cube simulation, range-Doppler
processing with Doppler-ambiguity recovery, and fast-time transmit-beamspace
design via semidefinite programming.
"""

from .params import SPEED_OF_LIGHT, Metrics, RadarParams, derive_metrics, steering_vector
from .modmat import (
    Coding,
    PhaseModulationMatrix,
    Scheme,
    VirtualBeamSet,
    ddma_matrix,
    empty_spectrum_matrix,
    hadamard_matrix,
    phase_trajectory,
    tb_ddma_matrix,
    tdma_matrix,
    virtual_beam_directions,
)
from .scene import DataCube, Fading, NoiseConfig, Target, select_pulses, simulate_rx
from .rdproc import (
    BinaryMatrix,
    Detection,
    DetectionConfig,
    RangeDopplerMap,
    binary_detection,
    consolidate_peaks,
    demultiplex,
    detect_and_estimate,
    estimate_threshold,
    range_doppler_map,
    reassemble,
    recover_doppler,
    sequence_test,
)
from .tbdesign import (
    Beampattern,
    TBDesignConfig,
    TBMatrix,
    beampattern,
    conjugate_counterpart,
    design_tb,
    slow_time_tb_pattern,
    taylor_window,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT", "RadarParams", "Metrics", "derive_metrics", "steering_vector",
    "Scheme", "Coding", "PhaseModulationMatrix", "VirtualBeamSet",
    "tdma_matrix", "ddma_matrix", "hadamard_matrix", "empty_spectrum_matrix",
    "tb_ddma_matrix", "virtual_beam_directions", "phase_trajectory",
    "Target", "Fading", "NoiseConfig", "DataCube", "simulate_rx", "select_pulses",
    "RangeDopplerMap", "BinaryMatrix", "Detection", "DetectionConfig",
    "range_doppler_map", "estimate_threshold", "binary_detection",
    "consolidate_peaks", "sequence_test", "recover_doppler", "demultiplex",
    "reassemble", "detect_and_estimate",
    "TBDesignConfig", "TBMatrix", "Beampattern", "design_tb",
    "conjugate_counterpart", "beampattern", "taylor_window", "slow_time_tb_pattern",
    "__version__",
]
