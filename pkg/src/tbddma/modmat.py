"""Slow-time phase modulation matrices and their virtual beam structure.

A matrix W has one row per transmit element and one column per pulse. Element
(m, q) is the complex weight the m-th transmitter applies during pulse q.
Row m of a DDMA-family matrix is exp(-2j pi f_m q), a slow-time ramp that moves
that transmitter's echo to normalized Doppler f_m. Each column doubles as a
DFT beamforming vector, so pulse-to-pulse the array scans a fixed set of
directions; that is the structure the beam-selected (TB) variant exploits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg


class Scheme(Enum):
    TDMA = "tdma"
    DDMA = "ddma"
    EMPTY_SPECTRUM = "empty-spectrum-ddma"
    TB_DDMA = "tb-ddma"
    HADAMARD = "hadamard"


class Coding(Enum):
    # FIRST_BIN: f_m = m/M (row 0 unmodulated). CENTERED: shifts placed
    # symmetrically about zero so no row sits exactly on the spectrum edge.
    FIRST_BIN = "first-bin"
    CENTERED = "centered"


@dataclass(frozen=True)
class PhaseModulationMatrix:
    """Slow-time coding matrix with scheme metadata.

    entries        : complex (M, Q); row = transmit element, column = pulse
    scheme         : construction family
    coding         : Doppler-shift placement rule (None for TDMA/Hadamard)
    virtual_tx     : M_v, number of Doppler slots the rows are drawn from
                     (equals M except for empty-spectrum / TB variants)
    doppler_shifts : normalized Doppler shift f_m per row (None if N/A)
    pulse_selection: virtual-pulse index per physical pulse (TB variant only)
    """

    entries: np.ndarray
    scheme: Scheme
    coding: Coding | None
    virtual_tx: int
    doppler_shifts: np.ndarray | None
    pulse_selection: np.ndarray | None = None

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        if self.virtual_tx < self.num_tx:
            raise ValueError("virtual_tx must be >= number of rows")
        self.entries.setflags(write=False)

    @property
    def num_tx(self) -> int:
        return self.entries.shape[0]

    @property
    def num_pulses(self) -> int:
        return self.entries.shape[1]

    @property
    def period(self) -> int:
        """Pulses per scan cycle of the column (beam) pattern."""
        if self.scheme is Scheme.EMPTY_SPECTRUM:
            return self.virtual_tx
        return self.num_tx


@dataclass(frozen=True)
class VirtualBeamSet:
    """Directions scanned by the columns of a DDMA matrix, one scan period."""

    directions: np.ndarray  # sin(theta_v), ascending, each in (-1, 1]
    period: int


def _ddma_shifts(num_rows: int, slots: int, coding: Coding) -> np.ndarray:
    m = np.arange(num_rows)
    if coding is Coding.FIRST_BIN:
        return m / slots
    if coding is Coding.CENTERED:
        return 0.5 * (-1.0 + (2.0 * m + 1.0) / slots)
    raise ValueError(f"unknown coding {coding!r}")


def _check_divisible(Q: int, M: int):
    if Q % M != 0:
        raise ValueError(f"num_pulses {Q} not divisible by {M}")


def tdma_matrix(M: int, Q: int) -> PhaseModulationMatrix:
    """Switched transmission: identity blocks repeated Q/M times.

    Column q lights up element q mod M only.
    """
    _check_divisible(Q, M)
    entries = np.tile(np.eye(M, dtype=complex), Q // M)
    return PhaseModulationMatrix(entries, Scheme.TDMA, None, M, None)


def ddma_matrix(M: int, Q: int, coding: Coding = Coding.FIRST_BIN) -> PhaseModulationMatrix:
    """All elements transmit every pulse, separated by slow-time phase ramps.

    Entry (m, q) = exp(-2j pi f_m q) with the shifts f_m spread uniformly at
    spacing 1/M across the normalized Doppler interval.
    """
    _check_divisible(Q, M)
    f = _ddma_shifts(M, M, coding)
    entries = np.exp(-2j * np.pi * np.outer(f, np.arange(Q)))
    return PhaseModulationMatrix(entries, Scheme.DDMA, coding, M, f)


def hadamard_matrix(M: int, Q: int) -> PhaseModulationMatrix:
    """Repeated Sylvester Hadamard blocks (+/-1 entries). M a power of two."""
    if M < 1 or (M & (M - 1)) != 0:
        raise ValueError(f"Hadamard block requires power-of-two size, got M={M}")
    _check_divisible(Q, M)
    block = scipy.linalg.hadamard(M).astype(complex)
    entries = np.tile(block, Q // M)
    return PhaseModulationMatrix(entries, Scheme.HADAMARD, None, M, None)


def empty_spectrum_matrix(M: int, M_v: int, Q: int,
                          coding: Coding = Coding.FIRST_BIN) -> PhaseModulationMatrix:
    """First M rows of an M_v-slot DDMA matrix, M < M_v.

    Only the fraction M/M_v of the Doppler spectrum is occupied; the reserved
    remainder anchors the transmitter-to-peak assignment during ambiguity
    recovery. M_v must divide Q so every shift lands on an integer FFT bin.
    """
    if M >= M_v:
        raise ValueError(f"need M < M_v, got M={M}, M_v={M_v}")
    _check_divisible(Q, M_v)
    f = _ddma_shifts(M, M_v, coding)
    entries = np.exp(-2j * np.pi * np.outer(f, np.arange(Q)))
    return PhaseModulationMatrix(entries, Scheme.EMPTY_SPECTRUM, coding, M_v, f)


def tb_ddma_matrix(M: int, M_v: int, Q: int, beam_indices) -> PhaseModulationMatrix:
    """Beam-selected DDMA: keep the pulses whose DFT beams cover a chosen region.

    An M_v-slot DDMA matrix over Q_v = (Q/M) * M_v virtual pulses scans M_v
    beam directions per cycle. Physical pulse k reuses the virtual pulse whose
    in-cycle index is the (k mod M)-th chosen beam; beam_indices are 1-based
    in-cycle positions (sorted ascending before use).
    """
    beams = np.array(sorted(set(int(b) for b in beam_indices)))
    if beams.size != M:
        raise ValueError(f"need exactly M={M} distinct beam indices, got {beams.size}")
    if beams.min() < 1 or beams.max() > M_v:
        raise ValueError(f"beam indices must lie in [1, {M_v}]")
    _check_divisible(Q, M)
    k = np.arange(Q)
    vsel = (k // M) * M_v + (beams[k % M] - 1)
    f = _ddma_shifts(M, M_v, Coding.FIRST_BIN)
    entries = np.exp(-2j * np.pi * np.outer(f, vsel))
    return PhaseModulationMatrix(entries, Scheme.TB_DDMA, Coding.FIRST_BIN,
                                 M_v, f, pulse_selection=vsel)


def virtual_beam_directions(M: int) -> VirtualBeamSet:
    """Directions sin(theta_v) = 2 q*/M for the M integers q* in (-M/2, M/2].

    Half-wavelength element spacing assumed; the set repeats every M pulses.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    q_star = np.arange(-((M - 1) // 2), M // 2 + 1)
    return VirtualBeamSet(directions=2.0 * q_star / M, period=M)


def phase_trajectory(W: PhaseModulationMatrix, tx_index: int) -> np.ndarray:
    """Applied phase-shifter value per pulse for one row, in [0, 2 pi).

    A FirstBin DDMA row with shift f_m ramps by 2 pi f_m per pulse (mod 2 pi);
    beam-selected matrices show an extra cyclic jump where the selection skips
    virtual pulses.
    """
    if not 0 <= tx_index < W.num_tx:
        raise ValueError(f"tx_index {tx_index} out of range for {W.num_tx} rows")
    return np.mod(-np.angle(W.entries[tx_index]), 2.0 * np.pi)
