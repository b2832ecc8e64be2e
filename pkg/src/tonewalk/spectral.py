"""Normalized block DFT and coarse carrier-frequency estimation.

The per-block carrier estimate is the coarse peak search: argmax of the
power spectrum quantized to the DFT bin grid, mapped to an effective
frequency in ``[-fs/2, fs/2)``.  No fine interpolation stage is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_model import BlockConfig, BlockRecord

__all__ = [
    "Spectrum",
    "CarrierEstimates",
    "dft",
    "bin_frequency",
    "estimate_carriers",
    "estimator_error_variance",
]


@dataclass(frozen=True)
class Spectrum:
    """1/N-normalized DFT coefficients of one block and their power."""

    coefficients: np.ndarray
    power: np.ndarray


@dataclass(frozen=True)
class CarrierEstimates:
    """Per-block peak bins and the carrier frequencies they map to."""

    peak_bins: np.ndarray
    carrier_freqs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "peak_bins", np.asarray(self.peak_bins, dtype=np.int64))
        object.__setattr__(self, "carrier_freqs", np.asarray(self.carrier_freqs, dtype=np.float64))
        if len(self.peak_bins) != len(self.carrier_freqs):
            raise ValueError("peak_bins and carrier_freqs must have equal length")


def dft(block: np.ndarray) -> Spectrum:
    """1/N-normalized DFT: X_m = (1/N) sum_n x_n exp(-2*pi*i*n*m/N)."""
    block = np.asarray(block, dtype=np.complex128)
    if block.ndim != 1 or len(block) == 0:
        raise ValueError("block must be a non-empty 1-D array")
    coeff = np.fft.fft(block) / len(block)
    return Spectrum(coefficients=coeff, power=np.abs(coeff) ** 2)


def bin_frequency(m: int, config: BlockConfig) -> float:
    """Effective frequency of DFT bin m: m/(NT) below N/2, (m-N)/(NT) above."""
    n = config.n_per_block
    if not 0 <= m <= n - 1:
        raise ValueError(f"bin index {m} outside 0..{n - 1}")
    if m < n // 2:
        return m / (n * config.sample_period)
    return (m - n) / (n * config.sample_period)


def _bin_frequencies(bins: np.ndarray, config: BlockConfig) -> np.ndarray:
    n = config.n_per_block
    half = n // 2
    shifted = np.where(bins < half, bins, bins - n)
    return shifted / (n * config.sample_period)


def estimate_carriers(record: BlockRecord, config: BlockConfig) -> CarrierEstimates:
    """Coarse peak search on every block of the record.

    Ties in the power spectrum break toward the smallest bin index, which is
    what ``argmax`` returns, so the estimate is deterministic.
    """
    if record.n_per_block != config.n_per_block or record.n_blocks != config.n_blocks:
        raise ValueError(
            f"record shape (N={record.n_per_block}, K={record.n_blocks}) does not "
            f"match config (N={config.n_per_block}, K={config.n_blocks})"
        )
    coeffs = np.fft.fft(record.blocks, axis=1) / config.n_per_block
    peak_bins = np.argmax(np.abs(coeffs) ** 2, axis=1)
    return CarrierEstimates(
        peak_bins=peak_bins,
        carrier_freqs=_bin_frequencies(peak_bins, config),
    )


def estimator_error_variance(config: BlockConfig, snr: float) -> float:
    """Nominal peak-location error variance of the coarse tone estimator.

    Evaluates (1/N) * 6 / ((2*pi*N*T)^2 * snr); this is the classical
    large-N accuracy bound for single-tone frequency estimation with the
    stated SNR convention (amplitude^2 over total complex noise variance).
    """
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    n = config.n_per_block
    t = config.sample_period
    return (1.0 / n) * 6.0 / ((2.0 * np.pi * n * t) ** 2 * snr)
