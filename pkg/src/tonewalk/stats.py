"""Moment statistics, closed-form variances and normal-quantile machinery.

Everything here is shared by the detectors: degrees-of-freedom estimation
from sample kurtosis, the Wilson-Hilferty cube-root normalization, the two
closed-form first-difference variances, and the Sidak multiple-test
correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DegenerateSeriesError, InvalidDofError
from .signal_model import BlockConfig, JumpModel

__all__ = [
    "DiffSeries",
    "MomentSummary",
    "moments",
    "noise_only_diff_variance",
    "random_walk_diff_variance",
    "wilson_hilferty",
    "normal_cdf",
    "normal_quantile",
    "sidak",
]


@dataclass(frozen=True)
class DiffSeries:
    """First differences of the K per-block carrier estimates (length K-1)."""

    values: np.ndarray
    source_len: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1:
            raise ValueError("values must be 1-D")
        if len(self.values) != self.source_len - 1:
            raise ValueError(
                f"difference series of {len(self.values)} values does not match "
                f"source_len {self.source_len}"
            )

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MomentSummary:
    """Sample moments of a difference series plus the implied DoF estimate.

    ``variance`` uses divisor K-2 on the K-1 differences (unbiased form);
    ``kurtosis`` is the plain Pearson moment ratio m4/m2**2 so that a
    Gaussian population tends to 3 and the DoF estimate to K-2.
    """

    mean: float
    variance: float
    kurtosis: float
    dof: float


def moments(series: DiffSeries) -> MomentSummary:
    """Mean, variance, kurtosis and DoF estimate of a difference series.

    DoF = 2*(K-1) / (kurtosis - (K-4)/(K-2)) with K the source length.

    Raises
    ------
    DegenerateSeriesError
        If the series is constant (kurtosis undefined).
    InvalidDofError
        If the DoF denominator is not positive.
    """
    y = series.values
    n = len(y)
    if n < 4:
        raise ValueError(f"need at least 4 differences for kurtosis, got {n}")
    mean = float(np.mean(y))
    centered = y - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateSeriesError("constant difference series: kurtosis undefined")
    m4 = float(np.mean(centered**4))
    kurtosis = m4 / m2**2
    variance = float(np.sum(centered**2)) / (n - 1)
    k = series.source_len
    denom = kurtosis - (k - 4) / (k - 2)
    if denom <= 0:
        raise InvalidDofError(f"invalid DoF: kurtosis {kurtosis:.6g} too small for K={k}")
    dof = 2.0 * (k - 1) / denom
    return MomentSummary(mean=mean, variance=variance, kurtosis=kurtosis, dof=dof)


def noise_only_diff_variance(config: BlockConfig) -> float:
    """Variance of carrier first differences when the record is pure noise.

    Peak bins are then uniform over the N bins, giving
    (1/6) * [(1/T)^2 - (1/(N*T))^2].
    """
    t = config.sample_period
    n = config.n_per_block
    return (1.0 / 6.0) * ((1.0 / t) ** 2 - (1.0 / (n * t)) ** 2)


def random_walk_diff_variance(config: BlockConfig, snr: float, jump_model: JumpModel) -> float:
    """Closed-form variance of carrier first differences under a stable walk.

    (1/N) * 12 / ((2*pi*N*T)^2 * snr) plus 9/24*(1/(N*T))^2 for ternary
    jumps or 14/24*(1/(N*T))^2 for rounded-normal jumps.
    """
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    n = config.n_per_block
    t = config.sample_period
    noise_part = (1.0 / n) * 12.0 / ((2.0 * math.pi * n * t) ** 2 * snr)
    c = 9.0 / 24.0 if jump_model is JumpModel.UNIFORM_TERNARY else 14.0 / 24.0
    return noise_part + c * (1.0 / (n * t)) ** 2


def wilson_hilferty(variance_ratio: float, dof: float) -> float:
    """Cube-root normalization of a chi-squared-over-dof ratio.

    Maps ``variance_ratio ~ chi2(dof)/dof`` to an approximately standard
    normal score.
    """
    if variance_ratio < 0:
        raise ValueError(f"variance_ratio must be >= 0, got {variance_ratio}")
    if not dof > 0:
        raise InvalidDofError(f"dof must be positive, got {dof}")
    spread = 2.0 / (9.0 * dof)
    return (np.cbrt(variance_ratio) - (1.0 - spread)) / math.sqrt(spread)


def normal_cdf(x: float) -> float:
    """Standard normal CDF."""
    return float(ndtr(x))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF; p must lie strictly inside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile requires 0 < p < 1, got {p}")
    return float(ndtri(p))


def sidak(alpha: float, j: int) -> float:
    """Per-test level 1 - (1-alpha)^(1/j) controlling the joint level of j tests."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if j < 1:
        raise ValueError(f"j must be a positive integer, got {j}")
    return 1.0 - (1.0 - alpha) ** (1.0 / j)
