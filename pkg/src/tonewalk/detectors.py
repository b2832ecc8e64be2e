"""Controlled-variations and variance-ratio tests plus the joint verdict.

Two one-bit decisions feed a four-way verdict:

* the controlled-variations test declares the carrier wander *stable* when
  the first-difference variance sits far below its noise-only value;
* the Chow-Denning statistic (max absolute LOMAC statistic over a lag set)
  rejects the random-walk hypothesis when some lagged variance ratio departs
  from unity.

(stable?, rejected?) then maps onto {H0, H1, H2, H3}: neither -> H0, only
rejection -> H3, only stability -> H1, both -> H2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSeriesError
from .signal_model import BlockConfig
from .spectral import CarrierEstimates
from .stats import (
    DiffSeries,
    moments,
    noise_only_diff_variance,
    normal_cdf,
    normal_quantile,
    sidak,
)

__all__ = [
    "Hypothesis",
    "CVTResult",
    "VRTestResult",
    "JointDecision",
    "first_differences",
    "stability_z_score",
    "controlled_variations_test",
    "variance_ratio",
    "lomac_stat",
    "chow_denning",
    "joint_inference",
    "default_lags",
    "effective_alpha_star",
    "run_detection",
]


class Hypothesis(enum.Enum):
    H0 = "H0"  # noise only
    H1 = "H1"  # stable random-walk wander
    H2 = "H2"  # stable but mean-reverting wander
    H3 = "H3"  # unstable, not random-walk-like

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class CVTResult:
    """Controlled-variations test: chi-squared statistic, score and decision."""

    chi_sq: float
    dof: float
    z_score: float
    threshold: float
    stable: bool


@dataclass(frozen=True)
class VRTestResult:
    """Chow-Denning test over a lag set: per-lag statistics and decision."""

    lags: tuple
    vr: tuple
    m1: tuple
    v1: float
    threshold: float
    reject_rwh: bool


@dataclass(frozen=True)
class JointDecision:
    """Four-way verdict and the two sub-results it was derived from."""

    verdict: Hypothesis
    cvt: CVTResult
    vrt: VRTestResult
    alpha: float
    alpha_star: float


def first_differences(est: CarrierEstimates) -> DiffSeries:
    """Consecutive differences of the per-block carrier estimates."""
    k = len(est.carrier_freqs)
    if k < 2:
        raise ValueError(f"need at least 2 carrier estimates, got {k}")
    return DiffSeries(values=np.diff(est.carrier_freqs), source_len=k)


def stability_z_score(series: DiffSeries, config: BlockConfig) -> tuple:
    """Wilson-Hilferty-normalized score of the variance against the noise floor.

    Returns ``(z_score, dof, chi_sq)``; the score is approximately standard
    normal when the record is noise only, and strongly negative when the
    carrier wander is slow.
    """
    summary = moments(series)
    ratio = summary.variance / noise_only_diff_variance(config)
    spread = 2.0 / (9.0 * summary.dof)
    z_score = (np.cbrt(ratio) - (1.0 - spread)) / math.sqrt(spread)
    return float(z_score), summary.dof, summary.dof * ratio


def controlled_variations_test(
    series: DiffSeries, config: BlockConfig, alpha_star: float
) -> CVTResult:
    """Test whether the carrier wander is slow compared to the noise floor.

    Computes chi2 = DoF * s^2 / s0^2 against the noise-only variance s0^2,
    normalizes with the Wilson-Hilferty transform and declares stability
    when the score falls below the alpha_star normal quantile (one-sided:
    only a small variance counts as stable).
    """
    if series.source_len < 11:
        raise ValueError(
            f"controlled-variations test needs K >= 11 blocks, got {series.source_len}"
        )
    if not 0.0 < alpha_star < 1.0:
        raise ValueError(f"alpha_star must be in (0, 1), got {alpha_star}")
    z_score, dof, chi_sq = stability_z_score(series, config)
    threshold = normal_quantile(alpha_star)
    return CVTResult(
        chi_sq=chi_sq,
        dof=dof,
        z_score=z_score,
        threshold=threshold,
        stable=bool(z_score < threshold),
    )


def variance_ratio(series: DiffSeries, lag: int) -> float:
    """Lagged variance ratio of a difference series.

    VR(tau) = [sum over windows of tau consecutive values of
    (window sum - tau*mean)^2 / tau] / [sum of squared deviations], with
    windows ending at positions tau..K-tau in 1-based indexing.
    """
    k = series.source_len
    _check_lag(lag, k)
    y = series.values
    mu = float(np.mean(y))
    denom = float(np.sum((y - mu) ** 2))
    if denom == 0.0:
        raise DegenerateSeriesError("constant difference series: variance ratio undefined")
    window_sums = np.convolve(y, np.ones(lag), mode="valid")
    n_windows = k - 2 * lag + 1
    num = float(np.sum((window_sums[:n_windows] - lag * mu) ** 2)) / lag
    return num / denom


def _check_lag(lag: int, source_len: int) -> None:
    if not 2 <= lag <= source_len // 2:
        raise ValueError(
            f"lag {lag} outside [2, {source_len // 2}] for K={source_len}"
        )


def _phi(lag: int) -> float:
    """Asymptotic variance factor 2*(2*tau-1)*(tau-1)/(3*tau)."""
    return 2.0 * (2 * lag - 1) * (lag - 1) / (3.0 * lag)


def lomac_stat(series: DiffSeries, lag: int, classical_scaling: bool = False) -> float:
    """Normalized deviation of VR(lag) from unity.

    By default divides by the raw asymptotic-variance factor phi(lag) with
    no dependence on the sample size.  With ``classical_scaling`` the factor
    is divided by the series length and square-rooted, which is the familiar
    z-scored variance-ratio statistic.
    """
    vr = variance_ratio(series, lag)
    if classical_scaling:
        return (vr - 1.0) / math.sqrt(_phi(lag) / len(series))
    return (vr - 1.0) / _phi(lag)


def chow_denning(
    series: DiffSeries,
    lags: Sequence[int],
    alpha_star: float,
    classical_scaling: bool = False,
) -> VRTestResult:
    """Max-modulus variance-ratio test over a lag set.

    Rejects the random-walk hypothesis when max_j |M1(tau_j)| exceeds the
    two-sided normal quantile at level alpha_star.
    """
    if len(lags) == 0:
        raise ValueError("lag set must be non-empty")
    if len(set(lags)) != len(lags):
        raise ValueError(f"lags must be distinct, got {list(lags)}")
    if not 0.0 < alpha_star < 1.0:
        raise ValueError(f"alpha_star must be in (0, 1), got {alpha_star}")
    for lag in lags:
        _check_lag(lag, series.source_len)
    vrs = tuple(variance_ratio(series, lag) for lag in lags)
    m1s = tuple(
        lomac_stat(series, lag, classical_scaling=classical_scaling) for lag in lags
    )
    v1 = max(abs(m) for m in m1s)
    threshold = normal_quantile(1.0 - alpha_star / 2.0)
    return VRTestResult(
        lags=tuple(int(lag) for lag in lags),
        vr=vrs,
        m1=m1s,
        v1=float(v1),
        threshold=threshold,
        reject_rwh=bool(v1 > threshold),
    )


_VERDICT_TABLE = {
    (False, False): Hypothesis.H0,
    (False, True): Hypothesis.H3,
    (True, False): Hypothesis.H1,
    (True, True): Hypothesis.H2,
}


def joint_inference(cvt: CVTResult, vrt: VRTestResult, alpha: float) -> JointDecision:
    """Combine the two tests into the four-way verdict.

    Both sub-results must have been computed at the same per-test level;
    this is cross-checked through their stored thresholds.
    """
    alpha_star = normal_cdf(cvt.threshold)
    expected_vr_threshold = normal_quantile(1.0 - alpha_star / 2.0)
    if not math.isclose(vrt.threshold, expected_vr_threshold, rel_tol=1e-9, abs_tol=1e-9):
        raise ValueError(
            "sub-results were computed at different per-test levels: "
            f"CVT implies alpha*={alpha_star:.6g} but VR threshold is {vrt.threshold:.6g}"
        )
    verdict = _VERDICT_TABLE[(cvt.stable, vrt.reject_rwh)]
    return JointDecision(verdict=verdict, cvt=cvt, vrt=vrt, alpha=alpha, alpha_star=alpha_star)


def default_lags(n_lags: int) -> list:
    """Lag set {2, ..., n_lags+1}; with K blocks, n_lags <= K//2 - 1 fits."""
    if n_lags < 1:
        raise ValueError(f"n_lags must be >= 1, got {n_lags}")
    return list(range(2, n_lags + 2))


def effective_alpha_star(alpha: float, n_lags: int, sidak_exponent: str = "J") -> float:
    """Per-test level for the joint inference.

    ``sidak_exponent`` selects the correction exponent: "J" uses the size of
    the lag set alone, "J+1" additionally counts the stability test.
    """
    if sidak_exponent == "J":
        return sidak(alpha, n_lags)
    if sidak_exponent == "J+1":
        return sidak(alpha, n_lags + 1)
    raise ValueError(f"sidak_exponent must be 'J' or 'J+1', got {sidak_exponent!r}")


def run_detection(
    series: DiffSeries,
    config: BlockConfig,
    alpha: float,
    lags: Optional[Sequence[int]] = None,
    n_lags: int = 7,
    sidak_exponent: str = "J",
    classical_vr_scaling: bool = False,
) -> JointDecision:
    """Score one difference series end to end and return the joint verdict."""
    if lags is None:
        lags = default_lags(n_lags)
    alpha_star = effective_alpha_star(alpha, len(lags), sidak_exponent)
    cvt = controlled_variations_test(series, config, alpha_star)
    vrt = chow_denning(series, lags, alpha_star, classical_scaling=classical_vr_scaling)
    return joint_inference(cvt, vrt, alpha)
