"""Block-sampled signal model with hidden pivot-frequency dynamics.

A record of ``K*(N-1)+1`` uniformly sampled complex observations is split
into K blocks of N samples where adjacent blocks share one endpoint sample.
A synthetic tone ramps its instantaneous frequency linearly between "pivot"
frequencies attached to the block boundaries; the pivot sequence follows one
of four scenario dynamics (noise only, stable random walk, stable mean
reversion, unstable non-random-walk).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import InsufficientHeadroomError

__all__ = [
    "BlockConfig",
    "SignalParams",
    "JumpModel",
    "NoiseOnly",
    "StableRandomWalk",
    "StableMeanReverting",
    "UnstableNonRW",
    "HypothesisScenario",
    "PivotSequence",
    "BlockRecord",
    "jump_second_moment",
    "generate_pivots",
    "synthesize_blocks",
    "generate_noise_blocks",
    "true_carrier_frequencies",
]


@dataclass(frozen=True)
class BlockConfig:
    """Discretisation of a record into K overlapping blocks of N samples.

    Attributes
    ----------
    n_per_block : int
        Blockwise sample size N (>= 2).
    n_blocks : int
        Number of blocks K (>= 2; detection additionally needs K >= 11,
        enforced by the detectors, not here).
    sample_period : float
        Seconds between consecutive samples.
    """

    n_per_block: int
    n_blocks: int
    sample_period: float

    def __post_init__(self):
        if self.n_per_block < 2:
            raise ValueError(f"n_per_block must be >= 2, got {self.n_per_block}")
        if self.n_blocks < 2:
            raise ValueError(f"n_blocks must be >= 2, got {self.n_blocks}")
        if not (self.sample_period > 0 and math.isfinite(self.sample_period)):
            raise ValueError(f"sample_period must be positive, got {self.sample_period}")

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.sample_period

    @property
    def bin_width(self) -> float:
        """Width of one DFT bin in Hz."""
        return 1.0 / (self.n_per_block * self.sample_period)

    @property
    def n_record(self) -> int:
        """Distinct samples in the record: K*(N-1)+1."""
        return self.n_blocks * (self.n_per_block - 1) + 1


@dataclass(frozen=True)
class SignalParams:
    """Tone amplitude, total complex noise variance and starting phase.

    ``noise_variance`` is the total variance of the complex noise; the real
    and imaginary parts each carry half of it, so snr = amplitude**2 /
    noise_variance.
    """

    amplitude: float
    noise_variance: float
    initial_phase: float = 0.0

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not (self.noise_variance > 0 and math.isfinite(self.noise_variance)):
            raise ValueError(f"noise_variance must be positive, got {self.noise_variance}")
        if not math.isfinite(self.initial_phase):
            raise ValueError("initial_phase must be finite")

    @property
    def snr(self) -> float:
        return self.amplitude**2 / self.noise_variance


class JumpModel(enum.Enum):
    """Integer jump law driving a stable random walk over DFT bins."""

    UNIFORM_TERNARY = "uniform"
    ROUNDED_NORMAL = "normal"


def jump_second_moment(model: JumpModel) -> float:
    """E[u^2] of one jump: 2/3 for ternary jumps, 13/12 for rounded normals."""
    if model is JumpModel.UNIFORM_TERNARY:
        return 2.0 / 3.0
    return 13.0 / 12.0


def _draw_jumps(model: JumpModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if model is JumpModel.UNIFORM_TERNARY:
        return rng.integers(-1, 2, size=n)
    return np.rint(rng.standard_normal(n)).astype(np.int64)


@dataclass(frozen=True)
class NoiseOnly:
    """H0: the record contains complex white Gaussian noise only."""


@dataclass(frozen=True)
class StableRandomWalk:
    """H1: pivot bins execute a slow integer random walk."""

    jump_model: JumpModel = JumpModel.ROUNDED_NORMAL


@dataclass(frozen=True)
class StableMeanReverting:
    """H2: pivot bins follow an integer-rounded AR(1) with |rho| < 1."""

    rho: float = 0.9
    jump_scale: float = 1.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ValueError(f"mean-reverting scenario needs |rho| < 1, got {self.rho}")
        if not self.jump_scale > 0:
            raise ValueError("jump_scale must be positive")


@dataclass(frozen=True)
class UnstableNonRW:
    """H3: either an explosive AR(1) (|rho| > 1) or jumps over all N bins.

    The all-bin variant redraws every pivot uniformly over the DFT bins,
    deliberately wrapping across the band; the explosive variant wraps its
    bins into the band once the latent state leaves it.
    """

    rho: Optional[float] = 1.05
    jump_scale: float = 1.0
    all_bin_jumps: bool = False

    def __post_init__(self):
        if self.all_bin_jumps:
            return
        if self.rho is None or not abs(self.rho) > 1:
            raise ValueError(
                "unstable scenario needs |rho| > 1 or all_bin_jumps=True, "
                f"got rho={self.rho}"
            )
        if not self.jump_scale > 0:
            raise ValueError("jump_scale must be positive")


HypothesisScenario = Union[NoiseOnly, StableRandomWalk, StableMeanReverting, UnstableNonRW]


@dataclass(frozen=True)
class PivotSequence:
    """Hidden pivot bins/frequencies at the K+1 block boundaries.

    ``pivot_bins`` are signed bin indices for the walk-like scenarios
    (effective frequency = bin * bin_width) and plain DFT bin numbers
    ``0..N-1`` for the all-bin-jump scenario.  ``jumps[k]`` is
    ``pivot_bins[k+1] - pivot_bins[k]``.
    """

    pivot_bins: np.ndarray
    pivot_freqs: np.ndarray
    jumps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pivot_bins", np.asarray(self.pivot_bins, dtype=np.int64))
        object.__setattr__(self, "pivot_freqs", np.asarray(self.pivot_freqs, dtype=np.float64))
        object.__setattr__(self, "jumps", np.asarray(self.jumps, dtype=np.int64))
        if len(self.pivot_bins) != len(self.pivot_freqs):
            raise ValueError("pivot_bins and pivot_freqs must have equal length")
        if len(self.jumps) != len(self.pivot_bins) - 1:
            raise ValueError("jumps must have length len(pivot_bins) - 1")

    @property
    def n_blocks(self) -> int:
        return len(self.pivot_bins) - 1


@dataclass(frozen=True)
class BlockRecord:
    """K overlapping blocks of N complex samples.

    The record is stored flat; ``blocks`` exposes the (K, N) partition in
    which ``blocks[k, N-1]`` and ``blocks[k+1, 0]`` are the same stored
    sample, so the endpoint-overlap invariant holds bit-exactly by
    construction.
    """

    samples: np.ndarray
    n_per_block: int
    provenance: Optional[PivotSequence] = field(default=None)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        n = self.n_per_block
        if n < 2:
            raise ValueError("n_per_block must be >= 2")
        if (len(samples) - 1) % (n - 1) != 0 or len(samples) < 2 * n - 1:
            raise ValueError(
                f"record length {len(samples)} does not equal K*(N-1)+1 for N={n}, K>=2"
            )

    @property
    def n_blocks(self) -> int:
        return (len(self.samples) - 1) // (self.n_per_block - 1)

    @property
    def blocks(self) -> np.ndarray:
        """(K, N) strided view onto the flat record."""
        n = self.n_per_block
        view = np.lib.stride_tricks.sliding_window_view(self.samples, n)
        return view[:: n - 1][: self.n_blocks]


def _signed_bin_range(n_per_block: int) -> tuple[int, int]:
    """Inclusive signed-bin range mapping one-to-one onto the DFT bins."""
    half = n_per_block // 2
    return half - n_per_block, half - 1


def _signed_bin_frequencies(bins: np.ndarray, config: BlockConfig) -> np.ndarray:
    """Effective frequency of DFT bins, accepting either signed or 0..N-1 indices."""
    n = config.n_per_block
    half = n // 2
    m = np.mod(bins, n)
    signed = np.where(m < half, m, m - n)
    return signed * config.bin_width


def generate_pivots(
    config: BlockConfig,
    scenario: HypothesisScenario,
    rng: np.random.Generator,
    start_bin: int = 0,
    include_displacement: bool = True,
) -> PivotSequence:
    """Draw the hidden pivot sequence for one record under a signal scenario.

    Parameters
    ----------
    config : BlockConfig
    scenario : HypothesisScenario
        Any variant except ``NoiseOnly`` (noise has no pivots).
    rng : numpy Generator
    start_bin : int
        Signed bin the sequence starts from; 0 is the band centre, which
        maximises headroom before the walk reaches the wrap boundaries.
    include_displacement : bool
        Add the uniform sub-bin displacement ``U(-L/2, L/2)`` to every pivot
        frequency.  Disable for oracle tests that need bin-exact pivots.

    Raises
    ------
    InsufficientHeadroomError
        If a stable walk (H1/H2) leaves the effective band within K steps.
    """
    if isinstance(scenario, NoiseOnly):
        raise ValueError("noise-only scenario has no pivot sequence")
    K = config.n_blocks
    n = config.n_per_block
    lo, hi = _signed_bin_range(n)
    if not (lo <= start_bin <= hi):
        raise ValueError(f"start_bin {start_bin} outside signed bin range [{lo}, {hi}]")

    if isinstance(scenario, StableRandomWalk):
        jumps = _draw_jumps(scenario.jump_model, K, rng)
        bins = start_bin + np.concatenate([[0], np.cumsum(jumps)])
    elif isinstance(scenario, StableMeanReverting):
        state = 0.0
        bins = np.empty(K + 1, dtype=np.int64)
        bins[0] = start_bin
        for k in range(1, K + 1):
            state = scenario.rho * state + scenario.jump_scale * rng.standard_normal()
            bins[k] = start_bin + int(np.rint(state))
    elif isinstance(scenario, UnstableNonRW):
        if scenario.all_bin_jumps:
            bins = rng.integers(0, n, size=K + 1)
        else:
            state = 0.0
            bins = np.empty(K + 1, dtype=np.int64)
            bins[0] = start_bin
            for k in range(1, K + 1):
                state = scenario.rho * state + scenario.jump_scale * rng.standard_normal()
                raw = start_bin + int(np.rint(state))
                bins[k] = (raw - lo) % n + lo  # wrap into the band, deliberately
    else:
        raise TypeError(f"unknown scenario {scenario!r}")

    stable = isinstance(scenario, (StableRandomWalk, StableMeanReverting))
    if stable and (bins.min() < lo or bins.max() > hi):
        raise InsufficientHeadroomError(
            "insufficient headroom: pivot walk exits the effective band "
            f"(bins span [{bins.min()}, {bins.max()}], band [{lo}, {hi}])"
        )

    freqs = _signed_bin_frequencies(bins, config)
    if include_displacement:
        L = config.bin_width
        freqs = freqs + rng.uniform(-L / 2, L / 2, size=K + 1)
        fs = config.sample_rate
        if stable:
            if freqs.min() < -fs / 2 or freqs.max() >= fs / 2:
                raise InsufficientHeadroomError(
                    "insufficient headroom: displaced pivot frequency leaves the band"
                )
        else:
            freqs = np.mod(freqs + fs / 2, fs) - fs / 2

    return PivotSequence(pivot_bins=bins, pivot_freqs=freqs, jumps=np.diff(bins))


def _complex_wgn(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _instantaneous_frequency(pivot_freqs: np.ndarray, config: BlockConfig) -> np.ndarray:
    """Per-sample frequency: linear ramp between pivots at block boundaries."""
    boundaries = np.arange(config.n_blocks + 1) * (config.n_per_block - 1)
    return np.interp(np.arange(config.n_record), boundaries, pivot_freqs)


def synthesize_blocks(
    pivots: PivotSequence,
    params: SignalParams,
    config: BlockConfig,
    rng: np.random.Generator,
) -> BlockRecord:
    """Synthesize the noisy tone whose frequency ramps between the pivots.

    The phase is the exact integral of the piecewise-linear instantaneous
    frequency (per-sample trapezoid step, exact for linear ramps), so it is
    continuous across block boundaries and the endpoint-overlap invariant is
    inherited from the flat record.
    """
    if pivots.n_blocks != config.n_blocks:
        raise ValueError(
            f"pivot sequence has {pivots.n_blocks} blocks, config expects {config.n_blocks}"
        )
    if not np.all(np.isfinite(pivots.pivot_freqs)):
        raise ValueError("pivot frequencies must be finite")

    f_inst = _instantaneous_frequency(pivots.pivot_freqs, config)
    phase = np.empty(config.n_record)
    phase[0] = params.initial_phase
    steps = np.pi * config.sample_period * (f_inst[:-1] + f_inst[1:])  # 2*pi*T*(f_j+f_{j+1})/2
    np.cumsum(steps, out=phase[1:])
    phase[1:] += params.initial_phase

    tone = params.amplitude * np.exp(1j * phase)
    samples = tone + _complex_wgn(config.n_record, params.noise_variance, rng)
    return BlockRecord(samples=samples, n_per_block=config.n_per_block, provenance=pivots)


def generate_noise_blocks(
    config: BlockConfig, noise_variance: float, rng: np.random.Generator
) -> BlockRecord:
    """Noise-only record: K overlapping blocks of complex WGN, no provenance."""
    if not (noise_variance > 0 and math.isfinite(noise_variance)):
        raise ValueError(f"noise_variance must be positive, got {noise_variance}")
    samples = _complex_wgn(config.n_record, noise_variance, rng)
    return BlockRecord(samples=samples, n_per_block=config.n_per_block, provenance=None)


def true_carrier_frequencies(pivots: PivotSequence) -> np.ndarray:
    """Per-block carrier frequency: midpoint of the two bounding pivots."""
    f = pivots.pivot_freqs
    return 0.5 * (f[:-1] + f[1:])
