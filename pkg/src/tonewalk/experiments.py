"""Analytical and Monte-Carlo performance studies.

All randomness is derived from the experiment's master seed through
per-(stream, point, trial) substreams, so a study is bit-reproducible no
matter how its trials are ordered or distributed across workers.  Failed
trials (e.g. a walk running out of headroom) are counted and reported, never
silently dropped.
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .detectors import (
    Hypothesis,
    chow_denning,
    controlled_variations_test,
    default_lags,
    effective_alpha_star,
    first_differences,
    joint_inference,
    stability_z_score,
)
from .errors import TonewalkError
from .rng import substream
from .signal_model import (
    BlockConfig,
    HypothesisScenario,
    JumpModel,
    NoiseOnly,
    PivotSequence,
    SignalParams,
    StableRandomWalk,
    generate_noise_blocks,
    generate_pivots,
    synthesize_blocks,
    true_carrier_frequencies,
)
from .spectral import estimate_carriers
from .stats import (
    moments,
    noise_only_diff_variance,
    normal_cdf,
    normal_quantile,
    random_walk_diff_variance,
)

__all__ = [
    "RocPoint",
    "JointPoint",
    "DofStudyRow",
    "EstErrRow",
    "ExperimentConfig",
    "analytical_pd",
    "detection_probability_from_ratio",
    "analytical_roc",
    "empirical_roc",
    "EmpiricalRocResult",
    "joint_empirical_pd",
    "dof_convergence_study",
    "estimation_error_study",
    "n_workers",
]

# stream tags keeping every study on its own branch of the seed tree
_STREAM_H1 = 1
_STREAM_H0 = 2
_STREAM_JOINT = 3
_STREAM_DOF = 4
_STREAM_ESTERR = 5

_SCENARIO_TAG = {
    "NoiseOnly": 0,
    "StableRandomWalk": 1,
    "StableMeanReverting": 2,
    "UnstableNonRW": 3,
}


@dataclass(frozen=True)
class RocPoint:
    """One point of a detection-probability curve.

    Analytical points carry only ``alpha`` and ``pd``; empirical points add
    the binomial standard error and the measured false-alarm rate.
    """

    alpha: float
    pd: float
    pd_stderr: Optional[float] = None
    pfa_empirical: Optional[float] = None


@dataclass(frozen=True)
class JointPoint:
    """Joint-test rates at one alpha under a simulated scenario."""

    alpha: float
    alpha_star: float
    stable_rate: float
    reject_rate: float
    joint_rate: float  # P(stable and reject)
    joint_stderr: float
    product_form: float  # analytical pd * empirical rejection rate
    verdict_rates: dict
    n_errors: int


@dataclass(frozen=True)
class DofStudyRow:
    """Degrees-of-freedom estimates at one (N, jump model) grid point.

    ``mean_dof``/``stderr`` aggregate the per-record estimates, which carry
    a strong small-K bias; ``dof_pooled`` recomputes the estimator from the
    moments of all trials pooled and is the consistent summary of where the
    estimator converges as the trial count grows.
    """

    n_per_block: int
    jump_model: JumpModel
    mean_dof: float
    stderr: float
    dof_pooled: float
    n_trials: int
    n_errors: int


@dataclass(frozen=True)
class EstErrRow:
    """RMS peak-bin error, as a percentage of N, at one swept value."""

    swept: float
    rms_bin_error_pct: float
    n_trials: int
    n_errors: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Full specification of a Monte-Carlo study."""

    config: BlockConfig
    params: SignalParams
    jump_model: JumpModel = JumpModel.ROUNDED_NORMAL
    j_lags: int = 7
    alphas: tuple = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    n_trials: int = 1000
    master_seed: int = 0
    sidak_exponent: str = "J"
    classical_vr_scaling: bool = False
    include_displacement: bool = True
    start_bin: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.j_lags < 1 or self.j_lags > self.config.n_blocks // 2 - 1:
            raise ValueError(
                f"j_lags={self.j_lags} does not fit: need 1 <= J <= K//2 - 1 "
                f"= {self.config.n_blocks // 2 - 1}"
            )
        if any(not 0.0 < a < 1.0 for a in self.alphas) or not self.alphas:
            raise ValueError("alphas must be a non-empty grid strictly inside (0, 1)")
        if self.n_trials < 1:
            raise ValueError("empty experiment: n_trials must be >= 1")
        if self.sidak_exponent not in ("J", "J+1"):
            raise ValueError("sidak_exponent must be 'J' or 'J+1'")


def n_workers() -> int:
    """Worker count for trial mapping; override with TONEWALK_WORKERS."""
    raw = os.environ.get("TONEWALK_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"TONEWALK_WORKERS must be an integer, got {raw!r}") from exc
    return max(1, value)


def _map_trials(fn: Callable, n_trials: int, workers: Optional[int] = None) -> list:
    """Evaluate ``fn(trial_index)`` for all trials, serially or in a pool.

    Results come back ordered by trial index either way, and every trial
    derives its own substream, so the two paths are bit-identical.
    """
    workers = n_workers() if workers is None else workers
    if workers <= 1 or n_trials < 4 * workers:
        return [fn(i) for i in range(n_trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, n_trials // (8 * workers))
        return list(pool.map(fn, range(n_trials), chunksize=chunk))


def detection_probability_from_ratio(variance_ratio: float, alpha_star: float, n_blocks: int) -> float:
    """Detection probability given the variance ratio s0^2/s1^2 directly.

    With r = cbrt(variance_ratio) and D = K-2:

        pd = Phi( r * Phi^-1(alpha*) + (r - 1)(1 - 2/(9D)) / sqrt(2/(9D)) )

    At ratio 1 this collapses to pd = alpha_star.
    """
    r = float(np.cbrt(variance_ratio))
    d = n_blocks - 2
    spread = 2.0 / (9.0 * d)
    arg = r * normal_quantile(alpha_star) + (r - 1.0) * (1.0 - spread) / math.sqrt(spread)
    return normal_cdf(arg)


def analytical_pd(
    alpha: float,
    j: int,
    config: BlockConfig,
    snr: float,
    sidak_exponent: str = "J",
) -> float:
    """Closed-form detection probability of the stability test.

    Assumes rounded-normal jumps; the variance ratio is the closed-form
    noise-only variance over the closed-form stable-walk variance.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if config.n_blocks < 11:
        raise ValueError(f"need K >= 11 blocks, got {config.n_blocks}")
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    alpha_star = effective_alpha_star(alpha, j, sidak_exponent)
    s0 = noise_only_diff_variance(config)
    s1 = random_walk_diff_variance(config, snr, JumpModel.ROUNDED_NORMAL)
    return detection_probability_from_ratio(s0 / s1, alpha_star, config.n_blocks)


def analytical_roc(cfg: ExperimentConfig) -> list:
    """Analytical detection-probability curve over the alpha grid."""
    return [
        RocPoint(
            alpha=a,
            pd=analytical_pd(
                a, cfg.j_lags, cfg.config, cfg.params.snr, cfg.sidak_exponent
            ),
        )
        for a in cfg.alphas
    ]


def _h1_z_score(cfg: ExperimentConfig, point_idx: int, trial: int):
    """One H1 pipeline trial; returns the stability z-score or None on error."""
    rng = substream(cfg.master_seed, _STREAM_H1, point_idx, trial)
    try:
        pivots = generate_pivots(
            cfg.config,
            StableRandomWalk(cfg.jump_model),
            rng,
            start_bin=cfg.start_bin,
            include_displacement=cfg.include_displacement,
        )
        record = synthesize_blocks(pivots, cfg.params, cfg.config, rng)
        series = first_differences(estimate_carriers(record, cfg.config))
        return stability_z_score(series, cfg.config)[0]
    except TonewalkError:
        return None


def _h0_z_score(cfg: ExperimentConfig, point_idx: int, trial: int):
    """One noise-only pipeline trial; returns the stability z-score."""
    rng = substream(cfg.master_seed, _STREAM_H0, point_idx, trial)
    try:
        record = generate_noise_blocks(cfg.config, cfg.params.noise_variance, rng)
        series = first_differences(estimate_carriers(record, cfg.config))
        return stability_z_score(series, cfg.config)[0]
    except TonewalkError:
        return None


@dataclass(frozen=True)
class EmpiricalRocResult:
    """Empirical ROC curve plus bookkeeping for failed trials and convergence."""

    points: list
    n_errors: int
    converged: bool
    deviation_sigmas: list = field(default_factory=list)


def empirical_roc(cfg: ExperimentConfig, workers: Optional[int] = None) -> EmpiricalRocResult:
    """Monte-Carlo ROC: per alpha, fresh H1 and H0 pipelines.

    ``pd`` is the rate of stability declarations under the stable-walk
    scenario, ``pfa_empirical`` the same rate under noise only, each with a
    binomial standard error.  The convergence flag compares the empirical
    curve against the analytical one: the curve is flagged non-converged
    when more than half of the grid deviates by over three standard errors.
    """
    points = []
    deviations = []
    n_errors = 0
    for i, alpha in enumerate(cfg.alphas):
        alpha_star = effective_alpha_star(alpha, cfg.j_lags, cfg.sidak_exponent)
        threshold = normal_quantile(alpha_star)
        h1 = _map_trials(functools.partial(_h1_z_score, cfg, i), cfg.n_trials, workers)
        h0 = _map_trials(functools.partial(_h0_z_score, cfg, i), cfg.n_trials, workers)
        h1_ok = [z for z in h1 if z is not None]
        h0_ok = [z for z in h0 if z is not None]
        n_errors += (cfg.n_trials - len(h1_ok)) + (cfg.n_trials - len(h0_ok))
        if not h1_ok or not h0_ok:
            raise TonewalkError(f"all trials failed at alpha={alpha}")
        pd = float(np.mean([z < threshold for z in h1_ok]))
        pfa = float(np.mean([z < threshold for z in h0_ok]))
        stderr = math.sqrt(pd * (1.0 - pd) / len(h1_ok))
        points.append(
            RocPoint(alpha=alpha, pd=pd, pd_stderr=stderr, pfa_empirical=pfa)
        )
        pd_theory = analytical_pd(
            alpha, cfg.j_lags, cfg.config, cfg.params.snr, cfg.sidak_exponent
        )
        floor = math.sqrt(max(pd_theory * (1 - pd_theory), pd * (1 - pd)) / len(h1_ok))
        deviations.append(abs(pd - pd_theory) / floor if floor > 0 else
                          (0.0 if pd == pd_theory else math.inf))
    n_off = sum(d > 3.0 for d in deviations)
    converged = n_off <= len(cfg.alphas) / 2
    return EmpiricalRocResult(
        points=points, n_errors=n_errors, converged=converged, deviation_sigmas=deviations
    )


def _scenario_record(cfg: ExperimentConfig, scenario, rng):
    if isinstance(scenario, NoiseOnly):
        return generate_noise_blocks(cfg.config, cfg.params.noise_variance, rng)
    pivots = generate_pivots(
        cfg.config,
        scenario,
        rng,
        start_bin=cfg.start_bin,
        include_displacement=cfg.include_displacement,
    )
    return synthesize_blocks(pivots, cfg.params, cfg.config, rng)


def _joint_trial(cfg: ExperimentConfig, scenario, point_idx: int, trial: int):
    tag = _SCENARIO_TAG[type(scenario).__name__]
    rng = substream(cfg.master_seed, _STREAM_JOINT, tag, point_idx, trial)
    lags = default_lags(cfg.j_lags)
    alpha = cfg.alphas[point_idx]
    alpha_star = effective_alpha_star(alpha, cfg.j_lags, cfg.sidak_exponent)
    try:
        record = _scenario_record(cfg, scenario, rng)
        series = first_differences(estimate_carriers(record, cfg.config))
        cvt = controlled_variations_test(series, cfg.config, alpha_star)
        vrt = chow_denning(
            series, lags, alpha_star, classical_scaling=cfg.classical_vr_scaling
        )
        decision = joint_inference(cvt, vrt, alpha)
    except TonewalkError:
        return None
    return (cvt.stable, vrt.reject_rwh, decision.verdict.value)


def joint_empirical_pd(
    cfg: ExperimentConfig,
    scenario: Optional[HypothesisScenario] = None,
    workers: Optional[int] = None,
) -> list:
    """Joint-test rates under a simulated scenario, per alpha.

    Reports the Monte-Carlo rate of the joint event (stable and
    RWH-rejected) together with the product-form approximation
    ``analytical_pd(alpha) * P(reject)`` that an independence assumption
    would predict, plus the verdict classification rates.
    """
    if scenario is None:
        scenario = StableRandomWalk(cfg.jump_model)
    out = []
    for i, alpha in enumerate(cfg.alphas):
        results = _map_trials(
            functools.partial(_joint_trial, cfg, scenario, i), cfg.n_trials, workers
        )
        ok = [r for r in results if r is not None]
        n_err = cfg.n_trials - len(ok)
        if not ok:
            raise TonewalkError(f"all trials failed at alpha={alpha}")
        stable_rate = float(np.mean([r[0] for r in ok]))
        reject_rate = float(np.mean([r[1] for r in ok]))
        joint_rate = float(np.mean([r[0] and r[1] for r in ok]))
        verdicts = {h.value: 0.0 for h in Hypothesis}
        for r in ok:
            verdicts[r[2]] += 1.0 / len(ok)
        alpha_star = effective_alpha_star(alpha, cfg.j_lags, cfg.sidak_exponent)
        pd_theory = analytical_pd(
            alpha, cfg.j_lags, cfg.config, cfg.params.snr, cfg.sidak_exponent
        )
        out.append(
            JointPoint(
                alpha=alpha,
                alpha_star=alpha_star,
                stable_rate=stable_rate,
                reject_rate=reject_rate,
                joint_rate=joint_rate,
                joint_stderr=math.sqrt(joint_rate * (1 - joint_rate) / len(ok)),
                product_form=pd_theory * reject_rate,
                verdict_rates=verdicts,
                n_errors=n_err,
            )
        )
    return out


def _dof_trial(cfg: ExperimentConfig, jump_model: JumpModel, grid_idx: int, trial: int):
    rng = substream(cfg.master_seed, _STREAM_DOF, grid_idx, trial)
    try:
        pivots = generate_pivots(
            cfg.config,
            StableRandomWalk(jump_model),
            rng,
            start_bin=cfg.start_bin,
            include_displacement=cfg.include_displacement,
        )
        record = synthesize_blocks(pivots, cfg.params, cfg.config, rng)
        series = first_differences(estimate_carriers(record, cfg.config))
        summary = moments(series)
    except TonewalkError:
        return None
    return (summary.dof, series.values)


def _pooled_dof(all_values: np.ndarray, k: int) -> float:
    centered = all_values - all_values.mean()
    kurt = np.mean(centered**4) / np.mean(centered**2) ** 2
    return 2.0 * (k - 1) / (kurt - (k - 4) / (k - 2))


def dof_convergence_study(
    cfg: ExperimentConfig,
    n_grid: Sequence[int],
    jump_models: Sequence[JumpModel] = (JumpModel.UNIFORM_TERNARY, JumpModel.ROUNDED_NORMAL),
    workers: Optional[int] = None,
) -> list:
    """Degrees-of-freedom estimates across blockwise sample sizes.

    For each (N, jump model) the study reports the mean and standard error
    of the per-record DoF estimate and the pooled-moments DoF, computed from
    all trials at once.  At small K the per-record mean overshoots the
    Gaussian target K-2 even for ideal data (sample kurtosis of a dozen
    points is biased low and the estimator is convex in it), so convergence
    across N is read off the pooled column.
    """
    if cfg.config.n_blocks < 11:
        raise ValueError(f"need K >= 11 blocks, got {cfg.config.n_blocks}")
    rows = []
    for gi, (n, jump_model) in enumerate(
        (n, jm) for jm in jump_models for n in n_grid
    ):
        conf = BlockConfig(
            n_per_block=int(n),
            n_blocks=cfg.config.n_blocks,
            sample_period=cfg.config.sample_period,
        )
        sub = replace(cfg, config=conf, jump_model=jump_model)
        results = _map_trials(
            functools.partial(_dof_trial, sub, jump_model, gi), cfg.n_trials, workers
        )
        ok = [r for r in results if r is not None]
        n_err = cfg.n_trials - len(ok)
        if not ok:
            raise TonewalkError(f"all trials failed at N={n}")
        dofs = np.array([r[0] for r in ok])
        pooled = _pooled_dof(np.concatenate([r[1] for r in ok]), conf.n_blocks)
        rows.append(
            DofStudyRow(
                n_per_block=int(n),
                jump_model=jump_model,
                mean_dof=float(dofs.mean()),
                stderr=float(dofs.std(ddof=1) / math.sqrt(len(dofs))),
                dof_pooled=float(pooled),
                n_trials=len(ok),
                n_errors=n_err,
            )
        )
    return rows


def _circular_bin_error(peak_bins: np.ndarray, pivots: PivotSequence, config: BlockConfig):
    """Signed circular distance from each peak bin to the true carrier's bin."""
    n = config.n_per_block
    carriers = true_carrier_frequencies(pivots)
    m_true = np.rint(carriers / config.bin_width).astype(np.int64) % n
    d = (peak_bins - m_true) % n
    return np.where(d < n - d, d, d - n)


def _esterr_trial(cfg: ExperimentConfig, grid_idx: int, trial: int):
    rng = substream(cfg.master_seed, _STREAM_ESTERR, grid_idx, trial)
    try:
        pivots = generate_pivots(
            cfg.config,
            StableRandomWalk(cfg.jump_model),
            rng,
            start_bin=cfg.start_bin,
            include_displacement=cfg.include_displacement,
        )
        record = synthesize_blocks(pivots, cfg.params, cfg.config, rng)
        est = estimate_carriers(record, cfg.config)
    except TonewalkError:
        return None
    err = _circular_bin_error(est.peak_bins, pivots, cfg.config)
    return (float(np.sum(err.astype(np.float64) ** 2)), len(err))


def estimation_error_study(
    cfg: ExperimentConfig,
    sweep_param: str,
    values: Sequence[float],
    workers: Optional[int] = None,
) -> list:
    """RMS peak-bin error (as % of N) while sweeping K or T.

    ``sweep_param`` is "n_blocks" or "sample_period"; everything else stays
    fixed at the experiment configuration.
    """
    if sweep_param not in ("n_blocks", "sample_period"):
        raise ValueError("sweep_param must be 'n_blocks' or 'sample_period'")
    rows = []
    for gi, value in enumerate(values):
        if sweep_param == "n_blocks":
            conf = replace(cfg.config, n_blocks=int(value))
        else:
            conf = replace(cfg.config, sample_period=float(value))
        # lag budget is unused here; clamp it so small swept K still validates
        lags_fit = max(1, min(cfg.j_lags, conf.n_blocks // 2 - 1))
        sub = replace(cfg, config=conf, j_lags=lags_fit)
        results = _map_trials(
            functools.partial(_esterr_trial, sub, gi), cfg.n_trials, workers
        )
        ok = [r for r in results if r is not None]
        n_err = cfg.n_trials - len(ok)
        if not ok:
            raise TonewalkError(f"all trials failed at {sweep_param}={value}")
        sq_sum = sum(r[0] for r in ok)
        count = sum(r[1] for r in ok)
        rms = math.sqrt(sq_sum / count)
        rows.append(
            EstErrRow(
                swept=float(value),
                rms_bin_error_pct=100.0 * rms / conf.n_per_block,
                n_trials=len(ok),
                n_errors=n_err,
            )
        )
    return rows
