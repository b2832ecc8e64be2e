"""tonewalk: detect random-walk frequency wander in noisy complex tones.

The toolkit synthesizes block-sampled tones whose carrier frequency follows
one of four hidden dynamics, estimates per-block carriers by coarse DFT peak
search, and decides between the four hypotheses with a controlled-variations
test joined to a Chow-Denning variance-ratio test.  A Monte-Carlo harness
reproduces the analytical ROC curves and their convergence behaviour.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateSeriesError,
    InsufficientHeadroomError,
    InvalidDofError,
    TonewalkError,
)
from .rng import substream
from .signal_model import (
    BlockConfig,
    BlockRecord,
    HypothesisScenario,
    JumpModel,
    NoiseOnly,
    PivotSequence,
    SignalParams,
    StableMeanReverting,
    StableRandomWalk,
    UnstableNonRW,
    generate_noise_blocks,
    generate_pivots,
    jump_second_moment,
    synthesize_blocks,
    true_carrier_frequencies,
)
from .spectral import (
    CarrierEstimates,
    Spectrum,
    bin_frequency,
    dft,
    estimate_carriers,
    estimator_error_variance,
)
from .stats import (
    DiffSeries,
    MomentSummary,
    moments,
    noise_only_diff_variance,
    normal_cdf,
    normal_quantile,
    random_walk_diff_variance,
    sidak,
    wilson_hilferty,
)
from .detectors import (
    CVTResult,
    Hypothesis,
    JointDecision,
    VRTestResult,
    chow_denning,
    controlled_variations_test,
    default_lags,
    effective_alpha_star,
    first_differences,
    joint_inference,
    lomac_stat,
    run_detection,
    stability_z_score,
    variance_ratio,
)
from .experiments import (
    DofStudyRow,
    EmpiricalRocResult,
    EstErrRow,
    ExperimentConfig,
    JointPoint,
    RocPoint,
    analytical_pd,
    analytical_roc,
    detection_probability_from_ratio,
    dof_convergence_study,
    empirical_roc,
    estimation_error_study,
    joint_empirical_pd,
)
