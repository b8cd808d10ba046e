"""Prox-point optimization for quasar-convex objectives, with certificates.

The package has three layers: a certificate calculus (quasar), a high-order
proximal solver and its outer loop (hope, hippa), and an empirical harness
(functions, baselines, rates, cli) that runs the test-function zoo and checks
every closed-form rate bound against observed traces.
"""
from .baselines import BaselineConfig, default_baseline_config, run_baseline
from .core import (
    ObjectiveOracle,
    RunTrace,
    TraceRecord,
    as_vector,
    check_oracle_consistency,
    config_digest,
    distance_metrics,
    rng_stream,
    subgradient_select,
)
from .errors import (
    BadParameter,
    CenterMismatch,
    ConfigParseError,
    EmptyRegion,
    GammaZeroForGrowth,
    InnerBudgetExhausted,
    InsufficientTrace,
    InvalidCertificate,
    MissingMinimizer,
    MissingSubgradient,
    NonFiniteInput,
    NonFiniteObjective,
    OutOfDomain,
    QuasarproxError,
    RadiusRequired,
    RangeViolation,
    RankDeficient,
    RankDeficientData,
    UnknownEntry,
    UnsupportedAtom,
)
from .functions import (
    GlmConfig,
    RefutedCertificate,
    RmtrConfig,
    ZooEntry,
    compute_cX,
    get_entry,
    glm_kappa,
    make_abs_1d,
    make_dist_power,
    make_oscillatory_counterexample,
    make_relu_glm,
    make_rmtr,
    make_spiky_norm,
    make_spiky_slice_1d,
    make_square_1d,
    make_star_flower,
    oscillatory_slope,
    rmtr_gamma,
    zoo_ids,
)
from .hippa import HippaConfig, iteration_bound, run_hippa
from .hope import ProxConfig, ProxResult, hope_solve, prox_model_value, smooth_surrogate
from .quasar import (
    PROPERTIES,
    CheckReport,
    QuasarCertificate,
    SamplerConfig,
    aux_constant_C,
    certificate,
    compose_linear,
    compose_monotone,
    definition_residual,
    kappa_p,
    parameter_transform,
    sigma_hat,
    sum_certificates,
    t_hat,
    verify_certificate,
)
from .rates import (
    RateReport,
    TheoremCheck,
    check_rate_bounds,
    check_run_invariants,
    estimate_rate,
    theorem_bounds,
)
from .regions import (
    RegionDescriptor,
    ball,
    contains,
    project_region,
    sample_points,
    two_balls,
    whole_space,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
