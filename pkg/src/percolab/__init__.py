"""percolab: oriented-percolation paths, couplings, and sticky-pair limits.

Select the compute backend with PERCOLAB_BACKEND=auto|numba|numpy
(default auto: numba when importable, else numpy).
"""

from ._backend import BACKEND, get_kernels, kernels
from .continuum import (
    ContinuumPath,
    StickyPairSample,
    TimeChange,
    gap_walk_oracle,
    sample_sticky_gap,
    sample_sticky_pair_em,
    sample_sticky_pair_exact,
    skorohod_reflect,
    sticky_gap_ensemble,
)
from .coupling import (
    PairFunctionals,
    PairSample,
    RescaledPair,
    ScalingMap,
    apply_scaling,
    continuum_pair_ensemble,
    lattice_pair_ensemble,
    pair_functionals,
    pooled_together_correlation,
    rescale_pair,
    trace_pair,
)
from .harness import (
    EXPERIMENTS,
    FROZEN,
    PREREGISTERED,
    Calibration,
    ConfigError,
    ExperimentConfig,
    InvalidationError,
    run_experiment,
)
from .noise import (
    CHANNELS,
    EdgeRef,
    ExplicitConfig,
    NoiseField,
    PercConfig,
    Site,
    coupled_configs,
    is_open,
    spawn_seed,
    stream_uniform,
)
from .paths import (
    AlphaPrimeEstimate,
    DecayEstimate,
    GammaPath,
    LatticePath,
    MomentEstimates,
    RegenSequence,
    estimate_alpha_prime,
    estimate_decay,
    estimate_moments,
    find_break_points,
    trace_gamma,
    trace_rho,
)
from .stats import (
    KSResult,
    LineFit,
    batch_means,
    fit_line,
    ks_one_sample,
    ks_two_sample,
    sample_correlation,
    snap_to_grid,
)
from .web import (
    ArrowField,
    DynamicalArrowField,
    DynamicalPercolation,
    ForcedArrowField,
    evolve_dynamical,
    evolve_dynamical_percolation,
    expected_edge_autocov,
    extremal_pair,
    extremal_pair_ensemble,
    trace_extremal,
    trace_walk,
    walk_ensemble,
)

__version__ = "1.0.0"

__all__ = [
    "ArrowField", "AlphaPrimeEstimate", "BACKEND", "CHANNELS", "Calibration",
    "ContinuumPath", "ConfigError", "DecayEstimate", "DynamicalArrowField",
    "DynamicalPercolation", "EXPERIMENTS", "EdgeRef", "ExperimentConfig",
    "ExplicitConfig", "FROZEN", "ForcedArrowField", "GammaPath",
    "InvalidationError", "KSResult", "LatticePath", "LineFit",
    "MomentEstimates", "NoiseField", "PREREGISTERED", "PairFunctionals",
    "PairSample", "PercConfig", "RegenSequence", "RescaledPair", "ScalingMap",
    "Site", "StickyPairSample", "TimeChange", "apply_scaling", "batch_means",
    "continuum_pair_ensemble", "coupled_configs", "estimate_alpha_prime",
    "estimate_decay", "estimate_moments", "evolve_dynamical",
    "evolve_dynamical_percolation", "expected_edge_autocov", "extremal_pair",
    "extremal_pair_ensemble", "find_break_points", "fit_line",
    "gap_walk_oracle", "get_kernels", "is_open", "kernels", "ks_one_sample",
    "ks_two_sample", "lattice_pair_ensemble", "pair_functionals",
    "pooled_together_correlation", "rescale_pair", "run_experiment",
    "sample_correlation", "sample_sticky_gap", "sample_sticky_pair_em",
    "sample_sticky_pair_exact", "skorohod_reflect", "snap_to_grid",
    "spawn_seed", "sticky_gap_ensemble", "stream_uniform", "trace_extremal",
    "trace_gamma", "trace_pair", "trace_rho", "trace_walk", "walk_ensemble",
]
