"""Interference alignment under training and analog CSI feedback.

Library layout:

- ``config`` / ``channel``: network description and Rayleigh channel draws
- ``ia``: iterative alignment solver with zero-forcing receivers
- ``rates``: exponential-integral sum-rate formulas and derivatives
- ``acquisition``: three-phase CSI acquisition and the overhead split
- ``overhead``: effective-rate maximization over the overhead fraction
- ``clusters``: how many users should cooperate at a given Doppler
- ``simulate``: batched end-to-end Monte Carlo pipelines
- ``sweeps`` / ``cli``: experiment harness with CSV output
"""
from .acquisition import (
    CsiEstimate,
    OverheadAllocation,
    TrainingEstimate,
    alpha_min,
    analog_feedback,
    error_components,
    error_variance,
    feedback_training,
    forward_training,
    min_error_variance,
    optimal_split,
    optimal_split_continuous,
    pilot_bank,
)
from .channel import ChannelSet, sample_channel_arrays, sample_channels
from .clusters import (
    ClusterDesign,
    admission_polynomial,
    admission_rule,
    cluster_antennas,
    cluster_config,
    cluster_size_exhaustive,
    cluster_size_rule,
)
from .config import FadingFrame, LinkBudget, NetworkConfig, make_frame
from .errors import (
    InfeasibleConfigError,
    NonConvergenceError,
    PilotLengthError,
    RankDeficiencyError,
)
from .ia import IaSolution, SolverOptions, effective_gains, solve_ia, solve_ia_batch, zf_combiners
from .overhead import (
    OverheadDesign,
    alpha_star_expansion,
    alpha_star_numeric,
    beta_factor,
    effective_dof,
    effective_rate,
    expansion_effective_rate,
)
from .rates import (
    avg_sum_rate,
    avg_sum_rate_imperfect,
    effective_sinr,
    exp_integral_e1,
    rate_derivatives,
    scaled_exp_e1,
)
from .simulate import simulate_effective_rate, simulate_error_variance, simulate_ia_gains
from .sweeps import ExperimentSpec, run_sweep, run_validate

__version__ = "0.1.0"
