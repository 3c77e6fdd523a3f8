"""Sum-capacity bounds for the two-user Gaussian broadcast channel with one fading user."""

from .achievable import AchievableReport, GapReport, Setting, beta_preference, gap_analysis, maximize_r_ach, r_ach
from .bounds import (
    AlphaWeights,
    CaseLabel,
    UpperBoundReport,
    classify_case,
    compute_alpha,
    compute_C,
    compute_D,
    upper_bound,
)
from .channel import ChannelSpec, InverseGains, inverse_gains, validate_and_normalize
from .tfunction import RootAnalysis, find_x_star, numerator_polynomial, t_eval

__version__ = "0.1.0"

__all__ = [
    "AchievableReport",
    "AlphaWeights",
    "CaseLabel",
    "ChannelSpec",
    "GapReport",
    "InverseGains",
    "RootAnalysis",
    "Setting",
    "UpperBoundReport",
    "beta_preference",
    "classify_case",
    "compute_C",
    "compute_D",
    "compute_alpha",
    "find_x_star",
    "gap_analysis",
    "inverse_gains",
    "maximize_r_ach",
    "numerator_polynomial",
    "r_ach",
    "t_eval",
    "upper_bound",
    "validate_and_normalize",
]
