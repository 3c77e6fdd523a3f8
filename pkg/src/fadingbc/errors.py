"""Exception hierarchy.

Every error carries a machine-readable ``code`` and the process ``exit_code``
the CLI maps it to.
"""


class BoundsError(Exception):
    code = "error"
    exit_code = 4


class ValidationError(BoundsError, ValueError):
    exit_code = 2


class LengthMismatch(ValidationError):
    code = "length_mismatch"


class InvalidPmf(ValidationError):
    code = "invalid_pmf"


class NonPositiveParameter(ValidationError):
    code = "non_positive_parameter"


class BetaOutOfRange(ValidationError):
    code = "beta_out_of_range"


class RegimeError(BoundsError, ValueError):
    """Channel is valid but outside the one-sided non-degraded regime."""

    exit_code = 3


class StronglyDegraded(RegimeError):
    code = "strongly_degraded"


class DegenerateFading(RegimeError):
    code = "degenerate_fading"


class NumericalError(BoundsError, ArithmeticError):
    exit_code = 4


class PoleEvaluation(NumericalError):
    code = "pole_evaluation"


class DegreeCollapse(NumericalError):
    code = "degree_collapse"


class RootCountMismatch(NumericalError):
    code = "root_count_mismatch"


class AlphaInfeasible(NumericalError):
    code = "alpha_infeasible"


class NonPositiveLogArgument(NumericalError):
    code = "non_positive_log_argument"


class GapNegative(NumericalError):
    code = "gap_negative"


class GapExceedsBound(NumericalError):
    code = "gap_exceeds_bound"


class NonPositiveVariance(NumericalError):
    code = "non_positive_variance"


class NonConvergence(NumericalError):
    code = "non_convergence"


class ConcavityViolated(NumericalError):
    code = "concavity_violated"


class EpiViolated(NumericalError):
    code = "epi_violated"


class QuadratureNonConvergence(NumericalError):
    code = "quadrature_non_convergence"
