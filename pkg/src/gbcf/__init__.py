"""Linear-feedback coding for the two-user Gaussian broadcast channel.

Implements and cross-checks two linear-feedback schemes for a transmitter
sending independent messages to two receivers over a Gaussian broadcast
channel with noiseless output feedback: the classic memoryless
(Ozarow-Leung) scheme, in which each receiver refines its estimate from its
latest channel output only, and an extension in which each receiver combines
its last two outputs with MMSE weights. The package provides the
deterministic recursions for both schemes, their steady states and
achievable rate pairs, analytic and Monte Carlo probability-of-error
evaluation for PAM messages, and a transmission simulator whose empirical
second-order statistics validate the recursions.
"""

from .analysis import (
    PeCurvePoint,
    RatePoint,
    combined_region,
    first_blocklength_below,
    mse_trajectory,
    pe_analytic,
    pe_curve,
    qfunc,
    rate_region,
)
from .channel import (
    ChannelParams,
    DerivedConstants,
    derive_constants,
    sample_noise,
    sgn,
)
from .eol import (
    EolFixedPoint,
    EolState,
    EstimatorCoeffs,
    eol_estimator_coeffs,
    eol_fixed_point,
    eol_init,
    eol_rates,
    eol_step,
    eol_trajectory,
)
from .errors import ConvergenceError, DomainError, GbcfError, SingularityError
from .ol import (
    OlFixedPoint,
    OlState,
    ol_fixed_point,
    ol_init,
    ol_rates,
    ol_step,
    ol_trajectory,
    psi_sq,
)
from .oracle import (
    SecondOrderStats,
    analytic_stats,
    empirical_coeffs,
    empirical_stats,
    mmse_solve,
)
from .simulate import (
    PeEstimate,
    SimConfig,
    SimResult,
    TrialRecord,
    build_schedule,
    dump_trajectories,
    estimate_pe,
    pam_decode,
    pam_map,
    run_ensemble,
    run_trial,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ConvergenceError",
    "DerivedConstants",
    "DomainError",
    "EolFixedPoint",
    "EolState",
    "EstimatorCoeffs",
    "GbcfError",
    "OlFixedPoint",
    "OlState",
    "PeCurvePoint",
    "PeEstimate",
    "RatePoint",
    "SecondOrderStats",
    "SimConfig",
    "SimResult",
    "SingularityError",
    "TrialRecord",
    "analytic_stats",
    "build_schedule",
    "combined_region",
    "derive_constants",
    "dump_trajectories",
    "empirical_coeffs",
    "empirical_stats",
    "eol_estimator_coeffs",
    "eol_fixed_point",
    "eol_init",
    "eol_rates",
    "eol_step",
    "eol_trajectory",
    "estimate_pe",
    "first_blocklength_below",
    "mmse_solve",
    "mse_trajectory",
    "ol_fixed_point",
    "ol_init",
    "ol_rates",
    "ol_step",
    "ol_trajectory",
    "pam_decode",
    "pam_map",
    "pe_analytic",
    "pe_curve",
    "psi_sq",
    "qfunc",
    "rate_region",
    "run_ensemble",
    "run_trial",
    "sample_noise",
    "sgn",
    "wilson_interval",
    "__version__",
]
