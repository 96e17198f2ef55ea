"""Independent cross-checks for the two-output estimator.

The closed-form weights in :func:`gbcf.eol.eol_estimator_coeffs` are one
route to the estimator. This module provides two more: a generic 2x2
Gauss-Markov solve from second-order statistics, and estimation of those
statistics from simulated trajectories. The three routes are compared in
the test suite and must agree (exactly for analytic statistics, within
Monte Carlo error for empirical ones); they are deliberately kept as
separate code paths.

Moments here are uncentered: every involved signal has zero mean by
construction, and centering at the sample level would only add noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import ChannelParams, derive_constants, sgn
from .eol import EolState, EstimatorCoeffs
from .errors import SingularityError
from .ol import psi_sq

__all__ = [
    "SecondOrderStats",
    "analytic_stats",
    "batch_se",
    "empirical_coeffs",
    "empirical_stats",
    "explained_power",
    "mmse_solve",
]

# Relative determinant floor below which a 2x2 output covariance is treated
# as singular.
_DET_RTOL = 1e-14


@dataclass(frozen=True)
class SecondOrderStats:
    """Second-order statistics of one receiver's estimation problem at use k.

    cov is the 2x2 covariance of the output pair (Y_k, Y_{k-1}); crosscov
    holds (E{eps_{k-1} Y_k}, E{eps_{k-1} Y_{k-1}}), the cross-covariance of
    the pre-refinement error with that pair. n_samples is 0 for analytic
    statistics. degenerate marks a covariance too close to singular for a
    meaningful two-tap solve.
    """

    cov: np.ndarray
    crosscov: np.ndarray
    n_samples: int
    degenerate: bool = False


def mmse_solve(stats: SecondOrderStats) -> EstimatorCoeffs:
    """Gauss-Markov weights: solve cov @ c = crosscov for c = (c_now, c_prev).

    Written out for the 2x2 case rather than delegated to a linear-algebra
    routine so the comparison against the closed form stays an independent
    arithmetic path.
    """
    q00, q01 = float(stats.cov[0, 0]), float(stats.cov[0, 1])
    q11 = float(stats.cov[1, 1])
    r0, r1 = float(stats.crosscov[0]), float(stats.crosscov[1])
    det = q00 * q11 - q01 * q01
    scale = max(abs(q00 * q11), q01 * q01)
    if stats.degenerate or abs(det) <= _DET_RTOL * scale or scale == 0.0:
        raise SingularityError(
            f"output covariance is singular: det={det:.6e}, scale={scale:.6e}"
        )
    return EstimatorCoeffs(
        c_now=(r0 * q11 - r1 * q01) / det,
        c_prev=(r1 * q00 - r0 * q01) / det,
    )


def analytic_stats(
    state: EolState, params: ChannelParams, g: float, user: int
) -> SecondOrderStats:
    """Model-implied statistics of the refinement at use state.k + 1.

    The output pair (Y_{k+1}, Y_k) has equal variances pi_i and covariance
    lambda_{i,k}; the pre-refinement error correlates only with the fresh
    output, through the transmitted combination.
    """
    dc = derive_constants(params)
    if user == 1:
        pi, lam, alpha = dc.pi1, state.lambda1, state.alpha1
        w = 1.0 + g * abs(state.rho)
    elif user == 2:
        pi, lam, alpha = dc.pi2, state.lambda2, state.alpha2
        w = (g + abs(state.rho)) * sgn(state.rho)
    else:
        raise ValueError(f"user must be 1 or 2, got {user}")
    psi = np.sqrt(psi_sq(abs(state.rho), g, params.p) * alpha)
    cov = np.array([[pi, lam], [lam, pi]], dtype=float)
    crosscov = np.array([psi * w, 0.0], dtype=float)
    return SecondOrderStats(cov=cov, crosscov=crosscov, n_samples=0)


def empirical_stats(
    trajectories: Mapping[str, np.ndarray], user: int, k: int
) -> SecondOrderStats:
    """Sample statistics of receiver ``user``'s refinement at use k.

    trajectories maps "y1", "y2", "eps1", "eps2" to (trials, n) arrays whose
    column j holds use j+1; eps columns hold the error after that use's
    refinement, so the pre-refinement error at use k sits in column k-2.
    """
    if user not in (1, 2):
        raise ValueError(f"user must be 1 or 2, got {user}")
    y = np.asarray(trajectories[f"y{user}"], dtype=float)
    eps = np.asarray(trajectories[f"eps{user}"], dtype=float)
    if not 2 <= k <= y.shape[1]:
        raise ValueError(f"k must be in [2, {y.shape[1]}], got {k}")
    y_now = y[:, k - 1]
    y_prev = y[:, k - 2]
    e = eps[:, k - 2]
    n = y.shape[0]
    cov = np.array(
        [
            [np.dot(y_now, y_now), np.dot(y_now, y_prev)],
            [np.dot(y_now, y_prev), np.dot(y_prev, y_prev)],
        ]
    ) / n
    crosscov = np.array([np.dot(e, y_now), np.dot(e, y_prev)]) / n
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
    scale = max(abs(cov[0, 0] * cov[1, 1]), cov[0, 1] ** 2)
    degenerate = scale == 0.0 or abs(det) <= 1e-12 * scale
    return SecondOrderStats(
        cov=cov, crosscov=crosscov, n_samples=n, degenerate=degenerate
    )


def batch_se(values: np.ndarray, n_batches: int = 100) -> float:
    """Batch-means standard error of the mean of a (correlation-safe) sample.

    Trailing samples that do not fill a whole batch are dropped.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 2 * n_batches:
        raise ValueError(
            f"need at least {2 * n_batches} samples for {n_batches} batches, "
            f"got {values.size}"
        )
    per = values.size // n_batches
    means = values[: per * n_batches].reshape(n_batches, per).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def empirical_coeffs(
    trajectories: Mapping[str, np.ndarray],
    user: int,
    k: int,
    n_batches: int = 100,
) -> tuple[EstimatorCoeffs, tuple[float, float]]:
    """Estimated two-tap weights with batch-means standard errors.

    The point estimate solves the full-sample statistics; the uncertainties
    come from re-solving on n_batches disjoint sub-samples.
    """
    y = np.asarray(trajectories[f"y{user}"], dtype=float)
    eps = np.asarray(trajectories[f"eps{user}"], dtype=float)
    n = y.shape[0]
    if n < 2 * n_batches:
        raise ValueError(
            f"need at least {2 * n_batches} trials for {n_batches} batches, got {n}"
        )
    point = mmse_solve(empirical_stats(trajectories, user, k))
    per = n // n_batches
    c_now = np.empty(n_batches)
    c_prev = np.empty(n_batches)
    for b in range(n_batches):
        sl = slice(b * per, (b + 1) * per)
        sub = {f"y{user}": y[sl], f"eps{user}": eps[sl]}
        c = mmse_solve(empirical_stats(sub, user, k))
        c_now[b] = c.c_now
        c_prev[b] = c.c_prev
    se = (
        float(np.std(c_now, ddof=1) / np.sqrt(n_batches)),
        float(np.std(c_prev, ddof=1) / np.sqrt(n_batches)),
    )
    return point, se


def explained_power(stats: SecondOrderStats) -> float:
    """MSE reduction crosscov @ cov^{-1} @ crosscov achieved by the two-tap
    estimator; never less than the one-tap value crosscov[0]^2 / cov[0,0]."""
    c = mmse_solve(stats)
    return float(
        stats.crosscov[0] * c.c_now + stats.crosscov[1] * c.c_prev
    )
