"""Memoryless linear-feedback scheme (Ozarow-Leung style) for the two-user
broadcast channel: per-step recursion, steady-state fixed point, and rates.

After two init uses, every channel use sends a power-normalized combination
of the two receivers' current estimation errors; each receiver then subtracts
the MMSE estimate of its own error based on its latest output alone.
alpha_{i,k} is receiver i's mean squared error after k uses and rho_k the
signed correlation coefficient of the two errors; at steady state the
correlation alternates in sign with constant magnitude, and each receiver's
rate is -(1/2) log2 of its per-use MSE contraction factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, derive_constants, sgn
from .errors import ConvergenceError, DomainError

__all__ = [
    "OlState",
    "OlFixedPoint",
    "ol_init",
    "psi_sq",
    "ol_step",
    "ol_fixed_point",
    "ol_rates",
    "ol_trajectory",
]

_SCAN_POINTS = 10001  # uniform scan of [0, 1] for sign changes
_BISECT_FLOOR = 1e-15  # bracket width at which bisection stops


@dataclass(frozen=True)
class OlState:
    """Recursion state after k channel uses."""

    alpha1: float
    alpha2: float
    rho: float
    k: int


@dataclass(frozen=True)
class OlFixedPoint:
    """Steady-state correlation magnitude plus solver diagnostics.

    roots holds every bracketed root of the alternation residual on [0, 1]
    in ascending order; rho_ol is the largest. residual is the magnitude
    error of one actual recursion step taken at the alternating point.
    """

    rho_ol: float
    residual: float
    roots: tuple[float, ...]


def ol_init(params: ChannelParams) -> OlState:
    """State after the two init uses.

    Each receiver has seen its own message point once at amplitude
    sqrt(12P), so alpha_{i,2} = sigma_i^2 / (12P) and the two errors are
    uncorrelated (they come from noise at different times).
    """
    a = 1.0 / (12.0 * params.p)
    return OlState(
        alpha1=params.sigma1_sq * a, alpha2=params.sigma2_sq * a, rho=0.0, k=2
    )


def psi_sq(rho_abs: float, g: float, p: float) -> float:
    """Squared amplitude scale P / (1 + g^2 + 2 g |rho|).

    Normalizes the combined error signal to average power P when the two
    unit-variance error components have correlation magnitude |rho|.
    """
    if g <= 0:
        raise ValueError(f"g must be > 0, got {g}")
    if not 0.0 <= rho_abs <= 1.0:
        raise ValueError(f"|rho| must lie in [0, 1], got {rho_abs}")
    return p / (1.0 + g * g + 2.0 * g * rho_abs)


def ol_step(state: OlState, params: ChannelParams, g: float) -> OlState:
    """One transmission step: MSE contraction for both receivers and the
    signed correlation update."""
    dc = derive_constants(params)
    rho = state.rho
    ps = psi_sq(abs(rho), g, params.p)
    one_m = 1.0 - rho * rho
    a1 = state.alpha1 * (params.sigma1_sq + ps * g * g * one_m) / dc.pi1
    a2 = state.alpha2 * (params.sigma2_sq + ps * one_m) / dc.pi2
    num = (
        params.noise_cross * dc.big_sigma + dc.varsigma1_sq * dc.varsigma2_sq
    ) * rho - ps * dc.big_sigma * g * one_m * sgn(rho)
    den = (
        math.sqrt(dc.pi1 * dc.pi2)
        * math.sqrt(params.sigma1_sq + ps * g * g * one_m)
        * math.sqrt(params.sigma2_sq + ps * one_m)
    )
    rho_next = num / den
    if not (math.isfinite(a1) and math.isfinite(a2) and math.isfinite(rho_next)):
        raise DomainError(
            f"non-finite recursion state at k={state.k + 1}: "
            f"alpha=({a1!r}, {a2!r}), rho={rho_next!r}"
        )
    return OlState(alpha1=a1, alpha2=a2, rho=rho_next, k=state.k + 1)


def _alternation_residual(rho, params: ChannelParams, g: float):
    """F(rho), vectorized over rho in [0, 1].

    Applying the correlation update at the sign-alternating point -rho must
    return +rho; F is (rho * denominator - numerator) of that condition, so
    roots of F are the steady-state correlation magnitudes.
    """
    dc = derive_constants(params)
    a_coef = params.noise_cross * dc.big_sigma + dc.varsigma1_sq * dc.varsigma2_sq
    ps = params.p / (1.0 + g * g + 2.0 * g * rho)
    one_m = 1.0 - rho * rho
    den = (
        np.sqrt(dc.pi1 * dc.pi2)
        * np.sqrt(params.sigma1_sq + ps * g * g * one_m)
        * np.sqrt(params.sigma2_sq + ps * one_m)
    )
    return rho * den + a_coef * rho - ps * dc.big_sigma * g * one_m


def ol_fixed_point(
    params: ChannelParams, g: float, tol: float = 1e-12
) -> OlFixedPoint:
    """Largest steady-state correlation magnitude on [0, 1].

    A uniform scan brackets every sign change of the alternation residual;
    each bracket is bisected down to the floating-point floor. The returned
    residual is measured through the actual one-step map (not the scan
    formula), so it independently confirms the root.
    """
    if g <= 0:
        raise ValueError(f"g must be > 0, got {g}")
    grid = np.linspace(0.0, 1.0, _SCAN_POINTS)
    vals = np.asarray(_alternation_residual(grid, params, g))
    roots = [float(grid[i]) for i in np.flatnonzero(vals == 0.0)]
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0.0):
        lo, hi = float(grid[i]), float(grid[i + 1])
        flo = float(vals[i])
        while hi - lo > _BISECT_FLOOR:
            mid = 0.5 * (lo + hi)
            fmid = float(_alternation_residual(mid, params, g))
            if flo * fmid <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fmid
        roots.append(0.5 * (lo + hi))
    if not roots:
        raise ConvergenceError(
            "no steady-state magnitude bracketed on [0, 1]: residual at the "
            f"interval ends is F(0)={vals[0]:.6e}, F(1)={vals[-1]:.6e}"
        )
    roots = sorted(roots)
    rho_ol = roots[-1]
    probe = OlState(alpha1=1.0, alpha2=1.0, rho=-rho_ol, k=2)
    residual = abs(ol_step(probe, params, g).rho - rho_ol)
    if residual > tol:
        raise ConvergenceError(
            f"fixed-point residual {residual:.3e} exceeds tolerance {tol:.1e}"
        )
    return OlFixedPoint(rho_ol=rho_ol, residual=residual, roots=tuple(roots))


def ol_rates(params: ChannelParams, g: float, rho_ol: float) -> tuple[float, float]:
    """Achievable rate pair (bits per channel use) at steady-state
    correlation magnitude rho_ol.

    R_i = (1/2) log2(pi_i / (sigma_i^2 + psi^2 g^{4-2i} (1 - rho^2))), i.e.
    minus half the log of receiver i's per-use MSE contraction factor.
    """
    if not 0.0 <= rho_ol <= 1.0:
        raise ValueError(f"rho_ol must lie in [0, 1], got {rho_ol}")
    dc = derive_constants(params)
    ps = psi_sq(rho_ol, g, params.p)
    one_m = 1.0 - rho_ol * rho_ol
    r1 = 0.5 * math.log2(dc.pi1 / (params.sigma1_sq + ps * g * g * one_m))
    r2 = 0.5 * math.log2(dc.pi2 / (params.sigma2_sq + ps * one_m))
    return r1, r2


def ol_trajectory(params: ChannelParams, g: float, n: int) -> list[OlState]:
    """Recursion states for k = 2..n from the natural (two-init-use) start."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    states = [ol_init(params)]
    for _ in range(n - 2):
        states.append(ol_step(states[-1], params, g))
    return states
