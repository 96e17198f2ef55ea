"""Rate regions, distortion trajectories, and error-probability curves.

Everything here is deterministic: the Monte Carlo counterpart lives in
:mod:`gbcf.simulate`. Error probabilities follow the PAM union bound for a
message point estimated with Gaussian error of variance beta,

    Pe = 2 (1 - 2^{-nR}) Q(2^{-(nR+1)} / sqrt(beta)),

evaluated in log2 space so large time-rate products neither overflow nor
lose the tail.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import erfc

from .channel import ChannelParams
from .eol import eol_fixed_point, eol_rates, eol_trajectory
from .errors import GbcfError
from .ol import ol_fixed_point, ol_rates, ol_trajectory

__all__ = [
    "PeCurvePoint",
    "RatePoint",
    "combined_region",
    "first_blocklength_below",
    "mse_trajectory",
    "pe_analytic",
    "pe_curve",
    "qfunc",
    "rate_region",
]

_SQRT2 = math.sqrt(2.0)

# Q values this small are far below double precision's meaningful range;
# flush them to an exact zero instead of returning denormal noise.
_Q_FLUSH = 1e-300


def qfunc(x):
    """Gaussian tail probability Q(x) = P{N(0,1) > x}.

    Computed through the complementary error function; values below 1e-300
    flush to exactly 0. Accepts scalars or arrays.
    """
    val = 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)
    val = np.where(val < _Q_FLUSH, 0.0, val)
    if val.ndim == 0:
        return float(val)
    return val


def pe_analytic(n: int, rate: float, beta: float) -> float:
    """Symbol error probability of 2^{nR}-ary PAM under estimation
    variance beta.

    The Q argument is assembled as 2^{-(nR+1) - log2(beta)/2} so that the
    ratio of a tiny spacing to a tiny deviation stays accurate.
    """
    if beta < 0.0 or not math.isfinite(beta):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    if rate < 0.0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    nr = n * rate
    lead = 2.0 * (1.0 - 2.0 ** (-nr))
    if lead == 0.0 or beta == 0.0:
        return 0.0
    exponent = -(nr + 1.0) - 0.5 * math.log2(beta)
    if exponent > 6.0:
        # Q(2^6) underflows double precision outright.
        return 0.0
    return lead * qfunc(2.0 ** exponent)


@dataclass(frozen=True)
class RatePoint:
    """One operating point on a scheme's rate frontier.

    rho_ss is the steady-state error correlation magnitude behind the
    rates. A failed solve is reported as NaN entries with the failure
    message in error.
    """

    scheme: str
    g: float
    r1: float
    r2: float
    rho_ss: float
    error: Optional[str] = None


def _rate_point(params: ChannelParams, scheme: str, g: float) -> RatePoint:
    try:
        if scheme == "ol":
            fp = ol_fixed_point(params, g)
            r1, r2 = ol_rates(params, g, fp.rho_ol)
            rho_ss = fp.rho_ol
        else:
            fp = eol_fixed_point(params, g)
            r1, r2 = eol_rates(params, g, fp)
            rho_ss = fp.rho_bar
    except GbcfError as exc:
        return RatePoint(
            scheme=scheme,
            g=g,
            r1=math.nan,
            r2=math.nan,
            rho_ss=math.nan,
            error=str(exc),
        )
    return RatePoint(scheme=scheme, g=g, r1=r1, r2=r2, rho_ss=rho_ss)


def rate_region(
    params: ChannelParams,
    scheme: str,
    g_grid: Sequence[float],
    jobs: int = 1,
) -> list[RatePoint]:
    """Rate frontier of one scheme over a grid of power-split ratios g.

    Points where the steady-state solve fails come back as NaN entries
    carrying the error message instead of aborting the sweep.
    """
    if scheme not in ("ol", "eol"):
        raise ValueError(f"scheme must be 'ol' or 'eol', got {scheme!r}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        return [_rate_point(params, scheme, float(g)) for g in g_grid]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(
            pool.map(lambda g: _rate_point(params, scheme, float(g)), g_grid)
        )


def combined_region(
    ol_points: Sequence[RatePoint],
    eol_points: Sequence[RatePoint],
    num: int = 400,
) -> list[tuple[float, float]]:
    """Componentwise-best envelope of two frontiers.

    For each target r1 on a uniform grid, the best r2 any operating point of
    either scheme delivers while granting receiver 1 at least that rate.
    Failed points are skipped.
    """
    pts = [
        (p.r1, p.r2)
        for p in list(ol_points) + list(eol_points)
        if math.isfinite(p.r1) and math.isfinite(p.r2)
    ]
    if not pts:
        return []
    r1_max = max(r1 for r1, _ in pts)
    out = []
    for q in np.linspace(0.0, r1_max, num):
        best = max(r2 for r1, r2 in pts if r1 >= q - 1e-12)
        out.append((float(q), float(best)))
    return out


def mse_trajectory(
    params: ChannelParams,
    scheme: str,
    g: float,
    n: int,
    init_mode: str = "natural",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Message-point MSEs beta_i(k) for k = 2..n.

    natural mode runs the scheme's recursion from its two init uses.
    fixed-point mode instead applies the steady-state per-use contraction
    c_i = 4^{-R_i} to the init MSE: beta_i(k) = (sigma_i^2 / 12P) c_i^{k-2},
    the idealized link that skips the transient.
    """
    if scheme not in ("ol", "eol"):
        raise ValueError(f"scheme must be 'ol' or 'eol', got {scheme!r}")
    if init_mode not in ("natural", "fixed-point"):
        raise ValueError(
            f"init_mode must be 'natural' or 'fixed-point', got {init_mode!r}"
        )
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    ks = np.arange(2, n + 1)
    if init_mode == "natural":
        if scheme == "ol":
            states = ol_trajectory(params, g, n)
        else:
            states = eol_trajectory(params, g, n)
        beta1 = np.array([s.alpha1 for s in states])
        beta2 = np.array([s.alpha2 for s in states])
    else:
        c1, c2 = _contraction(params, scheme, g)
        b0 = 1.0 / (12.0 * params.p)
        beta1 = params.sigma1_sq * b0 * c1 ** (ks - 2)
        beta2 = params.sigma2_sq * b0 * c2 ** (ks - 2)
    return ks, beta1, beta2


def _contraction(
    params: ChannelParams, scheme: str, g: float
) -> tuple[float, float]:
    """Steady per-use MSE contraction factors 4^{-R_i} of a scheme."""
    if scheme == "ol":
        fp = ol_fixed_point(params, g)
        r1, r2 = ol_rates(params, g, fp.rho_ol)
    else:
        fp = eol_fixed_point(params, g)
        r1, r2 = eol_rates(params, g, fp)
    return 4.0 ** (-r1), 4.0 ** (-r2)


@dataclass(frozen=True)
class PeCurvePoint:
    """Error probabilities of both receivers at one blocklength."""

    n: int
    beta1: float
    beta2: float
    pe1: float
    pe2: float


def pe_curve(
    params: ChannelParams,
    scheme: str,
    g: float,
    rate_fraction: float,
    n_range: Iterable[int],
    init_mode: str = "fixed-point",
) -> list[PeCurvePoint]:
    """Error probability versus blocklength at a fixed fraction of the
    memoryless scheme's steady rates.

    Both schemes are evaluated at the same target rates
    R_i = rate_fraction * R_i^{memoryless} so their blocklength needs are
    directly comparable. In fixed-point mode the link is pinned at the
    scheme's steady operating point over all n uses, so the final MSE is
    beta_i = (sigma_i^2 / 12P) c_i^n with c_i the scheme's own contraction;
    natural mode takes beta_i from the scheme's actual recursion at use n.
    """
    if scheme not in ("ol", "eol"):
        raise ValueError(f"scheme must be 'ol' or 'eol', got {scheme!r}")
    if init_mode not in ("natural", "fixed-point"):
        raise ValueError(
            f"init_mode must be 'natural' or 'fixed-point', got {init_mode!r}"
        )
    if not 0.0 < rate_fraction:
        raise ValueError(f"rate_fraction must be > 0, got {rate_fraction}")
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        return []
    if ns[0] < 2:
        raise ValueError(f"blocklengths must be >= 2, got {ns[0]}")
    fp_ol = ol_fixed_point(params, g)
    r1_full, r2_full = ol_rates(params, g, fp_ol.rho_ol)
    rate1 = rate_fraction * r1_full
    rate2 = rate_fraction * r2_full
    b0 = 1.0 / (12.0 * params.p)
    if init_mode == "fixed-point":
        c1, c2 = _contraction(params, scheme, g)
        betas = [
            (
                params.sigma1_sq * b0 * c1 ** n,
                params.sigma2_sq * b0 * c2 ** n,
            )
            for n in ns
        ]
    else:
        ks, beta1, beta2 = mse_trajectory(
            params, scheme, g, ns[-1], init_mode="natural"
        )
        idx = {int(k): i for i, k in enumerate(ks)}
        betas = [(float(beta1[idx[n]]), float(beta2[idx[n]])) for n in ns]
    return [
        PeCurvePoint(
            n=n,
            beta1=b1,
            beta2=b2,
            pe1=pe_analytic(n, rate1, b1),
            pe2=pe_analytic(n, rate2, b2),
        )
        for n, (b1, b2) in zip(ns, betas)
    ]


def first_blocklength_below(
    points: Sequence[PeCurvePoint], threshold: float, user: int = 1
) -> Optional[int]:
    """Smallest blocklength whose error probability meets the threshold."""
    if user not in (1, 2):
        raise ValueError(f"user must be 1 or 2, got {user}")
    for point in sorted(points, key=lambda p: p.n):
        pe = point.pe1 if user == 1 else point.pe2
        if pe <= threshold:
            return point.n
    return None
