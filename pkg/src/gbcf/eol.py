"""Extended linear-feedback scheme: two-output MMSE refinement.

Same encoder as the memoryless scheme, but each receiver refines its estimate
from its last TWO channel outputs. The extra memory enters through
lambda_{i,k} = E{Y_{i,k+1} Y_{i,k}}, the off-diagonal of the covariance of
receiver i's consecutive outputs, which the recursion tracks alongside the
MSEs and the error correlation. Clamping lambda to zero at every step
reproduces the memoryless scheme exactly.

Step ordering inside one update is forced by data dependencies: the MSE
contraction and the new correlation use only the previous state, but the new
lambda values need the next use's power split, which needs the new rho.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

from .channel import ChannelParams, derive_constants, sgn
from .errors import ConvergenceError, DomainError, SingularityError
from .ol import psi_sq

__all__ = [
    "EolState",
    "EolFixedPoint",
    "EstimatorCoeffs",
    "eol_init",
    "eol_estimator_coeffs",
    "eol_step",
    "eol_fixed_point",
    "eol_rates",
    "eol_trajectory",
]


@dataclass(frozen=True)
class EolState:
    """Recursion state after k channel uses.

    sign_prev records sgn(rho_{k-1}) so the sign product xi is reportable;
    it does not feed the update rules (they only need the current rho).
    """

    alpha1: float
    alpha2: float
    rho: float
    lambda1: float
    lambda2: float
    k: int
    sign_prev: float = 1.0

    @property
    def xi(self) -> float:
        """Sign product sgn(rho_k) sgn(rho_{k-1}); -1 on an alternating path."""
        return sgn(self.rho) * self.sign_prev


@dataclass(frozen=True)
class EolFixedPoint:
    """Steady state (rho_bar, lambda1_bar, lambda2_bar) with the observed
    sign pattern and convergence diagnostics.

    residual is the movement of (|rho|, lambda1, lambda2) under one further
    map application at the returned point. xi_bar is measured from the
    iteration tail, never assumed.
    """

    rho_bar: float
    lambda1_bar: float
    lambda2_bar: float
    xi_bar: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class EstimatorCoeffs:
    """Weights of the two-output error estimate c_now Y_{i,k} + c_prev Y_{i,k-1}."""

    c_now: float
    c_prev: float


def eol_init(params: ChannelParams) -> EolState:
    """Natural start: same two init uses as the memoryless scheme, with the
    consecutive-output covariances pinned to zero."""
    a = 1.0 / (12.0 * params.p)
    return EolState(
        alpha1=params.sigma1_sq * a,
        alpha2=params.sigma2_sq * a,
        rho=0.0,
        lambda1=0.0,
        lambda2=0.0,
        k=2,
    )


def eol_estimator_coeffs(
    state: EolState, params: ChannelParams, g: float, user: int
) -> EstimatorCoeffs:
    """Closed-form MMSE weights for the given receiver at use state.k + 1.

    Identical to the generic Gauss-Markov solve with output covariance
    [[pi, lambda], [lambda, pi]] and error/output cross-covariance
    (psi sqrt(alpha) w, 0), where w = 1 + g|rho| for receiver 1 and
    (g + |rho|) sgn(rho) for receiver 2. The zero second entry is the
    orthogonality of the previous refinement to the output it used.
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
    den = pi * pi - lam * lam
    if den <= 0:
        raise SingularityError(
            f"receiver-{user} output covariance is singular: "
            f"pi^2 - lambda^2 = {den:.6e}"
        )
    scale = math.sqrt(psi_sq(abs(state.rho), g, params.p) * alpha) * w / den
    return EstimatorCoeffs(c_now=scale * pi, c_prev=-scale * lam)


def eol_step(state: EolState, params: ChannelParams, g: float) -> EolState:
    """One transmission step: MSE contraction, correlation update, then the
    consecutive-output covariances for the next use."""
    p = params.p
    dc = derive_constants(params)
    rho, l1, l2 = state.rho, state.lambda1, state.lambda2
    d1 = dc.pi1 * dc.pi1 - l1 * l1
    d2 = dc.pi2 * dc.pi2 - l2 * l2
    if d1 <= 0 or d2 <= 0:
        raise SingularityError(
            f"output covariance singular at k={state.k}: "
            f"pi^2 - lambda^2 = ({d1:.6e}, {d2:.6e})"
        )
    ps = psi_sq(abs(rho), g, p)  # power split of use k+1
    one_m = 1.0 - rho * rho
    n1 = d1 - p * dc.pi1 + ps * g * g * one_m * dc.pi1
    n2 = d2 - p * dc.pi2 + ps * one_m * dc.pi2
    a1 = state.alpha1 * n1 / d1
    a2 = state.alpha2 * n2 / d2

    s = sgn(rho)
    r_abs = abs(rho)
    phi = ps * (g + r_abs) * (1.0 + g * r_abs) * s
    t = (
        rho * g * dc.pi1 ** 2 * dc.pi2 ** 2
        - g * phi * dc.pi1 * dc.pi2 * dc.big_sigma
        + l1 * l1 * dc.pi2 ** 2 * s
        + g * g * l2 * l2 * dc.pi1 ** 2 * s
        - l1 * l1 * l2 * l2 * s * (1.0 + g * g + 2.0 * g * r_abs)
        + g * phi * l1 * l2 * (p + params.noise_cross)
    )
    if n1 < 0 or n2 < 0:
        raise DomainError(
            f"MSE contraction factor went negative at k={state.k + 1}: "
            f"({n1:.6e}, {n2:.6e})"
        )
    omega = g * math.sqrt(d1 * d2) * math.sqrt(n1) * math.sqrt(n2)
    if omega == 0.0 or not math.isfinite(omega):
        raise SingularityError(
            f"vanishing correlation normalizer at k={state.k + 1}: omega={omega!r}"
        )
    rho_next = t / omega

    # Covariances of consecutive outputs at use k+2 need the power split that
    # the new correlation implies.
    psi_next = math.sqrt(psi_sq(abs(rho_next), g, p))
    psi_now = math.sqrt(ps)
    s_next = sgn(rho_next)
    dl1 = d2 - ps * (g + r_abs) ** 2 * dc.pi2
    if dl1 < 0:
        raise DomainError(
            f"square-root operand went negative at k={state.k + 1}: {dl1:.6e}"
        )
    l1_next = (
        psi_next
        * psi_now
        * (g + r_abs)
        * g
        * s_next
        * s
        * dc.pi2
        * params.sigma2
        * (params.sigma2 - params.rho_z * params.sigma1)
        / (math.sqrt(dl1) * math.sqrt(d2))
    )
    l2_next = (
        psi_next
        * psi_now
        * (1.0 + g * r_abs)
        * dc.pi1
        * params.sigma1
        * (params.sigma1 - params.rho_z * params.sigma2)
        / (math.sqrt(n1) * math.sqrt(d1))
    )
    if not all(
        map(math.isfinite, (a1, a2, rho_next, l1_next, l2_next))
    ):
        raise DomainError(
            f"non-finite recursion state at k={state.k + 1}: "
            f"alpha=({a1!r}, {a2!r}), rho={rho_next!r}, "
            f"lambda=({l1_next!r}, {l2_next!r})"
        )
    return EolState(
        alpha1=a1,
        alpha2=a2,
        rho=rho_next,
        lambda1=l1_next,
        lambda2=l2_next,
        k=state.k + 1,
        sign_prev=s,
    )


def eol_trajectory(
    params: ChannelParams, g: float, n: int, clamp_lambda: bool = False
) -> list[EolState]:
    """Recursion states for k = 2..n from the natural start.

    With clamp_lambda the output-memory terms are zeroed after every step,
    which must reproduce the memoryless scheme's trajectory exactly.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    states = [eol_init(params)]
    for _ in range(n - 2):
        nxt = eol_step(states[-1], params, g)
        if clamp_lambda:
            nxt = replace(nxt, lambda1=0.0, lambda2=0.0)
        states.append(nxt)
    return states


def _magnitude_map(
    params: ChannelParams, g: float, v: tuple[float, float, float]
) -> tuple[tuple[float, float, float], float]:
    """One application of the (|rho|, lambda1, lambda2) map.

    Enters on the negative-signed branch; the output magnitudes are
    invariant to the entering sign (flipping it flips rho_next and the
    lambda1 sign factor together), so this is the magnitude dynamics
    regardless of the steady sign pattern. Also returns the implied xi.
    """
    st = EolState(
        alpha1=1.0, alpha2=1.0, rho=-v[0], lambda1=v[1], lambda2=v[2], k=2
    )
    nxt = eol_step(st, params, g)
    return (abs(nxt.rho), nxt.lambda1, nxt.lambda2), sgn(nxt.rho) * sgn(st.rho)


def _damped_fixed_point(
    params: ChannelParams,
    g: float,
    tol: float,
    max_iter: int,
    v0: tuple[float, float, float],
    beta: float = 0.5,
) -> EolFixedPoint:
    """Damped fallback for an oscillating plain iteration: average the old
    iterate with its image until the map residual drops below tol."""
    v = v0
    for it in range(1, max_iter + 1):
        mv, xi = _magnitude_map(params, g, v)
        residual = max(abs(a - b) for a, b in zip(mv, v))
        if residual < tol:
            return EolFixedPoint(
                rho_bar=v[0],
                lambda1_bar=v[1],
                lambda2_bar=v[2],
                xi_bar=xi,
                residual=residual,
                iterations=max_iter + it,
            )
        v = tuple((1.0 - beta) * a + beta * b for a, b in zip(v, mv))
    raise ConvergenceError(
        f"no steady state after {max_iter} plain and {max_iter} damped "
        f"iterations at g={g}; last iterate (|rho|, lambda1, lambda2) = {v}"
    )


def eol_fixed_point(
    params: ChannelParams,
    g: float,
    tol: float = 1e-10,
    max_iter: int = 100000,
) -> EolFixedPoint:
    """Steady state by forward iteration of the one-step map from the
    natural start.

    Tracks (|rho_k|, lambda_{1,k}, lambda_{2,k}) and the sign product
    xi_k = sgn(rho_k) sgn(rho_{k-1}); converged once the tracked values move
    less than tol in one step and xi has been stable over the last four
    iterations. The canonical solution is the one reached from the natural
    start; if the plain iteration is still moving at max_iter, a damped pass
    on the magnitude map is tried before giving up.
    """
    if g <= 0:
        raise ValueError(f"g must be > 0, got {g}")
    state = eol_init(params)
    prev: tuple[float, float, float] | None = None
    xis: deque[float] = deque(maxlen=4)
    for it in range(1, max_iter + 1):
        state = eol_step(state, params, g)
        cur = (abs(state.rho), state.lambda1, state.lambda2)
        xis.append(state.xi)
        if (
            prev is not None
            and len(xis) == 4
            and len(set(xis)) == 1
            and max(abs(c - q) for c, q in zip(cur, prev)) < tol
        ):
            probe = eol_step(state, params, g)
            residual = max(
                abs(abs(probe.rho) - cur[0]),
                abs(probe.lambda1 - cur[1]),
                abs(probe.lambda2 - cur[2]),
            )
            return EolFixedPoint(
                rho_bar=cur[0],
                lambda1_bar=cur[1],
                lambda2_bar=cur[2],
                xi_bar=state.xi,
                residual=residual,
                iterations=it,
            )
        prev = cur
    return _damped_fixed_point(
        params, g, tol, max_iter, (abs(state.rho), state.lambda1, state.lambda2)
    )


def eol_rates(
    params: ChannelParams, g: float, fp: EolFixedPoint
) -> tuple[float, float]:
    """Achievable rate pair (bits per channel use) at the steady state.

    R_i = (1/2) log2((pi_i^2 - lambda_i^2) / (pi_i^2 - lambda_i^2 - P pi_i
    + psi^2 g^{4-2i} (1 - rho^2) pi_i)); with lambda_i = 0 this reduces to
    the memoryless-scheme rate at the same rho.
    """
    dc = derive_constants(params)
    ps = psi_sq(fp.rho_bar, g, params.p)
    one_m = 1.0 - fp.rho_bar * fp.rho_bar
    d1 = dc.pi1 * dc.pi1 - fp.lambda1_bar * fp.lambda1_bar
    d2 = dc.pi2 * dc.pi2 - fp.lambda2_bar * fp.lambda2_bar
    n1 = d1 - params.p * dc.pi1 + ps * g * g * one_m * dc.pi1
    n2 = d2 - params.p * dc.pi2 + ps * one_m * dc.pi2
    if d1 <= 0 or d2 <= 0 or n1 <= 0 or n2 <= 0:
        raise DomainError(
            "non-positive log argument in rate evaluation: "
            f"({d1:.6e}/{n1:.6e}, {d2:.6e}/{n2:.6e})"
        )
    return 0.5 * math.log2(d1 / n1), 0.5 * math.log2(d2 / n2)
