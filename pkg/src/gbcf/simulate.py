"""Monte Carlo transmission simulator for both feedback schemes.

Bookkeeping conventions
-----------------------
Channel uses are numbered k = 1..n. Use 1 carries receiver 1's message point
at full amplitude sqrt(12 P), use 2 carries receiver 2's; every later use
transmits the weighted sum of the two current estimation errors. Errors are
theta_hat - theta. Before a receiver has seen its own message its estimate
is 0, so eps_{2,1} = -theta_2 and eps_{1,2} = eps_{1,1}. From use 3 on,
receiver i refines with its scheme's two-tap coefficients:

    eps_{i,k} = eps_{i,k-1} - (c_now Y_{i,k} + c_prev Y_{i,k-1})

(the memoryless scheme has c_prev = 0 throughout). All per-use gains are
deterministic functions of the recursion, precomputed into a GainSchedule;
the transmitter can rebuild every receiver estimate from the fed-back
outputs alone (see replay_errors), which is what makes the error-sum
transmission realizable.

Determinism
-----------
Trials are simulated in fixed blocks of 65536. Block b of a run draws from
``numpy.random.default_rng([seed, b])``, with a fixed draw order inside the
block (message indices for receiver 1, then receiver 2, then one correlated
noise pair per use). Accumulators are reduced in block order. Results are
therefore bit-identical for a given (seed, trials) regardless of how many
worker threads run the blocks.
"""

from __future__ import annotations

import csv
import gzip
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import ChannelParams, sample_noise, sgn
from .eol import (
    EolState,
    eol_estimator_coeffs,
    eol_fixed_point,
    eol_init,
    eol_step,
)
from .ol import OlState, ol_fixed_point, ol_init, ol_step, psi_sq

__all__ = [
    "BATCH",
    "GainSchedule",
    "PeEstimate",
    "SimConfig",
    "SimResult",
    "TrialRecord",
    "build_schedule",
    "dump_trajectories",
    "estimate_pe",
    "pam_decode",
    "pam_map",
    "replay_errors",
    "run_ensemble",
    "run_trial",
    "wilson_interval",
]

# Block size for the per-block RNG substreams.
BATCH = 65536

# Accumulated per-use statistics: sums over trials of the quantity named by
# the key, plus sums of its square for standard errors. Arrays are indexed
# by channel use k (index 0 unused); "yy_i" holds Y_{i,k+1} Y_{i,k} at index
# k, matching the recursion's lambda indexing. Entries outside a key's
# measured range stay zero.
_MOMENT_KEYS = (
    "x2",
    "eps2_1",
    "eps2_2",
    "e1e2",
    "yy_1",
    "yy_2",
    "ey_now_1",
    "ey_now_2",
    "ey_prev_1",
    "ey_prev_2",
)

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    rate1/rate2 are in bits per channel use; the message alphabet sizes are
    M_i = round(2^{n rate_i}). init selects how the gain schedule is seeded:
    "natural" starts the recursion from its two init uses, "fixed-point"
    pins it at the steady state from the first refinement on (an idealized
    link; its early uses are then mismatched to the true statistics).
    """

    scheme: str
    n: int
    rate1: float
    rate2: float
    g: float = 1.0
    trials: int = 100000
    seed: int = 0
    record_trajectories: bool = False
    init: str = "natural"

    def __post_init__(self) -> None:
        if self.scheme not in ("ol", "eol"):
            raise ValueError(f"scheme must be 'ol' or 'eol', got {self.scheme!r}")
        if self.init not in ("natural", "fixed-point"):
            raise ValueError(
                f"init must be 'natural' or 'fixed-point', got {self.init!r}"
            )
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if not (self.rate1 >= 0.0 and self.rate2 >= 0.0):
            raise ValueError(
                f"rates must be >= 0, got ({self.rate1}, {self.rate2})"
            )
        if self.n * max(self.rate1, self.rate2) > 50.0:
            raise ValueError(
                "n * rate exceeds 50 bits; the message alphabet would not be "
                "representable"
            )
        if self.g <= 0.0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @property
    def m1(self) -> int:
        """Message alphabet size for receiver 1."""
        return int(round(2.0 ** (self.n * self.rate1)))

    @property
    def m2(self) -> int:
        """Message alphabet size for receiver 2."""
        return int(round(2.0 ** (self.n * self.rate2)))


def pam_map(m, big_m: int):
    """Message index m in 1..M to its point theta = (m - (M+1)/2) / M.

    Points are uniform in (-1/2, 1/2) with spacing 1/M; a uniform index has
    E{theta^2} = (M^2 - 1) / (12 M^2).
    """
    if big_m < 1:
        raise ValueError(f"alphabet size must be >= 1, got {big_m}")
    return (np.asarray(m, dtype=float) - 0.5 * (big_m + 1)) / big_m


def pam_decode(theta_hat, big_m: int):
    """Nearest message index for an estimate, clipped to 1..M.

    Boundary ties resolve to the lower index.
    """
    if big_m < 1:
        raise ValueError(f"alphabet size must be >= 1, got {big_m}")
    raw = np.ceil(np.asarray(theta_hat, dtype=float) * big_m + 0.5 * (big_m + 1) - 0.5)
    return np.clip(raw, 1, big_m).astype(np.int64)


@dataclass(eq=False)
class GainSchedule:
    """Deterministic per-use gains and the recursion values behind them.

    Arrays have length n + 1 and are indexed by channel use k; entries below
    a quantity's first valid use are NaN. enc1/enc2 are the transmitter
    weights on the two errors (valid k >= 3); cI_now/cI_prev are receiver
    I's refinement taps (valid k >= 3); alpha/rho/lambda are the recursion
    state after k uses (valid k >= 2), kept for validating the simulation
    against the model.
    """

    scheme: str
    n: int
    amp: float
    enc1: np.ndarray
    enc2: np.ndarray
    c1_now: np.ndarray
    c1_prev: np.ndarray
    c2_now: np.ndarray
    c2_prev: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    rho: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray


def _schedule_start(params: ChannelParams, config: SimConfig) -> EolState:
    """Recursion state after the two init uses, per the init mode.

    The steady-state seed takes rho_2 = +rho_bar so that the simulated orbit
    keeps the natural phase (rho negative at odd uses); magnitudes and error
    statistics are invariant to that choice.
    """
    natural = eol_init(params)
    if config.init == "natural":
        return natural
    if config.scheme == "ol":
        fp = ol_fixed_point(params, config.g)
        return replace(natural, rho=fp.rho_ol, sign_prev=-1.0)
    fp = eol_fixed_point(params, config.g)
    return replace(
        natural,
        rho=fp.rho_bar,
        lambda1=fp.lambda1_bar,
        lambda2=fp.lambda2_bar,
        sign_prev=fp.xi_bar,
    )


def build_schedule(
    params: ChannelParams, config: SimConfig, _lambda_corruption: float = 0.0
) -> GainSchedule:
    """Precompute all per-use gains for a run.

    The memoryless scheme evolves through its own one-output recursion and
    gets its taps from the two-tap solver with the memory terms at zero
    (which makes c_prev exactly 0). _lambda_corruption scales the memory
    terms used for the receiver taps only, leaving the recursion itself
    untouched; it exists so the validation checks can be shown to catch a
    miscalibrated schedule.
    """
    n = config.n
    g = config.g
    shape = n + 1
    nan = np.full(shape, np.nan)
    sched = GainSchedule(
        scheme=config.scheme,
        n=n,
        amp=math.sqrt(12.0 * params.p),
        enc1=nan.copy(),
        enc2=nan.copy(),
        c1_now=nan.copy(),
        c1_prev=nan.copy(),
        c2_now=nan.copy(),
        c2_prev=nan.copy(),
        alpha1=nan.copy(),
        alpha2=nan.copy(),
        rho=nan.copy(),
        lambda1=nan.copy(),
        lambda2=nan.copy(),
    )
    state = _schedule_start(params, config)
    ol_state: Optional[OlState] = None
    if config.scheme == "ol":
        ol_state = OlState(
            alpha1=state.alpha1, alpha2=state.alpha2, rho=state.rho, k=2
        )
    for k in range(2, n + 1):
        sched.alpha1[k] = state.alpha1
        sched.alpha2[k] = state.alpha2
        sched.rho[k] = state.rho
        sched.lambda1[k] = state.lambda1
        sched.lambda2[k] = state.lambda2
        if k == n:
            break
        # Gains of use k+1 come from the state after k uses.
        psi = math.sqrt(psi_sq(abs(state.rho), g, params.p))
        sched.enc1[k + 1] = psi / math.sqrt(state.alpha1)
        sched.enc2[k + 1] = psi * g * sgn(state.rho) / math.sqrt(state.alpha2)
        tap_state = state
        if _lambda_corruption != 0.0:
            tap_state = replace(
                state,
                lambda1=state.lambda1 * (1.0 + _lambda_corruption),
                lambda2=state.lambda2 * (1.0 + _lambda_corruption),
            )
        c1 = eol_estimator_coeffs(tap_state, params, g, user=1)
        c2 = eol_estimator_coeffs(tap_state, params, g, user=2)
        sched.c1_now[k + 1] = c1.c_now
        sched.c1_prev[k + 1] = c1.c_prev
        sched.c2_now[k + 1] = c2.c_now
        sched.c2_prev[k + 1] = c2.c_prev
        if ol_state is not None:
            ol_state = ol_step(ol_state, params, g)
            state = EolState(
                alpha1=ol_state.alpha1,
                alpha2=ol_state.alpha2,
                rho=ol_state.rho,
                lambda1=0.0,
                lambda2=0.0,
                k=ol_state.k,
                sign_prev=sgn(state.rho),
            )
        else:
            state = eol_step(state, params, g)
    if config.scheme == "ol":
        # The memoryless scheme builds its taps as if consecutive outputs
        # were uncorrelated; record that working assumption (not a claim
        # about the physical output covariance, which is generally nonzero).
        sched.lambda1[2:] = 0.0
        sched.lambda2[2:] = 0.0
    return sched


def _advance_errors(sched, k, e1, e2, y1, y2, y1_prev, y2_prev, th1, th2):
    """Shared per-use receiver update (also used for transmitter replay)."""
    if k == 1:
        return y1 / sched.amp - th1, -th2
    if k == 2:
        return e1, y2 / sched.amp - th2
    return (
        e1 - (sched.c1_now[k] * y1 + sched.c1_prev[k] * y1_prev),
        e2 - (sched.c2_now[k] * y2 + sched.c2_prev[k] * y2_prev),
    )


def replay_errors(
    sched: GainSchedule,
    y1: np.ndarray,
    y2: np.ndarray,
    theta1: np.ndarray,
    theta2: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct both error trajectories from channel outputs alone.

    This is the transmitter's view: given the fed-back outputs and the
    messages it sent, it re-runs the receiver updates. The result is
    bit-identical to the receivers' own trajectories.
    """
    y1 = np.atleast_2d(np.asarray(y1, dtype=float))
    y2 = np.atleast_2d(np.asarray(y2, dtype=float))
    n = sched.n
    if y1.shape[1] != n or y2.shape[1] != n:
        raise ValueError(f"outputs must have {n} columns, got {y1.shape[1]}")
    th1 = np.asarray(theta1, dtype=float)
    th2 = np.asarray(theta2, dtype=float)
    eps1 = np.empty_like(y1)
    eps2 = np.empty_like(y2)
    e1 = e2 = None
    for k in range(1, n + 1):
        e1, e2 = _advance_errors(
            sched,
            k,
            e1,
            e2,
            y1[:, k - 1],
            y2[:, k - 1],
            y1[:, k - 2] if k >= 2 else None,
            y2[:, k - 2] if k >= 2 else None,
            th1,
            th2,
        )
        eps1[:, k - 1] = e1
        eps2[:, k - 1] = e2
    return eps1, eps2


def _simulate_block(params, config, sched, rng, n_trials, record):
    """Simulate one block of trials; returns raw per-block results."""
    n = config.n
    m1 = rng.integers(1, config.m1 + 1, size=n_trials)
    m2 = rng.integers(1, config.m2 + 1, size=n_trials)
    th1 = pam_map(m1, config.m1)
    th2 = pam_map(m2, config.m2)
    moments = {key: np.zeros(n + 1) for key in _MOMENT_KEYS}
    moments_sq = {key: np.zeros(n + 1) for key in _MOMENT_KEYS}
    traj = (
        {key: np.empty((n_trials, n)) for key in ("x", "y1", "y2", "eps1", "eps2")}
        if record
        else None
    )

    def accum(key, k, values):
        moments[key][k] = values.sum()
        moments_sq[key][k] = np.dot(values, values)

    e1 = e2 = None
    y1_prev = y2_prev = None
    for k in range(1, n + 1):
        if k == 1:
            x = sched.amp * th1
        elif k == 2:
            x = sched.amp * th2
        else:
            x = sched.enc1[k] * e1 + sched.enc2[k] * e2
        z = sample_noise(params, rng, size=n_trials)
        y1 = x + z.z1
        y2 = x + z.z2
        e1, e2 = _advance_errors(
            sched, k, e1, e2, y1, y2, y1_prev, y2_prev, th1, th2
        )
        accum("x2", k, x * x)
        accum("eps2_1", k, e1 * e1)
        accum("eps2_2", k, e2 * e2)
        accum("e1e2", k, e1 * e2)
        if k >= 2:
            accum("yy_1", k - 1, y1 * y1_prev)
            accum("yy_2", k - 1, y2 * y2_prev)
        if k >= 3:
            accum("ey_now_1", k, e1 * y1)
            accum("ey_now_2", k, e2 * y2)
            accum("ey_prev_1", k, e1 * y1_prev)
            accum("ey_prev_2", k, e2 * y2_prev)
        if record:
            traj["x"][:, k - 1] = x
            traj["y1"][:, k - 1] = y1
            traj["y2"][:, k - 1] = y2
            traj["eps1"][:, k - 1] = e1
            traj["eps2"][:, k - 1] = e2
        y1_prev, y2_prev = y1, y2
    dec1 = pam_decode(th1 + e1, config.m1)
    dec2 = pam_decode(th2 + e2, config.m2)
    return m1, m2, dec1, dec2, e1, e2, moments, moments_sq, traj


@dataclass(frozen=True)
class TrialRecord:
    """Everything observable about a single simulated transmission."""

    messages: tuple[int, int]
    decoded: tuple[int, int]
    final_errors: tuple[float, float]
    power_trace: np.ndarray
    error_indicators: tuple[bool, bool]


def run_trial(
    config: SimConfig, params: ChannelParams, rng: np.random.Generator
) -> TrialRecord:
    """Simulate one transmission, drawing from the caller's generator."""
    sched = build_schedule(params, config)
    m1, m2, dec1, dec2, e1, e2, _, _, traj = _simulate_block(
        params, config, sched, rng, n_trials=1, record=True
    )
    return TrialRecord(
        messages=(int(m1[0]), int(m2[0])),
        decoded=(int(dec1[0]), int(dec2[0])),
        final_errors=(float(e1[0]), float(e2[0])),
        power_trace=(traj["x"][0] ** 2),
        error_indicators=(bool(dec1[0] != m1[0]), bool(dec2[0] != m2[0])),
    )


@dataclass(frozen=True)
class PeEstimate:
    """Empirical symbol error probability with a Wilson 95% interval."""

    trials: int
    errors: int
    pe: float
    ci_low: float
    ci_high: float


def wilson_interval(k: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion of k successes in n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, {n}], got {k}")
    phat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2.0 * n)) / denom
    half = (
        z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom
    )
    # The exact bounds at the degenerate ends are 0 and 1; don't let
    # roundoff in center - half leak past them.
    lo = 0.0 if k == 0 else max(center - half, 0.0)
    hi = 1.0 if k == n else min(center + half, 1.0)
    return lo, hi


@dataclass(eq=False)
class SimResult:
    """Accumulated outcome of a Monte Carlo run.

    moments/moments_sq hold per-use sums of the tracked statistics and of
    their squares (see module docstring for the key conventions);
    trajectories, when recorded, holds (trials, n) arrays keyed "x", "y1",
    "y2", "eps1", "eps2".
    """

    config: SimConfig
    params: ChannelParams
    schedule: GainSchedule
    trials: int
    errors1: int
    errors2: int
    moments: dict = field(default_factory=dict)
    moments_sq: dict = field(default_factory=dict)
    trajectories: Optional[dict] = None

    def mean_se(self, stat: str, k: int) -> tuple[float, float]:
        """Sample mean and its standard error for a tracked statistic."""
        s = self.moments[stat][k]
        s2 = self.moments_sq[stat][k]
        mean = s / self.trials
        var = max(s2 / self.trials - mean * mean, 0.0)
        return float(mean), float(math.sqrt(var / self.trials))

    def rho_emp(self, k: int) -> float:
        """Empirical error correlation coefficient after k uses."""
        e1e2 = self.moments["e1e2"][k]
        v1 = self.moments["eps2_1"][k]
        v2 = self.moments["eps2_2"][k]
        return float(e1e2 / math.sqrt(v1 * v2))

    def pe_estimate(self, user: int) -> PeEstimate:
        """Decoding error probability for one receiver."""
        if user not in (1, 2):
            raise ValueError(f"user must be 1 or 2, got {user}")
        errors = self.errors1 if user == 1 else self.errors2
        lo, hi = wilson_interval(errors, self.trials)
        return PeEstimate(
            trials=self.trials,
            errors=errors,
            pe=errors / self.trials,
            ci_low=lo,
            ci_high=hi,
        )


def run_ensemble(
    config: SimConfig,
    params: ChannelParams,
    jobs: int = 1,
    _lambda_corruption: float = 0.0,
) -> SimResult:
    """Simulate config.trials transmissions in deterministic blocks.

    jobs > 1 runs blocks on a thread pool; the per-block substreams and the
    block-ordered reduction keep the result bit-identical to jobs=1.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    sched = build_schedule(params, config, _lambda_corruption=_lambda_corruption)
    blocks = []
    done = 0
    while done < config.trials:
        nt = min(BATCH, config.trials - done)
        blocks.append((len(blocks), nt))
        done += nt

    def worker(block):
        b, nt = block
        rng = np.random.default_rng([config.seed, b])
        return _simulate_block(
            params, config, sched, rng, nt, config.record_trajectories
        )

    if jobs == 1 or len(blocks) == 1:
        results = map(worker, blocks)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, blocks))
    errors1 = errors2 = 0
    moments = {key: np.zeros(config.n + 1) for key in _MOMENT_KEYS}
    moments_sq = {key: np.zeros(config.n + 1) for key in _MOMENT_KEYS}
    traj_parts = [] if config.record_trajectories else None
    for m1, m2, dec1, dec2, _, _, mom, mom_sq, traj in results:
        errors1 += int(np.count_nonzero(dec1 != m1))
        errors2 += int(np.count_nonzero(dec2 != m2))
        for key in _MOMENT_KEYS:
            moments[key] += mom[key]
            moments_sq[key] += mom_sq[key]
        if traj_parts is not None:
            traj_parts.append(traj)
    trajectories = None
    if traj_parts is not None:
        trajectories = {
            key: np.concatenate([part[key] for part in traj_parts])
            for key in traj_parts[0]
        }
    return SimResult(
        config=config,
        params=params,
        schedule=sched,
        trials=config.trials,
        errors1=errors1,
        errors2=errors2,
        moments=moments,
        moments_sq=moments_sq,
        trajectories=trajectories,
    )


def estimate_pe(
    config: SimConfig, params: ChannelParams, jobs: int = 1
) -> tuple[PeEstimate, PeEstimate]:
    """Empirical error probabilities for both receivers."""
    result = run_ensemble(config, params, jobs=jobs)
    return result.pe_estimate(1), result.pe_estimate(2)


def dump_trajectories(
    result: SimResult, path: str, compress: bool = False
) -> None:
    """Write recorded trajectories as delimited text.

    Columns are trial, k, x, y1, y2, eps1, eps2 with one row per channel
    use, trials in run order. Floats are written with repr so a reload
    round-trips exactly.
    """
    if result.trajectories is None:
        raise ValueError("run was not configured to record trajectories")
    traj = result.trajectories
    if compress:
        opener = gzip.open(path, "wt", newline="")
    else:
        opener = open(path, "w", newline="")
    n = result.config.n
    with opener as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "k", "x", "y1", "y2", "eps1", "eps2"])
        for t in range(result.trials):
            for k in range(1, n + 1):
                writer.writerow(
                    [
                        t,
                        k,
                        repr(float(traj["x"][t, k - 1])),
                        repr(float(traj["y1"][t, k - 1])),
                        repr(float(traj["y2"][t, k - 1])),
                        repr(float(traj["eps1"][t, k - 1])),
                        repr(float(traj["eps2"][t, k - 1])),
                    ]
                )
