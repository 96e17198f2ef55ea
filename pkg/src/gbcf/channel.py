"""Two-user Gaussian broadcast channel with noiseless feedback: parameters,
derived constants, and correlated noise sampling.

Channel model: Y_{i,k} = X_k + Z_{i,k} for receivers i = 1, 2, with
Z_{i,k} ~ N(0, sigma_i^2), independent across channel uses but correlated
across receivers at equal times, E{Z_1 Z_2} = rho_z sigma_1 sigma_2. The
transmitter runs under the average power constraint E{X_k^2} <= P and sees
both outputs causally through a noiseless feedback link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "DerivedConstants",
    "NoiseSample",
    "derive_constants",
    "sample_noise",
    "sgn",
]


def sgn(x: float) -> float:
    """Sign of x as +/-1.0 with sgn(0) = +1.

    The correlation recursions evaluate sgn(rho) at rho = 0 (the natural
    start has uncorrelated errors), so the zero case must be pinned.
    """
    return 1.0 if x >= 0 else -1.0


@dataclass(frozen=True)
class ChannelParams:
    """Physical setup: power budget and noise second-order statistics."""

    p: float
    sigma1_sq: float
    sigma2_sq: float
    rho_z: float = 0.0

    def __post_init__(self):
        for name in ("p", "sigma1_sq", "sigma2_sq", "rho_z"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite number, got {v!r}")
        if self.p <= 0:
            raise ValueError(f"p must be > 0, got {self.p}")
        if self.sigma1_sq <= 0 or self.sigma2_sq <= 0:
            raise ValueError("noise variances must be > 0")
        if not -1.0 <= self.rho_z <= 1.0:
            raise ValueError(f"rho_z must lie in [-1, 1], got {self.rho_z}")

    @property
    def sigma1(self) -> float:
        return math.sqrt(self.sigma1_sq)

    @property
    def sigma2(self) -> float:
        return math.sqrt(self.sigma2_sq)

    @property
    def noise_cross(self) -> float:
        """E{Z_1 Z_2} = rho_z sigma_1 sigma_2."""
        return self.rho_z * self.sigma1 * self.sigma2


@dataclass(frozen=True)
class DerivedConstants:
    """Constants every recursion consumes, all pure functions of the params.

    pi_i = P + sigma_i^2 is the full-power output second moment E{Y_i^2};
    big_sigma = P + sigma_1^2 + sigma_2^2 - rho_z sigma_1 sigma_2;
    varsigma_i^2 = sigma_i^2 - rho_z sigma_1 sigma_2.
    """

    pi1: float
    pi2: float
    big_sigma: float
    varsigma1_sq: float
    varsigma2_sq: float


def derive_constants(params: ChannelParams) -> DerivedConstants:
    """Pure function of the params; equal inputs give bit-identical output."""
    cross = params.noise_cross
    return DerivedConstants(
        pi1=params.p + params.sigma1_sq,
        pi2=params.p + params.sigma2_sq,
        big_sigma=params.p + params.sigma1_sq + params.sigma2_sq - cross,
        varsigma1_sq=params.sigma1_sq - cross,
        varsigma2_sq=params.sigma2_sq - cross,
    )


@dataclass(frozen=True)
class NoiseSample:
    """One draw (scalar or vector) of the receiver noise pair."""

    z1: float | np.ndarray
    z2: float | np.ndarray


def sample_noise(
    params: ChannelParams, rng: np.random.Generator, size: int | None = None
) -> NoiseSample:
    """Draw correlated receiver noise via a lower-triangular square root.

    z1 = sigma_1 u1 and z2 = sigma_2 (rho_z u1 + sqrt(1 - rho_z^2) u2) with
    u1, u2 i.i.d. standard normal, drawn in that fixed order so results are
    reproducible for a given generator state. At |rho_z| = 1 the factor
    degenerates gracefully: z2 is fully determined by u1.
    """
    u1 = rng.standard_normal(size)
    u2 = rng.standard_normal(size)
    tail = math.sqrt(max(1.0 - params.rho_z * params.rho_z, 0.0))
    return NoiseSample(
        z1=params.sigma1 * u1,
        z2=params.sigma2 * (params.rho_z * u1 + tail * u2),
    )
