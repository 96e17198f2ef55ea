import numpy as np
import pytest

from gbcf.channel import (
    ChannelParams,
    derive_constants,
    sample_noise,
    sgn,
)


def test_sgn_convention():
    assert sgn(3.2) == 1.0
    assert sgn(-0.001) == -1.0
    # Zero maps to +1 so the sign is always a usable factor.
    assert sgn(0.0) == 1.0
    assert sgn(-0.0) == 1.0


def test_params_basic_fields():
    params = ChannelParams(p=2.0, sigma1_sq=1.0, sigma2_sq=4.0, rho_z=0.25)
    assert params.sigma1 == 1.0
    assert params.sigma2 == 2.0
    assert params.noise_cross == pytest.approx(0.25 * 1.0 * 2.0)


def test_params_default_uncorrelated():
    params = ChannelParams(p=1.0, sigma1_sq=1.0, sigma2_sq=1.0)
    assert params.rho_z == 0.0
    assert params.noise_cross == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(p=0.0, sigma1_sq=1.0, sigma2_sq=1.0),
        dict(p=-1.0, sigma1_sq=1.0, sigma2_sq=1.0),
        dict(p=1.0, sigma1_sq=0.0, sigma2_sq=1.0),
        dict(p=1.0, sigma1_sq=1.0, sigma2_sq=-2.0),
        dict(p=1.0, sigma1_sq=1.0, sigma2_sq=1.0, rho_z=1.5),
        dict(p=1.0, sigma1_sq=1.0, sigma2_sq=1.0, rho_z=-1.01),
        dict(p=float("nan"), sigma1_sq=1.0, sigma2_sq=1.0),
        dict(p=float("inf"), sigma1_sq=1.0, sigma2_sq=1.0),
    ],
)
def test_params_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ChannelParams(**kwargs)


def test_derived_constants():
    params = ChannelParams(p=2.0, sigma1_sq=1.0, sigma2_sq=4.0, rho_z=0.5)
    dc = derive_constants(params)
    assert dc.pi1 == pytest.approx(3.0)
    assert dc.pi2 == pytest.approx(6.0)
    # Sigma = P + s1^2 + s2^2 - rho_z s1 s2
    assert dc.big_sigma == pytest.approx(2.0 + 1.0 + 4.0 - 0.5 * 2.0)
    assert dc.varsigma1_sq == pytest.approx(1.0 - 0.5 * 2.0)
    assert dc.varsigma2_sq == pytest.approx(4.0 - 0.5 * 2.0)


def test_derived_constants_uncorrelated_reduce():
    params = ChannelParams(p=5.0, sigma1_sq=1.0, sigma2_sq=1.0)
    dc = derive_constants(params)
    assert dc.big_sigma == pytest.approx(7.0)
    assert dc.varsigma1_sq == pytest.approx(1.0)
    assert dc.varsigma2_sq == pytest.approx(1.0)


def test_sample_noise_scalar_and_vector_shapes():
    params = ChannelParams(p=1.0, sigma1_sq=1.0, sigma2_sq=2.0, rho_z=-0.4)
    rng = np.random.default_rng(0)
    single = sample_noise(params, rng)
    assert np.shape(single.z1) == ()
    batch = sample_noise(params, rng, size=1000)
    assert batch.z1.shape == (1000,)
    assert batch.z2.shape == (1000,)


@pytest.mark.parametrize("rho_z", [-0.7, 0.0, 0.3, 1.0])
def test_sample_noise_moments(rho_z):
    params = ChannelParams(p=1.0, sigma1_sq=2.0, sigma2_sq=0.5, rho_z=rho_z)
    rng = np.random.default_rng(42)
    z = sample_noise(params, rng, size=400000)
    n = z.z1.size
    # Sample moments of iid Gaussians: ~4 sigma tolerance bands.
    tol = 4.0 / np.sqrt(n)
    assert np.mean(z.z1 * z.z1) / params.sigma1_sq == pytest.approx(
        1.0, abs=tol * np.sqrt(2.0)
    )
    assert np.mean(z.z2 * z.z2) / params.sigma2_sq == pytest.approx(
        1.0, abs=tol * np.sqrt(2.0)
    )
    cross = np.mean(z.z1 * z.z2) / (params.sigma1 * params.sigma2)
    assert cross == pytest.approx(rho_z, abs=tol * 1.5)


def test_sample_noise_fully_correlated_degenerate():
    params = ChannelParams(p=1.0, sigma1_sq=1.0, sigma2_sq=1.0, rho_z=1.0)
    rng = np.random.default_rng(3)
    z = sample_noise(params, rng, size=100)
    assert np.allclose(z.z1, z.z2)
