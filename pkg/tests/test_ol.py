import math

import numpy as np
import pytest

from gbcf.channel import ChannelParams
from gbcf.errors import ConvergenceError
from gbcf.ol import (
    OlState,
    ol_fixed_point,
    ol_init,
    ol_rates,
    ol_step,
    ol_trajectory,
    psi_sq,
)

SYM2 = ChannelParams(p=2.0, sigma1_sq=1.0, sigma2_sq=1.0)
SYM5 = ChannelParams(p=5.0, sigma1_sq=1.0, sigma2_sq=1.0)


def test_init_state():
    st = ol_init(SYM5)
    assert st.k == 2
    assert st.alpha1 == pytest.approx(1.0 / 60.0)
    assert st.alpha2 == pytest.approx(1.0 / 60.0)
    assert st.rho == 0.0


def test_psi_sq_values():
    # P / (1 + g^2 + 2 g |rho|)
    assert psi_sq(0.0, 1.0, 5.0) == pytest.approx(2.5)
    assert psi_sq(0.41, 1.0, 2.0) == pytest.approx(0.7092198581560284)
    assert psi_sq(1.0, 2.0, 10.0) == pytest.approx(10.0 / 9.0)


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_psi_sq_rho_domain(bad):
    with pytest.raises(ValueError):
        psi_sq(bad, 1.0, 1.0)


def test_psi_sq_g_domain():
    with pytest.raises(ValueError):
        psi_sq(0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        psi_sq(0.5, -1.0, 1.0)


def test_first_step_hand_values():
    # One step from the init at P=5, symmetric unit noises, g=1:
    # psi^2 = 2.5, so alpha contracts by (1 + 2.5) / 6 and the errors pick
    # up correlation -5/6.
    st = ol_step(ol_init(SYM5), SYM5, 1.0)
    assert st.k == 3
    assert st.alpha1 == pytest.approx((1.0 / 60.0) * 3.5 / 6.0, rel=1e-14)
    assert st.alpha2 == pytest.approx((1.0 / 60.0) * 3.5 / 6.0, rel=1e-14)
    assert st.rho == pytest.approx(-5.0 / 6.0, rel=1e-14)


def test_fixed_point_symmetric_reference():
    fp = ol_fixed_point(SYM2, 1.0)
    assert fp.rho_ol == pytest.approx(0.40933270911374475, abs=1e-10)
    assert fp.residual < 1e-12
    assert fp.roots == (pytest.approx(fp.rho_ol),)


def test_fixed_point_is_a_two_cycle():
    fp = ol_fixed_point(SYM2, 1.0)
    st = OlState(alpha1=1.0, alpha2=1.0, rho=-fp.rho_ol, k=2)
    nxt = ol_step(st, SYM2, 1.0)
    assert nxt.rho == pytest.approx(fp.rho_ol, abs=1e-12)
    again = ol_step(nxt, SYM2, 1.0)
    assert again.rho == pytest.approx(-fp.rho_ol, abs=1e-12)


def test_trajectory_converges_to_fixed_point():
    fp = ol_fixed_point(SYM2, 1.0)
    states = ol_trajectory(SYM2, 1.0, 200)
    assert len(states) == 199
    # Convergence toward the steady correlation is linear, so give the
    # orbit plenty of steps before demanding agreement.
    assert abs(abs(states[-1].rho) - fp.rho_ol) < 1e-12
    # MSEs contract monotonically once past the first step.
    alphas = [s.alpha1 for s in states]
    assert all(b < a for a, b in zip(alphas[1:], alphas[2:]))


def test_rates_reference_value():
    fp = ol_fixed_point(SYM2, 1.0)
    r1, r2 = ol_rates(SYM2, 1.0, fp.rho_ol)
    assert r1 == pytest.approx(0.4576651961288329, abs=1e-9)
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_rates_match_steady_contraction():
    # 2^{-2 R_i} must equal the per-step MSE contraction at the fixed point.
    params = ChannelParams(p=3.0, sigma1_sq=0.5, sigma2_sq=2.0, rho_z=0.2)
    g = 1.4
    fp = ol_fixed_point(params, g)
    r1, r2 = ol_rates(params, g, fp.rho_ol)
    st = OlState(alpha1=1.0, alpha2=1.0, rho=-fp.rho_ol, k=2)
    nxt = ol_step(st, params, g)
    assert nxt.alpha1 == pytest.approx(2.0 ** (-2.0 * r1), rel=1e-10)
    assert nxt.alpha2 == pytest.approx(2.0 ** (-2.0 * r2), rel=1e-10)


def test_swap_symmetry():
    # Exchanging the receivers and inverting g must swap the rate pair.
    params = ChannelParams(p=2.0, sigma1_sq=0.6, sigma2_sq=1.8, rho_z=0.1)
    swapped = ChannelParams(p=2.0, sigma1_sq=1.8, sigma2_sq=0.6, rho_z=0.1)
    g = 1.7
    fa = ol_fixed_point(params, g)
    fb = ol_fixed_point(swapped, 1.0 / g)
    ra = ol_rates(params, g, fa.rho_ol)
    rb = ol_rates(swapped, 1.0 / g, fb.rho_ol)
    assert fa.rho_ol == pytest.approx(fb.rho_ol, rel=1e-9)
    assert ra[0] == pytest.approx(rb[1], rel=1e-9)
    assert ra[1] == pytest.approx(rb[0], rel=1e-9)


@pytest.mark.parametrize("g", [0.01, 0.1, 1.0, 10.0, 100.0])
def test_fixed_point_residuals_over_g(g):
    fp = ol_fixed_point(SYM5, g)
    assert 0.0 < fp.rho_ol < 1.0
    assert fp.residual < 1e-12


def test_fixed_point_rejects_bad_g():
    with pytest.raises(ValueError):
        ol_fixed_point(SYM2, 0.0)
    with pytest.raises(ValueError):
        ol_fixed_point(SYM2, -2.0)


def test_rates_rejects_bad_rho():
    with pytest.raises(ValueError):
        ol_rates(SYM2, 1.0, -0.3)
    with pytest.raises(ValueError):
        ol_rates(SYM2, 1.0, 1.2)


def test_tight_tolerance_unreachable_raises():
    with pytest.raises(ConvergenceError):
        ol_fixed_point(SYM2, 1.0, tol=1e-18)


def test_trajectory_requires_two_uses():
    with pytest.raises(ValueError):
        ol_trajectory(SYM2, 1.0, 1)


def test_step_rejects_nonfinite_state():
    from gbcf.errors import DomainError

    bad = OlState(alpha1=math.nan, alpha2=1.0, rho=0.0, k=2)
    with pytest.raises(DomainError):
        ol_step(bad, SYM2, 1.0)
