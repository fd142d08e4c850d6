import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frachardy.constants import (Params, gamma0, gamma_alpha, gamma_fn, kappa_s, kernel_constants,
                                 m_alpha, poisson_mass, sphere_area)
from frachardy.errors import DomainError


def mp_gamma_alpha(N, s, a):
    a = abs(a)
    return float(mp.mpf(2) ** (2 * s) * mp.gamma((N + 2 * s + 2 * a) / 4) * mp.gamma((N + 2 * s - 2 * a) / 4)
                 / (mp.gamma((N - 2 * s - 2 * a) / 4) * mp.gamma((N - 2 * s + 2 * a) / 4)))


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi))])
def test_gamma_examples(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-30.0, max_value=60.0).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
def test_gamma_matches_mpmath(x):
    ref = mp.gamma(x)
    assert abs(gamma_fn(x) / float(ref) - 1.0) < 1e-12


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_gamma0_three_half():
    assert gamma0(3, 0.5) == pytest.approx(2 / math.pi, abs=1e-12)


def test_kappa_half_is_one():
    assert kappa_s(0.5) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.7, 0.9])
def test_kappa_against_mpmath(s):
    ref = mp.gamma(1 - s) / (mp.mpf(2) ** (2 * s - 1) * mp.gamma(s))
    assert kappa_s(s) == pytest.approx(float(ref), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 2, 3, 4]), st.floats(0.05, 0.95), st.floats(0.0, 0.999))
def test_gamma_alpha_factorization(N, s, frac):
    if N <= 2 * s:
        return
    a = frac * (N - 2 * s) / 2
    g = gamma_alpha(N, s, a)
    assert g == pytest.approx(mp_gamma_alpha(N, s, a), rel=1e-12)
    assert m_alpha(N, s, a) * m_alpha(N, s, -a) == pytest.approx(g, rel=1e-12)


@pytest.mark.parametrize("N, s", [(1, 0.25), (2, 0.5), (3, 0.5), (3, 0.9)])
def test_gamma_alpha_decreasing_to_zero(N, s):
    edge = (N - 2 * s) / 2
    a = np.linspace(0, edge * 0.999, 60)
    g = np.array([gamma_alpha(N, s, x) for x in a])
    assert g[0] == pytest.approx(gamma0(N, s), rel=1e-14)
    assert np.all(np.diff(g) < 0)
    assert g[-1] < 1e-2 * g[0]
    assert gamma_alpha(N, s, edge) == 0.0


def test_gamma_alpha_domain():
    with pytest.raises(DomainError):
        gamma_alpha(3, 0.5, 1.2)
    with pytest.raises(DomainError):
        gamma0(1, 0.5)


def test_gamma0_local_limit():
    # approaches (N-2)^2/4 as s -> 1
    errs = [abs(gamma0(3, s) - 0.25) for s in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_kernel_constants_closed_form(N, s):
    c, p = kernel_constants(N, s)
    c_ref = 2 ** (2 * s) * mp.gamma(N / 2 + s) / (mp.pi ** (N / 2) * abs(mp.gamma(-s)))
    p_ref = mp.gamma(N / 2 + s) / (mp.pi ** (N / 2) * mp.gamma(s))
    assert c == pytest.approx(float(c_ref), rel=1e-7)
    assert p == pytest.approx(float(p_ref), rel=1e-12)


@pytest.mark.parametrize("t", [1e-3, 1.0, 50.0])
def test_poisson_mass_scale_free(t):
    p_ref = float(mp.gamma(3 / 2 + 0.3) / (mp.pi ** 1.5 * mp.gamma(0.3)))
    assert p_ref * poisson_mass(3, 0.3, t) == pytest.approx(1.0, abs=1e-10)


def test_sphere_area():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_params_derived():
    P = Params(N=3, s=0.5, alpha=0.3, p=2.0, q=1.5)
    assert P.p_crit == pytest.approx(3.4 / 1.4)
    assert P.tau == pytest.approx(1.0 - 1 / 1.5)
    assert P.a == 0.0
    assert P.ground_exponent == pytest.approx(-0.7)
    c = P.constants()
    assert c.gamma_alpha == pytest.approx(c.m_alpha * m_alpha(3, 0.5, -0.3))
    assert all(v > 0 for v in c.to_dict().values())
    assert Params(N=3, s=0.5, alpha=1.0).p_crit == math.inf


@pytest.mark.parametrize("kw", [dict(s=1.2), dict(s=0.0), dict(N=0), dict(N=1, s=0.6), dict(alpha=1.5),
                                dict(p=1.0), dict(q=2.0), dict(q=1.0)])
def test_params_invalid(kw):
    with pytest.raises(DomainError):
        Params(**kw)


def test_remainder_q_range():
    Params(N=3, s=0.25, q=1.5).require_remainder()
    with pytest.raises(DomainError):
        Params(N=3, s=0.1, q=1.6).require_remainder()
