import math

import mpmath as mp
import numpy as np
import pytest

from frachardy.constants import Params, gamma0, gamma_alpha
from frachardy.errors import CoercivityError, ConvergenceError, DomainError, FitQualityError
from frachardy.extension import dtn_operator
from frachardy.semilinear import (PotentialSpec, direct_solve, explicit_supercritical,
                                  fit_origin_exponent, ground_state_potential, monotone_solve,
                                  nonexistence_diagnostic, nonexistence_operator, variational_minimize)


def mp_gamma_alpha(N, s, a):
    return 4**s * mp.gamma((N + 2 * s + 2 * a) / 4) * mp.gamma((N + 2 * s - 2 * a) / 4) / (
        mp.gamma((N - 2 * s - 2 * a) / 4) * mp.gamma((N - 2 * s + 2 * a) / 4))


G0 = gamma0(3, 0.5)


def test_monotone_matches_direct():
    b = PotentialSpec(G0 / 2, 0.5)
    m = monotone_solve(b, 1.0)
    d = direct_solve(b, 1.0)
    assert m.monotone_violations == 0
    assert m.residual < 1e-10 and d.residual < 1e-10
    v = d.profile.values
    assert np.max(np.abs(m.profile.values - v)) <= 1e-6 * np.max(np.abs(v))
    assert np.all(v > 0)


def test_monotone_iterates_increase():
    # recompute the iterates to check the ordering at every node
    op = dtn_operator(3, 0.5)
    bv = PotentialSpec(G0 / 2, 0.5).values(op)
    fac = op.factor(0.0)
    f = np.exp(-op.r)
    v = op.solve(f, factor=fac)
    for _ in range(30):
        nxt = op.solve(bv * v + f, factor=fac)
        assert np.all(nxt >= v)
        v = nxt


def test_solution_grows_with_coupling():
    lo = direct_solve(PotentialSpec(0.2 * G0, 0.5), 1.0).profile.values
    hi = direct_solve(PotentialSpec(0.8 * G0, 0.5), 1.0).profile.values
    assert np.all(hi > lo)


@pytest.mark.parametrize("factor", [1.5, 3.0])
def test_supercritical_coupling_is_rejected(factor):
    b = PotentialSpec(factor * G0, 0.5)
    with pytest.raises(ConvergenceError):
        monotone_solve(b, 1.0)
    with pytest.raises(CoercivityError):
        direct_solve(b, 1.0)


@pytest.mark.parametrize("alpha, p", [(0.3, 2.0), (0.0, 1.8), (0.7, 3.0)])
def test_variational_solution(alpha, p):
    o = variational_minimize(Params(3, 0.5, alpha, p))
    assert o.lam > 0
    assert np.all(o.profile.values >= 0)
    assert o.residual <= 1e-3


def test_variational_rejects_critical():
    P = Params(3, 0.5, 0.0, 2.0)
    with pytest.raises(DomainError):
        variational_minimize(P)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("j", range(5))
def test_explicit_supercritical_grid(alpha, j):
    N, s = 3, 0.5
    pc = Params(N, s, alpha, 2.0).p_crit
    p = 2.0 + (pc - 2.0) * j / 5
    e = explicit_supercritical(Params(N, s, alpha, p))
    beta = mp.mpf(N - 2 * s) / 2 - mp.mpf(2 * s) / (p - 1)
    mu = (mp_gamma_alpha(N, s, beta) - mp_gamma_alpha(N, s, alpha)) ** (1 / mp.mpf(p - 1))
    assert abs(e.beta - float(beta)) <= 1e-10
    assert abs(e.mu - float(mu)) <= 1e-10 * float(mu)
    assert e.residual <= 1e-3


def test_explicit_rejects_outside_window():
    with pytest.raises(DomainError):
        explicit_supercritical(Params(3, 0.5, 0.3, 1.5))
    with pytest.raises(DomainError):
        explicit_supercritical(Params(3, 0.5, 0.3, 2.5))
    with pytest.raises(DomainError):
        explicit_supercritical(Params(3, 0.5, 0.0, 2.0))


def test_fit_origin_exponent():
    r = np.geomspace(1e-4, 1, 50)
    slope, icpt, r2 = fit_origin_exponent(r, 3 * r**-0.7, 1e-4, 1e-2)
    assert slope == pytest.approx(-0.7) and math.exp(icpt) == pytest.approx(3) and r2 == pytest.approx(1)
    with pytest.raises(FitQualityError):
        fit_origin_exponent(r, r, 0.5, 0.6)
    rng = np.random.default_rng(0)
    with pytest.raises(FitQualityError):
        fit_origin_exponent(r, np.exp(rng.normal(size=r.size)), 1e-4, 1.0)


def test_ground_state_closure_is_null_near_origin():
    op = nonexistence_operator(3, 0.5)
    th = op.r**-1.0 * np.clip(1 - op.r**2, 0, None)
    b = ground_state_potential(op, G0, -1.0)
    inner = op.r < 1e-2
    res = op.apply(th) - b * th
    assert np.max(np.abs(res[inner])) <= 1e-10 * np.max(np.abs(op.apply(th)[inner]))
    # away from the origin it is the cell-averaged Hardy potential
    assert np.array_equal(b[~inner], op.potential(G0)[~inner])


def test_nonexistence_alpha0():
    d = nonexistence_diagnostic(Params(3, 0.5, 0.0, 2.0))
    assert d.relative_error <= 0.05
    assert d.truncation_monotone
    assert d.critical_slope_spread <= 0.1 and min(d.critical_slopes) > 0
    assert abs(d.subcritical_slopes[-1]) <= 0.2 * abs(d.subcritical_slopes[0])


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_nonexistence_alpha_positive(alpha):
    d = nonexistence_diagnostic(Params(3, 0.5, alpha, 2.0))
    assert d.relative_error <= 0.05
    assert d.truncation_monotone
    lv = np.asarray(d.critical_levels)
    assert np.max(np.abs(lv - lv.mean())) <= 0.1 * lv.mean()
    sub = d.subcritical_levels
    assert all(a > b for a, b in zip(sub, sub[1:]))


def test_nonexistence_cell_closure_exponent():
    # plain cell averages, fitted away from the innermost boundary layer
    d = nonexistence_diagnostic(Params(3, 0.5, 0.3, 2.0), closure="cell", fit_window=(1e-4, 1e-3))
    assert d.relative_error <= 0.05


def test_invalid_inputs():
    with pytest.raises(DomainError):
        PotentialSpec(-1.0, 0.5)
    with pytest.raises(DomainError):
        monotone_solve(PotentialSpec(0.1, 0.5), -1.0)
    with pytest.raises(DomainError):
        nonexistence_diagnostic(Params(3, 0.5, 0.0, 2.0), closure="other")
    with pytest.raises(DomainError):
        nonexistence_diagnostic(Params(3, 0.5, 0.0, 2.0), f=0.0)
    assert gamma_alpha(3, 0.5, 0.0) == pytest.approx(float(mp_gamma_alpha(3, 0.5, 0)), rel=1e-13)
