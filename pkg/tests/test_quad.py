import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defectlab.errors import DomainError, NonConvergenceError
from defectlab.quad import (integrate, kv_norm_integral, kv_norm_rhs, mellin_rhs,
                            relative_error, verify_kv_identity, verify_mellin, verify_nicholson)


def test_exp_decay():
    res = integrate(lambda z: np.exp(-z), 0.0, math.inf, decay_rate=1.0)
    assert res.value == pytest.approx(1.0, rel=1e-13)
    assert res.error_estimate >= 0


def test_exp_double_rate():
    res = integrate(lambda z: np.exp(-2 * z), 0.0, math.inf, decay_rate=2.0)
    assert res.value == pytest.approx(0.5, rel=1e-13)


def test_sech_squared():
    res = integrate(lambda t: 1.0 / np.cosh(t) ** 2, 0.0, math.inf, decay_rate=2.0)
    assert res.value == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("f, exact, kw", [
    (lambda z: np.exp(-z), 1.0, {"decay_rate": 1.0}),
    (lambda t: 1.0 / np.cosh(t) ** 2, 1.0, {"decay_rate": 2.0}),
    (lambda z: np.sqrt(0.5 * math.pi / z) * np.exp(-z), math.sqrt(0.5 * math.pi) * math.sqrt(math.pi),
     {"decay_rate": 1.0, "singular_exponent": -0.5}),
])
def test_error_estimate_bounds_actual_error(f, exact, kw):
    res = integrate(f, 0.0, math.inf, 1e-10, **kw)
    assert abs(res.value - exact) <= max(1e-10 * abs(res.value), res.error_estimate)


def test_panels_within_budget():
    res = integrate(lambda z: np.exp(-z), 0.0, math.inf, decay_rate=1.0, max_panels=50)
    assert res.panels_used <= 50


def test_non_convergence():
    with pytest.raises(NonConvergenceError):
        integrate(lambda x: np.sin(1 / x), 1e-9, 1.0, 1e-14, max_panels=30)


def test_semi_infinite_needs_rate():
    with pytest.raises(ValueError):
        integrate(lambda z: np.exp(-z), 0.0, math.inf)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-0.9, 2.0), c=st.floats(0.5, 4.0))
def test_power_times_exponential(alpha, c):
    exact = math.gamma(alpha + 1) / c ** (alpha + 1)
    res = integrate(lambda z: z**alpha * np.exp(-c * z), 0.0, math.inf, 1e-11,
                    decay_rate=c, singular_exponent=alpha)
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_relative_error_guard():
    assert relative_error(1e-320, 0.0) == pytest.approx(1e-20)


@pytest.mark.parametrize("nu, rhs, rtol", [
    (0.5, math.pi / 4, 1e-14),
    (0.9, 4.574883323083735, 1e-14),
    (1e-4, 0.5, 1e-7),
])
def test_kv_identity_examples(nu, rhs, rtol):
    rep = verify_kv_identity(nu)
    assert rep.rhs == pytest.approx(rhs, rel=rtol)
    assert rep.passed
    assert rep.rel_err <= 1e-8


@pytest.mark.parametrize("nu", [0.2, 0.6, 0.95])
def test_kv_identity_even(nu):
    a, b = verify_kv_identity(nu), verify_kv_identity(-nu)
    assert a.lhs == pytest.approx(b.lhs, rel=1e-12)
    assert a.rhs == b.rhs


def test_kv_norm_half_closed_form():
    # K_{1/2}^2 z = (pi/2) e^{-2z}
    assert kv_norm_integral(0.5).value == pytest.approx(math.pi / 4, rel=1e-13)


def test_kv_norm_vectorised_matches_scalar():
    nus = np.array([0.1, 0.4, 0.8])
    vec = kv_norm_integral(nus).value
    for nu, v in zip(nus, vec):
        assert v == pytest.approx(kv_norm_rhs(nu), rel=1e-10)


def test_kv_identity_fubini_route():
    rep = verify_kv_identity(0.3, mode="fubini")
    assert rep.passed
    assert rep.params["mode"] == "fubini"


@pytest.mark.parametrize("nu", [0.0, 1.0, -1.0, 1.5])
def test_kv_identity_domain(nu):
    with pytest.raises(DomainError):
        verify_kv_identity(nu)


def test_nicholson_examples():
    rep = verify_nicholson(0.0, 1.0)
    assert rep.lhs == pytest.approx(0.17726157759590403, rel=1e-13)
    assert rep.passed
    rep = verify_nicholson(0.5, 1.0)
    assert rep.lhs == pytest.approx(0.5 * math.pi * math.exp(-2), rel=1e-14)
    assert verify_nicholson(0.25, 2.0).rel_err <= 1e-6


def test_nicholson_domain():
    with pytest.raises(DomainError):
        verify_nicholson(2.6, 1.0)
    with pytest.raises(DomainError):
        verify_nicholson(0.1, 0.0)


@pytest.mark.parametrize("nu, rhs", [(0.0, 1.0), (0.5, 1.1107207345395916)])
def test_mellin_examples(nu, rhs):
    rep = verify_mellin(nu, 2.0)
    assert rep.rhs == pytest.approx(rhs, rel=1e-13)
    assert rep.passed


def test_mellin_scaled_step():
    # beta = 2, order 2 nu0 with nu0 = 0.3, argument 2 z cosh(0) = 2z:
    # (1/(2 cosh t)^2) pi nu0 / sin(pi nu0) at t = 0
    nu0 = 0.3
    rep = verify_mellin(2 * nu0, 2.0, scale=2.0)
    assert rep.rhs == pytest.approx(0.25 * math.pi * nu0 / math.sin(math.pi * nu0), rel=1e-13)
    assert rep.passed


@settings(max_examples=15, deadline=None)
@given(nu=st.floats(0.0, 1.5), extra=st.floats(0.2, 3.0))
def test_mellin_property(nu, extra):
    rep = verify_mellin(nu, nu + extra)
    assert rep.rel_err <= 1e-8
    assert rep.rhs == pytest.approx(float(2 ** (nu + extra - 2) * mpmath.gamma(nu + extra / 2)
                                          * mpmath.gamma(extra / 2)), rel=1e-12)


def test_mellin_domain():
    with pytest.raises(DomainError):
        verify_mellin(0.5, 0.5)


def test_mellin_rhs_formula():
    assert mellin_rhs(0.0, 2.0) == pytest.approx(1.0, rel=1e-15)
