import math

import numpy as np
import pytest

from wgse.numerics import (BracketError, ConvergenceError, ToleranceSpec,
                           extract_order_coefficient, find_root_bracketed,
                           integrate_adaptive, integrate_principal_value)


def test_tolerance_spec_validation():
    with pytest.raises(ValueError):
        ToleranceSpec(rel=1e-16)
    with pytest.raises(ValueError):
        ToleranceSpec(abs=-1.0)
    with pytest.raises(ValueError):
        ToleranceSpec(max_evals=10)


def test_root_transcendental():
    # x = cos(x) has the Dottie number as its unique root
    x = find_root_bracketed(lambda x: x - math.cos(x), 0.0, 1.0,
                            ToleranceSpec(rel=1e-14, abs=0.0))
    assert x == pytest.approx(0.7390851332151607, abs=1e-13)


def test_root_requires_sign_change():
    with pytest.raises(BracketError):
        find_root_bracketed(lambda x: x * x + 1.0, -1.0, 1.0)
    with pytest.raises(BracketError):
        find_root_bracketed(lambda x: x, 2.0, 1.0)


def test_root_exact_endpoint():
    assert find_root_bracketed(lambda x: x, 0.0, 1.0) == 0.0


def test_root_budget_exhaustion_carries_partial():
    tol = ToleranceSpec(rel=1e-15, abs=0.0, max_evals=64)
    with pytest.raises(ConvergenceError) as exc:
        find_root_bracketed(lambda x: x - 1e-7, -1e3, 1e3, tol)
    assert exc.value.value is not None
    assert exc.value.error_estimate > 0


def test_quadrature_polynomial_exact():
    val, err = integrate_adaptive(lambda x: 3 * x ** 2, 0.0, 2.0)
    assert val == pytest.approx(8.0, rel=1e-13)
    assert err < 1e-10


def test_quadrature_oscillatory():
    val, _ = integrate_adaptive(np.sin, 0.0, 20.0,
                                ToleranceSpec(rel=1e-12, abs=1e-14))
    assert val == pytest.approx(1.0 - math.cos(20.0), abs=1e-11)


def test_quadrature_complex_integrand():
    val, _ = integrate_adaptive(lambda x: np.exp(1j * x), 0.0, 1.0)
    assert val == pytest.approx((math.sin(1.0))
                                + 1j * (1.0 - math.cos(1.0)), abs=1e-12)


def test_quadrature_narrow_peak_with_panels():
    # a Gaussian of width 1e-3 centered mid-interval integrates to ~1
    sig = 1e-3

    def f(x):
        return np.exp(-0.5 * ((x - 0.5) / sig) ** 2) \
            / (sig * math.sqrt(2 * math.pi))

    val, _ = integrate_adaptive(f, 0.0, 1.0,
                                ToleranceSpec(rel=1e-10, abs=1e-14),
                                initial_panels=256)
    assert val == pytest.approx(1.0, rel=1e-9)


def test_quadrature_budget_error_carries_partial():
    tol = ToleranceSpec(rel=1e-14, abs=0.0, max_evals=64)

    def noisy(x):
        return np.cos(50.0 * x)

    with pytest.raises(ConvergenceError) as exc:
        integrate_adaptive(noisy, 0.0, 30.0, tol)
    assert exc.value.value is not None
    assert exc.value.error_estimate is not None


def test_quadrature_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(np.sin, 1.0, 1.0)


def test_principal_value_analytic():
    # PV of x^2/(x - c) on [a, b] = (b^2 - a^2)/2 + c (b - a)
    #                               + c^2 log((b - c)/(c - a))
    a, b, c = 0.0, 1.0, 0.3

    def f(x):
        return x ** 2 / (x - c)

    expected = (b * b - a * a) / 2 + c * (b - a) \
        + c * c * math.log((b - c) / (c - a))
    got = integrate_principal_value(f, c, a, b)
    assert got == pytest.approx(expected, rel=1e-9)


def test_principal_value_antisymmetric_cancels():
    got = integrate_principal_value(lambda x: 1.0 / x, 0.0, -1.0, 1.0)
    assert got == pytest.approx(0.0, abs=1e-10)


def test_principal_value_pole_outside_rejected():
    with pytest.raises(ValueError):
        integrate_principal_value(lambda x: 1.0 / (x - 2.0), 2.0, 0.0, 1.0)


def test_principal_value_double_pole_rejected():
    with pytest.raises(ValueError):
        integrate_principal_value(lambda x: 1.0 / (x - 0.5) ** 2,
                                  0.5, 0.0, 1.0)


def test_order_coefficient_linear_term():
    got = extract_order_coefficient(lambda e: math.sin(3.0 * e), 1e-2)
    assert got == pytest.approx(3.0, rel=1e-8)


def test_order_coefficient_with_higher_orders():
    got = extract_order_coefficient(
        lambda e: 1.0 - 0.5 * e + 4.0 * e * e - e ** 3, 1e-2)
    assert got == pytest.approx(-0.5, rel=1e-7)


def test_order_coefficient_levels_validation():
    with pytest.raises(ValueError):
        extract_order_coefficient(lambda e: e, 1e-2, levels=1)
