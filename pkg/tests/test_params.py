"""Closed-form constants: sphere areas, I(m, n), and the sharp constant."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from kplane import (
    DivergenceError,
    TransformParams,
    best_constant,
    i_integral,
    radial_conversion_factor,
    sphere_area,
)


def test_exponents_are_exact_rationals():
    pr = TransformParams(1, 3)
    assert pr.p == Fraction(2, 1)
    assert pr.q == Fraction(4, 1)
    pr = TransformParams(1, 2)
    assert pr.p == Fraction(3, 2)
    assert pr.q == Fraction(3, 1)
    pr = TransformParams(2, 3)
    assert pr.p == Fraction(4, 3)
    assert pr.q == Fraction(4, 1)
    # the three identities the exponent pairing encodes, exactly
    for k in range(1, 8):
        for d in range(k + 1, 9):
            pr = TransformParams(k, d)
            assert pr.q / pr.p == k + 1
            assert Fraction(1, 1) / pr.p - Fraction(1, 1) / pr.q == Fraction(k, d + 1)
            assert pr.pf == float(d + 1) / (k + 1)


def test_invalid_dimensions_rejected():
    with pytest.raises(ValueError):
        TransformParams(0, 3)
    with pytest.raises(ValueError):
        TransformParams(3, 3)
    with pytest.raises(ValueError):
        TransformParams(4, 3)
    with pytest.raises(TypeError):
        TransformParams(1.0, 3)
    with pytest.raises(TypeError):
        TransformParams(1, "3")
    with pytest.raises(TypeError):
        TransformParams(True, 3)


def test_sphere_area_values():
    assert sphere_area(1) == 2.0
    assert abs(sphere_area(2) - 2 * math.pi) < 1e-15
    assert abs(sphere_area(3) - 4 * math.pi) < 1e-14
    assert abs(sphere_area(4) - 2 * math.pi**2) < 1e-14
    with pytest.raises(ValueError):
        sphere_area(0)
    with pytest.raises(TypeError):
        sphere_area(2.0)


def test_sphere_area_recursion():
    # |S^m| = |S^{m-1}| int_0^pi sin^{m-1}, the convention sphere_area(1) = 2
    # is chosen to make this hold at m = 1 as well
    for m in range(1, 12):
        integral, _ = integrate.quad(lambda t: math.sin(t) ** (m - 1), 0, math.pi)
        assert abs(sphere_area(m + 1) - sphere_area(m) * integral) < 1e-10, m


def test_i_integral_spot_values():
    assert abs(i_integral(0, 2) - math.pi / 2) < 1e-15
    assert abs(i_integral(1, 3) - 1.0) < 1e-15
    assert abs(i_integral(0, 4) - math.pi / 4) < 1e-15
    assert abs(i_integral(2, 4) - math.pi / 4) < 1e-15


def test_i_integral_against_quadrature():
    for m in range(0, 8):
        for n in range(m + 2, 16):
            num, err = integrate.quad(
                lambda t: t**m * (1 + t * t) ** (-n / 2.0), 0, np.inf
            )
            val = i_integral(m, n)
            assert abs(val - num) < 1e-10 * max(1.0, val), (m, n, val, num)


def test_i_integral_errors():
    with pytest.raises(DivergenceError):
        i_integral(1, 2)
    with pytest.raises(DivergenceError):
        i_integral(3, 4)
    with pytest.raises(ValueError):
        i_integral(-1, 4)
    with pytest.raises(TypeError):
        i_integral(0.5, 4)
    with pytest.raises(TypeError):
        i_integral(0, 4.0)


def test_best_constant_known_values():
    assert abs(best_constant(TransformParams(1, 3)) - math.pi**0.25) < 1e-14
    assert abs(best_constant(TransformParams(1, 2)) - (math.pi / 2) ** (1 / 3)) < 1e-14
    # k = 2, d = 3: 2^{3/4} pi^{-1/4}
    assert abs(best_constant(TransformParams(2, 3)) - 2.0**0.75 * math.pi**-0.25) < 1e-14


def test_best_constant_forms_agree():
    worst = 0.0
    for k in range(1, 12):
        for d in range(k + 1, 13):
            pr = TransformParams(k, d)
            a = best_constant(pr, form="sphere")
            b = best_constant(pr, form="gamma")
            worst = max(worst, abs(a / b - 1.0))
    print(f"sphere vs gamma form, worst relative gap {worst:.3e}")
    assert worst < 1e-12


def test_best_constant_bad_form():
    with pytest.raises(ValueError):
        best_constant(TransformParams(1, 3), form="stirling")


def test_radial_conversion_factor_values():
    # (k, d) = (1, 2): |S^0| |S^0|^{1/3} / |S^1|^{2/3}
    expect = 2.0 * 2.0 ** (1 / 3) / (2 * math.pi) ** (2 / 3)
    assert abs(radial_conversion_factor(TransformParams(1, 2)) - expect) < 1e-14
    # (k, d) = (2, 3): |S^1| |S^0|^{1/4} / |S^2|^{3/4}
    expect = 2 * math.pi * 2.0 ** (1 / 4) / (4 * math.pi) ** (3 / 4)
    assert abs(radial_conversion_factor(TransformParams(2, 3)) - expect) < 1e-14
