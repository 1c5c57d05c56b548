import math

import numpy as np
import pytest

from superpositivity.errors import AccuracyError, DomainError
from superpositivity.quadrature import (QuadratureSpec, integrate_finite, integrate_semi_infinite,
                                        integrate_vertical_line)

# (integrand, a, b, exact); b = None means [a, inf) with the given tail rate
BATTERY = [
    (np.sin, 0.0, math.pi, 2.0, None),
    (np.exp, 0.0, 1.0, math.e - 1, None),
    (lambda x: x**7, -1.0, 2.0, (2**8 - 1) / 8, None),
    (lambda x: 1 / (1 + x * x), 0.0, 1.0, math.pi / 4, None),
    (np.sqrt, 0.0, 1.0, 2 / 3, None),
    (np.log, 1e-300, 1.0, -1.0, None),
    (lambda x: np.cos(50 * x), 0.0, 1.0, math.sin(50) / 50, None),
    (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.29, None),
    (lambda x: np.exp(-x * x), -5.0, 5.0, math.sqrt(math.pi) * math.erf(5), None),
    (lambda x: x * np.sin(x), 0.0, 2 * math.pi, -2 * math.pi, None),
    (lambda x: 1 / np.sqrt(x + 1e-12), 0.0, 1.0, 2 * (math.sqrt(1 + 1e-12) - 1e-6), None),
    (lambda x: np.exp(1j * x), 0.0, 1.0, (np.exp(1j) - 1) / 1j, None),
    (lambda x: 1 / (1e-2 + (x - 0.5) ** 2), 0.0, 1.0, 20 * math.atan(5), None),
    (lambda x: np.cos(x) ** 2, 0.0, math.pi, math.pi / 2, None),
    (lambda x: x**2 * np.log(x + 1e-300), 0.0, 1.0, -1 / 9, None),
    (lambda u: np.exp(-u), 0.0, None, 1.0, 1.0),
    (lambda u: np.sinh(0.3 * u) * np.exp(-0.35 * u), 0.0, None, 0.3 / (0.35**2 - 0.3**2), 0.05),
    (lambda u: u**3 * np.exp(-2 * u), 0.0, None, 6 / 16, 2.0),
    (lambda u: np.exp(-u) * np.cos(u), 0.0, None, 0.5, 1.0),
    (lambda u: 1 / np.cosh(u) ** 2, 0.0, None, 1.0, 2.0),
]


def test_battery_size():
    assert len(BATTERY) == 20


@pytest.mark.parametrize("case", range(len(BATTERY)))
def test_error_estimates_are_honest(case):
    f, a, b, exact, rate = BATTERY[case]
    spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10, tail_rate=rate or 1.0)
    res = integrate_semi_infinite(f, a, spec) if b is None else integrate_finite(f, a, b, spec)
    true_err = abs(res.value - exact)
    assert true_err <= 1e-10 * max(1, abs(exact)) * 10
    assert true_err <= 3 * res.error + 1e-15


def test_reference_integrals():
    assert integrate_finite(np.sin, 0, math.pi).value == pytest.approx(2, abs=1e-10)
    assert integrate_semi_infinite(lambda u: np.exp(-u), 0).value == pytest.approx(1, abs=1e-10)
    res = integrate_semi_infinite(lambda u: np.sinh(0.3 * u) * np.exp(-0.35 * u), 0,
                                  QuadratureSpec(tail_rate=0.05))
    assert res.value == pytest.approx(9.2307692, abs=1e-7)


def test_budget_exhaustion_carries_estimate():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
    with pytest.raises(AccuracyError) as info:
        integrate_finite(lambda x: np.sin(1 / (x + 1e-3)), 0, 1, spec)
    assert info.value.value is not None
    assert info.value.error > 0


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


def test_non_decaying_tail_is_reported():
    with pytest.raises(AccuracyError):
        integrate_semi_infinite(lambda u: np.ones_like(u), 0, QuadratureSpec(tail_rate=1.0))


def test_vertical_line():
    # (1/2 pi i) int_{(2)} e^{s^2} ds = 1/(2 sqrt(pi))
    res = integrate_vertical_line(lambda s: np.exp(s * s), 2.0, 12.0)
    assert res.value / (2j * math.pi) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-10)


def test_deterministic_and_reversed():
    f = lambda x: np.exp(np.sin(3 * x))  # noqa: E731
    a = integrate_finite(f, 0, 5)
    b = integrate_finite(f, 0, 5)
    c = integrate_finite(f, 5, 0)
    assert a.value == b.value and a.error == b.error
    assert c.value == pytest.approx(-a.value, abs=1e-12)


def test_vector_valued_integrand():
    res = integrate_finite(lambda x: np.stack([x, x * x], axis=-1), 0, 1)
    assert np.allclose(res.value, [0.5, 1 / 3], atol=1e-12)
