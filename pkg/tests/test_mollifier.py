import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superpositivity import arith
from superpositivity.afe import CoefficientTable
from superpositivity.errors import DomainError, IncompleteDataError, PoleError
from superpositivity.mollifier import (MollifierProfile, dirichlet_c, mollifier_value, psi, taper,
                                       x_coeff, x_coefficients)


def random_profiles(count, seed):
    rng = np.random.default_rng(seed)
    return [MollifierProfile(float(rng.uniform(0.05, 0.95)), float(np.exp(rng.uniform(0.5, 9.0))))
            for _ in range(count)]


def mellin_oracle(profile, w):
    # int_0^M F(x) x^(w-1) dx with x = e^y, by mpmath on the pieces of F
    L, u = profile.log_M, profile.upsilon
    knee = (1 - u) * L
    pts = [knee - 400] + [knee - k for k in range(200, -1, -1)]
    flat = mpmath.quad(lambda y: mpmath.exp(w * y), pts)
    ramp = mpmath.quad(lambda y: (L - y) / (u * L) * mpmath.exp(w * y), [knee, L])
    return complex(flat + ramp)


def test_profile_validation():
    for bad in [dict(upsilon=0, M=10), dict(upsilon=1, M=10), dict(upsilon=0.5, M=1),
                dict(upsilon=0.5, M=10, theta=0.02)]:
        with pytest.raises(DomainError):
            MollifierProfile(**bad)


def test_from_level_keeps_log_precision():
    p = MollifierProfile.from_level(10**15 + 37, (1 - 5e-10) / 2, 0.64)
    assert p.log_M == pytest.approx((1 - 5e-10) / 2 * math.log(10**15 + 37), rel=1e-15)


def test_taper_examples():
    p = MollifierProfile(0.4, 1000.0)
    assert taper(p, p.knee) == 1
    assert taper(p, 1000.0) == 0
    assert taper(p, 1000.0 ** (1 - 0.2)) == pytest.approx(0.5, abs=1e-14)
    assert taper(p, 0.0) == 1
    with pytest.raises(DomainError):
        taper(p, -1.0)


def test_taper_continuous_and_decreasing():
    for p in random_profiles(100, 7):
        for x0 in (p.knee, p.M):
            lo, hi = taper(p, np.array([x0 * (1 - 1e-15), x0 * (1 + 1e-15)]))
            assert abs(lo - hi) < 1e-12
        xs = np.linspace(0, 1.2 * p.M, 400)
        assert np.all(np.diff(taper(p, xs)) <= 1e-15)


def test_psi_examples():
    p = MollifierProfile(0.5, math.e)
    # 2 (e - sqrt e) = 2.139121...
    assert psi(p, 1).real == pytest.approx(2 * (math.e - math.sqrt(math.e)), rel=1e-14)
    assert psi(p, 1).real == pytest.approx(2.1391211, abs=1e-7)
    with pytest.raises(PoleError):
        psi(p, 0)


def test_psi_residue():
    for p in random_profiles(10, 3):
        for k in range(30):
            w = 1e-3 * (1 + 1j) * 2.0**-k
            assert abs(w * psi(p, w) - 1) <= 2 * abs(w) * p.log_M + 1e-15
        w = 1e-12 * (1 + 1j)
        laurent = 1 / w + (2 - p.upsilon) * p.log_M / 2
        assert abs(psi(p, w) - laurent) < 1e-9


@mpmath.workdps(40)
def test_psi_series_switch_is_continuous():
    # both evaluation paths, just inside and just outside the switch, against mpmath
    for p in random_profiles(20, 4):
        L = mpmath.mpf(p.log_M)
        for direction in (1, 1j, -1, 0.6 - 0.8j):
            for factor in (0.9999, 1.0001):
                w = direction * 1e-4 / p.log_M * factor
                W = mpmath.mpc(w)
                ref = complex((mpmath.exp(W * L) - mpmath.exp((1 - p.upsilon) * W * L))
                              / (p.upsilon * W * W * L))
                assert abs(psi(p, w) - ref) < 1e-12 * abs(ref)


def test_mellin_pair():
    rng = np.random.default_rng(11)
    profiles = random_profiles(10, 12)
    for p in profiles:
        w = complex(rng.uniform(0.2, 2.0), rng.uniform(-5, 5))
        assert abs(psi(p, w) - mellin_oracle(p, w)) < 1e-8
    p = MollifierProfile(0.48, 50.0)
    assert abs(psi(p, 0.5) - mellin_oracle(p, 0.5)) < 1e-8


def test_c_three_facts():
    # c(1) = 1, c(n) = 0 on (1, M^(1-upsilon)], |c(n)| <= tau(n); n <= 10^4, 20 profiles
    taus = arith.tau_sieve(10**4)
    for p in random_profiles(20, 21):
        assert dirichlet_c(p, 1) == 1
        for n in range(2, 10**4 + 1):
            c = dirichlet_c(p, n)
            if n <= p.knee:
                assert abs(c) < 1e-12
            assert abs(c) <= taus[n] + 1e-12


def test_x_coeff_examples():
    p = MollifierProfile(0.5, 40.0)
    assert x_coeff(p, 4, 0.5) == 0
    assert x_coeff(p, 41, 0.5) == 0
    direct = sum(float(taper(p, n)) / n for n in range(1, 41) if arith.is_squarefree(n))
    assert x_coeff(p, 1, 0.5) == pytest.approx(direct, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.floats(0.3, 2.0), st.floats(-4, 4))
def test_x_coeff_against_definition(ell, sr, si):
    p = MollifierProfile(0.6, 61.5)
    s = complex(sr, si)
    direct = 0j
    for n in range(1, 62):
        if ell * n < p.M and arith.is_squarefree(ell * n):
            direct += float(taper(p, ell * n)) * n ** (-2 * s)
    direct *= arith.mobius(ell) * ell ** (0.5 - s)
    assert abs(x_coeff(p, ell, s) - direct) < 1e-12 * max(1, abs(direct))


def test_mollifier_value(level11):
    p = MollifierProfile(0.5, 1.5)
    assert mollifier_value(p, level11, 0.5) == pytest.approx(x_coeff(p, 1, 0.5))
    zero = CoefficientTable.from_sequence(11, [1.0] + [0.0] * 40, validate=False)
    p = MollifierProfile(0.5, 30.0)
    assert mollifier_value(p, zero, 0.7 + 1j) == pytest.approx(x_coeff(p, 1, 0.7 + 1j))
    # level-11 table, s = 1/2, M = 3.3: the double sum over ell and n
    p = MollifierProfile(0.5, 3.3)
    direct = 0j
    for ell in (1, 2, 3):
        for n in (1, 2, 3):
            if ell * n < 3.3 and arith.is_squarefree(ell * n):
                direct += arith.mobius(ell) * float(taper(p, ell * n)) / n * level11.lam(ell) / math.sqrt(ell)
    assert mollifier_value(p, level11, 0.5) == pytest.approx(direct, abs=1e-14)


def test_mollifier_missing_coefficient():
    short = CoefficientTable.from_sequence(11, [1.0, -2 / math.sqrt(2)], validate=False)
    with pytest.raises(IncompleteDataError):
        mollifier_value(MollifierProfile(0.5, 10.0), short, 0.5)


def test_x_coefficients_support():
    p = MollifierProfile(0.5, 30.0)
    xs = x_coefficients(p, 0.5)
    assert sorted(xs) == [n for n in range(1, 30) if arith.is_squarefree(n)]
