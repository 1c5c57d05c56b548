import json
import math

import mpmath
import numpy as np
import pytest

from superpositivity.errors import DomainError
from superpositivity.mollifier import MollifierProfile
from superpositivity.quadrature import QuadratureSpec
from superpositivity.zerodensity import (DEFAULT_SPEC, SERIES_SWITCH, THETA, LadderConfig,
                                         SelbergWindow, SurfaceParams, central_bound,
                                         check_trivial_bound, ladder_bound, log_v_surface,
                                         optimize, realzero_proportion, selberg_integrals,
                                         superpositivity_proportion, tail_bound, v_surface,
                                         v_surface_minus_one)

STANDARD = LadderConfig.standard()
THM2 = SurfaceParams(0.48)


@mpmath.workdps(40)
def v_oracle(p, u, v):
    # the surface straight from its definition, in 40-digit arithmetic
    U, th = mpmath.mpf(p.upsilon), mpmath.mpf(p.theta)
    a, b = (1 - U) * (1 - 5 * th), 1 - 5 * th
    u, v = mpmath.mpf(u), mpmath.mpf(v)
    w = (-u + 1j * v) * b
    second = mpmath.exp(-2 * u) * abs((mpmath.exp(w) - mpmath.exp((1 - U) * w)) / (U * w)) ** 2
    third = (1 - mpmath.exp(-2 * u)) * (mpmath.exp(-u * a) - mpmath.exp(-u * b)) / (u * U * b) ** 2
    return 1 + second + third


def test_surface_params_validation():
    assert THM2.a == pytest.approx(0.52 * (1 - 5 * THETA), abs=1e-15)
    assert 0 < THM2.a < THM2.b < 1
    for bad in [0.0, 1.0, -0.2]:
        with pytest.raises(DomainError):
            SurfaceParams(bad)
    with pytest.raises(DomainError):
        SurfaceParams(0.5, theta=0.01)


def test_default_S():
    # direct arithmetic: pi / (2 * 0.52 * (1 - 20 theta))
    assert THM2.default_S == pytest.approx(math.pi / (2 * 0.52 * (1 - 20 * THETA)), rel=1e-15)
    assert THM2.default_S == pytest.approx(3.0207622, abs=1e-7)


def test_surface_at_least_one_on_grid():
    u = np.linspace(-20, 50, 701)[:, None]
    v = np.linspace(0, 50, 501)[None, :]
    for ups in [0.1, 0.48, 0.64, 0.9]:
        p = SurfaceParams(ups)
        assert np.all(v_surface(p, u, v) >= 1 - 1e-10)
        assert np.all(np.isfinite(v_surface(p, u, v)))


def test_surface_against_definition():
    rng = np.random.default_rng(0)
    for ups in [0.48, 0.64]:
        p = SurfaceParams(ups)
        for u, v in zip(rng.uniform(-15, 40, 60), rng.uniform(0, 40, 60)):
            ref = v_oracle(p, u, v)
            assert abs(v_surface_minus_one(p, u, v) - float(ref - 1)) <= 1e-12 * float(ref)


@pytest.mark.parametrize("factor", [1.0001, 0.9999])
def test_series_switch_continuity(factor):
    # each side of the switch against the unexpanded formula
    p = THM2
    x = SERIES_SWITCH * factor
    for u, v in [(x, 0.0), (-x, 0.0), (x, 0.3), (0.0, x), (x * 0.6, x * 0.8 / p.b)]:
        if u == 0:
            ref = v_oracle(p, mpmath.mpf(10) ** -30, v)
        else:
            ref = v_oracle(p, u, v)
        assert abs(v_surface(p, u, v) - float(ref)) < 1e-9


def test_limit_at_origin():
    assert v_surface(THM2, 0.0, 0.0) == pytest.approx(2 + 2 / (0.48 * THM2.b), abs=1e-12)
    assert v_surface(THM2, 0.0, 0.0) == pytest.approx(6.1667, abs=1e-4)


def test_trivial_bound_region():
    p = SurfaceParams(0.64)
    u = np.linspace(20, 200, 400)[:, None]
    v = np.concatenate([np.linspace(0, 100, 300), [1e3, 1e5]])[None, :]
    excess = v_surface_minus_one(p, u, v)
    assert np.all(excess >= 0)
    assert np.all(excess <= np.exp(-0.35 * u))
    assert check_trivial_bound(p, 0.35, 20.0)
    # Upsilon >= 0.65 pushes a below the rate and the bound fails
    assert not check_trivial_bound(SurfaceParams(0.66), 0.35, 20.0)


def test_large_v_limit():
    p = SurfaceParams(0.64)
    u = 1.7
    third = (1 - math.exp(-2 * u)) * (math.exp(-u * p.a) - math.exp(-u * p.b)) / (u * p.upsilon * p.b) ** 2
    # the second term oscillates in v under an envelope decaying like v^-2
    env = math.exp(-2 * u) * (math.exp(-u * p.b) + math.exp(-u * p.a)) ** 2 / (p.upsilon * p.b) ** 2
    for v in np.geomspace(10, 1e5, 200):
        second = v_surface(p, u, v) - 1 - third
        assert -1e-15 <= second <= env / (v * v * p.b * p.b) + 1e-15
    assert v_surface(p, u, 1e7) - 1 == pytest.approx(third, abs=1e-14)


def test_log_surface():
    x = log_v_surface(THM2, np.array([40.0, 1.0]), np.array([1.0, 2.0]))
    assert x[1] == pytest.approx(math.log(v_surface(THM2, 1.0, 2.0)), rel=1e-14)
    assert x[0] == pytest.approx(v_surface_minus_one(THM2, 40.0, 1.0), rel=1e-6)


def test_thm2_central_bound():
    b = central_bound(THM2, 7.0)
    assert abs(b.bound - 0.5041) <= 1e-3
    assert 0 < b.err < 1e-9
    assert b.bound == pytest.approx(0.5040562739, abs=1e-9)
    rep = realzero_proportion(THM2, 7.0)
    assert rep.proportion >= 0.4959
    assert rep.proportion == pytest.approx(1 - b.bound, abs=0)


@pytest.mark.parametrize("j, published", [(0, 0.60934), (1, 0.21032), (2, 0.03758), (3, 0.00995)])
def test_thm1_ladder_constants(j, published):
    b = central_bound(STANDARD.surface, STANDARD.R) if j == 0 else ladder_bound(STANDARD, j)
    assert abs(b.bound - published) <= 2e-4


def test_thm1_aggregates():
    rest = math.fsum(ladder_bound(STANDARD, j).bound for j in range(4, 21))
    assert rest <= 0.00528 + 5e-4
    assert tail_bound(STANDARD, 21) <= 1e-3
    rep = superpositivity_proportion(STANDARD)
    assert rep.total <= 0.88
    assert rep.proportion >= 0.12
    parts = math.fsum(r["bound"] for r in rep.regions.values())
    assert rep.total == pytest.approx(parts, abs=1e-15)
    assert any("far box" in c for c in rep.caveats)


def test_monotone_in_R():
    # holds for upsilon up to about 0.55; see the interior minimum below
    for ups in np.linspace(0.40, 0.55, 5):
        p = SurfaceParams(float(ups))
        cfg = [LadderConfig(p, float(r)) for r in np.linspace(3, 8, 5)]
        central = [central_bound(p, c.R).bound for c in cfg]
        first = [ladder_bound(c, 1).bound for c in cfg]
        assert all(x > y for x, y in zip(central, central[1:]))
        # box j >= 1 does not depend on R at all
        assert all(x >= y for x, y in zip(first, first[1:]))


def test_interior_minimum_in_R_at_large_upsilon():
    # at upsilon = 0.64 the central bound is smallest near R = 4.6 (values
    # confirmed by the 40-digit oracle below)
    p = STANDARD.surface
    vals = {r: central_bound(p, r).bound for r in (3.0, 4.6, 8.0)}
    assert vals[4.6] < vals[3.0] and vals[4.6] < vals[8.0]
    assert vals[8.0] == pytest.approx(0.6097082467567, abs=1e-11)


@mpmath.workdps(20)
def central_oracle(ups, R):
    # direct quadrature; V - 1 is formed without adding 1 so the slowly
    # decaying top-edge tail is not lost
    U, th = mpmath.mpf(ups), mpmath.mpf(THETA)
    S = mpmath.pi / (2 * (1 - U) * (1 - 20 * th))
    a, b = (1 - U) * (1 - 5 * th), 1 - 5 * th

    def vm1(u, v):
        w = (-u + 1j * v) * b
        second = mpmath.exp(-2 * u) * abs((mpmath.exp(w) - mpmath.exp((1 - U) * w)) / (U * w)) ** 2
        return second + (1 - mpmath.exp(-2 * u)) * (mpmath.exp(-u * a) - mpmath.exp(-u * b)) / (u * U * b) ** 2

    i1 = mpmath.quad(lambda t: mpmath.cos(mpmath.pi * t / (2 * S)) * mpmath.log1p(vm1(-R, t)), [0, S])
    pts = [0, R, R + 2, R + 5, R + 10, R + 20, R + 40] + [R + 40 * 2**k for k in range(1, 40)]
    i2 = mpmath.quad(lambda u: mpmath.sinh(mpmath.pi * u / (2 * S)) * mpmath.log1p(vm1(u - R, S)), pts)
    return float((i1 + i2) / (8 * S * mpmath.sinh(mpmath.pi * R / (2 * S))) - 0.25)


@pytest.mark.parametrize("ups, R", [(0.48, 7.0), (0.64, 4.6), (0.64, 3.0)])
def test_central_bound_against_oracle(ups, R):
    assert central_bound(SurfaceParams(ups), R).bound == pytest.approx(central_oracle(ups, R), abs=1e-12)


def test_tolerance_robustness():
    loose = QuadratureSpec(abs_tol=2 * DEFAULT_SPEC.abs_tol, rel_tol=DEFAULT_SPEC.rel_tol)
    cases = [(lambda s: central_bound(THM2, 7.0, spec=s)),
             (lambda s: central_bound(STANDARD.surface, STANDARD.R, spec=s))]
    cases += [(lambda s, j=j: ladder_bound(STANDARD, j, s)) for j in (1, 2, 3, 10, 20)]
    for fn in cases:
        fine, coarse = fn(DEFAULT_SPEC), fn(loose)
        assert abs(fine.bound - coarse.bound) <= max(fine.err, coarse.err)


def test_tail_bound():
    single = tail_bound(STANDARD, 30, 30)
    assert 0 < single < 1e-4
    # the majorant really dominates the exact box bound there
    assert ladder_bound(STANDARD, 30).bound <= single
    partial = tail_bound(STANDARD, 21, 40)
    assert partial < tail_bound(STANDARD, 21) <= 1e-3
    with pytest.raises(DomainError):
        tail_bound(STANDARD, 5)
    with pytest.raises(DomainError):
        tail_bound(STANDARD, 30, 29)
    low_floor = LadderConfig(SurfaceParams(0.2), 0.6, S=0.5)
    with pytest.raises(DomainError):
        tail_bound(low_floor, 21)


def test_ladder_domain():
    with pytest.raises(DomainError):
        ladder_bound(STANDARD, 0)
    with pytest.raises(DomainError):
        LadderConfig(STANDARD.surface, 4.6, j_exact_max=3, tail_start=4)
    with pytest.raises(DomainError):
        LadderConfig(STANDARD.surface, 4.6, tail_start=25)
    with pytest.raises(DomainError):
        central_bound(THM2, 0.0)


def test_degenerate_upsilon():
    p = SurfaceParams(0.999)
    rep = realzero_proportion(p, 7.0)
    assert rep.total > 1
    assert not rep.informative
    assert "non-informative" in rep.to_table().lower()


def test_optimize_floors():
    r = optimize("realzero", box=((0.45, 0.52), (6.0, 8.0)), budget=30)
    assert r.value >= 0.4959 - 1e-3
    s = optimize("superpositivity", box=((0.6, 0.64), (4.0, 5.2)), budget=30)
    assert s.value >= 0.12 - 1e-3
    assert r.evaluations <= 30 and s.evaluations <= 30


def test_optimize_single_point_reproduces_pipeline():
    r = optimize("superpositivity", budget=1, start=(0.64, 4.6), spec=DEFAULT_SPEC)
    assert r.report.proportion == superpositivity_proportion(STANDARD).proportion
    z = optimize("realzero", budget=1, start=(0.48, 7.0), spec=DEFAULT_SPEC)
    assert z.report.proportion == realzero_proportion(THM2, 7.0).proportion
    assert r.budget_exhausted and r.evaluations == 1


def test_optimize_deterministic_and_threaded():
    a = optimize("realzero", box=((0.45, 0.52), (6.0, 8.0)), budget=12)
    b = optimize("realzero", box=((0.45, 0.52), (6.0, 8.0)), budget=12, threads=4)
    assert a.history == b.history
    assert a.report.to_json() == b.report.to_json()


def test_optimize_validation():
    with pytest.raises(DomainError):
        optimize("density")
    with pytest.raises(DomainError):
        optimize("realzero", box=((0.01, 0.5), (3, 8)))
    with pytest.raises(DomainError):
        optimize("realzero", budget=0)
    # every point with upsilon >= 0.66 breaks the trivial tail bound
    with pytest.raises(DomainError):
        optimize("superpositivity", box=((0.7, 0.8), (4, 5)), budget=4)


def test_report_json_stable():
    rep = superpositivity_proportion(STANDARD)
    threaded = superpositivity_proportion(STANDARD, threads=4)
    assert rep.to_json() == threaded.to_json()
    d = json.loads(rep.to_json())
    assert list(d) == sorted(d)
    for region in d["regions"].values():
        assert set(region) == {"bound", "err"}
    assert d["informative"] is True


def test_window():
    w = SelbergWindow.for_surface(THM2, 7.0)
    assert (w.W0, w.H) == (-7.0, THM2.default_S)
    assert w.right_edge(10**6, 0.48) > 0.5 * math.log(10**6)
    with pytest.raises(DomainError):
        SelbergWindow(0.0, 1.0)


def _integrals(coeffs, weight, R, ups=0.48):
    p = SurfaceParams(ups)
    profile = MollifierProfile.from_level(coeffs.q, (1 - 5 * THETA) / 2, ups, THETA)
    return selberg_integrals(profile, weight, coeffs, SelbergWindow.for_surface(p, R))


@pytest.mark.slow
def test_selberg_identity_odd_form(level37, weight):
    res = _integrals(level37, weight, 2.0)
    S = SurfaceParams(0.48).default_S
    assert res.parity == -1
    assert res.floor == pytest.approx(4 * S * math.sinh(math.pi * 2.0 / (2 * S)), rel=1e-14)
    assert res.total >= res.floor - res.error


@pytest.mark.slow
def test_selberg_even_form_and_small_window(level11, level37, weight):
    even = _integrals(level11, weight, 1.0)
    assert even.parity == 1 and even.floor == 0.0
    assert even.total >= -even.error
    tiny = _integrals(level37, weight, 1e-3)
    assert tiny.floor < 1e-2
    assert tiny.total >= tiny.floor - tiny.error
