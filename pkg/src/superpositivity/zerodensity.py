"""Zero-density bounds from Selberg's lemma in log-q units.

Heights and abscissae are measured in units of ``1/log q``: ``u`` is
``(beta - 1/2) log q`` and ``v`` is ``gamma log q``, so no value of ``q``
enters the bounds.  The ``O((log q)^(-c))`` corrections of the asymptotic
statements are not included; every report carries that caveat.

Semi-infinite integrals are computed on a finite range and closed with an
explicit majorant of the integrand built from ``log(1+x) <= x``,
``sinh(x) <= e^x/2`` and the two exponential terms of the surface.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import exp1

from .afe import CoefficientTable, SpectralWeight, afe_square, sign
from .errors import AccuracyError, DomainError
from .mollifier import MollifierProfile, mollifier_value
from .quadrature import QuadratureSpec, integrate_finite
from .specfun import log_gamma

THETA = 1e-10
SERIES_SWITCH = 1e-4
DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11, max_subdivisions=4000)
CAVEATS = (
    "asymptotic: O((log q)^-c) corrections are omitted",
    "error budgets are floating-point estimates, not interval bounds",
)


@dataclass(frozen=True)
class SurfaceParams:
    """Taper fraction ``upsilon`` and level margin ``theta`` of the surface."""

    upsilon: float
    theta: float = THETA

    def __post_init__(self):
        if not 0 < self.upsilon < 1:
            raise DomainError(f"upsilon must lie in (0, 1), got {self.upsilon}")
        if not 0 < self.theta < 0.01:
            raise DomainError(f"theta must lie in (0, 1/100), got {self.theta}")

    @property
    def a(self) -> float:
        return (1.0 - self.upsilon) * (1.0 - 5.0 * self.theta)

    @property
    def b(self) -> float:
        return 1.0 - 5.0 * self.theta

    @property
    def default_S(self) -> float:
        return math.pi / (2.0 * (1.0 - self.upsilon) * (1.0 - 20.0 * self.theta))


@dataclass(frozen=True)
class SelbergWindow:
    """Rectangle for Selberg's lemma in log-q units.

    The left edge sits at ``W0 = -R`` and the half-height is ``H = S``.  The
    right edge ``1 + 10 log log q / ((1 - upsilon) log q)`` depends on ``q``
    and is resolved by :meth:`right_edge`.
    """

    R: float
    S: float

    def __post_init__(self):
        if not (self.R > 0 and self.S > 0):
            raise DomainError("R and S must be positive")

    @classmethod
    def for_surface(cls, p: SurfaceParams, R: float, S: float | None = None):
        return cls(R, p.default_S if S is None else S)

    @property
    def W0(self) -> float:
        return -self.R

    @property
    def H(self) -> float:
        return self.S

    def right_edge(self, q: int, upsilon: float) -> float:
        """``(W1 - 1/2) log q``."""
        log_q = math.log(q)
        return 0.5 * log_q + 10.0 * math.log(log_q) / (1.0 - upsilon)


@dataclass(frozen=True)
class LadderConfig:
    """Region ladder: box ``j`` starts at ``u = j d`` with ``d = 2S/3``."""

    surface: SurfaceParams
    R: float
    S: float | None = None
    j_exact_max: int = 20
    tail_start: int = 21
    trivial_bound_rate: float = 0.35
    trivial_bound_floor_u: float = 20.0

    def __post_init__(self):
        if self.S is None:
            object.__setattr__(self, "S", self.surface.default_S)
        if not (self.R > 0 and self.S > 0):
            raise DomainError("R and S must be positive")
        if self.j_exact_max < 4:
            raise DomainError("j_exact_max must be at least 4")
        if self.tail_start != self.j_exact_max + 1:
            raise DomainError("tail_start must follow j_exact_max directly")

    @classmethod
    def standard(cls, upsilon: float = 0.64, R: float = 4.6, theta: float = THETA):
        return cls(SurfaceParams(upsilon, theta), R)

    @property
    def d(self) -> float:
        return 2.0 * self.S / 3.0


class Bound(NamedTuple):
    bound: float
    err: float


@dataclass
class BoundReport:
    """Per-region bounds with errors, totals, a proportion and the inputs."""

    kind: str
    params: dict
    regions: dict
    total: float
    total_err: float
    proportion: float
    proportion_err: float
    caveats: list = field(default_factory=lambda: list(CAVEATS))

    @property
    def informative(self) -> bool:
        return self.total < 1.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "regions": {k: dict(v) for k, v in self.regions.items()},
            "total": self.total,
            "total_err": self.total_err,
            "proportion": self.proportion,
            "proportion_err": self.proportion_err,
            "informative": self.informative,
            "caveats": list(self.caveats),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [(name, f"{r['bound']:.10g}", f"{r['err']:.3g}") for name, r in self.regions.items()]
        rows += [("total", f"{self.total:.10g}", f"{self.total_err:.3g}"),
                 ("proportion", f"{self.proportion:.10g}", f"{self.proportion_err:.3g}")]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        lines = [f"{'region':<{w0}}  {'bound':>{w1}}  err"]
        lines += [f"{a:<{w0}}  {b:>{w1}}  {c}" for a, b, c in rows]
        if not self.informative:
            lines.append("non-informative: total exceeds 1")
        lines += [f"# {c}" for c in self.caveats]
        return "\n".join(lines)


# --- the surface ----------------------------------------------------------------

def v_surface_minus_one(p: SurfaceParams, u, v):
    """``V(u, v) - 1``, accurate when it is small."""
    u0 = u
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    U, a, b = p.upsilon, p.a, p.b
    # second term: e^{-2u} |e^{(1-U)w} expm1(U w)/(U w)|^2 with w = (-u+iv) b
    w = (-u + 1j * v) * b
    z = U * w
    near = np.abs(w) < SERIES_SWITCH
    z_safe = np.where(near, 1.0, z)
    ratio = np.where(near, 1.0 + z / 2.0 + z * z / 6.0, np.expm1(z_safe) / z_safe)
    second = np.exp(-2.0 * u * (1.0 + a)) * np.abs(ratio) ** 2
    # third term: A(u) B(u) / (U b)^2 with A = (1-e^{-2u})/u, B = (e^{-ua}-e^{-ub})/u
    small = np.abs(u) < SERIES_SWITCH
    us = np.where(small, 1.0, u)
    A = -np.expm1(-2.0 * us) / us
    B = -np.exp(-us * a) * np.expm1(-us * (b - a)) / us
    c1, c2, c3 = b - a, (b * b - a * a) / 2.0, (b**3 - a**3) / 6.0
    AB_series = 2.0 * c1 - 2.0 * (c1 + c2) * u + (4.0 * c1 / 3.0 + 2.0 * c2 + 2.0 * c3) * u * u
    third = np.where(small, AB_series, A * B) / (U * b) ** 2
    out = second + third
    return out[()] if np.ndim(u0) == 0 and np.ndim(v) == 0 else out


def v_surface(p: SurfaceParams, u, v):
    """The main-term surface ``V(u, v) >= 1``."""
    return 1.0 + v_surface_minus_one(p, u, v)


def log_v_surface(p: SurfaceParams, u, v):
    return np.log1p(v_surface_minus_one(p, u, v))


def _tail_majorant(p: SurfaceParams, k: float, offset: float, W0: float):
    """Bound for ``int_{W0}^inf sinh(k (W + offset)) log V(W, v) dW`` (any v).

    ``log V(W, v) <= V - 1 <= (e^{-aW} + 4 e^{-2W(1+a)}) / (U b W)^2``.
    Returns the bound and an estimate of its slack.
    """
    a, Ub = p.a, p.upsilon * p.b
    eps = a - k
    if eps <= 0:
        raise DomainError(f"sinh rate {k:.6g} is not below the surface decay rate {a:.6g}")
    x = eps * W0
    main = math.exp(-x) / W0 - eps * float(exp1(x))
    gam = 2.0 + 2.0 * a - k
    minor = 4.0 * math.exp(-gam * W0) / (gam * W0 * W0)
    bound = math.exp(k * offset) / 2.0 * (main + minor) / Ub**2
    # dropped pieces: -e^{-Wb}, the factor 1-e^{-2W}, e^{-k(W+offset)} in sinh, x^2/2 in log1p
    rel = (math.exp(-Ub * W0) + math.exp(-2.0 * W0) + math.exp(-2.0 * k * (W0 + offset))
           + math.exp(-a * W0) / (Ub * W0) ** 2)
    return bound, bound * rel


def _integrate(f, lo, hi, spec, breakpoints=()):
    res = integrate_finite(f, lo, hi, spec, breakpoints=breakpoints)
    return float(np.real(res.value)), float(res.error)


def _selberg_numerator(p, W_left, height, k, u_span, spec):
    """``int_0^height cos(pi t/(2 height)) log V(W_left, t) dt
    + int_0^inf sinh(k u) log V(u + W_left, height) du``; (value, err)."""
    edge, e1 = _integrate(lambda t: np.cos(np.pi * t / (2.0 * height)) * log_v_surface(p, W_left, t),
                          0.0, height, spec, breakpoints=np.linspace(0.0, height, 9)[1:-1])
    bps = [x for x in (-W_left,) if 0.0 < x < u_span]
    bps += list(np.arange(5.0, u_span, 5.0))
    top, e2 = _integrate(lambda u: np.sinh(k * u) * log_v_surface(p, u + W_left, height),
                         0.0, u_span, spec, breakpoints=bps)
    tail, e3 = _tail_majorant(p, k, -W_left, u_span + W_left)
    return edge + top + tail, e1 + e2 + e3, {"edge": edge, "top": top, "tail": tail}


def central_bound(p: SurfaceParams, R: float, S: float | None = None,
                  spec: QuadratureSpec = DEFAULT_SPEC, u_span: float = 60.0) -> Bound:
    """Density bound for zeros off the line near the centre.

    ``[int_0^S cos(pi t/2S) log V(-R, t) dt + int_0^inf sinh(pi u/2S) log V(u-R, S) du]
    / (8 S sinh(pi R/2S)) - 1/4``.  The top edge is integrated to
    ``u = R + u_span`` and closed with :func:`_tail_majorant`.
    """
    if not R > 0:
        raise DomainError("R must be positive")
    S = p.default_S if S is None else S
    num, err, _ = _selberg_numerator(p, -R, S, math.pi / (2.0 * S), R + u_span, spec)
    den = 8.0 * S * math.sinh(math.pi * R / (2.0 * S))
    return Bound(num / den - 0.25, err / den)


def ladder_bound(cfg: LadderConfig, j: int, spec: QuadratureSpec = DEFAULT_SPEC,
                 u_span: float = 60.0) -> Bound:
    """Density bound for box ``j >= 1`` of the ladder."""
    if j == 0:
        raise DomainError("j = 0 is the central box; use central_bound")
    if j < 1 or int(j) != j:
        raise DomainError("j must be a positive integer")
    height = (j + 1) * cfg.S  # 3 (j+1) d / 2
    k = math.pi / (2.0 * height)
    num, err, _ = _selberg_numerator(cfg.surface, j * cfg.d / 2.0, height, k, u_span, spec)
    den = 6.0 * (j + 1) * cfg.d * math.sinh(math.pi * j / (6.0 * (j + 1)))
    return Bound(num / den, err / den)


def check_trivial_bound(p: SurfaceParams, rate: float, floor_u: float) -> bool:
    """Whether ``V(u, v) - 1 <= e^{-rate u}`` for all ``u >= floor_u`` and all ``v``.

    Uses the majorant of :func:`_tail_majorant`; the ratio of majorant to
    ``e^{-rate u}`` decreases once ``a >= rate``, so one point decides.
    """
    if p.a < rate:
        return False
    Ub = p.upsilon * p.b
    m = (math.exp(-p.a * floor_u) + 4.0 * math.exp(-2.0 * floor_u * (1.0 + p.a))) / (Ub * floor_u) ** 2
    return m <= math.exp(-rate * floor_u)


def _tail_term(cfg: LadderConfig, j: int) -> float:
    r = cfg.trivial_bound_rate
    height = (j + 1) * cfg.S
    k = math.pi / (2.0 * height)
    num = math.exp(-r * j * cfg.d / 2.0) * (2.0 * height / math.pi + k / (r * r - k * k))
    return num / (6.0 * (j + 1) * cfg.d * math.sinh(math.pi * j / (6.0 * (j + 1))))


def tail_bound(cfg: LadderConfig, j_from: int, j_to: int | None = None) -> float:
    """Upper bound for the sum of ladder bounds over ``j_from <= j <= j_to``
    (``None`` for no upper limit) from ``log V <= e^{-rate u}``.

    The terms decrease at least geometrically with ratio ``e^{-rate d/2}``,
    which bounds the remainder of an infinite range.
    """
    if j_from < cfg.tail_start:
        raise DomainError(f"j_from must be at least tail_start = {cfg.tail_start}")
    if j_to is not None and j_to < j_from:
        raise DomainError("empty j range")
    if j_from * cfg.d / 2.0 < cfg.trivial_bound_floor_u:
        raise DomainError(f"j d/2 = {j_from * cfg.d / 2:.4g} is below the trivial-bound floor "
                          f"u = {cfg.trivial_bound_floor_u}")
    if not check_trivial_bound(cfg.surface, cfg.trivial_bound_rate, cfg.trivial_bound_floor_u):
        raise DomainError("the trivial bound V - 1 <= e^{-rate u} fails for these parameters")
    rho = math.exp(-cfg.trivial_bound_rate * cfg.d / 2.0)
    terms = []
    j = j_from
    while j_to is None or j <= j_to:
        terms.append(_tail_term(cfg, j))
        if j_to is None and terms[-1] < 1e-18 * terms[0]:
            break
        j += 1
    total = math.fsum(terms)
    if j_to is None:
        total += terms[-1] * rho / (1.0 - rho)
    return total


# --- proportions ----------------------------------------------------------------

def _pmap(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def realzero_proportion(p: SurfaceParams, R: float, S: float | None = None,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> BoundReport:
    """``1 - central_bound``: forms with no zero off the line near the centre."""
    S = p.default_S if S is None else S
    c = central_bound(p, R, S, spec)
    return BoundReport(
        kind="realzero",
        params={"upsilon": p.upsilon, "theta": p.theta, "R": R, "S": S},
        regions={"central": {"bound": c.bound, "err": c.err}},
        total=c.bound, total_err=c.err, proportion=1.0 - c.bound, proportion_err=c.err)


def superpositivity_proportion(cfg: LadderConfig, spec: QuadratureSpec = DEFAULT_SPEC,
                               threads: int | None = None) -> BoundReport:
    """``1 - [central + sum_{j <= j_exact_max} ladder_j + tail]``.

    The far box ``j = J`` is an external zero-density input and counted as 0.
    """
    p = cfg.surface
    regions = {}
    c = central_bound(p, cfg.R, cfg.S, spec)
    regions["central"] = {"bound": c.bound, "err": c.err}
    js = list(range(1, cfg.j_exact_max + 1))
    for j, b in zip(js, _pmap(lambda j: ladder_bound(cfg, j, spec), js, threads)):
        regions[f"ladder_{j}"] = {"bound": b.bound, "err": b.err}
    tail = tail_bound(cfg, cfg.tail_start)
    regions["tail"] = {"bound": tail, "err": 0.0}
    total = math.fsum(r["bound"] for r in regions.values())
    err = math.fsum(r["err"] for r in regions.values())
    return BoundReport(
        kind="superpositivity",
        params={"upsilon": p.upsilon, "theta": p.theta, "R": cfg.R, "S": cfg.S, "d": cfg.d,
                "j_exact_max": cfg.j_exact_max, "tail_start": cfg.tail_start,
                "trivial_bound_rate": cfg.trivial_bound_rate,
                "trivial_bound_floor_u": cfg.trivial_bound_floor_u},
        regions=regions, total=total, total_err=err, proportion=1.0 - total, proportion_err=err,
        caveats=list(CAVEATS) + ["far box j = J counted as 0 (external zero-density input)"])


# --- optimizer ------------------------------------------------------------------

UPSILON_RANGE = (0.05, 0.95)
R_RANGE = (0.5, 20.0)


@dataclass
class OptimizeResult:
    objective: str
    upsilon: float
    R: float
    value: float
    report: BoundReport
    evaluations: int
    budget_exhausted: bool
    history: list


def _objective_report(objective, upsilon, R, theta, spec):
    p = SurfaceParams(upsilon, theta)
    if objective == "realzero":
        return realzero_proportion(p, R, spec=spec)
    return superpositivity_proportion(LadderConfig(p, R), spec)


def optimize(objective: str, box=((0.4, 0.7), (3.0, 8.0)), budget: int = 40,
             start: tuple[float, float] | None = None, theta: float = THETA,
             spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9),
             threads: int | None = None) -> OptimizeResult:
    """Maximise the realzero or superpositivity proportion over ``(upsilon, R)``.

    A square grid takes about half the budget, then Nelder-Mead polishes
    the best grid point with the rest.  With ``budget == 1`` only ``start``
    (default: the box centre) is evaluated.  Ties are broken towards
    smaller ``R``, then smaller ``upsilon``.
    """
    if objective not in ("realzero", "superpositivity"):
        raise DomainError("objective must be 'realzero' or 'superpositivity'")
    (u_lo, u_hi), (r_lo, r_hi) = box
    if not (UPSILON_RANGE[0] < u_lo <= u_hi < UPSILON_RANGE[1] and R_RANGE[0] < r_lo <= r_hi < R_RANGE[1]):
        raise DomainError(f"search box must lie inside upsilon in {UPSILON_RANGE}, R in {R_RANGE}")
    if budget < 1:
        raise DomainError("budget must be at least 1")
    cache = {}
    history = []

    def report_or_none(key):
        # points where the bound is undefined (e.g. the trivial tail bound fails) are infeasible
        try:
            return _objective_report(objective, key[0], key[1], theta, spec)
        except DomainError:
            return None

    def record(key, rep):
        cache[key] = rep
        history.append((key[0], key[1], -math.inf if rep is None else rep.proportion))

    def evaluate(point):
        key = (round(float(point[0]), 12), round(float(point[1]), 12))
        if key not in cache:
            record(key, report_or_none(key))
        return history[[h[:2] for h in history].index(key)][2]

    def best():
        feasible = [h for h in history if math.isfinite(h[2])]
        if not feasible:
            raise DomainError("no feasible point in the search box")
        return min(feasible, key=lambda h: (-h[2], h[1], h[0]))

    if start is None:
        start = (0.5 * (u_lo + u_hi), 0.5 * (r_lo + r_hi))
    if budget == 1:
        evaluate(start)
        exhausted = True
    else:
        g = max(2, int(math.isqrt(budget // 2)))
        pts = [(u, r) for u in np.linspace(u_lo, u_hi, g) for r in np.linspace(r_lo, r_hi, g)]
        if len(pts) > budget:
            pts = pts[:budget]
        keys = [(round(float(u), 12), round(float(r), 12)) for u, r in pts]
        reports = _pmap(report_or_none, keys, threads)
        for k, rep in zip(keys, reports):
            if k not in cache:
                record(k, rep)
        remaining = budget - len(history)
        exhausted = remaining <= 0
        if remaining > 0:
            x0 = np.array(best()[:2])

            def neg(x):
                if not (u_lo <= x[0] <= u_hi and r_lo <= x[1] <= r_hi):
                    return math.inf
                if len(history) >= budget and (round(float(x[0]), 12), round(float(x[1]), 12)) not in cache:
                    return math.inf
                val = evaluate(x)
                return -val if math.isfinite(val) else math.inf

            step = np.array([(u_hi - u_lo) / (2 * g), (r_hi - r_lo) / (2 * g)])
            step = np.where(step > 0, step, 1e-3)
            simplex = np.array([x0, x0 + [step[0], 0.0], x0 + [0.0, step[1]]])
            res = minimize(neg, x0, method="Nelder-Mead",
                           options={"maxfev": remaining, "xatol": 1e-5, "fatol": 1e-9,
                                    "initial_simplex": simplex})
            exhausted = not res.success
    u_best, r_best, value = best()
    return OptimizeResult(objective, u_best, r_best, value, cache[(u_best, r_best)],
                          len(history), exhausted, history)


# --- Selberg integrals for one form ---------------------------------------------

AFE_RANGE = 1.4


@dataclass(frozen=True)
class SelbergIntegrals:
    I1: float
    I2: float
    I3: float
    error: float
    floor: float
    parity: int

    @property
    def total(self) -> float:
        return self.I1 + self.I2 + self.I3


def _log_lambda_factor(q, s):
    # log of (sqrt q / 2 pi)^s Gamma(s + 1/2)
    return s * (0.5 * math.log(q) - math.log(2.0 * math.pi)) + log_gamma(s + 0.5)


@lru_cache(maxsize=8)
def _primes_upto(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def _log_l_euler(coeffs: CoefficientTable, s: complex):
    """``log L(s, f)`` from the Euler product, with a bound for the omitted primes."""
    P = coeffs.n_max
    primes = _primes_upto(P)
    lam = coeffs.values[primes]
    chi = (primes != coeffs.q).astype(float)
    x = np.exp(-s * np.log(primes.astype(float)))
    value = -np.log(1.0 - lam * x + chi * x * x).sum()
    sig = s.real
    tail = 2.1 * P ** (1.0 - sig) / ((sig - 1.0) * math.log(P))
    return complex(value), tail


def _log_abs_l_sq(weight, coeffs, delta, tau, inner):
    """``log|L(1/2 + delta + i tau)|^2`` and an error estimate."""
    if abs(delta) <= AFE_RANGE:
        res = afe_square(weight, coeffs, delta, tau, inner)
        if res.value <= 0:
            raise AccuracyError(f"|L|^2 estimate {res.value:.3g} is not positive", value=res.value)
        return math.log(res.value), res.error / res.value
    if delta > 0:
        val, tail = _log_l_euler(coeffs, 0.5 + delta + 1j * tau)
        return 2.0 * val.real, 2.0 * tail
    s = 0.5 + delta + 1j * tau
    s_ref = 1.0 - np.conj(s)
    val, tail = _log_l_euler(coeffs, s_ref)
    shift = 2.0 * (_log_lambda_factor(coeffs.q, s_ref).real - _log_lambda_factor(coeffs.q, s).real)
    return 2.0 * val.real + shift, 2.0 * tail


def selberg_integrals(profile: MollifierProfile, weight: SpectralWeight, coeffs: CoefficientTable,
                      window: SelbergWindow, spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-6, rel_tol=1e-8),
                      inner: QuadratureSpec = QuadratureSpec(abs_tol=1e-10),
                      has_dip: bool = False) -> SelbergIntegrals:
    """The three boundary integrals of ``log LM`` over the Selberg window of one form.

    ``I1`` runs along the left edge, ``I2`` along the top edge (with the
    bottom edge folded in by conjugate symmetry) and ``I3`` along the right
    edge, where ``log L`` comes from the Euler product.  ``floor`` is the
    lower bound the zero at the centre forces: ``4 S sinh(pi R / 2S)`` for
    odd forms, ``8 S sinh(pi R/2S)`` for even forms with a zero in the
    triangle (``has_dip``), otherwise 0.
    """
    q = coeffs.q
    log_q = math.log(q)
    R, S = window.R, window.S
    X = window.right_edge(q, profile.upsilon)
    eps = sign(coeffs)

    def log_lm_sq(u, v):
        delta, tau = u / log_q, v / log_q
        ll, ell = _log_abs_l_sq(weight, coeffs, delta, tau, inner)
        m = mollifier_value(profile, coeffs, 0.5 + delta + 1j * tau)
        return ll + 2.0 * math.log(abs(m)), ell

    errs = []

    def vec(fn, length):
        # fn returns (value, error of value); errors are scaled by the range length
        def f(xs):
            out = []
            for x in np.atleast_1d(xs):
                val, e = fn(float(x))
                errs.append(e * length)
                out.append(val)
            return np.array(out)
        return f

    def left(t):
        val, e = log_lm_sq(-R, t)
        c = math.cos(math.pi * t / (2 * S))
        return c * 0.5 * val, c * 0.5 * e

    def top(u):
        val, e = log_lm_sq(u, S)
        w = math.sinh(math.pi * (u + R) / (2 * S))
        return w * val, w * e

    # I1 = int_{-S}^{S} cos(pi t/2S) log|LM| dt is even in t
    i1, e1 = _integrate(vec(left, 2 * S), 0.0, S, spec)
    i1 *= 2.0
    bps = [x for x in (0.0, -AFE_RANGE * log_q, AFE_RANGE * log_q) if -R < x < X]
    i2, e2 = _integrate(vec(top, X + R), -R, X, spec, breakpoints=bps)

    sigma_right = 0.5 + X / log_q

    def right(t):
        s = sigma_right + 1j * t / log_q
        ll, tail = _log_l_euler(coeffs, s)
        m = mollifier_value(profile, coeffs, s)
        if abs(m - 1.0) >= 1.0:
            raise AccuracyError("mollifier too far from 1 on the right edge for the principal log")
        kern = np.cos(math.pi * (X + R + 1j * t) / (2j * S))
        return -(kern * (ll + np.log(m))).real, abs(kern) * tail

    i3, e3 = _integrate(vec(right, 2 * S), 0.0, S, spec)
    i3 *= 2.0
    if eps < 0:
        floor = 4.0 * S * math.sinh(math.pi * R / (2 * S))
    elif has_dip:
        floor = 8.0 * S * math.sinh(math.pi * R / (2 * S))
    else:
        floor = 0.0
    # pointwise errors of the integrands, times the length of their range
    point_err = max(errs) if errs else 0.0
    return SelbergIntegrals(i1, i2, i3, 2 * e1 + e2 + 2 * e3 + 3 * point_err, floor, eps)
