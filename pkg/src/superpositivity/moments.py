"""Trace-formula computations at finite level.

* Petersson deltas ``Delta_q(m, n)`` from the Kloosterman side, with an
  explicit Weil-bound majorant for the truncated tail.
* The twisted second moment ``sum_f omega_f lambda_f(ell) |L(1/2+delta+it, f)|^2``
  computed without eigenforms, and its two-term main term.
* The Dirichlet series ``sum_d eta_nu(d^2 l1 l2) d^-s``: Euler-product
  closed form and summed series.
* Multiplicativity oracles for finite convolutions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import arith
from .afe import FOUR_PI_SQ, SpectralWeight, VWeightKernel, _tail_cutoff, h_ratio, v_weight_batch
from .errors import AccuracyError, DomainError
from .quadrature import QuadratureSpec
from .specfun import bessel_j1, log_gamma, zeta, zeta_q

C_MAX_CAP = 10**6
EULER_GAMMA = 0.5772156649015329
# |Delta(x)| <= 0.961 sqrt(x) for the remainder in the Dirichlet divisor problem, x >= 1
_DIVISOR_REMAINDER = 0.961


@dataclass(frozen=True)
class MomentRequest:
    q: int
    ell: int
    delta: float
    t: float
    c_max: int | None = None
    spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8)

    def __post_init__(self):
        if not arith.is_prime(self.q):
            raise DomainError(f"q = {self.q} is not prime")
        if self.ell < 1:
            raise DomainError("ell must be a positive integer")
        if math.gcd(self.ell, self.q) != 1:
            raise DomainError("ell must be coprime to q")
        if self.c_max is not None and self.c_max < self.q:
            raise DomainError("c_max must be at least q")


# --- Petersson --------------------------------------------------------------------

class PeterssonResult(NamedTuple):
    value: float
    tail_bound: float
    c_max: int
    converged: bool


def tau_tail_sum_bound(K: int) -> float:
    """Upper bound for ``sum_{k > K} tau(k) k^{-3/2}``.

    Partial summation against ``D(x) = x log x + (2 gamma - 1) x + Delta(x)``
    with ``|Delta(x)| <= 0.961 sqrt(x)``.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    return 2.0 * (math.log(K) + 2.0 + 2.0 * EULER_GAMMA) / math.sqrt(K) + 2.5 * _DIVISOR_REMAINDER / K


def petersson_tail_bound(m: int, n: int, q: int, c_max: int) -> float:
    """Majorant for the Kloosterman terms with ``c > c_max``, ``q | c``.

    Uses Weil's bound, ``|J_1(x)| <= x/2``, ``tau(qk) <= 2 tau(k)`` and
    :func:`tau_tail_sum_bound`.
    """
    K = c_max // q
    g = math.gcd(m, n)
    return 8.0 * math.pi**2 * math.sqrt(m * n * g) * q**-1.5 * tau_tail_sum_bound(K)


def _c_max_for(m, n, q, target):
    # smallest multiple of q whose tail bound is below target, or None past the cap
    lo, hi = 1, C_MAX_CAP // q
    if petersson_tail_bound(m, n, q, hi * q) >= target:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if petersson_tail_bound(m, n, q, mid * q) < target:
            hi = mid
        else:
            lo = mid + 1
    return lo * q


def petersson_delta(m: int, n: int, q: int, c_max: int | None = None,
                    tail_target: float = 1e-3) -> PeterssonResult:
    """``delta_{m,n} - 2 pi sum_{c <= c_max, q | c} S(m,n;c)/c J_1(4 pi sqrt(mn)/c)``.

    With ``c_max=None`` the smallest multiple of ``q`` with tail bound below
    ``tail_target`` is used; if that exceeds ``C_MAX_CAP`` the sum stops at
    the cap and ``converged`` is False.  An explicit ``c_max`` above the
    cap raises :class:`AccuracyError`.
    """
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    if not arith.is_prime(q):
        raise DomainError(f"q = {q} is not prime")
    converged = True
    if c_max is None:
        c_max = _c_max_for(m, n, q, tail_target)
        if c_max is None:
            c_max = (C_MAX_CAP // q) * q
            converged = False
    elif c_max > C_MAX_CAP:
        raise AccuracyError(f"c_max = {c_max} exceeds the cap {C_MAX_CAP}")
    elif c_max < q:
        raise DomainError("c_max must be at least q")
    c = q * np.arange(1, c_max // q + 1)
    S = np.array([arith.kloosterman(m, n, int(ci)) for ci in c])
    terms = S / c * bessel_j1(4.0 * math.pi * math.sqrt(m * n) / c)
    value = (1.0 if m == n else 0.0) - 2.0 * math.pi * math.fsum(terms)
    tail = petersson_tail_bound(m, n, q, int(c[-1]))
    if converged and c_max is not None and tail >= tail_target * max(1.0, abs(value)):
        converged = False
    return PeterssonResult(value, tail, int(c[-1]), converged)


# --- twisted second moment ------------------------------------------------------

class MomentResult(NamedTuple):
    value: float
    error: float
    truncation_estimate: float
    weil_tail_bound: float
    n_terms: int
    c_max: int
    partials: dict = {}


def _moment_weights(req: MomentRequest, weight: SpectralWeight):
    kern_tol = req.spec.abs_tol * 1e-3
    probe = VWeightKernel(weight, req.delta, req.t, req.q, abs_tol=kern_tol)
    n_terms, tail = _tail_cutoff(probe, req.q, req.spec.abs_tol / 10.0, FOUR_PI_SQ / req.q)
    n = np.arange(1, n_terms + 1)
    V, Verr = v_weight_batch(weight, req.delta, req.t, req.q, FOUR_PI_SQ * n / req.q, kern_tol)
    eta_vals = arith.eta_sieve(req.t, n_terms)[1:]
    w = eta_vals / np.sqrt(n)
    return n, w * V, np.abs(w) * Verr, tail


def _kloosterman_column(ell, n, c, q, cache):
    """``S(ell, n; c)`` for the whole vector ``n``, with ``c = A B``, ``A`` the
    q-power part: ``S(ell, n B^-2; A) S(ell, n A^-2; B)`` read from residue tables."""
    A = q
    while (c // A) % q == 0:
        A *= q
    B = c // A
    if A not in cache:
        cache[A] = arith.kloosterman_residue_table(ell, A)
    part_a = cache[A][(n * (pow(B, -2, A) if B > 1 else 1)) % A]
    if B == 1:
        return part_a
    T_b = arith.kloosterman_residue_table(ell, B)
    return part_a * T_b[(n * pow(A, -2, B)) % B]


def twisted_second_moment_numeric(req: MomentRequest, weight: SpectralWeight = SpectralWeight(),
                                  checkpoints=()) -> MomentResult:
    """``(q/4pi^2)^-delta sum_n eta_it(n) n^-1/2 V(4 pi^2 n/q) Delta_q(ell, n)``.

    For each modulus ``c = qk`` the Kloosterman sums ``S(ell, n; c)`` for all
    ``n`` come from FFT residue tables (see :func:`_kloosterman_column`).
    ``c_max`` defaults to ``C_MAX_CAP``; the change over the last half of
    the ``k`` range is reported as ``truncation_estimate``.  ``checkpoints``
    (values of ``k``) record partial sums in ``partials``.
    """
    q, ell = req.q, req.ell
    c_max = req.c_max if req.c_max is not None else C_MAX_CAP
    if c_max > C_MAX_CAP:
        raise AccuracyError(f"c_max = {c_max} exceeds the cap {C_MAX_CAP}")
    K = c_max // q
    n, wv, wv_err, afe_tail = _moment_weights(req, weight)
    sqrt_ln = 4.0 * math.pi * np.sqrt(ell * n)
    cache = {}
    kl_sum = np.empty(K)
    for k in range(1, K + 1):
        c = q * k
        S = _kloosterman_column(ell, n, c, q, cache)
        kl_sum[k - 1] = math.fsum(wv * S * bessel_j1(sqrt_ln / c)) / c
    diag = wv[ell - 1] if ell <= n.size else 0.0
    pref = (q / FOUR_PI_SQ) ** (-req.delta)
    total = diag - 2.0 * math.pi * math.fsum(kl_sum)
    trunc = 2.0 * math.pi * abs(math.fsum(kl_sum[K // 2:])) if K > 1 else 0.0
    weil = float(sum(abs(x) * petersson_tail_bound(ell, int(m), q, K * q) for m, x in zip(n, wv)))
    error = pref * (float(np.sum(wv_err)) * (1.0 + 2.0 * math.pi * K) + afe_tail)
    partials = {k: pref * (diag - 2.0 * math.pi * math.fsum(kl_sum[:k])) for k in checkpoints if k <= K}
    return MomentResult(pref * total, error, pref * trunc, pref * weil, int(n.size), K * q, partials)


def twisted_second_moment_mainterm(req: MomentRequest, weight: SpectralWeight = SpectralWeight()) -> float:
    """``zeta_q(1+2d) eta(ell) ell^-(1/2+d) + zeta_q(1-2d) eta(ell) ell^-(1/2-d)
    H_t(-d)/H_t(d) (q/4pi^2)^-2d``; ``delta = 0`` is the average of ``+-1e-6``."""
    if req.delta == 0:
        plus = MomentRequest(req.q, req.ell, 1e-6, req.t, req.c_max, req.spec)
        minus = MomentRequest(req.q, req.ell, -1e-6, req.t, req.c_max, req.spec)
        return 0.5 * (twisted_second_moment_mainterm(plus, weight) + twisted_second_moment_mainterm(minus, weight))
    d, q, ell = req.delta, req.q, req.ell
    eta_l = arith.eta_real(req.t, ell)
    t = req.t
    # H_t(-d)/H_t(d): the G factors cancel exactly since G is even
    log_ratio = complex(log_gamma(1 - d + 1j * t) + log_gamma(1 - d - 1j * t)
                        - log_gamma(1 + d + 1j * t) - log_gamma(1 + d - 1j * t)).real
    # zeta_q(1 +- 2d) = (+-1/(2d) + R(+-2d)) (1 - q^(-1 -+ 2d)); the two poles are
    # combined through expm1 so small d loses no digits to cancellation
    logq = math.log(q)
    A = -math.expm1(-(1 + 2 * d) * logq) * eta_l * ell ** -(0.5 + d)
    log_b_over_a = (math.log1p(-math.exp((-1 + 2 * d) * logq)) - math.log1p(-math.exp((-1 - 2 * d) * logq))
                    + 2 * d * math.log(ell) + log_ratio - 2 * d * math.log(q / FOUR_PI_SQ))
    B = A * math.exp(log_b_over_a)
    pole = -A * math.expm1(log_b_over_a) / (2 * d)
    return pole + A * _zeta_regular(2 * d) + B * _zeta_regular(-2 * d)


# Stieltjes constants gamma_0..gamma_5
_STIELTJES = (0.5772156649015329, -0.07281584548367672, -0.009690363192872318,
              0.002053834420303346, 0.0023253700654673, 0.0007933238173010627)


def _zeta_regular(x: float) -> float:
    """``zeta(1 + x) - 1/x``, by the Stieltjes series for small ``|x|``."""
    if abs(x) < 1e-2:
        return math.fsum((-1) ** n * g * x**n / math.factorial(n) for n, g in enumerate(_STIELTJES))
    return complex(zeta(1 + x)).real - 1 / x


SWEEP_COLUMNS = ("q", "ell", "delta", "t", "numeric", "mainterm", "residual", "tail_bound")


def moment_sweep(qs, ell=1, delta=0.05, t=0.0, weight: SpectralWeight = SpectralWeight(),
                 spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8)):
    rows = []
    for q in qs:
        req = MomentRequest(int(q), ell, delta, t, spec=spec)
        num = twisted_second_moment_numeric(req, weight)
        main = twisted_second_moment_mainterm(req, weight)
        rows.append({"q": int(q), "ell": ell, "delta": delta, "t": t, "numeric": num.value,
                     "mainterm": main, "residual": num.value - main, "tail_bound": num.weil_tail_bound})
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{row[k]:.10g}" if isinstance(row[k], float) else row[k]) for k in SWEEP_COLUMNS})


# --- the eta-square Dirichlet series ------------------------------------------------

def _check_series_args(nu, ell1, ell2, s):
    for ell in (ell1, ell2):
        if not arith.is_squarefree(ell):
            raise DomainError(f"{ell} is not squarefree")
    nu, s = complex(nu), complex(s)
    if (s + 2 * nu).real <= 1 or (s - 2 * nu).real <= 1:
        raise DomainError("need Re(s +- 2 nu) > 1 for absolute convergence")
    return nu, s


def _local_eta(nu, p, e):
    lp = math.log(p)
    return sum(np.exp(nu * (2 * j - e) * lp) for j in range(e + 1))


def dirichlet_eta_square(nu: complex, ell1: int, ell2: int, s: complex) -> complex:
    """Closed form of ``sum_d eta_nu(d^2 l1 l2) d^-s`` for squarefree ``l1, l2``."""
    nu, s = _check_series_args(nu, ell1, ell2, s)
    g = math.gcd(ell1, ell2)
    value = complex(zeta(s) * zeta(s + 2 * nu) * zeta(s - 2 * nu) / zeta(2 * s))
    for p in arith.factorize(ell1 * ell2 // (g * g)).primes:
        ps = p ** (-s)
        value *= _local_eta(nu, p, 1) / (1 + ps)
    for p in arith.factorize(g).primes:
        ps = p ** (-s)
        value *= (_local_eta(nu, p, 2) - ps) / (1 + ps)
    return value


def eta_square_terms(nu: complex, ell1: int, ell2: int, D: int) -> np.ndarray:
    """``eta_nu(d^2 l1 l2)`` for ``1 <= d <= D`` (index 0 unused), by a
    multiplicative sieve over the primes up to ``D``."""
    nu = complex(nu)
    L = ell1 * ell2
    lf = dict(arith.factorize(L).prime_powers)
    vals = np.ones(D + 1, dtype=complex)
    d = np.arange(D + 1)
    for p, e in lf.items():
        vals[d % p != 0] *= _local_eta(nu, p, e)
    is_comp = np.zeros(D + 1, dtype=bool)
    for p in range(2, D + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        e = lf.get(p, 0)
        prev = 1.0 + 0j
        pk, k = p, 1
        while pk <= D:
            cur = _local_eta(nu, p, 2 * k + e)
            if abs(prev) < 1e-250:
                raise AccuracyError("vanishing local factor; use direct evaluation")
            vals[pk::pk] *= cur / prev
            prev = cur
            pk *= p
            k += 1
    vals[0] = 0
    return vals


class SeriesResult(NamedTuple):
    value: complex
    error: float
    n_terms: int


def _tail_basis(nu, s, D):
    # smooth part of the partial sums: D^(rho - s) log^j D at the poles rho
    # of the Dirichlet series (1, 1 +- 2 nu), with multiplicity
    rhos = [1.0 + 0j, 1.0 + 2 * nu, 1.0 - 2 * nu]
    groups = []
    for r in rhos:
        for g in groups:
            if abs(g[0] - r) < 1e-6:
                g[1] += 1
                break
        else:
            groups.append([r, 1])
    L = np.log(D)
    cols = [np.ones_like(L, dtype=complex)]
    for r, mult in groups:
        for j in range(mult):
            cols.append(np.exp((r - s) * L) * L**j)
    return np.column_stack(cols)


def dirichlet_eta_square_series(nu: complex, ell1: int, ell2: int, s: complex,
                                n_terms: int | None = None, extrapolate: bool = True) -> SeriesResult:
    """The series ``sum_{d <= n_terms} eta_nu(d^2 l1 l2) d^-s``.

    With ``extrapolate`` the partial sums on ``[n_terms/20, n_terms]`` are
    fitted to the limit plus the smooth tail ``D^(rho-s) log^j D`` of the
    poles; the error is the spread between two disjoint fits.  Without it
    the raw partial sum is returned with the bound
    ``2 sqrt(L) L^r sum_{d > D} d^(1+2r-Re s)`` that follows from
    ``|eta_nu(m)| <= tau(m) m^r <= 2 m^(1/2+r)``, ``r = |Re nu|``.
    """
    nu, s = _check_series_args(nu, ell1, ell2, s)
    margin = s.real - 2 * abs(nu.real)
    if n_terms is None:
        n_terms = 2_000_000 if margin < 2.5 else 200_000
    vals = eta_square_terms(nu, ell1, ell2, n_terms)
    d = np.arange(1, n_terms + 1, dtype=float)
    partial = np.cumsum(vals[1:] * np.exp(-s * np.log(d)))
    if not extrapolate:
        r = abs(nu.real)
        L = ell1 * ell2
        expo = 2.0 + 2.0 * r - s.real
        if expo >= -0.0:
            return SeriesResult(complex(partial[-1]), math.inf, n_terms)
        bound = 2.0 * L ** (0.5 + r) * n_terms**expo / (-expo)
        return SeriesResult(complex(partial[-1]), bound, n_terms)

    def fit(lo, hi):
        D = np.unique(np.geomspace(lo, hi, 2000).astype(int))
        A = _tail_basis(nu, s, D.astype(float))
        coef, *_ = np.linalg.lstsq(A, partial[D - 1], rcond=None)
        return complex(coef[0])

    a = fit(n_terms // 10, n_terms)
    b = fit(n_terms // 20, n_terms // 2)
    rounding = 64 * np.finfo(float).eps * math.sqrt(n_terms) * abs(a)
    return SeriesResult(a, abs(a - b) + rounding, n_terms)


def random_eta_square_cases(count: int = 30, seed: int = 0):
    """Admissible ``(nu, l1, l2, s)`` for closed-form checks; the first case is
    the baseline ``(0, 1, 1, 2)`` with value ``zeta(2)^3/zeta(4)``.

    The others keep ``Re s - 2|Re nu|`` in ``[2.5, 4]`` and ``|nu| >= 0.1``
    so the pole terms of the extrapolation stay well separated.
    """
    rng = np.random.default_rng(seed)
    squarefree = [n for n in range(1, 31) if arith.is_squarefree(n)]
    cases = [(0j, 1, 1, 2.0 + 0j)]
    while len(cases) < count:
        nu = complex(rng.uniform(-0.25, 0.25), rng.uniform(-1.0, 1.0))
        if abs(nu) < 0.1:
            continue
        s = complex(1.0 + 2 * abs(nu.real) + rng.uniform(1.5, 3.0), rng.uniform(-5.0, 5.0))
        l1, l2 = (int(x) for x in rng.choice(squarefree, 2))
        cases.append((nu, l1, l2, s))
    return cases


# --- multiplicativity oracles -----------------------------------------------------

@dataclass
class OracleReport:
    kind: str
    k_max: int
    pairs_checked: int
    passed: bool
    first_violation: tuple | None = None


def _ordered_factorizations(k, parts):
    # every (d_1, ..., d_parts) with product k
    if parts == 1:
        yield (k,)
        return
    for d in arith.divisors(k):
        for rest in _ordered_factorizations(k // d, parts - 1):
            yield (d,) + rest


def _mu2(n):
    return 1 if arith.is_squarefree(n) else 0


def lemma42_function(h: Callable, f: Callable, g: Callable):
    """``F(k) = sum_{k = r m n} mu^2(rm) mu^2(rn) h(r) f(m) g(n)``, by enumeration."""
    def F(k):
        total = 0.0
        for r, m, n in _ordered_factorizations(k, 3):
            if _mu2(r * m) and _mu2(r * n):
                total += h(r) * f(m) * g(n)
        return total
    return F


def lemma64_function(h: Callable, f1: Callable, f2: Callable, g1: Callable, g2: Callable, t: Callable):
    """``F(k) = sum_{k = r l1 n1 l2 n2} mu^2(r l1 n1) mu^2(r l2 n2) h(r) f1(l1) f2(l2)
    g1(n1) g2(n2) prod_{p | (l1, l2)} t(p)``, by enumeration."""
    def F(k):
        total = 0.0
        for r, l1, n1, l2, n2 in _ordered_factorizations(k, 5):
            if not (_mu2(r * l1 * n1) and _mu2(r * l2 * n2)):
                continue
            weight = 1.0
            for p in arith.factorize(math.gcd(l1, l2)).primes:
                weight *= t(p)
            total += h(r) * f1(l1) * f2(l2) * g1(n1) * g2(n2) * weight
        return total
    return F


def multiplicativity_oracle(kind: str, params: dict | None = None, k_max: int = 2000,
                            tol: float = 1e-9) -> OracleReport:
    """Check ``F(mn) = F(m) F(n)`` for all coprime ``m, n > 1`` with ``mn <= k_max``.

    ``params`` supplies the callbacks: ``h, f, g`` for ``lemma42`` and
    ``h, f1, f2, g1, g2, t`` for ``lemma64``; missing ones default to the
    constant 1.  Pass ``F`` directly to test an arbitrary function.
    """
    if k_max > 10**4:
        raise DomainError("k_max is capped at 10^4")
    params = dict(params or {})
    one = lambda k: 1.0  # noqa: E731
    if "F" in params:
        F = params["F"]
    elif kind == "lemma42":
        F = lemma42_function(*(params.get(k, one) for k in ("h", "f", "g")))
    elif kind == "lemma64":
        F = lemma64_function(*(params.get(k, one) for k in ("h", "f1", "f2", "g1", "g2", "t")))
    else:
        raise DomainError(f"unknown oracle kind {kind!r}")
    cache = {}

    def Fc(k):
        if k not in cache:
            cache[k] = F(k)
        return cache[k]

    checked = 0
    for m in range(2, k_max // 2 + 1):
        for n in range(m + 1, k_max // m + 1):
            if math.gcd(m, n) != 1:
                continue
            lhs, rhs = Fc(m * n), Fc(m) * Fc(n)
            checked += 1
            if abs(lhs - rhs) > tol * max(1.0, abs(rhs)):
                return OracleReport(kind, k_max, checked, False, (m, n, lhs, rhs))
    return OracleReport(kind, k_max, checked, True)
