"""The mollifier for L(s, f): tapered Möbius coefficients, the Mellin
transform of the taper, and the Dirichlet coefficients of L times M."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .errors import DomainError, PoleError, IncompleteDataError

_PSI_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class MollifierProfile:
    """Taper fraction ``upsilon``, length ``M`` and level margin ``theta``.

    ``log_M`` is stored alongside ``M`` so profiles built from a level
    exponent keep full precision in ``log M``.
    """

    upsilon: float
    M: float
    theta: float = 1e-10
    log_M: float = field(default=None)

    def __post_init__(self):
        if not 0 < self.upsilon < 1:
            raise DomainError(f"upsilon must lie in (0, 1), got {self.upsilon}")
        if not self.M > 1:
            raise DomainError(f"M must exceed 1, got {self.M}")
        if not 0 < self.theta < 0.01:
            raise DomainError(f"theta must lie in (0, 1/100), got {self.theta}")
        if self.log_M is None:
            object.__setattr__(self, "log_M", math.log(self.M))

    @classmethod
    def from_level(cls, q: int, exponent: float, upsilon: float, theta: float = 1e-10):
        """``M = q**exponent``; e.g. ``exponent = (1 - 5 theta)/2``."""
        log_m = exponent * math.log(q)
        return cls(upsilon=upsilon, M=math.exp(log_m), theta=theta, log_M=log_m)

    @property
    def knee(self) -> float:
        """``M**(1 - upsilon)``, where the taper leaves 1."""
        return math.exp((1.0 - self.upsilon) * self.log_M)


def taper(profile: MollifierProfile, x):
    """``F(x)``: 1 up to the knee, ``log(M/x)/(upsilon log M)`` up to M, then 0."""
    x0 = x
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("taper is defined for x >= 0")
    with np.errstate(divide="ignore"):
        ramp = (profile.log_M - np.log(x)) / (profile.upsilon * profile.log_M)
    out = np.clip(ramp, 0.0, 1.0)
    out = np.where(x <= profile.knee, 1.0, out)
    out = np.where(x >= profile.M, 0.0, out)
    return out[()] if np.ndim(x0) == 0 else out


def psi(profile: MollifierProfile, w):
    """Mellin transform ``(M**w - M**((1-upsilon) w)) / (upsilon w**2 log M)``.

    Simple pole at 0 with residue 1.  For ``|w log M| < 1e-4`` the Laurent
    expansion ``1/w + (2-upsilon) log M / 2 + ...`` is used.
    """
    w = complex(w)
    if w == 0:
        raise PoleError("psi has a simple pole at w = 0")
    L = profile.log_M
    u = profile.upsilon
    z = w * L
    if abs(z) < _PSI_SERIES_CUTOFF:
        return 1.0 / w + L * (2.0 - u) / 2.0 + L * (1.0 - (1.0 - u) ** 3) * z / (6.0 * u)
    # M^w - M^((1-u)w) = M^((1-u)w) expm1(u w log M), free of cancellation
    return cmath.exp((1.0 - u) * z) * complex(np.expm1(u * z)) / (u * w * w * L)


def x_coeff(profile: MollifierProfile, ell: int, s: complex) -> complex:
    """``mu(ell) ell**(1/2 - s) sum_n mu(ell n)**2 F(ell n) n**(-2s)``."""
    ell = int(ell)
    if ell < 1:
        raise DomainError("ell must be a positive integer")
    if ell >= profile.M:
        return 0j
    mu_l = arith.mobius(ell)
    if mu_l == 0:
        return 0j
    nmax = int(math.floor(profile.M / ell))
    n = np.arange(1, nmax + 1)
    ln = ell * n
    mu = _mobius_upto(int(ln[-1]))
    weights = (mu[ln] != 0) * taper(profile, ln.astype(float))
    s = complex(s)
    terms = weights * np.exp(-2.0 * s * np.log(n))
    return mu_l * cmath.exp((0.5 - s) * math.log(ell)) * complex(terms.sum())


_MU_CACHE = {"limit": 0, "mu": np.zeros(1, dtype=np.int64)}


def _mobius_upto(limit):
    if limit > _MU_CACHE["limit"]:
        new_limit = max(limit, 2 * _MU_CACHE["limit"], 1024)
        _MU_CACHE["mu"] = arith.mobius_sieve(new_limit)
        _MU_CACHE["limit"] = new_limit
    return _MU_CACHE["mu"]


def x_coefficients(profile: MollifierProfile, s: complex) -> dict[int, complex]:
    """All nonzero ``x_ell(s)``, keyed by ``ell``."""
    lmax = int(math.ceil(profile.M))
    mu = _mobius_upto(lmax)
    out = {}
    for ell in range(1, lmax + 1):
        if ell < profile.M and mu[ell] != 0:
            out[ell] = x_coeff(profile, ell, s)
    return out


def dirichlet_c(profile: MollifierProfile, n: int) -> float:
    """Coefficient ``c(n) = sum_{d | n} mu(d) F(d)`` of the Dirichlet series of LM."""
    # only squarefree divisors contribute: products of subsets of the primes
    divs = np.array([1.0])
    signs = np.array([1.0])
    for p in arith.factorize(n).primes:
        divs = np.concatenate([divs, divs * p])
        signs = np.concatenate([signs, -signs])
    return float(math.fsum(signs * taper(profile, divs)))


def mollifier_value(profile: MollifierProfile, coeffs, s: complex) -> complex:
    """``M(s, f) = sum_ell x_ell(s) lambda_f(ell) / sqrt(ell)``.

    ``coeffs`` is a :class:`~superpositivity.afe.CoefficientTable`; every
    squarefree ``ell < M`` must be present.
    """
    xs = x_coefficients(profile, s)
    missing = [ell for ell in xs if ell > coeffs.n_max]
    if missing:
        raise IncompleteDataError(
            f"mollifier needs lambda({min(missing)}) but the table stops at {coeffs.n_max}",
            required=max(xs))
    total = 0j
    for ell, x in xs.items():
        total += x * coeffs.lam(ell) / math.sqrt(ell)
    return total
