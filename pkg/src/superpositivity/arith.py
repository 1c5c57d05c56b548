"""Exact integer arithmetic: factorization, Möbius, divisor functions,
the generalized divisor function eta_nu and Kloosterman sums.

Integers are plain Python ints in the scalar routines.  The vectorised
helpers (sieves, Kloosterman tables) work in ``int64`` and stay exact as
long as the moduli respect ``MAX_MODULUS``.
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_N = 2**62
MAX_MODULUS = 2**31

_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % d for d in range(2, int(p**0.5) + 1))]


@dataclass(frozen=True)
class Factorization:
    """Prime factorization ``n = prod(p**e for p, e in prime_powers)``."""

    n: int
    prime_powers: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.prime_powers:
            if p <= last or e < 1:
                raise DomainError(f"malformed factorization {self.prime_powers!r}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise DomainError(f"factorization {self.prime_powers!r} does not multiply to {self.n}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.prime_powers)


def _check_positive(n, cap=MAX_N):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"expected a positive integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"expected a positive integer, got {n}")
    if n > cap:
        raise DomainError(f"{n} exceeds the supported cap {cap}")
    return n


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:12]:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _factor_into(n: int, out: dict):
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return
    if n < 1_000_000 or is_prime(n):
        # no factor below 1000 and n < 10**6 means n is prime
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _factor_into(d, out)
    _factor_into(n // d, out)


@lru_cache(maxsize=1 << 16)
def factorize(n: int) -> Factorization:
    n = _check_positive(n)
    out: dict[int, int] = {}
    _factor_into(n, out)
    return Factorization(n, tuple(sorted(out.items())))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f.prime_powers):
        return 0
    return -1 if len(f.prime_powers) % 2 else 1


def tau(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n).prime_powers)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n).prime_powers)


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).prime_powers:
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def eta(nu: complex, n: int) -> complex:
    """Generalized divisor function ``sum_{ad=n} (a/d)**nu``.

    Evaluated prime by prime: the local factor at ``p**e`` is
    ``sum_{j=0..e} p**(nu*(2j-e))``.
    """
    result = complex(1.0)
    for p, e in factorize(n).prime_powers:
        lp = math.log(p)
        result *= sum(cmath.exp(nu * (2 * j - e) * lp) for j in range(e + 1))
    return result


def eta_real(t: float, n: int) -> float:
    """``eta(i*t, n)``, which is real: a sum of cosines."""
    result = 1.0
    for p, e in factorize(n).prime_powers:
        lp = math.log(p)
        result *= sum(math.cos(t * (2 * j - e) * lp) for j in range(e + 1))
    return result


# --- sieves -----------------------------------------------------------------

def mobius_sieve(limit: int) -> np.ndarray:
    """``mu[k]`` for ``0 <= k <= limit`` (``mu[0]`` is set to 0)."""
    mu = np.ones(limit + 1, dtype=np.int64)
    mu[0] = 0
    is_comp = np.zeros(limit + 1, dtype=bool)
    for p in range(2, limit + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
    return mu


def tau_sieve(limit: int) -> np.ndarray:
    """Divisor counts ``tau[k]`` for ``0 <= k <= limit`` (``tau[0] = 0``)."""
    t = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        t[d::d] += 1
    return t


def eta_sieve(t: float, limit: int) -> np.ndarray:
    """``eta(i*t, k)`` for ``0 <= k <= limit`` via the Dirichlet convolution
    of ``k**(it)`` with ``k**(-it)`` (``eta[0] = 0``)."""
    out = np.zeros(limit + 1)
    if limit < 1:
        return out
    logs = np.log(np.arange(1, limit + 1, dtype=float))
    for a in range(1, limit + 1):
        ds = np.arange(1, limit // a + 1)
        out[a * ds] += np.cos(t * (logs[a - 1] - logs[ds - 1]))
    return out


# --- Kloosterman sums ---------------------------------------------------------

def _modpow_vec(x: np.ndarray, e: int, m: int) -> np.ndarray:
    result = np.ones_like(x)
    base = x % m
    while e:
        if e & 1:
            result = result * base % m
        base = base * base % m
        e >>= 1
    return result


_SMALL_TABLE = 1 << 12


def _units_and_inverses(p: int, e: int):
    # tables for small moduli recur constantly and are cached; large ones are not
    if p**e <= _SMALL_TABLE:
        return _units_and_inverses_cached(p, e)
    return _units_and_inverses_uncached(p, e)


@lru_cache(maxsize=1024)
def _units_and_inverses_cached(p: int, e: int):
    return _units_and_inverses_uncached(p, e)


def _units_and_inverses_uncached(p: int, e: int):
    m = p**e
    x = np.arange(1, m, dtype=np.int64)
    x = x[x % p != 0]
    phi = m - m // p
    xinv = _modpow_vec(x, phi - 1, m)
    x.setflags(write=False)
    xinv.setflags(write=False)
    return x, xinv


def _kloosterman_prime_power(a: int, b: int, p: int, e: int) -> float:
    m = p**e
    x, xinv = _units_and_inverses(p, e)
    phase = (a % m * x + b % m * xinv) % m
    return float(np.cos(2.0 * np.pi * phase / m).sum())


def kloosterman(m: int, n: int, c: int) -> float:
    """Kloosterman sum ``S(m, n; c)``.

    The modulus is split into prime powers by the twisted multiplicativity
    ``S(m, n; c1 c2) = S(m u1, n u1; c1) S(m u2, n u2; c2)`` with
    ``u1 = c2^{-1} mod c1`` and ``u2 = c1^{-1} mod c2``; each prime-power
    sum is a direct summation over units with cached inverse tables.
    """
    m = _check_positive(m)
    n = _check_positive(n)
    c = _check_positive(c, MAX_MODULUS)
    if c == 1:
        return 1.0
    result = 1.0
    for p, e in factorize(c).prime_powers:
        pe = p**e
        rest = c // pe
        u = pow(rest, -1, pe) if pe > 1 else 0
        result *= _kloosterman_prime_power(m * u, n * u, p, e)
    return result


def kloosterman_complex(m: int, n: int, c: int) -> complex:
    """Direct complex summation over ``x mod c`` with ``gcd(x, c) = 1``.

    O(c) Python-level loop; used as the reference path for ``kloosterman``.
    """
    m = _check_positive(m)
    n = _check_positive(n)
    c = _check_positive(c, MAX_MODULUS)
    total = 0j
    for x in range(c):
        if math.gcd(x, c) != 1:
            continue
        xbar = pow(x, -1, c) if c > 1 else 0
        total += cmath.exp(2j * math.pi * ((m * x + n * xbar) % c) / c)
    return total


def kloosterman_residue_table(m: int, k: int) -> np.ndarray:
    """``T[r] = S(m, r; k)`` for every residue ``0 <= r < k``.

    Substituting ``x -> xbar`` gives ``S(m, r; k) = sum_y h(y) e(r y / k)``
    with ``h(y) = e(m ybar / k)`` on the units, so the whole table is one
    length-``k`` FFT.
    """
    k = _check_positive(k, MAX_MODULUS)
    if k == 1:
        return np.ones(1)
    y, ybar = _units_mod(k)
    h = np.zeros(k, dtype=complex)
    h[y] = np.exp(2j * np.pi * ((m % k) * ybar % k) / k)
    return (np.fft.ifft(h) * k).real


def _units_mod(k: int):
    # units mod k and their inverses, assembled prime power by prime power (CRT)
    if k <= _SMALL_TABLE:
        return _units_mod_cached(k)
    return _units_mod_uncached(k)


@lru_cache(maxsize=512)
def _units_mod_cached(k):
    return _units_mod_uncached(k)


def _units_mod_uncached(k):
    r = np.arange(k, dtype=np.int64)
    unit = np.ones(k, dtype=bool)
    for p, _ in factorize(k).prime_powers:
        unit &= r % p != 0
    y = r[unit]
    phi = y.size
    # Euler: y^(phi-1) is the inverse of y
    ybar = _modpow_vec(y, phi - 1, k) if k > 2 else y.copy()
    return y, ybar


def weil_bound(m: int, n: int, c: int) -> float:
    """``tau(c) gcd(m, n, c)**(1/2) c**(1/2)``."""
    return tau(c) * math.sqrt(math.gcd(math.gcd(m, n), c)) * math.sqrt(c)
