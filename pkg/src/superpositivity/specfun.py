"""Complex Gamma and zeta functions and the Bessel function J_1.

All functions accept scalars or numpy arrays and broadcast.  Accuracy is
about 13 significant digits on the strips the rest of the package uses;
see the individual docstrings.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, PoleError

# Lanczos approximation, g = 607/128, 15 terms.  Generated by
# scripts/regen_lanczos.py (least squares against mpmath on [-1/2, 40]).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999889645,
    57.156235665862863417,
    -59.597960355463425712,
    14.136097974177128029,
    -0.49191380506978726704,
    0.000033880762912584355332,
    0.000047227468721037229214,
    -0.0001011694780251159021,
    0.000165517411155429831,
    -0.00022374319185977382248,
    0.00023416470678032444032,
    -0.00017825770509781358432,
    0.000091864351296998449471,
    -0.000028488050696267289041,
    4.0001297936536854876e-6,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_LOG_2 = math.log(2.0)


def _complex_array(s):
    return np.asarray(s, dtype=complex)


def _unwrap(result, template):
    return result[()] if np.ndim(template) == 0 else result


def _nonpositive_integer(s):
    return (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))


def _log_gamma_right(s):
    # valid for Re(s) >= 1/2
    z = s - 1.0
    acc = np.full_like(z, _LANCZOS_C[0])
    for k in range(1, _LANCZOS_C.size):
        acc = acc + _LANCZOS_C[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def log_sin_pi(s):
    """A logarithm of ``sin(pi s)`` that stays finite for large ``|Im s|``."""
    s = _complex_array(s)
    z = np.pi * s
    flip = z.imag < 0
    z = np.where(flip, np.conj(z), z)
    # sin z = (i/2) e^{-iz} (1 - e^{2iz}); |e^{2iz}| <= 1 for Im z >= 0
    out = -1j * z + np.log1p(-np.exp(2j * z)) + np.log(0.5j)
    return np.where(flip, np.conj(out), out)


def log_gamma(s):
    """A branch of ``log Gamma(s)``.

    The real part is ``log|Gamma(s)|``; the imaginary part is correct modulo
    ``2 pi`` so ``exp(log_gamma(s))`` is exact, but it need not be the
    principal (continuous) branch.  Reflection is used for ``Re(s) < 1/2``.
    """
    s0 = s
    s = _complex_array(s)
    if np.any(_nonpositive_integer(s)):
        raise PoleError("Gamma has poles at the non-positive integers")
    left = s.real < 0.5
    out = np.empty_like(s)
    if np.any(~left):
        out[~left] = _log_gamma_right(s[~left])
    if np.any(left):
        sl = s[left]
        out[left] = _LOG_PI - log_sin_pi(sl) - _log_gamma_right(1.0 - sl)
    return _unwrap(out, s0)


def gamma(s):
    """Complex Gamma function, relative error about 1e-13 for
    ``-10 <= Re(s) <= 30`` and moderate ``|Im s|``."""
    return np.exp(log_gamma(s))


# --- zeta ---------------------------------------------------------------------

_BORWEIN_CACHE: dict[int, np.ndarray] = {}


def _borwein_coefficients(n):
    # e_k = (d_n - d_k)/d_n with d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    coeffs = _BORWEIN_CACHE.get(n)
    if coeffs is None:
        i = np.arange(n + 1, dtype=float)
        from scipy.special import gammaln  # log-factorials only

        logt = gammaln(n + i) - gammaln(n - i + 1) - gammaln(2 * i + 1) + i * math.log(4.0)
        logt[0] = -math.log(n)  # (n-1)!/n! term
        t = np.exp(logt - logt.max())
        cum = np.cumsum(t)
        coeffs = 1.0 - cum[:-1] / cum[-1]
        _BORWEIN_CACHE[n] = coeffs
    return coeffs


def _borwein_terms(t_abs):
    # terms so that 3(1+2|t|) e^{pi|t|} / (3+sqrt 8)^n < 1e-17
    return int(math.ceil((39.2 + math.log1p(2 * t_abs) + math.pi * t_abs) / 1.7627471740390859)) + 2


def _zeta_borwein(s):
    # Re(s) >= 1/2, s away from the zeros of 1 - 2^{1-s}
    out = np.empty_like(s)
    nterms = np.array([_borwein_terms(abs(v.imag)) for v in s.ravel()]).reshape(s.shape)
    for n in np.unique(nterms):
        mask = nterms == n
        ss = s[mask]
        e = _borwein_coefficients(int(n))
        k = np.arange(int(n), dtype=float)
        signs = np.where(k % 2 == 0, 1.0, -1.0) * e
        logk1 = np.log(k + 1.0)
        acc = np.exp(-np.outer(ss, logk1)) @ signs
        # 1 - 2^(1-s) through expm1: no cancellation near s = 1
        out[mask] = acc / -np.expm1((1.0 - ss) * _LOG_2)
    return out


_BERNOULLI_2J = []


def _bernoulli_even(count):
    if len(_BERNOULLI_2J) < count:
        m = 2 * count + 1
        b = [Fraction(0)] * (m + 1)
        b[0] = Fraction(1)
        for n in range(1, m + 1):
            b[n] = -sum(math.comb(n + 1, k) * b[k] for k in range(n)) / (n + 1)
        _BERNOULLI_2J[:] = [float(b[2 * j] / math.factorial(2 * j)) for j in range(1, count + 1)]
    return _BERNOULLI_2J[:count]


def zeta_euler_maclaurin(s, terms=None, order=20):
    """Riemann zeta by Euler-Maclaurin summation.

    An evaluation path independent of :func:`zeta`; valid for
    ``Re(s) > -2 order + 1``.
    """
    s0 = s
    s = _complex_array(s)
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1")
    flat = s.ravel()
    out = np.empty_like(flat)
    b2j = _bernoulli_even(order)
    for idx, v in enumerate(flat):
        n = terms or int(abs(v) / math.pi) + 2 * order + 10
        k = np.arange(1, n, dtype=float)
        total = np.exp(-v * np.log(k)).sum()
        logn = math.log(n)
        total += np.exp((1 - v) * logn) / (v - 1) + 0.5 * np.exp(-v * logn)
        rising = v
        for j, bj in enumerate(b2j, start=1):
            total += bj * rising * np.exp((-v - 2 * j + 1) * logn)
            rising *= (v + 2 * j - 1) * (v + 2 * j)
        out[idx] = total
    return _unwrap(out.reshape(s.shape), s0)


def zeta(s):
    """Riemann zeta function.

    Borwein's accelerated alternating series for ``Re(s) >= 1/2`` and the
    functional equation to the left of it.  Relative error about 1e-13
    for ``Re(s) >= -2`` and ``|Im s| <= 1000`` away from zeros of zeta.
    """
    s0 = s
    s = _complex_array(s)
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1")
    out = np.empty_like(s)
    right = s.real >= 0.5
    # 1 - 2^{1-s} vanishes on Re(s) = 1 off the real axis
    bad = right & (np.abs(1.0 - np.exp((1.0 - s) * _LOG_2)) < 1e-6)
    good = right & ~bad
    if np.any(good):
        out[good] = _zeta_borwein(s[good])
    if np.any(bad):
        out[bad] = zeta_euler_maclaurin(s[bad])
    left = ~right
    if np.any(left):
        sl = s[left]
        trivial = _nonpositive_integer(sl) & (np.round(sl.real) % 2 == 0) & (sl.real < 0)
        safe = np.where(trivial | (sl == 0), -0.5, sl)
        log_factor = (safe * _LOG_2 + (safe - 1.0) * _LOG_PI
                      + log_sin_pi(safe / 2.0) + log_gamma(1.0 - safe))
        origin = sl == 0
        val = np.exp(log_factor) * _zeta_borwein(1.0 - safe)
        out[left] = np.where(trivial, 0.0, np.where(origin, -0.5, val))
    return _unwrap(out, s0)


def zeta_q(s, q: int):
    """``zeta(s) (1 - q**-s)``, the zeta function with the Euler factor at q removed."""
    return zeta(s) * (1.0 - np.exp(-_complex_array(s) * math.log(q)))


# --- Bessel J_1 ---------------------------------------------------------------

_SERIES_MAX = 8.0
_ASYMPTOTIC_MIN = 25.0


def _j1_series(x):
    half = x / 2.0
    term = half.copy()
    total = term.copy()
    h2 = half * half
    for k in range(1, 60):
        term = -term * h2 / (k * (k + 1))
        total += term
        if np.all(np.abs(term) < 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _j1_miller(x):
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by
    # J_0 + 2 sum_k J_{2k} = 1
    start = 2 * ((int(np.max(x)) + 60) // 2)
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    j1 = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        jp1, jk = jk, jm1
        if k - 1 == 1:
            j1 = jk.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * jk
        big = np.abs(jk) > 1e250
        if np.any(big):
            jk = np.where(big, jk * 1e-250, jk)
            jp1 = np.where(big, jp1 * 1e-250, jp1)
            norm = np.where(big, norm * 1e-250, norm)
            j1 = np.where(big, j1 * 1e-250, j1)
    norm += jk  # J_0
    return j1 / norm


def _j1_asymptotic(x):
    mu = 4.0
    chi = x - 0.75 * np.pi
    p = np.ones_like(x)
    qv = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 2 == 1:
            qv += term * (-1) ** ((k - 1) // 2)
        else:
            p += term * (-1) ** (k // 2)
        if np.all(np.abs(term) < 1e-17):
            break
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - qv * np.sin(chi))


def bessel_j1(x):
    """Bessel function J_1 for real ``x >= 0``, absolute error about 1e-14.

    Power series below 8, Miller's backward recurrence on [8, 25) and the
    Hankel asymptotic expansion from 25 on.
    """
    x0 = x
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("bessel_j1 requires x >= 0")
    out = np.empty_like(x)
    small = x < _SERIES_MAX
    large = x >= _ASYMPTOTIC_MIN
    mid = ~small & ~large
    if np.any(small):
        out[small] = _j1_series(x[small])
    if np.any(mid):
        out[mid] = _j1_miller(x[mid])
    if np.any(large):
        out[large] = _j1_asymptotic(x[large])
    return _unwrap(out, x0)
