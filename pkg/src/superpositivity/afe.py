"""Approximate functional equation for |L(1/2 + delta + it, f)|^2.

The weight ``V_{delta,t}(y)`` is the inverse Mellin integral

    (1/2 pi i) int_(sigma) H_t(s)/H_t(delta) zeta_q(1+2s) y^{-s} 2s/(s^2 - delta^2) ds

with ``H_t(s) = G(s+it) G(s-it) Gamma(s+1+it) Gamma(s+1-it)`` and the even
polynomial ``G(s) = a0 prod_{k<=N} (s^2 - k^2)``, ``G(0) = 1``.  Two
evaluation routes exist: :func:`v_weight` runs the adaptive Gauss-Kronrod
integrator on one ``y``; :class:`VWeightKernel` applies the trapezoidal
rule on a fixed grid, which is spectrally accurate for this analytic,
exponentially decaying integrand and evaluates many ``y`` at once.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import arith
from .errors import AccuracyError, DomainError, IncompleteDataError, PoleError, ValidationError
from .quadrature import QuadratureSpec, integrate_vertical_line
from .specfun import log_gamma, zeta, zeta_q

FOUR_PI_SQ = 4.0 * math.pi**2
DEFAULT_SIGMA = 3.0


@dataclass(frozen=True)
class SpectralWeight:
    """Half-degree ``N`` of G and the empirical growth constants of H_t.

    ``growth_exponent_B`` and ``growth_constant_C`` are ``None`` until
    :meth:`fit_growth` has been run.
    """

    N: int = 5
    growth_exponent_B: float | None = None
    growth_constant_C: float | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")

    @property
    def a0(self) -> float:
        return (-1) ** self.N / math.factorial(self.N) ** 2

    def G(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.full(s.shape, self.a0, dtype=complex)
        s2 = s * s
        for k in range(1, self.N + 1):
            out = out * (s2 - k * k)
        return out[()] if out.ndim == 0 else out

    def log_abs_h_ratio_envelope(self, sigma, t, heights):
        """``log|H_t(sigma+iy)|`` on an array of heights ``y`` (no underflow)."""
        s = sigma + 1j * np.asarray(heights, dtype=float)
        with np.errstate(divide="ignore"):
            return (np.log(np.abs(self.G(s + 1j * t))) + np.log(np.abs(self.G(s - 1j * t)))
                    + log_gamma(s + 1 + 1j * t).real + log_gamma(s + 1 - 1j * t).real)

    def fit_growth(self, sigma: float = DEFAULT_SIGMA, delta: float = 0.0,
                   ts=(0.0, 0.5, 1.0, 2.0, 4.0), heights=None) -> "SpectralWeight":
        """Fit ``|H_t(s)/H_t(delta)| <= C (1+|t|+|Im s|)^B e^{-pi(|Im s|-|t|)}``
        on the line ``Re(s) = sigma``.

        ``B`` is the least-squares slope of the log-envelope for
        ``|Im s| >= 10``; ``C`` is then the smallest constant that makes the
        bound hold at every sample.  Both are empirical.
        """
        if heights is None:
            heights = np.linspace(0.0, 80.0, 321)
        heights = np.asarray(heights, dtype=float)
        xs, envs = [], []
        for t in ts:
            base = float(self.log_abs_h_ratio_envelope(delta, t, [0.0])[0])
            env = self.log_abs_h_ratio_envelope(sigma, t, heights) - base
            envs.append(env + math.pi * np.maximum(heights - abs(t), 0.0))
            xs.append(np.log1p(abs(t) + heights))
        x = np.concatenate(xs)
        env = np.concatenate(envs)
        ok = np.isfinite(env)
        x, env = x[ok], env[ok]
        far = x >= math.log(11.0)
        B = float(np.polyfit(x[far], env[far], 1)[0])
        logC = float(np.max(env - B * x))
        return SpectralWeight(self.N, B, math.exp(logC))


def h_t(weight: SpectralWeight, s, t: float):
    """``H_t(s) = G(s+it) G(s-it) Gamma(s+1+it) Gamma(s+1-it)``."""
    s = np.asarray(s, dtype=complex)
    return (weight.G(s + 1j * t) * weight.G(s - 1j * t)
            * np.exp(log_gamma(s + 1 + 1j * t) + log_gamma(s + 1 - 1j * t)))


def h_ratio(weight: SpectralWeight, s, t: float, delta: float):
    """``H_t(s) / H_t(delta)`` computed through log-Gamma differences."""
    s = np.asarray(s, dtype=complex)
    num_g = weight.G(s + 1j * t) * weight.G(s - 1j * t)
    den_g = weight.G(delta + 1j * t) * weight.G(delta - 1j * t)
    if den_g == 0:
        raise PoleError(f"H_t(delta) vanishes at delta={delta}, t={t}")
    lg = (log_gamma(s + 1 + 1j * t) + log_gamma(s + 1 - 1j * t)
          - log_gamma(delta + 1 + 1j * t) - log_gamma(delta + 1 - 1j * t))
    return num_g / den_g * np.exp(lg)


def _contour_kernel(weight, delta, t, q, s, zeta_vals=None):
    # everything in the V integrand except y^{-s}
    if zeta_vals is None:
        zq = zeta_q(1.0 + 2.0 * s, q)
    else:
        zq = zeta_vals * (1.0 - np.exp(-(1.0 + 2.0 * s) * math.log(q)))
    return h_ratio(weight, s, t, delta) * zq * 2.0 * s / ((s - delta) * (s + delta))


_ZETA_LINE: dict = {}


def _zeta_on_grid(sigma, h, count):
    """``zeta(1 + 2(sigma + i h j))`` for ``0 <= j < count``, cached per (sigma, h).

    This factor does not depend on (delta, t, q), so scans reuse it."""
    key = (float(sigma), float(h))
    vals = _ZETA_LINE.get(key)
    if vals is None or vals.size < count:
        n = max(count, 2 * (0 if vals is None else vals.size), 256)
        vals = zeta(1.0 + 2.0 * (sigma + 1j * h * np.arange(n)))
        vals.setflags(write=False)
        if len(_ZETA_LINE) > 256:
            _ZETA_LINE.clear()
        _ZETA_LINE[key] = vals
    return vals[:count]


def _truncation_height(weight, delta, t, q, sigma, log_floor):
    """Smallest height past which ``|integrand| * y^sigma < exp(log_floor)``."""
    heights = np.arange(0.0, 400.0 + abs(t), 0.25)
    env = (weight.log_abs_h_ratio_envelope(sigma, t, heights)
           - weight.log_abs_h_ratio_envelope(delta, t, [0.0])[0])
    # |zeta_q(1+2s)| <= zeta(1+2 sigma) (1 + q^{-1-2 sigma});  |2s/(s^2-delta^2)| <= 2|s|/(|s|^2-delta^2)
    absz = np.abs(sigma + 1j * heights)
    env = env + math.log(_zeta_real(1.0 + 2.0 * sigma) * 2.0) + np.log(2.0 * absz / (absz**2 - delta**2))
    above = np.nonzero(env > log_floor)[0]
    if above.size == 0:
        return 1.0
    last = above[-1]
    if last == heights.size - 1:
        raise AccuracyError("contour integrand does not decay within the scanned height")
    return float(heights[last] + 1.0)


@lru_cache(maxsize=64)
def _zeta_real(x):
    # zeta on the real axis x > 1, used only for envelopes
    return float(np.real(zeta_q(x, 10**18)))


_SIGMA_CANDIDATES = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0)


@lru_cache(maxsize=256)
def _log_l1_norms(weight, delta, t, q):
    """``log int |kernel(sigma + ix)| dx`` for each candidate contour."""
    heights = np.arange(0.0, 120.0 + abs(t), 0.1)
    out = []
    for c in _SIGMA_CANDIDATES:
        sigma = c if c > abs(delta) + 0.2 else abs(delta) + c
        s = sigma + 1j * heights
        zv = _zeta_on_grid(sigma, 0.1, heights.size)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            mag = np.abs(_contour_kernel(weight, delta, t, q, s, zv))
        mag = np.where(np.isfinite(mag), mag, 0.0)
        out.append((sigma, math.log(2.0 * 0.1 * mag.sum() + 1e-300)))
    return tuple(out)


def choose_sigma(weight: SpectralWeight, delta: float, t: float, q: int, y) -> np.ndarray:
    """Contour abscissa minimizing ``y^-sigma int |kernel|``, which bounds the
    cancellation (hence the round-off) in the contour integral."""
    table = _log_l1_norms(weight, float(delta), float(t), int(q))
    sig = np.array([a for a, _ in table])
    logA = np.array([b for _, b in table])
    y = np.atleast_1d(np.asarray(y, dtype=float))
    cost = logA[None, :] - np.log(y)[:, None] * sig[None, :]
    return sig[np.argmin(cost, axis=1)]


def v_weight_contour(weight: SpectralWeight, delta: float, t: float, y: float, q: int,
                     spec: QuadratureSpec = QuadratureSpec(), sigma: float | None = None):
    """The complex contour value of ``V_{delta,t}(y)`` with its error estimate.

    The imaginary part is zero in exact arithmetic; its size measures the
    numerical noise.
    """
    if not y > 0:
        raise DomainError("y must be positive")
    if sigma is None:
        sigma = float(choose_sigma(weight, delta, t, q, y)[0])
    if not sigma > abs(delta):
        raise DomainError("the contour must pass to the right of both poles at +-delta")
    log_floor = math.log(spec.abs_tol / 100.0) + sigma * math.log(y)
    T = _truncation_height(weight, delta, t, q, sigma, log_floor)
    logy = math.log(y)

    def f(s):
        return _contour_kernel(weight, delta, t, q, s) * np.exp(-s * logy)

    res = integrate_vertical_line(f, sigma, T, spec, breakpoints=(-abs(t), abs(t)))
    value = res.value / (2j * math.pi)
    return value, res.error / (2 * math.pi)


def v_weight(weight: SpectralWeight, delta: float, t: float, y: float, q: int,
             spec: QuadratureSpec = QuadratureSpec(), sigma: float | None = None) -> float:
    """``V_{delta,t}(y)`` by adaptive quadrature on the line ``Re(s) = sigma``.

    The integral does not depend on ``sigma > |delta|``; by default the
    line is placed by :func:`choose_sigma`.
    """
    value, _ = v_weight_contour(weight, delta, t, y, q, spec, sigma)
    return float(value.real)


def two_term_expansion(weight: SpectralWeight, delta: float, t: float, y, q: int):
    """Residues of the V integrand at ``s = +-delta``:
    ``zeta_q(1+2 delta) y^-delta + H_t(-delta)/H_t(delta) zeta_q(1-2 delta) y^delta``."""
    if delta == 0:
        raise PoleError("the two residues merge at delta = 0")
    y = np.asarray(y, dtype=float)
    ratio = complex(h_ratio(weight, -delta, t, delta)).real
    zp = complex(zeta_q(1 + 2 * delta, q)).real
    zm = complex(zeta_q(1 - 2 * delta, q)).real
    return zp * y ** (-delta) + ratio * zm * y**delta


class VWeightKernel:
    """Trapezoidal evaluation of ``V_{delta,t}`` at many ``y`` for fixed
    ``(delta, t, q)``.

    The integrand is conjugate-symmetric in ``Im s``, so only the upper half
    of the line is sampled.  The step is ``h`` and is compared with ``2h``
    for the error estimate.
    """

    def __init__(self, weight: SpectralWeight, delta: float, t: float, q: int,
                 sigma: float = DEFAULT_SIGMA, abs_tol: float = 1e-12, h: float | None = None):
        if not sigma > abs(delta):
            raise DomainError("the contour must pass to the right of both poles at +-delta")
        self.weight, self.delta, self.t, self.q, self.sigma = weight, delta, t, q, sigma
        width = sigma - abs(delta)
        # trapezoid error ~ exp(-2 pi width / h) for an integrand analytic in the strip
        self.h = h or min(0.1, width / 25.0)
        self.height = _truncation_height(weight, delta, t, q, sigma, math.log(abs_tol / 100.0))
        n = int(math.ceil(self.height / self.h))
        x = self.h * np.arange(n + 1)
        s = sigma + 1j * x
        g = _contour_kernel(weight, delta, t, q, s, _zeta_on_grid(sigma, self.h, n + 1))
        w = np.full(n + 1, self.h / math.pi)
        w[0] *= 0.5
        self._s = s
        self._gw = g * w
        self._abs_gw = np.abs(self._gw)

    def evaluate(self, y, with_error=False, chunk=4096):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y <= 0):
            raise DomainError("y must be positive")
        out = np.empty(y.size)
        err = np.empty(y.size)
        logy = np.log(y)
        for start in range(0, y.size, chunk):
            ly = logy[start:start + chunk]
            phase = np.exp(-np.outer(ly, self._s))
            full = (phase @ self._gw).real
            # the same rule with step 2h (the half weight at x = 0 doubles correctly)
            coarse = 2.0 * (phase[:, ::2] @ self._gw[::2]).real
            out[start:start + chunk] = full
            floor = 64 * np.finfo(float).eps * np.exp(-self.sigma * ly) * self._abs_gw.sum()
            err[start:start + chunk] = np.abs(full - coarse) + floor
        if with_error:
            return out, err
        return out

    __call__ = evaluate


def v_weight_batch(weight: SpectralWeight, delta: float, t: float, q: int, y,
                   abs_tol: float = 1e-12, sigma: float | None = None):
    """``(V(y), error)`` for an array of ``y`` through :class:`VWeightKernel`,
    one kernel per contour chosen by :func:`choose_sigma` unless ``sigma`` is fixed."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    sig = np.full(y.size, float(sigma)) if sigma is not None else choose_sigma(weight, delta, t, q, y)
    V = np.empty(y.size)
    err = np.empty(y.size)
    for value in np.unique(sig):
        mask = sig == value
        kern = VWeightKernel(weight, delta, t, q, sigma=float(value), abs_tol=abs_tol)
        V[mask], err[mask] = kern(y[mask], with_error=True)
    return V, err


# --- coefficient tables --------------------------------------------------------

@dataclass(frozen=True)
class CoefficientTable:
    """Normalized Hecke eigenvalues ``lambda_f(n)``, ``1 <= n <= n_max``.

    ``values[n]`` holds ``lambda_f(n)``; ``values[0]`` is unused.
    """

    q: int
    values: np.ndarray
    weight: int = 2

    @property
    def n_max(self) -> int:
        return int(self.values.size - 1)

    def lam(self, n: int) -> float:
        if n < 1 or n > self.n_max:
            raise IncompleteDataError(f"lambda({n}) is not in the table (n_max={self.n_max})", required=n)
        return float(self.values[n])

    @classmethod
    def from_sequence(cls, q, lambdas, weight=2, validate=True):
        values = np.concatenate([[0.0], np.asarray(lambdas, dtype=float)])
        table = cls(int(q), values, int(weight))
        if validate:
            validate_table(table)
        return table

    @classmethod
    def from_fourier(cls, q, a, weight=2, validate=True):
        """From integer Fourier coefficients ``a(n)``: ``lambda(n) = a(n)/sqrt(n)``."""
        a = np.asarray(a, dtype=float)
        n = np.arange(1, a.size + 1)
        return cls.from_sequence(q, a / np.sqrt(n), weight, validate)


def hecke_residual(table: CoefficientTable, m: int, n: int) -> float:
    """``lambda(m) lambda(n) - sum_{d | (m,n), q ∤ d} lambda(mn/d^2)``."""
    rhs = 0.0
    for d in arith.divisors(math.gcd(m, n)):
        if d % table.q:
            rhs += table.lam(m * n // (d * d))
    return table.lam(m) * table.lam(n) - rhs


def validate_table(table: CoefficientTable, pairs: int = 100, seed: int = 0, tol: float = 1e-8):
    if not arith.is_prime(table.q):
        raise ValidationError(f"level {table.q} is not prime")
    if table.weight != 2:
        raise ValidationError("only weight 2 is supported")
    if table.n_max < 1:
        raise ValidationError("empty coefficient table")
    if abs(table.values[1] - 1.0) > tol:
        raise ValidationError(f"lambda(1) = {table.values[1]!r}, expected 1")
    taus = arith.tau_sieve(table.n_max)
    over = np.nonzero(np.abs(table.values[1:]) > taus[1:] * (1 + tol) + tol)[0]
    if over.size:
        n = int(over[0] + 1)
        raise ValidationError(f"|lambda({n})| = {abs(table.values[n]):.6g} exceeds tau({n}) = {taus[n]}")
    checks = [(m, n) for m in range(2, 11) for n in range(m, 11) if m * n <= table.n_max]
    rng = np.random.default_rng(seed)
    limit = int(math.isqrt(table.n_max)) if table.n_max >= 4 else 1
    if limit >= 2:
        for _ in range(pairs):
            m = int(rng.integers(2, limit + 1))
            n = int(rng.integers(2, table.n_max // m + 1))
            checks.append((m, n))
    for m, n in checks:
        r = hecke_residual(table, m, n)
        if abs(r) > tol:
            raise ValidationError(f"Hecke relation fails for (m, n) = ({m}, {n}): residual {r:.3e}")
    return table


_HEADER = re.compile(r"#\s*q=(\d+)\s+weight=(\d+)\s+normalization=unit-first-coefficient\s*$")


def _significant_digits(token: str) -> int:
    mantissa = re.split(r"[eE]", token.strip())[0].lstrip("+-")
    digits = mantissa.replace(".", "").lstrip("0")
    return len(digits) if digits else len(mantissa.replace(".", ""))


def ingest_coefficients(path, format: str | None = None) -> CoefficientTable:
    """Read a coefficient file (text or JSON mirror) and validate it."""
    path = Path(path)
    fmt = format or ("json" if path.suffix.lower() == ".json" else "text")
    if fmt == "json":
        data = json.loads(path.read_text(encoding="utf-8"))
        try:
            q, weight, lam = int(data["q"]), int(data["weight"]), data["lambda"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed JSON coefficient file: {exc}") from exc
        return CoefficientTable.from_sequence(q, lam, weight)
    if fmt != "text":
        raise DomainError(f"unknown coefficient format {fmt!r}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValidationError("empty coefficient file")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise ValidationError(f"bad header line {lines[0]!r}")
    q, weight = int(m.group(1)), int(m.group(2))
    lam = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected '<n>,<lambda_n>'")
        try:
            n = int(parts[0])
            value = float(parts[1])
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        if n != len(lam) + 1:
            raise ValidationError(f"line {lineno}: index {n} breaks contiguity (expected {len(lam) + 1})")
        if _significant_digits(parts[1]) < 12:
            raise ValidationError(f"line {lineno}: lambda needs at least 12 significant digits")
        lam.append(value)
    return CoefficientTable.from_sequence(q, lam, weight)


def write_coefficients(table: CoefficientTable, path, format: str | None = None):
    path = Path(path)
    fmt = format or ("json" if path.suffix.lower() == ".json" else "text")
    if fmt == "json":
        path.write_text(json.dumps({"q": table.q, "weight": table.weight,
                                    "lambda": [float(v) for v in table.values[1:]]}), encoding="utf-8")
        return
    rows = [f"# q={table.q} weight={table.weight} normalization=unit-first-coefficient"]
    rows += [f"{n},{table.values[n]:.16e}" for n in range(1, table.n_max + 1)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def sign(coeffs: CoefficientTable) -> int:
    """Root number ``q**(1/2) lambda(q)``, rounded to +-1."""
    raw = math.sqrt(coeffs.q) * coeffs.lam(coeffs.q)
    if not 0.99 <= abs(raw) <= 1.01:
        raise ValidationError(f"q^(1/2) lambda(q) = {raw:.6g} is not within 1% of +-1")
    return 1 if raw > 0 else -1


# --- |L|^2 ---------------------------------------------------------------------

class AfeResult(NamedTuple):
    value: float
    error: float
    n_terms: int


def _tail_cutoff(kernel: VWeightKernel, q: int, abs_tol: float, y_start: float):
    """Smallest ``n`` beyond which the AFE tail is estimated below ``abs_tol``.

    ``|lambda(n) eta(n)| <= tau(n)^2`` and the tail is integrated against a
    geometric grid of V samples out to where it is negligible.
    """
    ys = y_start * 1.05 ** np.arange(0, 600)
    vals = np.abs(kernel(ys))
    n_of_y = ys * q / FOUR_PI_SQ
    logn = np.log(np.maximum(n_of_y, 2.0))
    # tau(n)^2 on average ~ log(n)^3 / pi^2; the maximal order is kept in check
    # by using (log n)^4
    density = q / FOUR_PI_SQ * logn**4 / np.sqrt(np.maximum(n_of_y, 1.0))
    dy = ys * 0.05
    contrib = vals * density * dy
    tail = np.cumsum(contrib[::-1])[::-1]
    ok = np.nonzero(tail < abs_tol)[0]
    if ok.size == 0 or vals[-1] > abs_tol * 1e-3:
        raise AccuracyError("V does not decay within the scanned range")
    y_cut = ys[ok[0]]
    return int(math.ceil(y_cut * q / FOUR_PI_SQ)), float(tail[ok[0]])


def afe_terms_needed(weight: SpectralWeight, q: int, delta: float, t: float,
                     spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8)) -> int:
    kernel = VWeightKernel(weight, delta, t, q, abs_tol=spec.abs_tol * 1e-3)
    return _tail_cutoff(kernel, q, spec.abs_tol / 10.0, FOUR_PI_SQ / q)[0]


def afe_square(weight: SpectralWeight, coeffs: CoefficientTable, delta: float, t: float,
               spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8), sigma: float | None = None,
               n_terms: int | None = None) -> AfeResult:
    """``|L(1/2 + delta + it, f)|^2`` from the approximate functional equation.

    The sum over ``n`` stops where the estimated tail falls below
    ``abs_tol/10``.  ``sigma`` fixes the contour of every V evaluation;
    by default each ``y`` gets the contour from :func:`choose_sigma`.
    """
    q = coeffs.q
    kern_tol = spec.abs_tol * 1e-3
    tail = 0.0
    if n_terms is None:
        probe = VWeightKernel(weight, delta, t, q, sigma=DEFAULT_SIGMA if sigma is None else sigma,
                              abs_tol=kern_tol)
        n_terms, tail = _tail_cutoff(probe, q, spec.abs_tol / 10.0, FOUR_PI_SQ / q)
    if n_terms > coeffs.n_max:
        raise IncompleteDataError(
            f"afe_square needs lambda(n) up to n = {n_terms}; the table stops at {coeffs.n_max}",
            required=n_terms)
    n = np.arange(1, n_terms + 1)
    V, Verr = v_weight_batch(weight, delta, t, q, FOUR_PI_SQ * n / q, kern_tol, sigma)
    eta_vals = arith.eta_sieve(t, n_terms)[1:]
    coef = coeffs.values[1:n_terms + 1] * eta_vals / np.sqrt(n)
    pref = (q / FOUR_PI_SQ) ** (-delta)
    terms = coef * V
    value = pref * math.fsum(terms)
    error = pref * (float(np.sum(np.abs(coef) * Verr)) + tail
                    + 16 * np.finfo(float).eps * float(np.sum(np.abs(terms))))
    return AfeResult(value, error, n_terms)


class SeriesValue(NamedTuple):
    value: float
    error: float


def central_value_oracle(coeffs: CoefficientTable) -> SeriesValue:
    """``L(1/2, f) = (1 + eps) sum_n lambda(n) n^(-1/2) exp(-2 pi n / sqrt q)``.

    Independent of the V weights: this is the exponentially convergent series
    from the Mellin integral of ``f(iy)`` split at ``y = 1/sqrt q``.  The
    error bounds the omitted terms through ``|lambda(n)| <= tau(n) <= 2 sqrt n``.
    """
    q = coeffs.q
    eps = sign(coeffs)
    rate = 2.0 * math.pi / math.sqrt(q)
    n_stop = min(coeffs.n_max, int(math.ceil(45.0 / rate)))
    n = np.arange(1, n_stop + 1, dtype=float)
    terms = coeffs.values[1:n_stop + 1] / np.sqrt(n) * np.exp(-rate * n)
    tail = 2.0 * math.exp(-rate * (n_stop + 1)) / -math.expm1(-rate)
    value = (1 + eps) * math.fsum(terms)
    return SeriesValue(value, abs(1 + eps) * tail + 8 * np.finfo(float).eps * float(np.sum(np.abs(terms))))


# --- triangle scan ---------------------------------------------------------------

@dataclass
class ScanReport:
    """Grid scan of ``|L(beta + i gamma)|^2`` over the triangle
    ``1/2 < beta < 1, |gamma| <= beta - 1/2``.  Numerical evidence only."""

    min_value: float
    argmin: tuple[float, float]
    dips: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    max_error: float = 0.0
    evidence_only: bool = True

    def to_dict(self):
        return {
            "min_value": float(self.min_value),
            "argmin": list(self.argmin),
            "dips": [[float(x) for x in d] for d in self.dips],
            "n_nodes": len(self.nodes),
            "max_error": float(self.max_error),
            "evidence_only": self.evidence_only,
        }


def triangle_nodes(grid_step: float):
    """Grid nodes ``(beta, gamma)`` with ``gamma >= 0`` (the scan is symmetric
    in ``gamma`` for real coefficients).  The corner ``beta = 1/2`` is excluded."""
    if not grid_step > 0:
        raise DomainError("grid_step must be positive")
    kmax = int(math.floor(0.5 / grid_step + 1e-9))
    if kmax == 0:
        return [(1.0, 0.0)]
    nodes = []
    for k in range(1, kmax + 1):
        beta = 0.5 + k * grid_step
        for j in range(0, k + 1):
            nodes.append((beta, j * grid_step))
    return nodes


def triangle_scan(weight: SpectralWeight, coeffs: CoefficientTable, grid_step: float,
                  spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8), dip_threshold: float = 1e-3) -> ScanReport:
    nodes = triangle_nodes(grid_step)
    values = {}
    index = {}
    max_err = 0.0
    for beta, gamma in nodes:
        res = afe_square(weight, coeffs, beta - 0.5, gamma, spec)
        values[(beta, gamma)] = res.value
        index[(round((beta - 0.5) / grid_step), round(gamma / grid_step))] = res.value
        max_err = max(max_err, res.error)
    argmin = min(nodes, key=lambda node: (values[node], node))
    dips = []
    for (beta, gamma), v in values.items():
        if v >= dip_threshold:
            continue
        k, j = round((beta - 0.5) / grid_step), round(gamma / grid_step)
        neigh = [index.get((k + dk, j + dj)) for dk in (-1, 0, 1) for dj in (-1, 0, 1) if dk or dj]
        if all(nv is None or v <= nv for nv in neigh):
            dips.append((beta, gamma, v))
    return ScanReport(min_value=values[argmin], argmin=argmin, dips=sorted(dips),
                      nodes=[(b, g, values[(b, g)]) for b, g in nodes], max_error=max_err)
