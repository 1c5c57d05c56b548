"""Regenerate the Lanczos coefficients embedded in ``superpositivity.specfun``.

The coefficients c_0..c_{n-1} of

    Gamma(z + 1) = sqrt(2 pi) (z + g + 1/2)^(z + 1/2) exp(-(z + g + 1/2)) A(z),
    A(z) = c_0 + sum_{k >= 1} c_k / (z + k)

are obtained by least squares on the real segment z in [-1/2, 40], with the
reference values of Gamma taken from mpmath at 60 digits.

Usage::

    python scripts/regen_lanczos.py [g] [n]
"""
import sys

import mpmath as mp


def lanczos_coefficients(g, n, samples=400):
    mp.mp.dps = 60
    g = mp.mpf(g)
    zs = [mp.mpf(-0.5) + mp.mpf(40.5) * (1 - mp.cos(mp.pi * j / (samples - 1))) / 2 for j in range(samples)]
    rows, rhs = [], []
    for z in zs:
        t = z + g + mp.mpf(1) / 2
        target = mp.gamma(z + 1) / (mp.sqrt(2 * mp.pi) * t ** (z + mp.mpf(1) / 2) * mp.exp(-t))
        rows.append([mp.mpf(1)] + [1 / (z + k) for k in range(1, n)])
        rhs.append(target)
    A = mp.matrix(rows)
    b = mp.matrix(rhs)
    sol = mp.lu_solve(A.T * A, A.T * b)
    return [sol[i] for i in range(n)]


if __name__ == "__main__":
    g = mp.mpf(sys.argv[1]) if len(sys.argv) > 1 else mp.mpf(607) / 128
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 15
    for c in lanczos_coefficients(g, n):
        print(mp.nstr(c, 20) + ",")
