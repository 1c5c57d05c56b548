"""Write the coefficient table of the level-37 weight-2 newform with root
number -1 (the elliptic curve y^2 + y = x^3 - x, rank one).

a_p = p - #{(x, y) in F_p^2 on the affine curve} for every prime p, including
p = 37 where the reduction is multiplicative; prime powers follow the Hecke
recursion and composite n are filled in multiplicatively.

    python3 scripts/gen_level37.py [N]
"""
import sys
from pathlib import Path

import numpy as np

from superpositivity import arith
from superpositivity.afe import CoefficientTable, write_coefficients

OUT = Path(__file__).resolve().parents[1] / "src" / "superpositivity" / "data"
LEVEL = 37


def affine_ap(p):
    squares = {}
    for y in range(p):
        v = (y * y + y) % p
        squares[v] = squares.get(v, 0) + 1
    return p - sum(squares.get((x**3 - x) % p, 0) for x in range(p))


def fourier_coefficients(n_max):
    a = [0] * (n_max + 1)
    a[1] = 1
    for n in range(2, n_max + 1):
        fac = dict(arith.factorize(n).prime_powers)
        if len(fac) == 1:
            (p, e), = fac.items()
            ap = affine_ap(p) if e == 1 else a[p]
            if e == 1:
                a[n] = ap
            elif p == LEVEL:
                a[n] = a[p] ** e
            else:
                a[n] = a[p] * a[n // p] - p * a[n // (p * p)]
        else:
            out = 1
            for p, e in fac.items():
                out *= a[p**e]
            a[n] = out
    return a


def main(n_max=3000):
    a = fourier_coefficients(n_max)
    assert a[2:8] == [-2, -3, 2, -2, 6, -1], a[2:8]
    assert a[LEVEL] == -1
    table = CoefficientTable.from_fourier(LEVEL, np.array(a[1:], dtype=float))
    write_coefficients(table, OUT / "level37.csv")
    print(f"wrote {table.n_max} coefficients; a_2..a_7 = {a[2:8]}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3000)
