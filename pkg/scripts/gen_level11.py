"""Write the coefficient table of the level-11 weight-2 newform.

The Fourier coefficients come from the eta product
q prod_n (1 - q^n)^2 (1 - q^{11 n})^2, expanded exactly in integers, and
are cross-checked against point counts on y^2 + y = x^3 - x^2 - 10x - 20,
a_p = p + 1 - #E(F_p) for good primes p.

    python3 scripts/gen_level11.py [N]
"""
import sys
from pathlib import Path

import numpy as np

from superpositivity import arith
from superpositivity.afe import CoefficientTable, write_coefficients

OUT = Path(__file__).resolve().parents[1] / "src" / "superpositivity" / "data"


def eta_product_coefficients(n_max):
    # coefficients of prod (1-q^n)^2 (1-q^{11n})^2 up to q^(n_max-1), object ints
    series = [0] * n_max
    series[0] = 1
    for step, power in ((1, 2), (11, 2)):
        for n in range(step, n_max, step):
            for _ in range(power):
                for k in range(n_max - 1, n - 1, -1):
                    series[k] -= series[k - n]
    return [0] + series  # shift by q: a[n] = series[n-1]


def point_count_ap(p):
    # y^2 + y = x^3 - x^2 - 10x - 20 over F_p
    count = 1
    squares = {}
    for y in range(p):
        v = (y * y + y) % p
        squares[v] = squares.get(v, 0) + 1
    for x in range(p):
        count += squares.get((x**3 - x * x - 10 * x - 20) % p, 0)
    return p + 1 - count


def main(n_max=3000):
    a = eta_product_coefficients(n_max + 1)[: n_max + 1]
    for p in (q for q in range(2, 400) if arith.is_prime(q)):
        if p != 11:
            assert a[p] == point_count_ap(p), p
    assert a[11] == 1
    table = CoefficientTable.from_fourier(11, np.array(a[1:], dtype=float))
    write_coefficients(table, OUT / "level11.csv")
    print(f"wrote {table.n_max} coefficients; a_2..a_7 = {a[2:8]}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3000)
