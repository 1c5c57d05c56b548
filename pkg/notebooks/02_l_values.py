from importlib.resources import files

import numpy as np

from superpositivity import afe
from superpositivity.afe import SpectralWeight

# ### One form of level 11
#
# The bundled table holds lambda(n) for n <= 3000 of the newform of level 11.
# Validation checks the Hecke relations and Deligne's bound.

table = afe.ingest_coefficients(files("superpositivity") / "data" / "level11.csv")
afe.validate_table(table)
print("level", table.q, "root number", afe.sign(table), "coefficients", table.n_max)
print("lambda(2..6):", np.round(table.values[2:7], 6))

# ### The weight V
#
# |L|^2 is a sum of lambda(m) lambda(n) against V evaluated at mn/q. For
# small y, V is close to its two residues.

w = SpectralWeight()
q = 10**15 + 37
for y in [0.1, 0.01, 0.001]:
    v, err = afe.v_weight_contour(w, 0.05, 0.0, y, q)
    main = afe.two_term_expansion(w, 0.05, 0.0, y, q)
    print(f"y={y:<6} V={v.real:.10f} residues={main:.10f} diff={v.real - main:.2e}")

# ### The central value
#
# An independent series gives L(1/2) directly; the two agree to the
# quadrature tolerance.

res = afe.afe_square(w, table, 0.0, 0.0)
oracle = afe.central_value_oracle(table)
print("|L(1/2)|^2 from V:", res.value, "+-", res.error)
print("series oracle squared:", oracle.value**2)

# ### No zero in the triangle
#
# A coarse grid over 1/2 < beta < 1, |gamma| <= beta - 1/2.

scan = afe.triangle_scan(w, table, 0.125)
print("min |L|^2 on the grid:", round(scan.min_value, 6), "at", scan.argmin, "dips:", scan.dips)
