import numpy as np

from superpositivity import zerodensity as zd

# ### The main-term surface
#
# Every bound below is an integral of log V(u, v) over the edges of a box,
# with u and v measured in units of 1/log q. V is at least 1 everywhere
# and decays back to 1 as u grows.

p = zd.SurfaceParams(0.48)
u = np.linspace(-5, 30, 8)
print("V(u, 1) for upsilon = 0.48:")
print(np.round(zd.v_surface(p, u, 1.0), 6))
print("limit at the origin:", zd.v_surface(p, 0.0, 0.0))

# ### Zeros off the line near the centre
#
# With upsilon = 0.48 and R = 7 the central box holds at most about half
# of the forms with a zero, so at least 49% have none.

rep = zd.realzero_proportion(p, 7.0)
print(rep.to_table())

# ### The region ladder
#
# Boxes j = 1, 2, ... widen away from the centre. Their bounds fall off
# quickly and the tail beyond j = 20 is closed by a majorant.

cfg = zd.LadderConfig.standard()
for j in range(1, 6):
    b = zd.ladder_bound(cfg, j)
    print(f"box {j}: {b.bound:.6f} +- {b.err:.1e}")
print("tail from box 21:", zd.tail_bound(cfg, 21))

rep = zd.superpositivity_proportion(cfg)
print("total:", round(rep.total, 6), "proportion:", round(rep.proportion, 6))

# ### Searching (upsilon, R)
#
# A coarse grid then a simplex polish. Larger upsilon helps the central
# box but past 0.65 the trivial tail bound no longer holds.

best = zd.optimize("realzero", box=((0.44, 0.52), (6.0, 8.0)), budget=20)
print(f"realzero: upsilon={best.upsilon:.4f} R={best.R:.4f} value={best.value:.6f}")
