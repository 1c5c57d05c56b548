from superpositivity import moments
from superpositivity.moments import MomentRequest

# ### Petersson sums
#
# Harmonic averages of lambda(m) lambda(n) over the forms of level q. The
# Kloosterman terms shrink like q^(-3/2), so small levels sit visibly off
# the diagonal value.

for q in [101, 199, 499]:
    d = moments.petersson_delta(1, 1, q)
    o = moments.petersson_delta(1, 2, q)
    print(f"q={q}: Delta(1,1)={d.value:.6f}  Delta(1,2)={o.value:+.6f}  tail<={d.tail_bound:.2e}")

# ### The twisted second moment
#
# The main term is evaluated in closed form; the numeric moment runs the
# full trace formula, so this takes a few seconds.

req = MomentRequest(199, 1, 0.05, 0.0)
num = moments.twisted_second_moment_numeric(req)
main = moments.twisted_second_moment_mainterm(req)
print(f"q=199: numeric={num.value:.6f} main={main:.6f} residual={num.value - main:.4f}")

# ### The eta-square Dirichlet series
#
# Closed form against a truncated, extrapolated series.

nu, l1, l2, s = 0.1 + 0.3j, 6, 5, 2.5
closed = moments.dirichlet_eta_square(nu, l1, l2, s)
series = moments.dirichlet_eta_square_series(nu, l1, l2, s)
print("closed:", closed)
print("series:", series.value, "diff:", abs(closed - series.value))
