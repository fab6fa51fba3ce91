"""Growth envelopes, class G, and which Liouville hypotheses a weight satisfies.

Run with ``python demos/growth_and_hypotheses.py``.
"""
# %% Class G: log grows slowly enough, log^2 does not
from anisolab.weights import (double_well_condition, from_advection, gclass_check, growth_scan,
                              nonlinearity, sign_condition)

for g in ("1", "log(1+r)", "log(1+r)^2"):
    v = gclass_check(g, 1e8)
    print(f"{g:12s} {v.status:12s} tail slope {v.tail_slope:.4f}")

# %% Advection a = 2x/(1+x^2) gives gamma = 1/(1+x^2), whose integral stays below pi
w = from_advection(["2*x1/(1+x1^2)"])
scan = growth_scan(w, "1", "g", radii=(1, 10, 100, 1000))
print("int gamma over [-R, R]:", [round(v, 6) for v in scan.values], scan.verdict)

# %% Constant advection does not: gamma = exp(-x1) grows exponentially on the left
w = from_advection(["1"])
print("constant a:", growth_scan(w, "1", "g", radii=(1, 2, 5, 10, 20)).verdict)

# %% Allen-Cahn fails the sign condition but is a double well
f = nonlinearity("allen-cahn")
print(sign_condition(f).kind, double_well_condition(f)["holds"])
