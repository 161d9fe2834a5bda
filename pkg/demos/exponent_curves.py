"""Error exponents for coherent-state codes at unit energy.

Two lower bounds on the reliability function are tabulated:

* the random-coding exponent, best at high rates;
* the expurgated exponent, best at low rates.

Between ln g(E) and the slope at s = 1 the expurgated bound is a straight
line.  Both bounds reach zero at the capacity.
"""

import math

import numpy as np

from cqcap.reliability import capacity_pure, dmu_ds_one, exponent_curve, g

E = 1.0
C = capacity_pure(E)
curve = exponent_curve(E, np.linspace(C / 12, C, 12))
lo, hi = curve.boundaries
print(f"capacity {C:.4f}; expurgated band ends at {lo:.4f}; random-coding band starts at {hi:.4f}")
print(f"{'R':>7} {'E_r':>8} {'E_ex':>8}  regime")
for R, er, ex, regime, _, _ in curve.rows():
    print(f"{R:7.4f} {er:8.4f} {ex:8.4f}  {regime}")
assert math.isclose(lo, math.log(g(E))) and math.isclose(hi, dmu_ds_one(E))
