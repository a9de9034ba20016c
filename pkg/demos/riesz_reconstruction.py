"""Recovering a compactly supported function from its gradient.

In polar coordinates around x the singular kernel cancels the Jacobian and
f(x) is the average over directions w of -int_0^inf grad f(x + r w) . w dr.
The same integral with |grad f| in place of the directional derivative gives
a pointwise upper bound for |f(x)|.
"""

import numpy as np

from metineq.euclid import QuadratureSpec, bump, riesz_reconstruct, riesz_upper_bound

f = bump(2)  # (1 - |y|^2)^2 on the unit disc
for x in [(0.0, 0.0), (0.3, 0.1), (0.7, -0.5)]:
    exact = float(f(np.array(x)))
    print(f"x = {x}: f(x) = {exact:.6f}")
    for levels in (3, 4, 5, 6, 7):
        value, err = riesz_reconstruct(f, x, QuadratureSpec(levels=levels), with_error=True)
        print(f"  levels={levels}: {value:.8f}  |error| {abs(value - exact):.2e}  estimate {err:.2e}")
    print(f"  upper bound: {riesz_upper_bound(f, x):.6f}")
