"""Superlevel sets of the Riesz potential of a finite measure.

For U(x) = sum m_i / (sigma_{n-1} |x - y_i|^{n-1}) the volume of {U >= t}
scales like (M / t)^{n/(n-1)}. For one point mass in the plane the set is a
disc and the normalised ratio is exactly 1 / (4 pi).
"""

import math

import numpy as np

from metineq.euclid import GridSpec, PointMassMeasure, weak_type_ratio

one = PointMassMeasure([[0.0, 0.0]], [1.0])
ts = np.geomspace(0.1, 10, 6)
_, ratios = weak_type_ratio(one, ts, per_t=True)
print(f"single mass, 1/(4 pi) = {1 / (4 * math.pi):.6f}")
for t, r in zip(ts, ratios):
    print(f"  t = {t:7.3f}: {r:.6f}")

rng = np.random.default_rng(0)
print()
print("three random masses: sup over t, coarse grid -> fine grid")
for _ in range(3):
    mu = PointMassMeasure(rng.uniform(-1, 1, (3, 2)), rng.uniform(0.2, 2, 3))
    coarse = weak_type_ratio(mu, ts, GridSpec(cells=401))
    fine = weak_type_ratio(mu, ts, GridSpec(cells=801))
    print(f"  {coarse:.5f} -> {fine:.5f}")
