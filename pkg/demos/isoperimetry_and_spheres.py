"""Isoperimetric ratios of simple shapes, then Poincare ratios on spheres.

Balls attain the isoperimetric constant in every dimension; cubes fall
short by a dimension-dependent factor. On S^3, restricting the gradient to
the complex-tangential directions can only shrink it, so the Poincare ratio
for that gradient is at least the tangential one.
"""

from metineq.euclid import ShapeSpec, SphereFunction, isoperimetric_check, sphere_poincare_ratio

for n in range(2, 7):
    ball = isoperimetric_check(ShapeSpec.ball(n, 1.0))
    cube = isoperimetric_check(ShapeSpec.cube(n, 1.0))
    print(f"n={n}: ball {ball:.15f}  cube {cube:.6f}")

print()
for name, f in [("w1", SphereFunction.coordinate(4, 0)), ("w1*w2", SphereFunction.product(4, 0, 1))]:
    t = sphere_poincare_ratio(f, "tangential", N=100_000, seed=1)
    c = sphere_poincare_ratio(f, "cr", N=100_000, seed=1)
    print(f"S^3, f = {name}: tangential {t.ratio:.4f} +- {t.stderr:.4f}, CR {c.ratio:.4f} +- {c.stderr:.4f}")
