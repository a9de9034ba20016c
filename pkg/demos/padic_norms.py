"""p-adic absolute values and operator norms on a graph, in exact arithmetic.

Partial sums (p - 1)(1 + p + ... + p^k) = p^{k+1} - 1 converge to -1 in the
p-adic metric. For a matrix supported on the edges of a graph the sup norm
of A f is controlled by column sums (archimedean) or column maxima (p-adic),
and each bound is attained by an explicit witness.
"""

import random

from metineq.padic import (
    PAdicAbs,
    apply_operator,
    check_sum_bounds,
    check_sup_bounds,
    format_rational,
    geometric_series_check,
    random_function,
    random_graph_operator,
    sup_sharpness_witness,
)

p = 3
for k in range(6):
    lhs, rhs, dist = geometric_series_check(p, k)
    print(f"k={k}: {lhs} = {rhs}, |s_k + 1|_{p} = {format_rational(dist)}")

rng = random.Random(5)
A = random_graph_operator(8, rng, p_bias=p)
f = random_function(8, rng, p_bias=p)
sup_r, sum_r = check_sup_bounds(A, f, p), check_sum_bounds(A, f, p)
print()
print(f"sup:   {format_rational(sup_r.lhs)} <= {format_rational(sup_r.rhs)}")
print(f"sup_p: {format_rational(sup_r.lhs_p)} <= {format_rational(sup_r.rhs_p)}")
print(f"sum:   {format_rational(sum_r.lhs)} <= {format_rational(sum_r.rhs)}")
print(f"sum_p: {format_rational(sum_r.lhs_p)} <= {format_rational(sum_r.rhs_p)}")

absp = PAdicAbs(p)
v = next(v for v in range(8) if A.column(v))
col = A.column(v)
fa = sup_sharpness_witness(A, v, "archimedean")
fp = sup_sharpness_witness(A, v, "padic", p)
print()
print(f"column {v}: sum |a| = {format_rational(sum(abs(a) for a in col.values()))}, "
      f"A(sign witness)({v}) = {format_rational(apply_operator(A, fa)[v])}")
print(f"column {v}: max |a|_p = {format_rational(max(absp(a) for a in col.values()))}, "
      f"|A(delta witness)({v})|_p = {format_rational(absp(apply_operator(A, fp)[v]))}")
