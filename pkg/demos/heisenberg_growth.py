"""Ball growth in the discrete Heisenberg group H_1 versus the lattice Z^2.

Both are generated by two elements and their inverses, yet H_1 balls grow
like l^4 while Z^2 balls grow like l^2. The commutator c is the reason: it
costs only 4 letters, but c^{j^2} costs about 4j, so the centre fills in
quadratically faster than the word length.
"""

from metineq.groups import GroupSpec, ball_sizes, commutator_power, doubling_ratio, growth_exponent

L = 14
heis = ball_sizes(GroupSpec.heisenberg(1), L)
flat = ball_sizes(GroupSpec.lattice(2), L)

print(" l   |B_H1(l)|  |B_Z2(l)|")
for l in range(L + 1):
    print(f"{l:2d}  {heis[l]:9d}  {flat[l]:9d}")

print()
print(f"log-log slope on [6, 14]: H_1 {growth_exponent(heis, (6, 14)):.3f}, Z^2 {growth_exponent(flat, (6, 14)):.3f}")
print(f"|B(14)| / |B(7)|:         H_1 {doubling_ratio(heis, 7):.2f}, Z^2 {doubling_ratio(flat, 7):.2f}")

print()
for j in (1, 2, 5, 10):
    print(f"b^{j} a^{j} b^-{j} a^-{j} = {commutator_power(1, j).as_tuple()}")
