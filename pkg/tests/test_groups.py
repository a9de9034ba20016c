import random
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import word_oracle
from metineq import ResourceLimitError
from metineq.groups import (
    BallTable,
    GroupSpec,
    HeisenbergElement as H,
    ball_levels,
    ball_sizes,
    cayley_ball_space,
    commutator_power,
    growth_exponent,
    heis_inv,
    heis_mul,
    lattice_ball_size,
)


def from_oracle(word, n):
    r, s, t = word_oracle.collect(word, n)
    return H(r, s, t)


def element_of(letter, n):
    kind, i, e = letter
    return H.a(i, n, e) if kind == "a" else H.b(i, n, e)


def fold(word, n):
    out = H.identity(n)
    for x in word:
        out = heis_mul(out, element_of(x, n))
    return out


# -- oracle sanity ----------------------------------------------------------

def test_oracle_reproduces_defining_relations():
    b, a = ("b", 1, 1), ("a", 1, 1)
    assert word_oracle.collect([b, a], 1) == ((1,), (1,), 1)
    assert word_oracle.collect([b, a, ("b", 1, -1), ("a", 1, -1)], 1) == ((0,), (0,), 1)
    # different indices commute
    assert word_oracle.collect([("b", 2, 1), ("a", 1, 1)], 2) == ((1, 0), (0, 1), 0)


# -- multiplication -----------------------------------------------------------

def test_mul_examples():
    x = H((3,), (-2,), 7)
    assert heis_mul(H.identity(1), x) == x
    assert heis_mul(H.b(1, 1), H.a(1, 1)) == H((1,), (1,), 1)
    comm = fold([("b", 1, 1), ("a", 1, 1), ("b", 1, -1), ("a", 1, -1)], 1)
    assert comm == H.c(1)


def test_rank_mismatch():
    with pytest.raises(ValueError):
        heis_mul(H.identity(1), H.identity(2))


def test_inverse_examples():
    assert heis_inv(H.identity(2)) == H.identity(2)
    assert heis_inv(H.a(1, 1)) == H((-1,), (0,), 0)


elems = st.integers(1, 3).flatmap(
    lambda n: st.builds(
        H,
        st.lists(st.integers(-10, 10), min_size=n, max_size=n).map(tuple),
        st.lists(st.integers(-10, 10), min_size=n, max_size=n).map(tuple),
        st.integers(-10, 10),
    )
)


@given(elems)
def test_inverse_property(x):
    assert heis_mul(x, heis_inv(x)).is_identity()
    assert heis_mul(heis_inv(x), x).is_identity()


@given(st.data())
def test_associative_and_c_central(data):
    n = data.draw(st.integers(1, 3))
    vec = st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n).map(tuple)
    el = st.builds(H, vec, vec, st.integers(-10**12, 10**12))
    x, y, z = data.draw(el), data.draw(el), data.draw(el)
    assert heis_mul(heis_mul(x, y), z) == heis_mul(x, heis_mul(y, z))
    c = H.c(n)
    assert heis_mul(c, x) == heis_mul(x, c)


def test_big_exponents_do_not_overflow():
    j = 10**10
    x = heis_mul(H.b(1, 1, j), H.a(1, 1, j))
    assert x.t == j * j
    assert isinstance(x.t, int)


@pytest.mark.parametrize("j,t", [(0, 0), (1, 1), (3, 9), (-4, 16)])
def test_commutator_power(j, t):
    assert commutator_power(1, j) == H.c(1, t)


def test_commutator_power_rank2():
    assert commutator_power(2, 3, n=2) == H.c(2, 9)
    with pytest.raises(ValueError):
        commutator_power(3, 1, n=2)


def test_mul_matches_oracle_exhaustive_short_words():
    for word in word_oracle.all_words(1, 6):
        assert fold(word, 1) == from_oracle(word, 1)


def test_mul_matches_oracle_random_rank2_pairs():
    rng = random.Random(2024)
    alphabet = word_oracle.letters(2)
    for _ in range(10_000):
        u = [rng.choice(alphabet) for _ in range(rng.randrange(7))]
        v = [rng.choice(alphabet) for _ in range(rng.randrange(7))]
        assert heis_mul(fold(u, 2), fold(v, 2)) == from_oracle(u + v, 2)


# -- balls --------------------------------------------------------------------

def test_small_balls():
    h1 = ball_sizes(GroupSpec.heisenberg(1), 1)
    assert h1.sizes == (1, 5)
    z1 = ball_sizes(GroupSpec.lattice(1), 10)
    assert z1.sizes == tuple(2 * l + 1 for l in range(11))


def naive_bfs_sizes(n, L):
    """Independent BFS over HeisenbergElement values via heis_mul."""
    gens = [element_of(x, n) for x in word_oracle.letters(n)]
    start = H.identity(n)
    seen = {start: 0}
    q = deque([start])
    while q:
        x = q.popleft()
        if seen[x] == L:
            continue
        for g in gens:
            y = heis_mul(x, g)
            if y not in seen:
                seen[y] = seen[x] + 1
                q.append(y)
    counts = [0] * (L + 1)
    for d in seen.values():
        counts[d] += 1
    return tuple(np.cumsum(counts).tolist()), seen


def test_ball_sizes_match_naive_bfs():
    for n, L in ((1, 7), (2, 4)):
        expected, _ = naive_bfs_sizes(n, L)
        assert ball_sizes(GroupSpec.heisenberg(n), L).sizes == expected


def test_distance_to_c_is_four():
    levels = ball_levels(GroupSpec.heisenberg(1), 5)
    where = [k for k, lvl in enumerate(levels) if any((row == [0, 0, 1]).all() for row in lvl)]
    assert where == [4]


def test_lattice_closed_form():
    for n in (1, 2, 3, 4):
        table = ball_sizes(GroupSpec.lattice(n), 7)
        assert table.sizes == tuple(lattice_ball_size(n, l) for l in range(8))
    assert lattice_ball_size(2, 5) == 2 * 25 + 2 * 5 + 1


def test_box_clips_adjacency():
    spec = GroupSpec.box([(-2, 2), (0, 1)])
    table = ball_sizes(spec, 6)
    assert table.sizes[-1] == 10  # whole box
    assert table.sizes[:3] == (1, 4, 8)  # origin; (+-1,0),(0,1); then (+-2,0),(+-1,1)
    with pytest.raises(ValueError):
        GroupSpec.box([(1, 2)])


def test_ball_sizes_cap():
    with pytest.raises(ResourceLimitError):
        ball_sizes(GroupSpec.heisenberg(2), 20, max_elements=10_000)


def test_uniqueness_against_oracle_words_up_to_five():
    """Distinct normal forms found by BFS are exactly the oracle's group values
    of all words of length <= 5."""
    oracle_values = {word_oracle.collect(w, 1) for w in word_oracle.all_words(1, 5)}
    levels = ball_levels(GroupSpec.heisenberg(1), 5)
    bfs_values = {((int(r[0]),), (int(r[1]),), int(r[2])) for lvl in levels for r in lvl}
    assert bfs_values == oracle_values
    assert sum(len(l) for l in levels) == len(bfs_values)


def test_growth_exponent():
    exact = BallTable(GroupSpec.lattice(4), tuple(l**4 if l else 1 for l in range(20)))
    assert growth_exponent(exact, (3, 19)) == pytest.approx(4.0, abs=1e-12)
    z2 = ball_sizes(GroupSpec.lattice(2), 16)
    assert 1.8 <= growth_exponent(z2, (8, 16)) <= 2.2
    h1 = ball_sizes(GroupSpec.heisenberg(1), 14)
    assert 3.3 <= growth_exponent(h1, (6, 14)) <= 4.7
    with pytest.raises(ValueError):
        growth_exponent(z2, (8, 9))
    with pytest.raises(ValueError):
        growth_exponent(z2, (8, 40))


def test_cayley_ball_space_lattice():
    sp, elems = cayley_ball_space(GroupSpec.lattice(1), 2)
    assert sp.n_points == 5
    order = np.argsort(elems[:, 0])
    d = sp.distance_matrix()[np.ix_(order, order)]
    np.testing.assert_array_equal(d, np.abs(np.subtract.outer(np.arange(5), np.arange(5))))


def bfs_distance(n, x, y, limit):
    """Word distance by BFS from ``x`` until ``y`` appears."""
    gens = [element_of(g, n) for g in word_oracle.letters(n)]
    seen = {x: 0}
    q = deque([x])
    while q:
        u = q.popleft()
        if u == y:
            return seen[u]
        if seen[u] >= limit:
            continue
        for g in gens:
            v = heis_mul(u, g)
            if v not in seen:
                seen[v] = seen[u] + 1
                q.append(v)
    raise AssertionError("not found")


def to_elem(row, n):
    row = [int(v) for v in row]
    return H(row[:n], row[n:2 * n], row[2 * n])


def test_cayley_ball_space_heisenberg():
    spec = GroupSpec.heisenberg(1)
    sp, elems = cayley_ball_space(spec, 3)
    levels = ball_levels(spec, 3)
    lvl_of = np.concatenate([np.full(len(l), k) for k, l in enumerate(levels)])
    np.testing.assert_array_equal(sp.distance_matrix()[0], lvl_of)
    sp.check_metric()

    # left-invariance, checked by independent per-source BFS
    rng = random.Random(7)
    index = {tuple(int(v) for v in r): k for k, r in enumerate(elems)}
    D = sp.distance_matrix()
    checked = 0
    while checked < 40:
        i, j = rng.randrange(len(elems)), rng.randrange(len(elems))
        g = to_elem(elems[rng.randrange(len(elems))], 1)
        gx = heis_mul(g, to_elem(elems[i], 1))
        gy = heis_mul(g, to_elem(elems[j], 1))
        ki, kj = index.get(gx.as_tuple()), index.get(gy.as_tuple())
        if ki is None or kj is None:
            continue
        assert D[ki, kj] == D[i, j]
        assert D[i, j] == bfs_distance(1, to_elem(elems[i], 1), to_elem(elems[j], 1), 6)
        checked += 1


def test_levels_deterministic():
    a = ball_levels(GroupSpec.heisenberg(2), 4)
    b = ball_levels(GroupSpec.heisenberg(2), 4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
