import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from metineq.padic import (
    GraphOperator,
    PAdicAbs,
    apply_operator,
    check_sum_bounds,
    check_sup_bounds,
    delta_function,
    format_rational,
    geometric_series_check,
    is_prime,
    padic_abs,
    random_function,
    random_graph_operator,
    sup_sharpness_witness,
    valuation,
)

F = Fraction
PRIMES = [2, 3, 5, 7]


def naive_abs(p, x):
    """Strip factors of p from numerator and denominator one at a time."""
    if x == 0:
        return F(0)
    num, den = abs(x.numerator), x.denominator
    k = 0
    while num % p == 0:
        num //= p
        k += 1
    while den % p == 0:
        den //= p
        k -= 1
    return F(1, p**k) if k >= 0 else F(p**-k)


def test_padic_abs_examples():
    assert padic_abs(2, 0) == 0
    assert padic_abs(2, 12) == F(1, 4)
    assert padic_abs(2, F(3, 4)) == 4
    assert PAdicAbs(3)(F(-9, 2)) == F(1, 9)
    assert valuation(0, 5) is None
    assert valuation(F(50, 3), 5) == 2


def test_primes():
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    with pytest.raises(ValueError):
        PAdicAbs(4)
    with pytest.raises(ValueError):
        padic_abs(1, 3)


rationals = st.fractions(max_denominator=10**6).filter(lambda x: abs(x.numerator) < 10**12)


@given(rationals, rationals, st.sampled_from(PRIMES))
def test_ultrametric_and_multiplicative(x, y, p):
    a = PAdicAbs(p)
    assert a(x) == naive_abs(p, x)
    assert a(x + y) <= max(a(x), a(y))
    assert a(x * y) == a(x) * a(y)
    if a(x) != a(y):
        assert a(x + y) == max(a(x), a(y))


@given(st.integers(-10**9, 10**9).filter(bool), st.integers(1, 10**9))
def test_product_formula(num, den):
    x = F(num, den)
    primes = [p for p in range(2, 200) if is_prime(p)]
    rest_n, rest_d = abs(x.numerator), x.denominator
    for p in primes:
        while rest_n % p == 0:
            rest_n //= p
        while rest_d % p == 0:
            rest_d //= p
    if rest_n != 1 or rest_d != 1:
        return  # a prime factor above the bound
    prod = abs(x)
    for p in primes:
        prod *= padic_abs(p, x)
    assert prod == 1


def test_geometric_series():
    assert geometric_series_check(3, 2) == (26, 26, F(1, 27))
    assert geometric_series_check(2, 0) == (1, 1, F(1, 2))
    for p in (2, 3, 5):
        dists = [geometric_series_check(p, k)[2] for k in range(11)]
        assert dists == [F(1, p ** (k + 1)) for k in range(11)]
        assert all(a > b for a, b in zip(dists, dists[1:]))
    with pytest.raises(ValueError):
        geometric_series_check(3, -1)


def small_op():
    # path 0 - 1 - 2
    return GraphOperator(3, [(0, 1), (1, 2)], {(0, 0): 2, (1, 0): -3, (1, 1): F(1, 2), (2, 1): 4, (2, 2): 6})


def test_operator_support_enforced():
    with pytest.raises(ValueError):
        GraphOperator(3, [(0, 1)], {(0, 2): 1})
    with pytest.raises(ValueError):
        GraphOperator(3, [(0, 0)], {})
    with pytest.raises(ValueError):
        GraphOperator(2, [], {(0, 5): 1})
    A = GraphOperator(3, [(0, 1)], {(0, 1): 0})
    assert A.column(1) == {}


def test_apply_examples():
    A = small_op()
    f = {0: F(1, 3), 2: F(-2)}
    assert apply_operator(GraphOperator.identity(3), f) == {0: F(1, 3), 1: 0, 2: F(-2)}
    assert apply_operator(GraphOperator(3, [], {}), f) == {0: 0, 1: 0, 2: 0}
    for y in range(3):
        Ay = apply_operator(A, delta_function(y))
        assert Ay == {v: A.entry(y, v) for v in range(3)}
    # sequence input
    assert apply_operator(A, [1, 0, 0]) == apply_operator(A, {0: 1})
    with pytest.raises(ValueError):
        apply_operator(A, {7: 1})


def test_apply_linear():
    rng = random.Random(0)
    for _ in range(20):
        A = random_graph_operator(8, rng)
        f, g = random_function(8, rng), random_function(8, rng)
        a, b = F(rng.randint(-5, 5), rng.randint(1, 5)), F(rng.randint(-5, 5), rng.randint(1, 5))
        combo = {w: a * f.get(w, 0) + b * g.get(w, 0) for w in range(8)}
        Af, Ag, Ac = apply_operator(A, f), apply_operator(A, g), apply_operator(A, combo)
        assert all(Ac[v] == a * Af[v] + b * Ag[v] for v in range(8))


def test_apply_against_dense_matrix():
    rng = random.Random(1)
    A = random_graph_operator(10, rng)
    dense = [[A.entry(u, v) for v in range(10)] for u in range(10)]
    f = [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(10)]
    Af = apply_operator(A, f)
    for v in range(10):
        assert Af[v] == sum((dense[u][v] * f[u] for u in range(10)), F(0))


def test_sup_bounds_examples():
    A = small_op()
    zero = check_sup_bounds(A, {}, 2)
    assert (zero.lhs, zero.rhs, zero.lhs_p, zero.rhs_p) == (0, 0, 0, 0)
    I = GraphOperator.identity(4)
    f = {0: F(3), 1: F(-1, 4), 3: F(6, 5)}
    r = check_sup_bounds(I, f, 3)
    assert r.lhs == r.rhs == 3 and r.lhs_p == r.rhs_p == 1
    s = check_sum_bounds(I, f, 2)
    assert s.lhs == s.rhs and s.lhs_p == s.rhs_p


def test_witness_examples():
    A = GraphOperator(2, [(0, 1)], {(0, 1): 2, (1, 1): -3})
    w = sup_sharpness_witness(A, 1, "archimedean")
    assert w == {0: 1, 1: -1}
    assert apply_operator(A, w)[1] == 5
    B = GraphOperator(2, [(0, 1)], {(0, 1): 4, (1, 1): 6})
    wp = sup_sharpness_witness(B, 1, "padic", 2)
    assert wp == {1: 1}
    assert padic_abs(2, apply_operator(B, wp)[1]) == F(1, 2)
    single = GraphOperator(1, [], {(0, 0): F(-7, 9)})
    assert apply_operator(single, sup_sharpness_witness(single, 0, "archimedean"))[0] == F(7, 9)
    assert padic_abs(3, apply_operator(single, sup_sharpness_witness(single, 0, "padic", 3))[0]) == 9
    with pytest.raises(ValueError):
        sup_sharpness_witness(GraphOperator(2, [], {(0, 0): 1}), 1, "archimedean")
    with pytest.raises(ValueError):
        sup_sharpness_witness(A, 1, "padic")
    with pytest.raises(ValueError):
        sup_sharpness_witness(A, 1, "other")


def test_padic_witness_tie_breaks_to_smallest():
    A = GraphOperator(3, [(0, 2), (1, 2)], {(0, 2): 6, (1, 2): 10, (2, 2): 4})
    assert sup_sharpness_witness(A, 2, "padic", 2) == {0: 1}


def test_random_operators_bounds_and_witnesses():
    rng = random.Random(42)
    for trial in range(30):
        p = PRIMES[trial % 4]
        A = random_graph_operator(12, rng, p_bias=p)
        f = random_function(12, rng, p_bias=p)
        assert check_sup_bounds(A, f, p).holds
        assert check_sum_bounds(A, f, p).holds
        absp = PAdicAbs(p)
        for v in range(12):
            col = A.column(v)
            if not col:
                continue
            fa = sup_sharpness_witness(A, v, "archimedean")
            assert apply_operator(A, fa)[v] == sum(abs(a) for a in col.values())
            fp = sup_sharpness_witness(A, v, "padic", p)
            assert absp(apply_operator(A, fp)[v]) == max(absp(a) for a in col.values())
        for y in range(12):
            Ay = apply_operator(A, delta_function(y))
            row = A.row(y)
            assert sum(abs(x) for x in Ay.values()) == sum(abs(a) for a in row.values())
            assert sum(absp(x) for x in Ay.values()) == sum(absp(a) for a in row.values())


def test_entries_round_trip(tmp_path):
    import json

    rng = random.Random(3)
    A = random_graph_operator(6, rng)
    g = tmp_path / "g.json"
    m = tmp_path / "m.json"
    g.write_text(json.dumps({"n_points": 6, "edges": [sorted(e) for e in A.edges]}))
    m.write_text(json.dumps(A.to_entries()))
    B = GraphOperator.load(g, m)
    assert all(A.entry(u, v) == B.entry(u, v) for u in range(6) for v in range(6))


def test_format_rational():
    assert format_rational(F(-6, 4)) == "-3/2"
    assert format_rational(F(5)) == "5/1"
    assert format_rational(0) == "0/1"
