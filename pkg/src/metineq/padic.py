"""Exact rationals with archimedean and p-adic absolute values, and
graph-supported rational operators with their sup and sum norm bounds.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator). p-adic comparisons go through integer valuations; ``|x|_p`` is
materialised as the exact rational ``p**-k``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

__all__ = [
    "Fraction",
    "PAdicAbs",
    "is_prime",
    "valuation",
    "padic_abs",
    "geometric_series_check",
    "GraphOperator",
    "apply_operator",
    "SupBoundReport",
    "SumBoundReport",
    "check_sup_bounds",
    "check_sum_bounds",
    "sup_sharpness_witness",
    "random_graph_operator",
    "random_function",
    "format_rational",
]

INF_VALUATION = None  # valuation of 0


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _int_valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def valuation(x, p: int) -> int | None:
    """Exponent of ``p`` in the rational ``x``; ``None`` for 0."""
    x = Fraction(x)
    if x == 0:
        return INF_VALUATION
    return _int_valuation(abs(x.numerator), p) - _int_valuation(x.denominator, p)


@dataclass(frozen=True)
class PAdicAbs:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __call__(self, x) -> Fraction:
        return padic_abs(self, x)


def padic_abs(p: PAdicAbs | int, x) -> Fraction:
    """``|x|_p = p**-k`` where ``k`` is the p-adic valuation; ``|0|_p = 0``."""
    prime = p.p if isinstance(p, PAdicAbs) else PAdicAbs(p).p
    k = valuation(x, prime)
    if k is None:
        return Fraction(0)
    return Fraction(1, prime**k) if k >= 0 else Fraction(prime**-k)


def geometric_series_check(p: int, k: int) -> tuple[int, int, Fraction]:
    """``(p - 1) * sum_{j<=k} p^j`` and ``p^{k+1} - 1``, plus the p-adic
    distance of the partial sum to ``-1``."""
    PAdicAbs(p)
    if k < 0:
        raise ValueError("k must be >= 0")
    lhs = (p - 1) * sum(p**j for j in range(k + 1))
    rhs = -1 + p ** (k + 1)
    if lhs != rhs:
        raise ArithmeticError(f"series identity failed: {lhs} != {rhs}")
    return lhs, rhs, padic_abs(p, lhs - (-1))


# -- graph operators ------------------------------------------------------

class GraphOperator:
    """Matrix ``(a_{u,v})`` on the vertices ``0..n-1`` of a graph.

    Entries may be nonzero only on the diagonal and on edges. Stored sparsely
    by column: ``column(v)`` maps ``u -> a_{u,v}``.
    """

    def __init__(self, n_vertices: int, edges, entries: Mapping[tuple[int, int], object]):
        self.n_vertices = int(n_vertices)
        self.edges = frozenset(frozenset((int(u), int(v))) for u, v in edges)
        if any(len(e) != 2 for e in self.edges):
            raise ValueError("self-loops are not edges")
        cols: dict[int, dict[int, Fraction]] = {v: {} for v in range(self.n_vertices)}
        rows: dict[int, dict[int, Fraction]] = {u: {} for u in range(self.n_vertices)}
        for (u, v), a in entries.items():
            u, v = int(u), int(v)
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"entry ({u}, {v}) out of range")
            a = Fraction(a)
            if a == 0:
                continue
            if u != v and frozenset((u, v)) not in self.edges:
                raise ValueError(f"a[{u},{v}] must be 0: no edge between {u} and {v}")
            cols[v][u] = a
            rows[u][v] = a
        self._cols = cols
        self._rows = rows

    def entry(self, u: int, v: int) -> Fraction:
        return self._cols[v].get(u, Fraction(0))

    def column(self, v: int) -> dict[int, Fraction]:
        return dict(self._cols[v])

    def row(self, u: int) -> dict[int, Fraction]:
        return dict(self._rows[u])

    @classmethod
    def identity(cls, n_vertices: int, edges=()) -> "GraphOperator":
        return cls(n_vertices, edges, {(v, v): 1 for v in range(n_vertices)})

    def to_entries(self) -> list[list[int]]:
        return [[u, v, a.numerator, a.denominator]
                for v in range(self.n_vertices) for u, a in sorted(self._cols[v].items())]

    @classmethod
    def from_entries(cls, n_vertices: int, edges, entries) -> "GraphOperator":
        return cls(n_vertices, edges, {(int(u), int(v)): Fraction(int(num), int(den)) for u, v, num, den in entries})

    @classmethod
    def load(cls, graph_path, matrix_path) -> "GraphOperator":
        graph = json.loads(Path(graph_path).read_text())
        entries = json.loads(Path(matrix_path).read_text())
        return cls.from_entries(graph["n_points"], graph.get("edges", []), entries)


def _as_function(f, n: int) -> dict[int, Fraction]:
    items = f.items() if isinstance(f, Mapping) else enumerate(f)
    out = {}
    for w, val in items:
        if not 0 <= int(w) < n:
            raise ValueError(f"vertex {w} out of range")
        val = Fraction(val)
        if val != 0:
            out[int(w)] = val
    return out


def apply_operator(A: GraphOperator, f) -> dict[int, Fraction]:
    """``A(f)(v) = sum_u a_{u,v} f(u)`` for every vertex ``v``.

    ``f`` is a mapping vertex -> rational (missing vertices are 0) or a sequence.
    """
    f = _as_function(f, A.n_vertices)
    out = {}
    for v in range(A.n_vertices):
        out[v] = sum((a * f[u] for u, a in A._cols[v].items() if u in f), Fraction(0))
    return out


def _sup(values) -> Fraction:
    return max(values, default=Fraction(0))


@dataclass(frozen=True)
class SupBoundReport:
    lhs: Fraction
    rhs: Fraction
    lhs_p: Fraction
    rhs_p: Fraction
    p: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs and self.lhs_p <= self.rhs_p


@dataclass(frozen=True)
class SumBoundReport:
    lhs: Fraction
    rhs: Fraction
    lhs_p: Fraction
    rhs_p: Fraction
    p: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs and self.lhs_p <= self.rhs_p


def check_sup_bounds(A: GraphOperator, f, p: int) -> SupBoundReport:
    """Both sides of the sup-norm bounds, archimedean (column sums) and p-adic
    (column sups), computed exactly."""
    absp = PAdicAbs(p)
    f = _as_function(f, A.n_vertices)
    Af = apply_operator(A, f)
    V = range(A.n_vertices)
    lhs = _sup(abs(x) for x in Af.values())
    col_sum = _sup(sum((abs(a) for a in A._cols[v].values()), Fraction(0)) for v in V)
    rhs = col_sum * _sup(abs(x) for x in f.values())
    lhs_p = _sup(absp(x) for x in Af.values())
    col_sup = _sup(absp(a) for v in V for a in A._cols[v].values())
    rhs_p = col_sup * _sup(absp(x) for x in f.values())
    return SupBoundReport(lhs, rhs, lhs_p, rhs_p, p)


def check_sum_bounds(A: GraphOperator, f, p: int) -> SumBoundReport:
    """Both sides of the l1 bounds: row sums of ``|a|`` (resp. ``|a|_p``) times
    the l1 norm of ``f``."""
    absp = PAdicAbs(p)
    f = _as_function(f, A.n_vertices)
    Af = apply_operator(A, f)
    V = range(A.n_vertices)
    lhs = sum((abs(x) for x in Af.values()), Fraction(0))
    row_sum = _sup(sum((abs(a) for a in A._rows[u].values()), Fraction(0)) for u in V)
    rhs = row_sum * sum((abs(x) for x in f.values()), Fraction(0))
    lhs_p = sum((absp(x) for x in Af.values()), Fraction(0))
    row_sum_p = _sup(sum((absp(a) for a in A._rows[u].values()), Fraction(0)) for u in V)
    rhs_p = row_sum_p * sum((absp(x) for x in f.values()), Fraction(0))
    return SumBoundReport(lhs, rhs, lhs_p, rhs_p, p)


def sup_sharpness_witness(A: GraphOperator, v: int, mode: str, p: int | None = None) -> dict[int, Fraction]:
    """Function achieving equality in the sup bound at column ``v``.

    ``mode="archimedean"``: ``f(w) = sign(a_{w,v})`` (1 where the entry is 0), so
    ``A(f)(v) = sum_u |a_{u,v}|``. ``mode="padic"``: the indicator of the
    smallest vertex maximising ``|a_{u,v}|_p``.
    """
    col = A._cols[v]
    if not col:
        raise ValueError(f"column {v} is zero")
    if mode == "archimedean":
        return {w: Fraction(-1 if col.get(w, 0) < 0 else 1) for w in range(A.n_vertices)}
    if mode == "padic":
        if p is None:
            raise ValueError("padic mode needs p")
        absp = PAdicAbs(p)
        best = max(absp(a) for a in col.values())
        u = min(u for u, a in col.items() if absp(a) == best)
        return {u: Fraction(1)}
    raise ValueError(f"unknown mode {mode!r}")


def delta_function(y: int) -> dict[int, Fraction]:
    return {y: Fraction(1)}


# -- random instances -----------------------------------------------------

def random_rational(rng: random.Random, p_bias: int = 2, max_num: int = 60, max_exp: int = 4) -> Fraction:
    """Nonzero rational with a tunable power of ``p_bias`` so valuations vary."""
    num = rng.randint(1, max_num) * rng.choice((-1, 1))
    den = rng.randint(1, max_num)
    k = rng.randint(-max_exp, max_exp)
    scale = Fraction(p_bias) ** k
    return Fraction(num, den) * scale


def random_graph_operator(n_vertices: int, rng: random.Random, *, edge_prob: float = 0.2,
                          density: float = 0.7, p_bias: int = 2) -> GraphOperator:
    edges = [(u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices) if rng.random() < edge_prob]
    entries = {}
    for v in range(n_vertices):
        if rng.random() < density:
            entries[(v, v)] = random_rational(rng, p_bias)
    for u, v in edges:
        if rng.random() < density:
            entries[(u, v)] = random_rational(rng, p_bias)
        if rng.random() < density:
            entries[(v, u)] = random_rational(rng, p_bias)
    return GraphOperator(n_vertices, edges, entries)


def random_function(n_vertices: int, rng: random.Random, *, support: float = 0.6, p_bias: int = 2) -> dict[int, Fraction]:
    return {w: random_rational(rng, p_bias) for w in range(n_vertices) if rng.random() < support}


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
