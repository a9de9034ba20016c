"""Discrete Heisenberg groups and integer lattices.

Elements of ``H_n`` are kept in the normal form
``a_1^{r_1} ... a_n^{r_n} b_1^{s_1} ... b_n^{s_n} c^t``. Collecting a product
into that form only requires moving ``a_i`` letters leftward past ``b_i``
letters; each crossing ``b_i^{+-1} a_i^{+-1} -> a_i^{+-1} b_i^{+-1}`` emits
``c^{+-1}`` (sign = product of the two exponent signs). Hence

    (r, s, t) * (r', s', t') = (r + r', s + s', t + t' + <s, r'>).

Balls in the Cayley graph (right multiplication by ``a_i^{+-1}``,
``b_i^{+-1}``, or ``+-e_i`` for lattices) are enumerated level by level with
vectorised numpy frontiers; elements are deduplicated by their normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._util import DEFAULT_MAX_ELEMENTS, ResourceLimitError
from .space import FiniteMetricMeasureSpace

__all__ = [
    "HeisenbergElement",
    "GroupSpec",
    "BallTable",
    "heis_mul",
    "heis_inv",
    "commutator_power",
    "ball_sizes",
    "ball_levels",
    "growth_exponent",
    "doubling_ratio",
    "cayley_ball_space",
    "lattice_ball_size",
]


@dataclass(frozen=True)
class HeisenbergElement:
    """Normal-form triple ``(r, s, t)`` of an element of ``H_n``."""

    r: tuple[int, ...]
    s: tuple[int, ...]
    t: int = 0

    def __post_init__(self):
        r = tuple(int(x) for x in self.r)
        s = tuple(int(x) for x in self.s)
        if len(r) != len(s) or not r:
            raise ValueError("r and s must be non-empty and of equal length")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", int(self.t))

    @property
    def n(self) -> int:
        return len(self.r)

    @classmethod
    def identity(cls, n: int) -> "HeisenbergElement":
        return cls((0,) * n, (0,) * n, 0)

    @classmethod
    def a(cls, i: int, n: int, power: int = 1) -> "HeisenbergElement":
        """``a_i^power`` with 1-based ``i``."""
        return cls(_unit(i, n, power), (0,) * n, 0)

    @classmethod
    def b(cls, i: int, n: int, power: int = 1) -> "HeisenbergElement":
        return cls((0,) * n, _unit(i, n, power), 0)

    @classmethod
    def c(cls, n: int, power: int = 1) -> "HeisenbergElement":
        return cls((0,) * n, (0,) * n, power)

    def as_tuple(self) -> tuple[int, ...]:
        return self.r + self.s + (self.t,)

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return heis_mul(self, other)

    def inverse(self) -> "HeisenbergElement":
        return heis_inv(self)

    def is_identity(self) -> bool:
        return self.t == 0 and not any(self.r) and not any(self.s)


def _unit(i: int, n: int, power: int) -> tuple[int, ...]:
    if not 1 <= i <= n:
        raise ValueError(f"generator index {i} outside 1..{n}")
    v = [0] * n
    v[i - 1] = power
    return tuple(v)


def heis_mul(x: HeisenbergElement, y: HeisenbergElement) -> HeisenbergElement:
    if x.n != y.n:
        raise ValueError(f"rank mismatch: H_{x.n} vs H_{y.n}")
    cross = sum(si * rj for si, rj in zip(x.s, y.r))
    return HeisenbergElement(
        tuple(a + b for a, b in zip(x.r, y.r)),
        tuple(a + b for a, b in zip(x.s, y.s)),
        x.t + y.t + cross,
    )


def heis_inv(x: HeisenbergElement) -> HeisenbergElement:
    return HeisenbergElement(
        tuple(-a for a in x.r),
        tuple(-b for b in x.s),
        sum(a * b for a, b in zip(x.r, x.s)) - x.t,
    )


def _power(g: HeisenbergElement, j: int) -> HeisenbergElement:
    base = g if j >= 0 else heis_inv(g)
    out = HeisenbergElement.identity(g.n)
    for _ in range(abs(j)):
        out = heis_mul(out, base)
    return out


def commutator_power(i: int, j: int, n: int = 1) -> HeisenbergElement:
    """``b_i^j a_i^j b_i^{-j} a_i^{-j}`` evaluated by repeated multiplication.

    The result is checked against ``c^{j^2}`` and returned.
    """
    a = HeisenbergElement.a(i, n)
    b = HeisenbergElement.b(i, n)
    out = HeisenbergElement.identity(n)
    for factor in (_power(b, j), _power(a, j), _power(b, -j), _power(a, -j)):
        out = heis_mul(out, factor)
    expected = HeisenbergElement.c(n, j * j)
    if out != expected:
        raise ArithmeticError(f"commutator identity failed: got {out}, expected {expected}")
    return out


# -- group specs and ball enumeration -------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """Which Cayley graph to walk.

    ``kind`` is ``"heisenberg"``, ``"lattice"`` or ``"lattice-in-box"``. For
    boxes, ``bounds`` holds one inclusive ``(lo, hi)`` pair per axis and must
    contain the origin.
    """

    kind: str
    rank: int
    bounds: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("heisenberg", "lattice", "lattice-in-box"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if self.kind == "lattice-in-box":
            if self.bounds is None or len(self.bounds) != self.rank:
                raise ValueError("lattice-in-box needs one (lo, hi) pair per axis")
            b = tuple((int(lo), int(hi)) for lo, hi in self.bounds)
            if any(not lo <= 0 <= hi for lo, hi in b):
                raise ValueError("box must contain the origin")
            object.__setattr__(self, "bounds", b)

    @classmethod
    def heisenberg(cls, n: int) -> "GroupSpec":
        return cls("heisenberg", n)

    @classmethod
    def lattice(cls, n: int) -> "GroupSpec":
        return cls("lattice", n)

    @classmethod
    def box(cls, bounds: Iterable[tuple[int, int]]) -> "GroupSpec":
        bounds = tuple(bounds)
        return cls("lattice-in-box", len(bounds), bounds)

    @property
    def width(self) -> int:
        """Number of integer coordinates per element."""
        return 2 * self.rank + 1 if self.kind == "heisenberg" else self.rank

    def generators(self) -> list[tuple[str, int, int]]:
        """Symmetric generating set as ``(letter, index, sign)`` triples."""
        letters = ("a", "b") if self.kind == "heisenberg" else ("e",)
        return [(L, i, e) for L in letters for i in range(1, self.rank + 1) for e in (1, -1)]

    def step(self, states: np.ndarray) -> np.ndarray:
        """All right-neighbours of ``states``: shape ``(k, width)`` -> ``(k * |S|, width)``."""
        n = self.rank
        out = []
        for letter, i, e in self.generators():
            nxt = states.copy()
            if letter == "a":
                nxt[:, i - 1] += e
                nxt[:, 2 * n] += e * states[:, n + i - 1]
            elif letter == "b":
                nxt[:, n + i - 1] += e
            else:
                nxt[:, i - 1] += e
            out.append(nxt)
        nxt = np.concatenate(out) if out else states[:0]
        if self.kind == "lattice-in-box":
            lo = np.array([b[0] for b in self.bounds])
            hi = np.array([b[1] for b in self.bounds])
            nxt = nxt[np.all((nxt >= lo) & (nxt <= hi), axis=1)]
        return nxt

    def inverse_mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Rows of ``x^{-1} y`` (element-wise over rows)."""
        if self.kind != "heisenberg":
            return y - x
        n = self.rank
        rx, sx, tx = x[:, :n], x[:, n:2 * n], x[:, 2 * n]
        ry, sy, ty = y[:, :n], y[:, n:2 * n], y[:, 2 * n]
        # (-rx, -sx, <rx,sx> - tx) * (ry, sy, ty)
        t = (rx * sx).sum(1) - tx + ty - (sx * ry).sum(1)
        return np.concatenate([ry - rx, sy - sx, t[:, None]], axis=1)

    def describe(self) -> str:
        if self.kind == "heisenberg":
            return f"H_{self.rank}"
        if self.kind == "lattice":
            return f"Z^{self.rank}"
        return f"Z^{self.rank} box {list(self.bounds)}"


@dataclass(frozen=True)
class BallTable:
    """Exact ball sizes ``|B(l)|`` for ``l = 0..L``."""

    spec: GroupSpec
    sizes: tuple[int, ...] = field(default=())

    @property
    def radii(self) -> range:
        return range(len(self.sizes))

    def __getitem__(self, l: int) -> int:
        return self.sizes[l]

    def rows(self) -> list[tuple[int, int]]:
        return list(zip(self.radii, self.sizes))


class _Keyer:
    """Packs integer rows into single int64 keys (mixed radix) for fast set ops."""

    def __init__(self, spec: GroupSpec, L: int):
        # |r_i|, |s_i| <= L and |t| <= L^2 / 4 inside B(L); keep a safety margin.
        t_bound = L * L
        self.offsets = np.array([L] * (spec.width - 1 if spec.kind == "heisenberg" else spec.width)
                                + ([t_bound] if spec.kind == "heisenberg" else []), dtype=np.int64)
        radix = 2 * self.offsets + 1
        total = 1
        for w in radix.tolist():
            total *= w
        if total >= 2**62:
            raise ResourceLimitError("key space", 2**62, total)
        self.mult = np.cumprod(np.concatenate(([1], radix[:-1]))).astype(np.int64)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        return ((rows + self.offsets) * self.mult).sum(axis=1)


def ball_levels(spec: GroupSpec, L: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> list[np.ndarray]:
    """Breadth-first spheres ``S(0), ..., S(L)`` as int64 arrays of normal forms.

    Neighbours of ``S(l)`` lie in ``S(l-1) u S(l) u S(l+1)``, so only the two
    previous levels are needed for deduplication. Rows within a level are
    sorted by key, making the output independent of generator order.
    """
    if L < 0:
        raise ValueError("radius must be non-negative")
    if L > 1_000_000:
        raise ResourceLimitError("radius", 1_000_000, L)
    keyer = _Keyer(spec, max(L, 1))
    origin = np.zeros((1, spec.width), dtype=np.int64)
    levels = [origin]
    keys = [keyer(origin)]
    total = 1
    for _ in range(L):
        cand = spec.step(levels[-1])
        ck = keyer(cand)
        ck, first = np.unique(ck, return_index=True)
        fresh = ~np.isin(ck, keys[-1])
        if len(keys) > 1:
            fresh &= ~np.isin(ck, keys[-2])
        new_keys = ck[fresh]
        total += new_keys.size
        if total > max_elements:
            raise ResourceLimitError("group elements", max_elements, total)
        levels.append(cand[first[fresh]])
        keys.append(new_keys)
    return levels


def ball_sizes(spec: GroupSpec, L: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> BallTable:
    counts = np.cumsum([lvl.shape[0] for lvl in ball_levels(spec, L, max_elements)])
    return BallTable(spec, tuple(int(c) for c in counts))


def lattice_ball_size(n: int, l: int) -> int:
    """Number of points of ``Z^n`` with l1-norm at most ``l``."""
    return sum(2**k * math.comb(n, k) * math.comb(l, k) for k in range(min(n, l) + 1))


def growth_exponent(table: BallTable | Iterable[int], window: tuple[int, int]) -> float:
    """Least-squares slope of ``log |B(l)|`` against ``log l`` for ``l`` in ``window`` (inclusive)."""
    sizes = table.sizes if isinstance(table, BallTable) else tuple(table)
    lo, hi = window
    if lo < 1 or hi >= len(sizes):
        raise ValueError(f"window {window} not inside radii 1..{len(sizes) - 1}")
    if hi - lo + 1 < 3:
        raise ValueError("window needs at least 3 radii")
    ys = np.array(sizes[lo:hi + 1], dtype=float)
    if np.any(np.diff(ys) <= 0):
        raise ValueError("ball sizes must be strictly increasing over the window")
    xs = np.log(np.arange(lo, hi + 1, dtype=float))
    slope, _ = np.polyfit(xs, np.log(ys), 1)
    return float(slope)


def doubling_ratio(table: BallTable, l: int) -> float:
    return table[2 * l] / table[l]


def cayley_ball_space(spec: GroupSpec, L: int, max_elements: int = DEFAULT_MAX_ELEMENTS):
    """The ball ``B(L)`` with its word metric and unit weights.

    Returns ``(space, elements)`` where ``elements[i]`` is the normal-form row of
    point ``i`` (identity first, then by BFS level). Distances are the word
    metric of the whole group, ``d(x, y) = |x^{-1} y|``, read off a ball of
    radius ``2L`` around the identity; for boxes the l1 distance is used, which
    is the hop distance of the box graph since boxes are lattice-convex.
    """
    levels = ball_levels(spec, L, max_elements)
    elems = np.concatenate(levels)
    m = elems.shape[0]
    if m > 20_000:
        raise ResourceLimitError("dense ball points", 20_000, m)
    if spec.kind == "heisenberg":
        big = ball_levels(spec, 2 * L, max_elements)
        keyer = _Keyer(spec, max(2 * L, 1))
        lookup_keys = np.concatenate([keyer(lv) for lv in big])
        lookup_len = np.concatenate([np.full(lv.shape[0], k) for k, lv in enumerate(big)])
        order = np.argsort(lookup_keys)
        lookup_keys, lookup_len = lookup_keys[order], lookup_len[order]
        dist = np.empty((m, m))
        for i in range(m):
            rel = spec.inverse_mul(np.repeat(elems[i:i + 1], m, axis=0), elems)
            k = keyer(rel)
            pos = np.searchsorted(lookup_keys, k)
            if np.any(lookup_keys[np.minimum(pos, lookup_keys.size - 1)] != k):
                raise AssertionError("relative element outside B(2L)")
            dist[i] = lookup_len[pos]
    else:
        dist = np.abs(elems[:, None, :] - elems[None, :, :]).sum(-1).astype(float)
    return FiniteMetricMeasureSpace.from_distance_matrix(dist, np.ones(m)), elems
