"""Sierpinski gasket and carpet approximation graphs, and fields whose
oscillation is squeezed into shrinking neighbourhoods of the gasket's cut
vertices.

The level-``m`` gasket lives on the triangular lattice of mesh ``2**-m`` inside
the triangle with corners ``(0, 0)``, ``(1, 0)``, ``(1/2, sqrt(3)/2)``. A vertex
is stored by integer lattice coordinates ``(i, j)`` meaning
``i * u + j * v`` with ``u = (1, 0) / 2**m`` and ``v = (1/2, sqrt(3)/2) / 2**m``,
so corner identification between copies is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import DEFAULT_MAX_VERTICES, ResourceLimitError
from .space import FiniteMetricMeasureSpace, d_epsilon, mean_oscillation

__all__ = [
    "GasketGraph",
    "CarpetGraph",
    "CutConcentrator",
    "DecayRow",
    "build_gasket",
    "build_carpet",
    "concentrator_field",
    "decay_table",
]

_SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class GasketGraph:
    level: int
    lattice: np.ndarray  # (V, 2) integer lattice coordinates
    coords: np.ndarray  # (V, 2) planar coordinates
    edges: np.ndarray  # (E, 2) vertex index pairs, u < v

    @property
    def n_vertices(self) -> int:
        return self.lattice.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return np.full(self.n_vertices, 1.0 / self.n_vertices)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def index_of(self, i: int, j: int) -> int:
        hit = np.flatnonzero((self.lattice[:, 0] == i) & (self.lattice[:, 1] == j))
        if hit.size != 1:
            raise KeyError((i, j))
        return int(hit[0])

    def space(self, metric: str = "euclidean") -> FiniteMetricMeasureSpace:
        """Restricted Euclidean metric (default) or graph word metric."""
        return FiniteMetricMeasureSpace.from_graph(
            self.n_vertices, self.edges, self.mu, coords=self.coords, metric=metric
        )

    def top_piece(self, x: np.ndarray | None = None) -> np.ndarray:
        """Index 0, 1, 2 of the top-level subtriangle (lower-left, lower-right, top)
        holding each vertex; shared corners go to the lowest index."""
        lat = self.lattice if x is None else x
        half = 2 ** self.level // 2 if self.level else 0
        if self.level == 0:
            return np.zeros(lat.shape[0], dtype=int)
        i, j = lat[:, 0], lat[:, 1]
        lower_right = (j < half) | ((i == half) & (j == half))
        return np.where(i + j <= half, 0, np.where(lower_right, 1, 2))


def _lattice_to_plane(lat: np.ndarray, level: int) -> np.ndarray:
    h = 2.0 ** -level
    i = lat[:, 0].astype(float)
    j = lat[:, 1].astype(float)
    return np.column_stack(((i + 0.5 * j) * h, _SQRT3_2 * j * h))


def build_gasket(m: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> GasketGraph:
    """Level-``m`` gasket graph: 3**m unit triangles glued at corners."""
    if m < 0:
        raise ValueError("level must be non-negative")
    n_vertices = (3 ** (m + 1) + 3) // 2
    if n_vertices > max_vertices:
        raise ResourceLimitError("fractal vertices", max_vertices, n_vertices)
    # lower-left corners of the small triangles, in lattice units
    corners = np.zeros((1, 2), dtype=np.int64)
    for k in range(m):
        size = 2 ** (m - k - 1)
        shifts = np.array([[0, 0], [size, 0], [0, size]], dtype=np.int64)
        corners = (corners[None, :, :] + shifts[:, None, :]).reshape(-1, 2)
    tri = np.stack([corners, corners + [1, 0], corners + [0, 1]], axis=1)  # (3^m, 3, 2)
    flat = tri.reshape(-1, 2)
    lattice, inverse = np.unique(flat, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1, 3)
    e = np.concatenate([inverse[:, [0, 1]], inverse[:, [1, 2]], inverse[:, [0, 2]]])
    e.sort(axis=1)
    edges = np.unique(e, axis=0)
    return GasketGraph(m, lattice, _lattice_to_plane(lattice, m), edges)


@dataclass(frozen=True)
class CarpetGraph:
    level: int
    cells: np.ndarray  # (V, 2) integer cell indices on the 3**m grid
    coords: np.ndarray  # cell centres in the unit square
    edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.cells.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return np.full(self.n_vertices, 1.0 / self.n_vertices)

    def space(self, metric: str = "euclidean") -> FiniteMetricMeasureSpace:
        return FiniteMetricMeasureSpace.from_graph(
            self.n_vertices, self.edges, self.mu, coords=self.coords, metric=metric
        )


def build_carpet(m: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> CarpetGraph:
    """Level-``m`` carpet: centres of the ``8**m`` retained squares, side adjacency."""
    if m < 0:
        raise ValueError("level must be non-negative")
    if 8**m > max_vertices:
        raise ResourceLimitError("fractal vertices", max_vertices, 8**m)
    keep = np.array([(a, b) for a in range(3) for b in range(3) if (a, b) != (1, 1)], dtype=np.int64)
    cells = np.zeros((1, 2), dtype=np.int64)
    for _ in range(m):
        cells = (3 * cells[:, None, :] + keep[None, :, :]).reshape(-1, 2)
    cells = cells[np.lexsort((cells[:, 1], cells[:, 0]))]
    side = 3**m
    lookup = {tuple(c): k for k, c in enumerate(cells.tolist())}
    edges = []
    for k, (a, b) in enumerate(cells.tolist()):
        for da, db in ((1, 0), (0, 1)):
            other = lookup.get((a + da, b + db))
            if other is not None:
                edges.append((k, other))
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    coords = (cells + 0.5) / side
    return CarpetGraph(m, cells, coords, edges)


@dataclass(frozen=True)
class CutConcentrator:
    """Field equal to 0 deep inside the lower-left top-level subtriangle and 1
    deep inside the rest, switching linearly within ``delta`` of the two cut
    vertices ``(1/2, 0)`` and ``(1/4, sqrt(3)/4)``.

    ``low``/``high`` are the two plateau values; setting them equal gives the
    degenerate constant field.
    """

    gasket: GasketGraph
    delta: float
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 1/2]")

    @property
    def cut_vertices(self) -> np.ndarray:
        return np.array([[0.5, 0.0], [0.25, _SQRT3_2 / 2]])


def concentrator_field(c: CutConcentrator) -> np.ndarray:
    g = c.gasket
    if g.level == 0:
        raise ValueError("level 0 has no cut vertices")
    plateau = np.where(g.top_piece() == 0, c.low, c.high)
    r = np.min(np.linalg.norm(g.coords[:, None, :] - c.cut_vertices[None, :, :], axis=2), axis=1)
    mid = 0.5 * (c.low + c.high)
    w = np.minimum(r / c.delta, 1.0)
    return mid + (plateau - mid) * w


@dataclass(frozen=True)
class DecayRow:
    delta: float
    eps: float
    integral_d_eps: float
    mean_oscillation: float
    ratio: float


def decay_table(m: int, deltas, *, workers: int = 1, max_vertices: int = DEFAULT_MAX_VERTICES,
                gasket: GasketGraph | None = None) -> list[DecayRow]:
    """Integral of ``D_eps f`` (``eps = delta / 2``) for the concentrator at each delta.

    The mesh must resolve every transition zone with at least four cells:
    ``2**-m <= min(deltas) / 4``.
    """
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValueError("no deltas given")
    if 2.0**-m > min(deltas) / 4:
        raise ValueError(f"mesh 2^-{m} too coarse for delta={min(deltas)}; need 2^-m <= delta/4")
    g = gasket if gasket is not None else build_gasket(m, max_vertices)
    space = g.space("euclidean")
    rows = []
    for delta in deltas:
        f = concentrator_field(CutConcentrator(g, delta))
        eps = delta / 2
        integral = float(np.dot(d_epsilon(space, f, eps, workers), space.mu))
        osc = mean_oscillation(space, f)
        ratio = osc / integral if integral > 0 else math.inf
        rows.append(DecayRow(delta, eps, integral, osc, ratio))
    return rows
