"""Finite metric-measure spaces and difference quotients on them.

A :class:`FiniteMetricMeasureSpace` is a finite set of points with a metric and
positive point masses. The metric can be held in one of three ways:

* a dense symmetric distance table (small and medium spaces),
* planar or higher-dimensional coordinates with the Euclidean metric, queried
  through a KD-tree,
* the word (hop) metric of a graph, evaluated row by row on demand once the
  space is too large for a dense table.

Scalar fields are plain 1-d float arrays with one entry per point.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from ._util import chunk_slices, ordered_map

__all__ = [
    "FiniteMetricMeasureSpace",
    "average",
    "d_epsilon",
    "graph_difference",
    "mean_oscillation",
    "poincare_ratio",
]

DENSE_LIMIT = 20_000
# Relative slack on the closed-ball test d(x, y) <= eps. Floating coordinates
# put exact ties (e.g. gasket mesh distances) a few ulps either side of eps.
BALL_RTOL = 1e-12
_CHUNK = 256


class FiniteMetricMeasureSpace:
    """Finite metric space with positive weights.

    Use the ``from_*`` constructors rather than calling this directly.
    Instances are treated as immutable; arrays are stored read-only.
    """

    def __init__(self, mu, *, dist=None, coords=None, neighbors=None, metric="table"):
        mu = np.asarray(mu, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a non-empty 1-d array")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise ValueError("point masses must be finite and positive")
        self.n_points = int(mu.size)
        self.mu = _frozen(mu)
        self.metric = metric
        self.coords = None if coords is None else _frozen(np.asarray(coords, dtype=float))
        self.neighbors = None if neighbors is None else tuple(_frozen(np.asarray(nb, dtype=np.intp)) for nb in neighbors)
        self._dist = None if dist is None else _frozen(np.asarray(dist, dtype=float))
        self._tree = None
        self._adj = None

        if metric == "table":
            if self._dist is None or self._dist.shape != (self.n_points, self.n_points):
                raise ValueError("dense metric needs an n_points x n_points distance table")
            d = self._dist
            if np.any(np.diag(d) != 0):
                raise ValueError("dist(i, i) must be 0")
            if not np.array_equal(d, d.T):
                raise ValueError("distance table must be symmetric")
            off = d[~np.eye(self.n_points, dtype=bool)]
            if np.any(off <= 0) or not np.all(np.isfinite(off)):
                raise ValueError("distinct points must be at positive finite distance")
        elif metric == "euclidean":
            if self.coords is None or self.coords.shape[0] != self.n_points:
                raise ValueError("euclidean metric needs one coordinate row per point")
            self._tree = cKDTree(self.coords)
            pairs = self._tree.query_pairs(0.0)
            if pairs:
                raise ValueError("coordinates must be distinct")
        elif metric == "word":
            if self.neighbors is None or len(self.neighbors) != self.n_points:
                raise ValueError("word metric needs an adjacency list")
            self._adj = _adjacency_matrix(self.neighbors, self.n_points)
            ncomp, _ = csgraph.connected_components(self._adj, directed=False)
            if ncomp != 1:
                raise ValueError("graph must be connected for the word metric to be finite")
            if self._dist is None and self.n_points <= DENSE_LIMIT:
                self._dist = _frozen(csgraph.shortest_path(self._adj, method="D", unweighted=True, directed=False))
        else:
            raise ValueError(f"unknown metric {metric!r}")

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_distance_matrix(cls, dist, mu=None, *, coords=None, neighbors=None):
        dist = np.asarray(dist, dtype=float)
        mu = np.ones(dist.shape[0]) if mu is None else mu
        return cls(mu, dist=dist, coords=coords, neighbors=neighbors, metric="table")

    @classmethod
    def from_coords(cls, coords, mu=None, *, neighbors=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        mu = np.ones(coords.shape[0]) if mu is None else mu
        return cls(mu, coords=coords, neighbors=neighbors, metric="euclidean")

    @classmethod
    def from_graph(cls, n_points: int, edges, mu=None, *, coords=None, metric: str = "word"):
        """Space on the vertices ``0..n_points-1`` of an undirected graph.

        ``metric="word"`` uses hop distance (dense table when small enough);
        ``metric="euclidean"`` uses ``coords`` and keeps the edges as adjacency.
        """
        neighbors = neighbors_from_edges(n_points, edges)
        mu = np.ones(n_points) if mu is None else mu
        if metric == "euclidean":
            return cls(mu, coords=coords, neighbors=neighbors, metric="euclidean")
        if metric != "word":
            raise ValueError(f"unknown metric {metric!r}")
        return cls(mu, coords=coords, neighbors=neighbors, metric="word")

    # -- metric access --------------------------------------------------
    @property
    def has_table(self) -> bool:
        return self._dist is not None

    def distances_from(self, i: int) -> np.ndarray:
        if self._dist is not None:
            return self._dist[i]
        if self.metric == "euclidean":
            return np.linalg.norm(self.coords - self.coords[i], axis=1)
        return csgraph.shortest_path(self._adj, method="D", unweighted=True, directed=False, indices=i)

    def dist(self, i: int, j: int) -> float:
        if self._dist is not None:
            return float(self._dist[i, j])
        if self.metric == "euclidean":
            return float(np.linalg.norm(self.coords[i] - self.coords[j]))
        return float(self.distances_from(i)[j])

    def distance_matrix(self) -> np.ndarray:
        if self._dist is not None:
            return self._dist
        if self.n_points > DENSE_LIMIT:
            raise MemoryError(f"refusing a dense table for {self.n_points} points")
        if self.metric == "euclidean":
            diff = self.coords[:, None, :] - self.coords[None, :, :]
            return np.sqrt((diff**2).sum(-1))
        return csgraph.shortest_path(self._adj, method="D", unweighted=True, directed=False)

    def check_metric(self, atol: float = 0.0) -> None:
        """Verify the triangle inequality over all triples (O(n^3))."""
        d = self.distance_matrix()
        for k in range(self.n_points):
            via = d[:, k][:, None] + d[k, :][None, :]
            if np.any(d > via + atol):
                i, j = np.argwhere(d > via + atol)[0]
                raise ValueError(f"triangle inequality fails for ({i}, {k}, {j})")

    @property
    def total_mass(self) -> float:
        return float(self.mu.sum())

    def field(self, values) -> np.ndarray:
        f = np.asarray(values, dtype=float)
        if f.shape != (self.n_points,):
            raise ValueError(f"field has shape {f.shape}, space has {self.n_points} points")
        return f

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        doc: dict = {"n_points": self.n_points, "mu": self.mu.tolist()}
        if self.coords is not None:
            doc["coords"] = self.coords.tolist()
        if self.neighbors is not None:
            doc["edges"] = [[int(u), int(v)] for u, nb in enumerate(self.neighbors) for v in nb if u < v]
        if self.metric == "table":
            doc["dist"] = self._dist.tolist()
        doc["metric"] = self.metric
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FiniteMetricMeasureSpace":
        n = int(doc["n_points"])
        mu = doc.get("mu")
        coords = doc.get("coords")
        metric = doc.get("metric")
        if "dist" in doc:
            space = cls.from_distance_matrix(doc["dist"], mu, coords=coords)
        elif "edges" in doc:
            space = cls.from_graph(n, doc["edges"], mu, coords=coords,
                                   metric="euclidean" if metric == "euclidean" else "word")
        elif coords is not None:
            space = cls.from_coords(coords, mu)
        else:
            raise ValueError("space document needs one of 'dist', 'edges' or 'coords'")
        if space.n_points != n:
            raise ValueError(f"n_points={n} but document describes {space.n_points} points")
        return space

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "FiniteMetricMeasureSpace":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return f"FiniteMetricMeasureSpace(n_points={self.n_points}, metric={self.metric!r})"


def neighbors_from_edges(n_points: int, edges) -> list[np.ndarray]:
    nbrs: list[set[int]] = [set() for _ in range(n_points)]
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError("self-loops are not edges")
        if not (0 <= u < n_points and 0 <= v < n_points):
            raise ValueError(f"edge ({u}, {v}) out of range")
        nbrs[u].add(v)
        nbrs[v].add(u)
    return [np.array(sorted(s), dtype=np.intp) for s in nbrs]


def _adjacency_matrix(neighbors: Sequence[np.ndarray], n: int) -> sparse.csr_matrix:
    rows = np.repeat(np.arange(n), [len(nb) for nb in neighbors])
    cols = np.concatenate(neighbors) if n else np.empty(0, dtype=np.intp)
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# -- operations ---------------------------------------------------------

def average(space: FiniteMetricMeasureSpace, f) -> float:
    """Weighted mean of ``f`` against the point masses."""
    f = space.field(f)
    return float(np.dot(f, space.mu) / space.mu.sum())


def d_epsilon(space: FiniteMetricMeasureSpace, f, eps: float, workers: int = 1) -> np.ndarray:
    """Difference quotient at scale ``eps``.

    ``out[x] = max |f(y) - f(x)| / eps`` over points ``y`` with
    ``d(x, y) <= eps``. The maximum is exact; only ball membership carries the
    relative slack ``BALL_RTOL``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    f = space.field(f)
    radius = eps * (1.0 + BALL_RTOL)
    n = space.n_points

    if space.has_table:
        dist = space.distance_matrix()

        def block(sl):
            inside = dist[sl] <= radius
            jump = np.abs(f[None, :] - f[sl, None])
            return np.where(inside, jump, 0.0).max(axis=1)

    elif space.metric == "euclidean":
        tree = space._tree

        def block(sl):
            hits = tree.query_ball_point(space.coords[sl], r=radius)
            lens = np.fromiter((len(h) for h in hits), dtype=np.intp, count=len(hits))
            idx = np.concatenate([np.asarray(h, dtype=np.intp) for h in hits])
            owner = np.repeat(np.arange(sl.start, sl.stop), lens)
            jump = np.abs(f[idx] - f[owner])
            starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
            return np.maximum.reduceat(jump, starts)

    else:

        def block(sl):
            out = np.empty(sl.stop - sl.start)
            for k, i in enumerate(range(sl.start, sl.stop)):
                inside = space.distances_from(i) <= radius
                out[k] = np.abs(f[inside] - f[i]).max()
            return out

    parts = ordered_map(block, chunk_slices(n, _CHUNK), workers)
    return np.concatenate(parts) / eps


def graph_difference(space: FiniteMetricMeasureSpace, f) -> np.ndarray:
    """Largest jump of ``f`` to an adjacent vertex; 0 at isolated vertices."""
    if space.neighbors is None:
        raise ValueError("space carries no adjacency structure")
    f = space.field(f)
    out = np.zeros(space.n_points)
    for x, nb in enumerate(space.neighbors):
        if nb.size:
            out[x] = np.abs(f[nb] - f[x]).max()
    return out


def mean_oscillation(space: FiniteMetricMeasureSpace, f) -> float:
    """Integral of ``|f - Av(f)|`` against the point masses."""
    f = space.field(f)
    return float(np.dot(np.abs(f - average(space, f)), space.mu))


def poincare_ratio(space: FiniteMetricMeasureSpace, f, eps: float, workers: int = 1) -> float:
    """Mean oscillation of ``f`` divided by the integral of ``D_eps f``.

    Returns ``math.inf`` when ``f`` is constant on every ``eps``-ball but not
    globally constant; raises for a constant ``f``.
    """
    f = space.field(f)
    if np.ptp(f) == 0:
        raise ValueError("poincare_ratio needs a non-constant field")
    num = mean_oscillation(space, f)
    den = float(np.dot(d_epsilon(space, f, eps, workers), space.mu))
    if den == 0:
        return math.inf
    return num / den
