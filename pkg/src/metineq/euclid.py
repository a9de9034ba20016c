"""Euclidean and spherical checks: recovering a function from its gradient,
Riesz-potential bounds, weak-type superlevel volumes, isoperimetric ratios of
closed-form shapes, and Monte Carlo Poincare ratios on spheres for the
tangential and complex-tangential gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma

from ._util import DEFAULT_MAX_SAMPLES, ResourceLimitError, chunk_slices, ordered_map

__all__ = [
    "sphere_area",
    "ball_volume",
    "TestFunction",
    "bump",
    "QuadratureSpec",
    "QuadratureError",
    "riesz_reconstruct",
    "riesz_upper_bound",
    "GridSpec",
    "PointMassMeasure",
    "riesz_potential",
    "superlevel_volume",
    "weak_type_ratio",
    "isoperimetric_constant",
    "ShapeSpec",
    "isoperimetric_check",
    "SphereFunction",
    "tangential_gradient",
    "complex_structure",
    "cr_gradient",
    "sample_sphere",
    "PoincareEstimate",
    "sphere_poincare_ratio",
]


def sphere_area(k: int) -> float:
    """Surface measure of the unit sphere ``S^k`` in ``R^{k+1}``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return float(2 * math.pi ** ((k + 1) / 2) / gamma((k + 1) / 2))


def ball_volume(n: int) -> float:
    """Volume of the unit ball in ``R^n``."""
    return float(math.pi ** (n / 2) / gamma(n / 2 + 1))


# -- test functions ------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Compactly supported C^1 function on ``R^n`` with its gradient.

    ``value`` and ``grad`` take arrays of shape ``(..., n)``.
    """

    __test__ = False  # not a pytest class

    n: int
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    center: tuple[float, ...] | None = None

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def scaled(self, a: float) -> "TestFunction":
        return TestFunction(self.n, lambda x: a * self.value(x), lambda x: a * self.grad(x),
                            self.support_radius, self.center)

    @property
    def origin(self) -> np.ndarray:
        return np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)


def bump(n: int, k: int = 2, radius: float = 1.0, center=None, height: float = 1.0) -> TestFunction:
    """``height * (1 - |x - center|^2 / radius^2)^k`` inside the ball, 0 outside (k >= 2)."""
    if k < 2:
        raise ValueError("k >= 2 keeps the bump continuously differentiable")
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    R2 = radius * radius

    def value(x):
        q = 1.0 - ((x - c) ** 2).sum(-1) / R2
        return height * np.where(q > 0, np.maximum(q, 0.0) ** k, 0.0)

    def grad(x):
        d = x - c
        q = 1.0 - (d**2).sum(-1) / R2
        coef = np.where(q > 0, -2.0 * k * height * np.maximum(q, 0.0) ** (k - 1) / R2, 0.0)
        return coef[..., None] * d

    return TestFunction(n, value, grad, radius, tuple(c.tolist()))


# -- gradient representation ---------------------------------------------

class QuadratureError(ArithmeticError):
    def __init__(self, estimate: float, tol: float):
        self.estimate = estimate
        super().__init__(f"estimated quadrature error {estimate:.3g} exceeds tolerance {tol:.3g}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Polar quadrature centred at the evaluation point.

    Radial: composite midpoint rule with ``base_radial * 2**levels`` panels on
    ``[0, R]`` where ``R`` reaches past the support. Angular: ``n_angles``
    equispaced angles (n = 2), or ``n_angles`` Gauss-Legendre nodes in
    ``cos(theta)`` times ``2 * n_angles`` azimuths (n = 3).
    ``tol`` bounds the Richardson error estimate; ``None`` disables the check.
    """

    levels: int = 6
    base_radial: int = 4
    n_angles: int = 64
    tol: float | None = None

    def refined(self, extra: int = 1) -> "QuadratureSpec":
        return QuadratureSpec(self.levels + extra, self.base_radial, self.n_angles, self.tol)


def _directions(n: int, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    if n == 2:
        phi = 2 * np.pi * np.arange(spec.n_angles) / spec.n_angles
        return np.column_stack((np.cos(phi), np.sin(phi))), np.full(spec.n_angles, 2 * np.pi / spec.n_angles)
    if n == 3:
        u, wu = np.polynomial.legendre.leggauss(spec.n_angles)
        m = 2 * spec.n_angles
        phi = 2 * np.pi * np.arange(m) / m
        s = np.sqrt(1 - u**2)
        dirs = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(u, np.ones(m))], axis=-1)
        w = np.outer(wu, np.full(m, 2 * np.pi / m))
        return dirs.reshape(-1, 3), w.ravel()
    raise NotImplementedError("polar quadrature implemented for n = 2, 3")


def _polar_integral(f: TestFunction, x, spec: QuadratureSpec, integrand) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"point must have {f.n} coordinates")
    dirs, w_ang = _directions(f.n, spec)
    R = np.linalg.norm(x - f.origin) + f.support_radius
    panels = spec.base_radial * 2**spec.levels
    h = R / panels
    r = (np.arange(panels) + 0.5) * h
    total = 0.0
    for sl in chunk_slices(dirs.shape[0], 64):
        pts = x + r[None, :, None] * dirs[sl, None, :]  # (dirs, radii, n)
        vals = integrand(pts, dirs[sl])  # (dirs, radii)
        total += float(np.dot(vals.sum(axis=1), w_ang[sl]))
    return total * h / sphere_area(f.n - 1)


def riesz_reconstruct(f: TestFunction, x, quad: QuadratureSpec | None = None, *,
                      with_error: bool = False):
    """Recover ``f(x)`` from ``grad f`` through the kernel ``(x - y) / |x - y|^n``.

    In polar coordinates about ``x`` the kernel times the Jacobian is bounded and
    the integrand becomes ``-grad f(x + r w) . w``. With ``with_error`` the
    result on ``quad`` is returned together with a Richardson error estimate
    (one extra level); if ``quad.tol`` is set and exceeded, raises
    :class:`QuadratureError`.
    """
    quad = quad or QuadratureSpec()

    def integrand(pts, dirs):
        return -np.einsum("drk,dk->dr", f.grad(pts), dirs)

    return _finish(f, x, quad, integrand, with_error)


def riesz_upper_bound(f: TestFunction, x, quad: QuadratureSpec | None = None, *,
                      with_error: bool = False):
    """``(1/sigma_{n-1}) * integral of |grad f(y)| |x - y|^{1-n} dy``."""
    quad = quad or QuadratureSpec()

    def integrand(pts, dirs):
        return np.linalg.norm(f.grad(pts), axis=-1)

    return _finish(f, x, quad, integrand, with_error)


def _finish(f, x, quad, integrand, with_error):
    if not with_error and quad.tol is None:
        return _polar_integral(f, x, quad, integrand)
    value = _polar_integral(f, x, quad, integrand)
    finer = _polar_integral(f, x, quad.refined(), integrand)
    err = abs(finer - value) * 4.0 / 3.0
    if quad.tol is not None and err > quad.tol:
        raise QuadratureError(err, quad.tol)
    return (value, err) if with_error else value


# -- weak-type estimate --------------------------------------------------

@dataclass(frozen=True)
class PointMassMeasure:
    points: np.ndarray  # (k, n)
    masses: np.ndarray  # (k,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if pts.shape[0] != m.shape[0]:
            raise ValueError("one mass per point")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be positive and finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def scaled(self, lam: float) -> "PointMassMeasure":
        return PointMassMeasure(self.points, lam * self.masses)


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred counting grid.

    With ``box=None`` each superlevel set gets its own box: the bounding box of
    the point masses padded by ``pad`` times the radius beyond which the
    potential is provably below ``t``.
    """

    cells: int = 801
    box: tuple[tuple[float, float], ...] | None = None
    pad: float = 1.25


def riesz_potential(mu: PointMassMeasure, x: np.ndarray) -> np.ndarray:
    n = mu.n
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1])
    for y, m in zip(mu.points, mu.masses):
        r = np.sqrt(((x - y) ** 2).sum(-1))
        with np.errstate(divide="ignore"):
            out += m / r ** (n - 1)
    return out / sphere_area(n - 1)


def superlevel_volume(mu: PointMassMeasure, t: float, grid: GridSpec | None = None) -> float:
    """Volume of ``{U >= t}`` by counting cell centres."""
    grid = grid or GridSpec()
    n = mu.n
    if grid.box is None:
        reach = (mu.total_mass / (sphere_area(n - 1) * t)) ** (1.0 / (n - 1))
        lo = mu.points.min(0) - grid.pad * reach
        hi = mu.points.max(0) + grid.pad * reach
    else:
        lo = np.array([b[0] for b in grid.box], dtype=float)
        hi = np.array([b[1] for b in grid.box], dtype=float)
    if grid.cells**n > 50_000_000:
        raise ResourceLimitError("grid cells", 50_000_000, grid.cells**n)
    axes = [lo[k] + (np.arange(grid.cells) + 0.5) * (hi[k] - lo[k]) / grid.cells for k in range(n)]
    cell_vol = float(np.prod((hi - lo) / grid.cells))
    count = 0
    boundary_hit = False
    # sweep along the first axis in slabs
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1)
    for k, a in enumerate(axes[0]):
        pts = np.column_stack((np.full(rest.shape[0], a), rest))
        inside = riesz_potential(mu, pts) >= t
        count += int(inside.sum())
        if k in (0, grid.cells - 1) and inside.any():
            boundary_hit = True
        elif inside.any():
            on_edge = np.zeros(rest.shape[0], dtype=bool)
            for d in range(n - 1):
                on_edge |= (rest[:, d] == axes[d + 1][0]) | (rest[:, d] == axes[d + 1][-1])
            if (inside & on_edge).any():
                boundary_hit = True
    if boundary_hit:
        raise ValueError(f"superlevel set at t={t} touches the grid boundary")
    return count * cell_vol


def weak_type_ratio(mu: PointMassMeasure, t_grid: Sequence[float], grid: GridSpec | None = None,
                    *, per_t: bool = False):
    """``sup_t Vol{U >= t} * t^{n/(n-1)} / M^{n/(n-1)}`` over ``t_grid``.

    With ``per_t`` the individual ratios are returned alongside the sup.
    """
    n = mu.n
    if n < 2:
        raise ValueError("dimension must be >= 2")
    p = n / (n - 1)
    M = mu.total_mass
    ratios = []
    for t in t_grid:
        if not t > 0:
            raise ValueError("t must be positive")
        ratios.append(superlevel_volume(mu, t, grid) * t**p / M**p)
    best = max(ratios)
    return (best, ratios) if per_t else best


# -- isoperimetry --------------------------------------------------------

def isoperimetric_constant(n: int) -> float:
    """The constant that makes ``Vol_n <= c_n * Vol_{n-1}(boundary)^{n/(n-1)}`` sharp on balls."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return ball_volume(n) ** (-1.0 / (n - 1)) * n ** (-n / (n - 1))


@dataclass(frozen=True)
class ShapeSpec:
    kind: str  # "ball", "cube" or "box"
    n: int
    size: tuple[float, ...]  # (r,), (side,), or one side per axis

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        size = tuple(float(s) for s in np.atleast_1d(self.size))
        if any(s <= 0 for s in size):
            raise ValueError("sizes must be positive")
        if self.kind in ("ball", "cube") and len(size) != 1:
            raise ValueError(f"{self.kind} takes a single size")
        if self.kind == "box" and len(size) != self.n:
            raise ValueError("box takes one side per axis")
        if self.kind not in ("ball", "cube", "box"):
            raise ValueError(f"unknown shape {self.kind!r}")
        object.__setattr__(self, "size", size)

    @classmethod
    def ball(cls, n: int, r: float) -> "ShapeSpec":
        return cls("ball", n, (r,))

    @classmethod
    def cube(cls, n: int, side: float) -> "ShapeSpec":
        return cls("cube", n, (side,))

    @classmethod
    def box(cls, sides: Sequence[float]) -> "ShapeSpec":
        return cls("box", len(sides), tuple(sides))

    def dilated(self, lam: float) -> "ShapeSpec":
        return ShapeSpec(self.kind, self.n, tuple(lam * s for s in self.size))

    def volume_and_area(self) -> tuple[float, float]:
        n = self.n
        if self.kind == "ball":
            r = self.size[0]
            return ball_volume(n) * r**n, sphere_area(n - 1) * r ** (n - 1)
        sides = self.size * n if self.kind == "cube" else self.size
        vol = math.prod(sides)
        area = 2 * sum(math.prod(sides[:k] + sides[k + 1:]) for k in range(n))
        return vol, area


def isoperimetric_check(shape: ShapeSpec) -> float:
    """``Vol / (c_n * Area^{n/(n-1)})``; at most 1, equal to 1 for balls.

    Volume and area are taken in units of ``shape.size[0]``, where the ratio is
    scale-free, so a dilation changes nothing but that unit.
    """
    unit = shape.dilated(1.0 / shape.size[0])
    vol, area = unit.volume_and_area()
    return vol / (isoperimetric_constant(shape.n) * area ** (shape.n / (shape.n - 1)))


# -- spheres -------------------------------------------------------------

@dataclass(frozen=True)
class SphereFunction:
    """Polynomial on ``R^d`` restricted to the unit sphere ``S^{d-1}``.

    ``value``/``grad`` act on arrays of shape ``(N, d)``; ``grad`` is the
    ambient gradient.
    """

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    name: str = "f"

    def affine(self, a: float, b: float = 0.0) -> "SphereFunction":
        return SphereFunction(self.dim, lambda w: a * self.value(w) + b, lambda w: a * self.grad(w),
                              f"{a}*{self.name}+{b}")

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "SphereFunction":
        """``w_i`` (0-based real coordinate)."""
        e = np.zeros(dim)
        e[i] = 1.0
        return cls(dim, lambda w: w[..., i], lambda w: np.broadcast_to(e, w.shape).copy(), f"w{i}")

    @classmethod
    def product(cls, dim: int, i: int, j: int) -> "SphereFunction":
        """``w_i * w_j`` (0-based)."""

        def grad(w):
            g = np.zeros_like(w)
            g[..., i] += w[..., j]
            g[..., j] += w[..., i]
            return g

        return cls(dim, lambda w: w[..., i] * w[..., j], grad, f"w{i}*w{j}")

    @classmethod
    def norm_squared(cls, dim: int) -> "SphereFunction":
        return cls(dim, lambda w: (w**2).sum(-1), lambda w: 2 * w, "|w|^2")

    @classmethod
    def real_part(cls, m1: int, k: int) -> "SphereFunction":
        """``Re w_k`` on ``C^{m1}`` with 1-based complex index ``k``."""
        return cls.coordinate(2 * m1, 2 * (k - 1))

    @classmethod
    def imag_part(cls, m1: int, k: int) -> "SphereFunction":
        return cls.coordinate(2 * m1, 2 * (k - 1) + 1)


def _check_unit(z: np.ndarray) -> None:
    if np.any(np.abs(np.linalg.norm(z, axis=-1) - 1.0) > 1e-12):
        raise ValueError("points must be unit vectors (|z| = 1 within 1e-12)")


def tangential_gradient(f: SphereFunction, z) -> np.ndarray:
    """Ambient gradient minus its radial component."""
    z = np.asarray(z, dtype=float)
    _check_unit(z)
    g = f.grad(z)
    return g - (g * z).sum(-1, keepdims=True) * z


def complex_structure(z: np.ndarray) -> np.ndarray:
    """Multiplication by ``i`` on ``C^{m+1} = R^{2m+2}`` with pairs ``(Re, Im)``."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] % 2:
        raise ValueError("need an even number of real coordinates")
    out = np.empty_like(z)
    out[..., 0::2] = -z[..., 1::2]
    out[..., 1::2] = z[..., 0::2]
    return out


def cr_gradient(f: SphereFunction, z) -> np.ndarray:
    """Tangential gradient with the ``i z`` component removed as well."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] % 2 or z.shape[-1] < 4:
        raise ValueError("complex-tangential gradient needs an odd sphere S^{2m+1}, m >= 1")
    gt = tangential_gradient(f, z)
    iz = complex_structure(z)
    return gt - (gt * iz).sum(-1, keepdims=True) * iz


def sample_sphere(dim: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on ``S^{dim-1}`` from normalised Gaussian vectors."""
    g = rng.standard_normal((N, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True)
class PoincareEstimate:
    ratio: float
    stderr: float
    numerator: float
    denominator: float
    denominator_stderr: float
    samples: int


class UnstableRatioError(ArithmeticError):
    pass


_MC_CHUNK = 1 << 14


def sphere_poincare_ratio(f: SphereFunction, kind: str = "tangential", *, N: int = 100_000, seed: int = 0,
                          n_boot: int = 200, workers: int = 1,
                          max_samples: int = DEFAULT_MAX_SAMPLES) -> PoincareEstimate:
    """Monte Carlo estimate of ``int |f - Av f| / int |grad f|`` on ``S^{dim-1}``.

    ``kind`` selects the tangential or the complex-tangential (``"cr"``)
    gradient. Both integrals use the same samples, so the surface measure
    cancels. Sums are reduced chunk by chunk in a fixed order, so results are
    identical for any ``workers``. The standard error is a bootstrap over
    samples.
    """
    if kind not in ("tangential", "cr"):
        raise ValueError(f"unknown gradient kind {kind!r}")
    if N > max_samples:
        raise ResourceLimitError("Monte Carlo samples", max_samples, N)
    if N < 2:
        raise ValueError("need at least 2 samples")
    dim = f.dim
    if kind == "cr" and (dim % 2 or dim < 4):
        raise ValueError("cr gradient needs an odd sphere S^{2m+1}, m >= 1")
    rng = np.random.default_rng(seed)
    z = sample_sphere(dim, N, rng)
    slices = chunk_slices(N, _MC_CHUNK)

    def chunk_vals(sl):
        w = z[sl]
        g = f.grad(w)
        g2 = (g * g).sum(1)
        gz = (g * w).sum(1)
        # squared norms by Pythagoras, so the cr norm never exceeds the tangential one
        sq = np.maximum(g2 - gz * gz, 0.0)
        if kind == "cr":
            giz = (g * complex_structure(w)).sum(1)
            sq = np.maximum(sq - giz * giz, 0.0)
        return f.value(w), np.sqrt(sq)

    parts = ordered_map(chunk_vals, slices, workers)
    vals = np.concatenate([p[0] for p in parts])
    grads = np.concatenate([p[1] for p in parts])
    if np.ptp(vals) <= 1e-12 * max(1.0, float(np.abs(vals).max())):
        raise ValueError("f is constant on the sample")
    av = _chunked_mean(vals, slices)
    dev = np.abs(vals - av)
    num = _chunked_mean(dev, slices)
    den = _chunked_mean(grads, slices)
    den_se = float(grads.std(ddof=1) / math.sqrt(N))
    if den <= 3 * den_se:
        raise UnstableRatioError(f"gradient integral {den:.3g} is within 3 standard errors of 0")
    boot_rng = np.random.default_rng([seed, 1])
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = boot_rng.integers(0, N, N)
        v = vals[idx]
        boots[b] = np.abs(v - v.mean()).mean() / grads[idx].mean()
    return PoincareEstimate(num / den, float(boots.std(ddof=1)), num, den, den_se, N)


def _chunked_mean(x: np.ndarray, slices) -> float:
    total = 0.0
    for sl in slices:
        total += float(x[sl].sum())
    return total / x.size
