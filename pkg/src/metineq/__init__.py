"""Difference quotients, Poincare-type ratios and norm inequalities on finite
metric spaces, discrete Heisenberg groups, fractal graphs, spheres and
p-adically normed graph operators."""

from ._util import ResourceLimitError
from .space import FiniteMetricMeasureSpace, average, d_epsilon, graph_difference, mean_oscillation, poincare_ratio

__version__ = "0.1.0"

__all__ = [
    "ResourceLimitError",
    "FiniteMetricMeasureSpace",
    "average",
    "d_epsilon",
    "graph_difference",
    "mean_oscillation",
    "poincare_ratio",
]
