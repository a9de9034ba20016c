"""Shared plumbing: resource caps and order-preserving chunked evaluation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_MAX_ELEMENTS = 2_000_000
DEFAULT_MAX_VERTICES = 500_000
DEFAULT_MAX_SAMPLES = 10_000_000


class ResourceLimitError(RuntimeError):
    """Raised instead of silently truncating a computation that exceeds a cap."""

    def __init__(self, cap_name: str, cap: int, requested: int | None = None):
        self.cap_name = cap_name
        self.cap = cap
        self.requested = requested
        msg = f"{cap_name} cap of {cap} exceeded"
        if requested is not None:
            msg += f" (requested {requested})"
        super().__init__(msg)


def chunk_slices(n: int, chunk: int) -> list[slice]:
    return [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` and return results in input order.

    Chunk boundaries never depend on ``workers``, so reductions built on top of
    this are bit-identical for any worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def ordered_sum(parts: Iterable[np.ndarray | float]) -> np.ndarray | float:
    total = 0.0
    for p in parts:
        total = total + p
    return total
