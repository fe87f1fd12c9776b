"""Deterministic quadrature on uniform grids.

All reductions go through a fixed pairwise tree (see ``kernels.pairwise_sum``)
so a result depends only on the sampled values, never on how their
evaluation was scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import UnderResolvedGrid

__all__ = [
    "PhaseSpaceGrid",
    "QuadratureResult",
    "grid_sum",
    "integrate_2d",
    "integrate_1d",
    "simpson_weights",
    "map_points",
]

_CHUNK = 4096


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Square midpoint grid on the complex plane.

    Cell centres sit at ``center + (-hw + (i + 1/2) h) + 1j (-hw + (k + 1/2) h)``
    with ``h = 2 hw / points_per_axis``; every cell carries weight ``h²``.
    """

    half_width: float
    points_per_axis: int = 401
    center: complex = 0j

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be >= 2")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_area(self) -> float:
        return self.step**2

    @property
    def axis(self) -> np.ndarray:
        h = self.step
        return -self.half_width + (np.arange(self.points_per_axis) + 0.5) * h

    def points(self) -> np.ndarray:
        """Complex cell centres, shape ``(P, P)`` indexed ``[imag, real]``."""
        ax = self.axis
        return self.center + ax[None, :] + 1j * ax[:, None]

    def refined(self, factor: int = 2) -> "PhaseSpaceGrid":
        return PhaseSpaceGrid(self.half_width, self.points_per_axis * factor, self.center)

    def boundary_mask(self) -> np.ndarray:
        """Outermost ring of cells."""
        m = np.zeros((self.points_per_axis,) * 2, dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def meta(self) -> dict:
        return {
            "center": self.center,
            "half_width": self.half_width,
            "points_per_axis": self.points_per_axis,
            "cell_area": self.cell_area,
        }


@dataclass(frozen=True)
class QuadratureResult:
    """Integral ``value`` (finest grid) with ``error_estimate = |fine - coarse|``."""

    value: float
    error_estimate: float
    grid_meta: dict = field(default_factory=dict)


def map_points(fn, points: np.ndarray, workers: int = 1) -> np.ndarray:
    """Apply a vectorized ``fn`` to ``points`` in fixed-size chunks.

    Chunk boundaries do not depend on ``workers``, and each output element
    depends only on its own input point, so the result is identical for any
    number of worker threads.  The compiled kernels release the GIL, which
    lets threads run concurrently.
    """
    flat = np.ascontiguousarray(points).ravel()
    if flat.size == 0:
        return np.empty(points.shape)
    slices = [slice(i, min(i + _CHUNK, flat.size)) for i in range(0, flat.size, _CHUNK)]
    if workers <= 1 or len(slices) == 1:
        parts = [np.asarray(fn(flat[s]), dtype=float) for s in slices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda s: np.asarray(fn(flat[s]), dtype=float), slices))
    return np.concatenate(parts).reshape(points.shape)


def grid_sum(values: np.ndarray, weight: float = 1.0) -> float:
    """Pairwise-tree sum of ``values`` times a uniform ``weight``."""
    return weight * kernels.pairwise_sum(np.ascontiguousarray(values, dtype=float).ravel())


def integrate_2d(evaluator, grid: PhaseSpaceGrid, tol: float | None = None, workers: int = 1) -> QuadratureResult:
    """Midpoint rule over ``grid`` with a 2× refinement error estimate.

    Parameters
    ----------
    evaluator : callable
        Vectorized map from complex points to real values.
    grid : PhaseSpaceGrid
    tol : float, optional
        Raise :class:`UnderResolvedGrid` when the estimate exceeds it.
    workers : int
        Thread count for evaluation; does not affect the result.
    """
    coarse = grid_sum(map_points(evaluator, grid.points(), workers), grid.cell_area)
    fine_grid = grid.refined()
    fine = grid_sum(map_points(evaluator, fine_grid.points(), workers), fine_grid.cell_area)
    err = abs(fine - coarse)
    meta = dict(fine_grid.meta(), coarse_points_per_axis=grid.points_per_axis)
    if tol is not None and err > tol:
        raise UnderResolvedGrid(f"2-D quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return QuadratureResult(fine, err, meta)


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` (odd) equally spaced nodes."""
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number (>= 3) of nodes")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def _simpson(evaluator, a, b, n):
    x = np.linspace(a, b, n)
    y = np.asarray(evaluator(x), dtype=float)
    return grid_sum(simpson_weights(n, (b - a) / (n - 1)) * y)


def integrate_1d(evaluator, a: float, b: float, n: int = 801, tol: float | None = None) -> QuadratureResult:
    """Composite Simpson rule on ``[a, b]`` with a refinement error estimate.

    ``n`` is rounded up to the next odd integer.  The reported value uses
    ``2n - 1`` nodes (every interval halved); the error estimate is its
    distance to the ``n``-node result.
    """
    if not a < b:
        raise ValueError("need a < b")
    if n < 3:
        raise ValueError("need n >= 3")
    n += 1 - n % 2
    coarse = _simpson(evaluator, a, b, n)
    fine = _simpson(evaluator, a, b, 2 * n - 1)
    err = abs(fine - coarse)
    if tol is not None and err > tol:
        raise UnderResolvedGrid(f"1-D quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return QuadratureResult(fine, err, {"a": a, "b": b, "nodes": 2 * n - 1})


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
