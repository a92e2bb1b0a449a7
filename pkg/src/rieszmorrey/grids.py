"""Log-spaced grids and grid suprema with refinement-stability flags.

Every "sup over r > 0" in the package is a maximum over a finite log grid.
A supremum is called *stable* when recomputing it on a refined grid changes
it by less than ``rtol``, and *divergent* when the refined value keeps
growing with its maximizer on the boundary of the refined grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

STABILITY_RTOL = 0.05


def log_grid(lo: float, hi: float, num: int) -> np.ndarray:
    """``num`` log-spaced points on ``[lo, hi]`` (endpoints included)."""
    if not (lo > 0 and hi >= lo):
        raise ValueError(f"log grid needs 0 < lo <= hi, got [{lo}, {hi}]")
    if num < 1:
        raise ValueError("log grid needs at least one point")
    if num == 1 or hi == lo:
        return np.array([float(lo)])
    return np.geomspace(lo, hi, num)


def refine_log_grid(grid, factor: int = 2, extend_decades: float = 0.0) -> np.ndarray:
    """Refine a log grid so that it keeps every original point.

    Each log step is split into ``factor`` sub-steps; ``extend_decades``
    appends points at the refined spacing beyond both ends.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        if extend_decades <= 0:
            return grid.copy()
        g = float(grid[0])
        return log_grid(g * 10.0**-extend_decades, g * 10.0**extend_decades, 8 * factor + 1)
    logs = np.log(grid)
    sub = np.linspace(0.0, 1.0, factor + 1)[:-1]
    refined = (logs[:-1, None] + sub * np.diff(logs)[:, None]).ravel()
    refined = np.append(refined, logs[-1])
    if extend_decades > 0:
        step = float(np.min(np.diff(refined)))
        span = extend_decades * math.log(10.0)
        k = int(math.ceil(span / step))
        lo = logs[0] - step * np.arange(k, 0, -1)
        hi = logs[-1] + step * np.arange(1, k + 1)
        refined = np.concatenate([lo, refined, hi])
    out = np.exp(refined)
    out[np.searchsorted(refined, logs)] = grid  # keep the original points bit-exact
    return out


@dataclass(frozen=True)
class GridSup:
    """A grid maximum together with its refinement diagnostics."""

    value: float
    argmax: float
    index: int
    stable: bool
    divergent: bool
    refined_value: float
    refined_argmax: float

    @property
    def relative_change(self) -> float:
        if self.value == self.refined_value:
            return 0.0
        if not (math.isfinite(self.value) and math.isfinite(self.refined_value)):
            return math.inf
        return abs(self.refined_value - self.value) / max(abs(self.value), 1e-300)


def _argmax(values) -> int:
    values = np.asarray(values, dtype=float)
    if np.isnan(values).any():
        raise ValueError("grid values contain NaN")
    return int(np.argmax(values))


def grid_sup(
    evaluate: Callable,
    grid,
    refine_factor: int = 2,
    extend_decades: float = 0.0,
    rtol: float = STABILITY_RTOL,
) -> GridSup:
    """Maximize ``evaluate(grid)`` and re-check on a refined grid.

    ``evaluate`` maps an array of grid points to an array of values. A
    ``refine_factor`` of 1 with no extension skips the second pass and
    reports the result as stable.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    vals = np.asarray(evaluate(grid), dtype=float)
    i = _argmax(vals)
    value = float(vals[i])
    if refine_factor <= 1 and extend_decades <= 0:
        return GridSup(value, float(grid[i]), i, math.isfinite(value), value == math.inf, value, float(grid[i]))
    fine = refine_log_grid(grid, refine_factor, extend_decades)
    fvals = np.asarray(evaluate(fine), dtype=float)
    j = _argmax(fvals)
    fine_value = float(fvals[j])
    return summarize(value, float(grid[i]), i, fine_value, float(fine[j]), j in (0, fine.size - 1), rtol)


def summarize(value, argmax, index, fine_value, fine_argmax, at_edge, rtol=STABILITY_RTOL) -> GridSup:
    """Stability and divergence flags from a coarse and a refined maximum."""
    if value == math.inf or fine_value == math.inf:
        return GridSup(value, argmax, index, False, True, fine_value, fine_argmax)
    scale = max(abs(value), abs(fine_value))
    change = 0.0 if scale == 0 else abs(fine_value - value) / scale
    stable = change < rtol
    divergent = (not stable) and fine_value > value and at_edge
    return GridSup(value, argmax, index, stable, divergent, fine_value, fine_argmax)


@dataclass(frozen=True)
class BallGrid:
    """Balls ``B(c, r)`` for every center in ``centers`` and radius in ``radii``."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        r = np.asarray(self.radii, dtype=float).ravel()
        if r.size and np.any(r <= 0):
            raise ValueError("ball radii must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @property
    def n(self) -> int:
        return self.centers.shape[1]

    @property
    def empty(self) -> bool:
        return self.centers.shape[0] == 0 or self.radii.size == 0

    def __len__(self):
        return self.centers.shape[0] * self.radii.size

    @classmethod
    def default(cls, n: int, centers_per_axis=(0.0, -0.1, 0.1, -1.0, 1.0, -10.0, 10.0),
                radii=None) -> "BallGrid":
        """Centers on a per-axis product set and 33 radii over ``[1e-2, 1e2]``."""
        axes = [np.asarray(centers_per_axis, dtype=float)] * n
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        if radii is None:
            radii = log_grid(1e-2, 1e2, 33)
        return cls(mesh, radii)

    def refined(self, factor: int = 2, extend_decades: float = 0.0) -> "BallGrid":
        return BallGrid(self.centers, refine_log_grid(self.radii, factor, extend_decades))
