"""Functions on the half line, tail transforms and the weighted Hardy operator.

Conventions for extended arithmetic: ``1/inf = 0`` and ``0 * inf = 0``.
Infinite results are returned as ``inf`` (a verdict), never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, PreconditionError
from .grids import grid_sup, log_grid
from .quadrature import TailResult, dyadic_tail, suffix_integrals
from .reports import ConditionReport

HALF_LINE_FAMILIES = ("power", "power-log", "table")
DEFAULT_T_GRID = (1e-4, 1e4, 129)
TAIL_DECADES = 3
SAMPLES_PER_DECADE = 32
POWER_LOG_SPAN = 12  # decades scanned for non-monotone power-log tails


def default_t_grid() -> np.ndarray:
    return log_grid(*DEFAULT_T_GRID)


def _times(a, b):
    """Product with ``0 * inf = 0``."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.array(a * b, dtype=float)
    out[(a == 0) | (b == 0)] = 0.0
    return out


def _over(a, b):
    """Quotient with ``1/inf = 0``, ``0/x = 0`` and ``x/0 = inf`` for ``x > 0``."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.full(a.shape, math.inf)
    ok = (b > 0) & np.isfinite(b)
    np.divide(a, b, out=out, where=ok)
    out[np.isinf(b)] = 0.0
    out[a == 0] = 0.0
    return out


@dataclass(frozen=True)
class HalfLineFunction:
    """A nonnegative function on ``(0, inf)``.

    Families
    --------
    ``power``
        ``coef * t**gamma``.
    ``power-log``
        ``coef * t**gamma * log(e + t)**beta``.
    ``table``
        Nodes ``(t_i, v_i)``, linear in ``log t`` between nodes and constant
        beyond the end nodes.

    The monotonicity flags are exact for ``power`` and ``table`` and sampled
    on ``[1e-8, 1e8]`` for ``power-log``.
    """

    family: str
    coef: float = 1.0
    gamma: float = 0.0
    beta: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.family not in HALF_LINE_FAMILIES:
            raise PreconditionError(f"unknown family {self.family!r}; expected one of {HALF_LINE_FAMILIES}")
        if not (math.isfinite(self.coef) and self.coef >= 0):
            raise PreconditionError("coefficient must be finite and nonnegative")
        if self.family == "table":
            arr = np.asarray(self.table, dtype=float).reshape(-1, 2)
            if arr.shape[0] < 1:
                raise PreconditionError("table needs at least one node")
            if not np.all(np.isfinite(arr)) or np.any(arr[:, 0] <= 0) or np.any(np.diff(arr[:, 0]) <= 0):
                raise PreconditionError("table abscissae must be positive, finite and strictly increasing")
            if np.any(arr[:, 1] < 0):
                raise PreconditionError("table values must be nonnegative")
            object.__setattr__(self, "table", tuple(map(tuple, arr.tolist())))

    @classmethod
    def constant(cls, c: float = 1.0) -> "HalfLineFunction":
        return cls("power", coef=float(c))

    @classmethod
    def power(cls, gamma: float, coef: float = 1.0) -> "HalfLineFunction":
        return cls("power", coef=float(coef), gamma=float(gamma))

    @classmethod
    def power_log(cls, gamma: float, beta: float, coef: float = 1.0) -> "HalfLineFunction":
        return cls("power-log", coef=float(coef), gamma=float(gamma), beta=float(beta))

    @classmethod
    def from_table(cls, t, values) -> "HalfLineFunction":
        return cls("table", table=tuple(zip(np.asarray(t, float).tolist(), np.asarray(values, float).tolist())))

    def _nodes(self):
        arr = np.asarray(self.table, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == "table":
            nodes, vals = self._nodes()
            return np.interp(np.log(t), np.log(nodes), vals)
        if self.coef == 0:
            return np.zeros_like(t)
        out = self.coef * t**self.gamma
        if self.family == "power-log":
            out = out * np.log(math.e + t) ** self.beta
        return out

    @property
    def is_zero(self) -> bool:
        if self.family == "table":
            return not np.any(self._nodes()[1])
        return self.coef == 0

    @property
    def breaks(self) -> tuple:
        return tuple(self._nodes()[0].tolist()) if self.family == "table" else ()

    def _diffs(self):
        if self.family == "table":
            return np.diff(self._nodes()[1])
        if self.is_zero:
            return np.zeros(1)
        if self.family == "power":
            return np.array([self.gamma])
        t = np.geomspace(1e-8, 1e8, 16 * SAMPLES_PER_DECADE + 1)
        return np.diff(self(t))

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(self._diffs() >= 0))

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(self._diffs() <= 0))

    def _limit(self, sign: int) -> float:
        if self.is_zero:
            return 0.0
        if self.family == "table":
            vals = self._nodes()[1]
            return float(vals[-1] if sign > 0 else vals[0])
        g = sign * self.gamma
        if g == 0 and sign > 0 and self.family == "power-log":
            g = self.beta  # log(e + t) grows; at the origin it tends to 1
        if g > 0:
            return math.inf
        return 0.0 if g < 0 else self.coef

    @property
    def limit_at_infinity(self) -> float:
        return self._limit(+1)

    @property
    def limit_at_zero(self) -> float:
        return self._limit(-1)

    @property
    def in_cone(self) -> bool:
        """Non-decreasing with limit zero at the origin."""
        return self.nondecreasing and self.limit_at_zero == 0.0

    def to_dict(self) -> dict:
        if self.family == "table":
            return {"family": "table", "table": [list(p) for p in self.table]}
        out = {"family": self.family, "coef": self.coef, "gamma": self.gamma}
        if self.family == "power-log":
            out["beta"] = self.beta
        return out


# ---------------------------------------------------------------------------
# tail transforms


def _tail_extreme(g: HalfLineFunction, ts, mode: str, tail_grid=None) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise PreconditionError("t must be positive")
    pick = np.max if mode == "sup" else np.min
    limit = g.limit_at_infinity
    if tail_grid is None:
        if (mode == "sup" and g.nonincreasing) or (mode == "inf" and g.nondecreasing):
            return g(ts)
        if (mode == "sup" and g.nondecreasing) or (mode == "inf" and g.nonincreasing):
            return np.full(ts.shape, limit)
    out = np.empty(ts.shape)
    for i, t in enumerate(ts):
        if tail_grid is not None:
            grid = np.asarray(tail_grid, dtype=float)
            if grid.max() < t * 10.0**TAIL_DECADES * (1 - 1e-12):
                raise PreconditionError(f"tail grid must extend {TAIL_DECADES} decades beyond t={t:g}")
            grid = grid[grid > t]
        elif g.family == "table":
            nodes = g._nodes()[0]
            grid = nodes[nodes > t]  # piecewise linear: extremes sit at nodes
        else:
            grid = np.geomspace(t, t * 10.0**POWER_LOG_SPAN, POWER_LOG_SPAN * SAMPLES_PER_DECADE + 1)[1:]
        vals = np.concatenate([g(np.array([t])), g(grid), [limit]])
        out[i] = float(pick(vals))
    return out


def supremal_transform(g: HalfLineFunction, t, tail_grid=None):
    """``ess sup_{s > t} g(s)``; ``inf`` when the tail grows without bound.

    Monotone inputs use the closed form (value at ``t`` or the limit at
    infinity); tables are exact at their nodes; otherwise the maximum over
    ``tail_grid`` (which must reach three decades beyond ``t``) or over a
    default 12-decade log grid is returned, joined with the limit at infinity.
    Scalar ``t`` gives a float, arrays give arrays.
    """
    out = _tail_extreme(g, t, "sup", tail_grid)
    return float(out[0]) if np.ndim(t) == 0 else out


def infimal_transform(g: HalfLineFunction, t, tail_grid=None):
    """``ess inf_{s > t} g(s)``, the counterpart of :func:`supremal_transform`."""
    out = _tail_extreme(g, t, "inf", tail_grid)
    return float(out[0]) if np.ndim(t) == 0 else out


def weighted_hardy(g: HalfLineFunction, w: HalfLineFunction, t: float, tol: float = 1e-10) -> TailResult:
    """``int_t^inf g(s) w(s) ds`` with a dyadic divergence verdict."""
    if not t > 0:
        raise PreconditionError("t must be positive")
    if g.is_zero or w.is_zero:
        return TailResult(0.0, False, 0.0, 0)
    return dyadic_tail(lambda s: _times(g(s), w(s)), t, tol=tol, breaks=sorted(set(g.breaks + w.breaks)))


def _hardy_profile(g_times_w, ts, breaks, tol=1e-10) -> np.ndarray:
    """``int_t^inf`` for every ``t`` of an ascending grid; ``inf`` when divergent or non-finite."""
    try:
        vals, tail = suffix_integrals(g_times_w, ts, tol=tol, breaks=breaks)
    except EvaluationError:
        return np.full(np.shape(ts), math.inf)
    return vals


# ---------------------------------------------------------------------------
# best constant and embedding


@dataclass(frozen=True)
class HardyConstant:
    """Grid estimate of the best constant with its verdicts."""

    value: float
    divergent: bool
    t_star: float
    stable: bool

    def __float__(self):
        return math.inf if self.divergent else float(self.value)

    def to_dict(self) -> dict:
        from .reports import jsonable

        return jsonable({"B_estimate": self.value, "divergent": self.divergent, "t_star": self.t_star,
                         "stable": self.stable})


def _check_bounded_away(w1: HalfLineFunction):
    if not math.isfinite(supremal_transform(w1, 1.0)):
        raise PreconditionError("w1 must be bounded outside a neighborhood of the origin")


def _b_values(w1, w2, w, ts):
    ts = np.sort(np.asarray(ts, dtype=float))
    if w.is_zero or w2.is_zero:
        return np.zeros(ts.shape)

    def integrand(s):
        return _over(w(s), supremal_transform(w1, np.asarray(s)))

    inner = _hardy_profile(integrand, ts, sorted(set(w.breaks + w1.breaks)))
    return _times(w2(ts), inner)


def best_constant_B(w1: HalfLineFunction, w2: HalfLineFunction, w: HalfLineFunction, t_grid=None,
                    refine: int = 2) -> HardyConstant:
    """``sup_t w2(t) int_t^inf w(s) / (ess sup_{tau > s} w1(tau)) ds`` on a log grid.

    The stability pass refines the grid and extends it one decade at both
    ends; a maximum that keeps growing at the edge is reported divergent.
    """
    _check_bounded_away(w1)
    grid = default_t_grid() if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if grid.size == 0:
        raise PreconditionError("empty grid")
    res = grid_sup(lambda ts: _b_values(w1, w2, w, ts), grid, refine_factor=max(refine, 1), extend_decades=1.0)
    divergent = res.divergent or not math.isfinite(res.value)
    return HardyConstant(math.inf if divergent else res.value, divergent, res.argmax, res.stable)


def hardy_sides(w1: HalfLineFunction, w2: HalfLineFunction, w: HalfLineFunction, g: HalfLineFunction,
                t_grid=None) -> tuple:
    """``(sup_t w2 H_w g, sup_t w1 g)`` for one non-decreasing ``g``.

    The right side is taken over the grid extended by four decades below and
    eight above, and the limit at infinity when it is known.
    """
    grid = default_t_grid() if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if not g.nondecreasing:
        raise PreconditionError("g is not non-decreasing")
    if g.is_zero or w.is_zero:
        return 0.0, float(np.max(_times(w1(grid), g(grid))))
    lhs = float(np.max(_times(w2(grid), _hardy_profile(lambda s: _times(g(s), w(s)), grid,
                                                     sorted(set(g.breaks + w.breaks))))))
    wide = np.geomspace(grid[0] * 1e-4, grid[-1] * 1e8, 513)
    rhs = float(np.max(_times(w1(wide), g(wide))))
    lim = _times(w1.limit_at_infinity, g.limit_at_infinity)
    rhs = max(rhs, float(lim)) if np.isfinite(lim) else math.inf
    return lhs, rhs


def hardy_inequality_check(w1: HalfLineFunction, w2: HalfLineFunction, w: HalfLineFunction, samples,
                           C: float | None = None, t_grid=None) -> ConditionReport:
    """Test ``sup_t w2 H_w g <= C sup_t w1 g`` for non-decreasing samples ``g``.

    ``C`` defaults to the best constant times ``1 + 1e-6``; both sides come
    from :func:`hardy_sides`.
    """
    grid = default_t_grid() if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if C is None:
        C = float(best_constant_B(w1, w2, w, grid)) * (1 + 1e-6)
    ratios = []
    worst, worst_i = 0.0, None
    for i, g in enumerate(samples):
        if not g.nondecreasing:
            raise PreconditionError(f"sample {i} is not non-decreasing")
        lhs, rhs = hardy_sides(w1, w2, w, g, grid)
        r = 0.0 if lhs == 0 else float(_over(lhs, rhs))
        ratios.append(r)
        if r > worst or worst_i is None:
            worst, worst_i = r, i
    finite = math.isfinite(worst)
    return ConditionReport("hardy-inequality", holds=bool(finite and worst <= C), empirical_C=worst,
                           extremal=worst_i, divergent=not finite, detail={"C": C, "ratios": ratios})


def identity_embedding_check(w1: HalfLineFunction, w2: HalfLineFunction, t_grid=None,
                             refine: int = 2) -> ConditionReport:
    """``sup_t w2(t) / ess sup_{s > t} w1(s)`` with a divergence verdict."""
    grid = default_t_grid() if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if grid.size == 0:
        raise PreconditionError("empty grid")

    def values(ts):
        tail = supremal_transform(w1, np.asarray(ts))
        bad = ~((tail > 0) & np.isfinite(tail))
        if np.any(bad):
            raise PreconditionError(
                f"need 0 < ess sup of w1 over (t, inf) < inf; violated at t={float(np.asarray(ts)[bad][0]):g}")
        return _times(w2(ts), 1.0 / tail)

    res = grid_sup(values, grid, refine_factor=max(refine, 1), extend_decades=1.0)
    divergent = res.divergent or not math.isfinite(res.value)
    value = math.inf if divergent else res.value
    return ConditionReport("identity-embedding", holds=not divergent, empirical_C=value, extremal=res.argmax,
                           stable=res.stable, divergent=divergent)
