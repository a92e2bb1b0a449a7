"""Radial kernels ``rho`` of the generalized Riesz potential and their admissibility checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError, PreconditionError
from .grids import log_grid, refine_log_grid, summarize
from .quadrature import TailResult, dyadic_tail, integrate, suffix_integrals
from .reports import ConditionReport

FAMILIES = ("power", "power-log", "table")
DEFAULT_GRID = (1e-3, 1e3, 65)
GROWTH_SAMPLES = 33


def default_grid() -> np.ndarray:
    return log_grid(*DEFAULT_GRID)


@dataclass(frozen=True)
class Kernel:
    """A positive radial kernel ``rho`` on ``(0, inf)`` in dimension ``n``.

    Families
    --------
    ``power``
        ``rho(t) = t**alpha`` with ``0 < alpha < n``.
    ``power-log``
        ``rho(t) = t**alpha * log(e + t)**beta`` with ``0 < alpha < n``.
    ``table``
        Piecewise-linear interpolation of ``(t_i, rho_i)`` nodes with
        strictly increasing ``t_i > 0``, and zero outside ``[t_0, t_last]``.
        Zero values are allowed so that compactly supported and vanishing
        kernels can be expressed.

    Every family satisfies ``int_0^1 rho(t) dt / t < inf``, which is what
    makes the potential computable near its singularity.
    """

    family: str
    n: int
    alpha: float = 0.0
    beta: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise PreconditionError(f"dimension must satisfy 1 <= n <= 3, got {self.n!r}")
        if self.family in ("power", "power-log"):
            if not (0 < self.alpha < self.n):
                raise PreconditionError(f"power kernels need 0 < alpha < n, got alpha={self.alpha}, n={self.n}")
        else:
            t, v = self._nodes()
            if t.size < 2:
                raise PreconditionError("table kernels need at least two nodes")
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
                raise PreconditionError("table kernel contains non-finite values")
            if t[0] <= 0 or np.any(np.diff(t) <= 0):
                raise PreconditionError("table kernel abscissae must be positive and strictly increasing")
            if np.any(v < 0):
                raise PreconditionError("table kernel values must be nonnegative")
            object.__setattr__(self, "table", tuple(zip(t.tolist(), v.tolist())))

    # construction helpers ---------------------------------------------------

    @classmethod
    def power(cls, alpha: float, n: int = 1) -> "Kernel":
        return cls("power", n, alpha=float(alpha))

    @classmethod
    def power_log(cls, alpha: float, beta: float, n: int = 1) -> "Kernel":
        return cls("power-log", n, alpha=float(alpha), beta=float(beta))

    @classmethod
    def from_table(cls, t, values, n: int = 1) -> "Kernel":
        return cls("table", n, table=tuple(zip(np.asarray(t, float).tolist(), np.asarray(values, float).tolist())))

    @classmethod
    def from_file(cls, path, n: int = 1) -> "Kernel":
        """Load a two-column text file ``t rho(t)``."""
        data = np.loadtxt(Path(path), ndmin=2)
        if data.shape[1] != 2:
            raise PreconditionError(f"{path}: expected two columns, found {data.shape[1]}")
        return cls.from_table(data[:, 0], data[:, 1], n)

    def _nodes(self):
        arr = np.asarray(self.table, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    # evaluation -------------------------------------------------------------

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "power":
            return t**self.alpha
        if self.family == "power-log":
            return t**self.alpha * np.log(math.e + t) ** self.beta
        nodes, vals = self._nodes()
        return np.interp(t, nodes, vals, left=0.0, right=0.0)

    @property
    def breaks(self) -> tuple:
        """Points where ``rho`` is not smooth."""
        if self.family == "table":
            return tuple(self._nodes()[0].tolist())
        return ()

    @property
    def support_end(self) -> float:
        return self._nodes()[0][-1] if self.family == "table" else math.inf

    @property
    def near_zero_exponent(self) -> float:
        """Exponent ``a`` with ``rho(t) = O(t**a)`` as ``t -> 0``."""
        return self.alpha if self.family != "table" else math.inf

    def over_power(self, k: float):
        """The map ``t -> rho(t) * t**-k``."""
        return lambda t: self(t) * np.asarray(t, dtype=float) ** -k

    def to_dict(self) -> dict:
        out = {"family": self.family, "n": int(self.n)}
        if self.family == "table":
            out["table"] = [list(p) for p in self.table]
        else:
            out["alpha"] = self.alpha
            if self.family == "power-log":
                out["beta"] = self.beta
        return out


@dataclass(frozen=True)
class GrowthSpec:
    """Parameters of the growth condition: ``0 < 2 k1 < k2`` and ``C > 0``."""

    k1: float
    k2: float
    C: float

    def __post_init__(self):
        if not (0 < 2 * self.k1 < self.k2 < math.inf):
            raise PreconditionError(f"growth spec needs 0 < 2*k1 < k2 < inf, got k1={self.k1}, k2={self.k2}")
        if not self.C > 0:
            raise PreconditionError(f"growth constant must be positive, got {self.C}")


def tail_integral(kernel: Kernel, tol: float = 1e-10, start: float = 1.0) -> TailResult:
    """``int_start^inf rho(t) t**(-n-1) dt`` with a divergence verdict."""
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    if not start > 0:
        raise PreconditionError("start must be positive")
    return dyadic_tail(kernel.over_power(kernel.n + 1), start, tol=tol, breaks=kernel.breaks)


def tilde_rho(kernel: Kernel, r: float, tol: float = 1e-10) -> float:
    """``r**n * int_r^inf rho(t) t**(-n-1) dt``."""
    if not (np.isscalar(r) and r > 0):
        raise PreconditionError(f"radius must be positive, got {r!r}")
    res = tail_integral(kernel, tol=tol, start=float(r))
    if res.divergent:
        raise DivergenceError(f"kernel tail integral diverges from r={r}", verdict=res)
    return float(r) ** kernel.n * res.value


def tilde_rho_grid(kernel: Kernel, radii, tol: float = 1e-10) -> np.ndarray:
    """:func:`tilde_rho` on an ascending array of radii, sharing one tail."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise PreconditionError("radii must be positive")
    vals, tail = suffix_integrals(kernel.over_power(kernel.n + 1), radii, tol=tol, breaks=kernel.breaks)
    if tail.divergent:
        raise DivergenceError("kernel tail integral diverges", verdict=tail)
    return radii**kernel.n * vals


def _growth_ratios(kernel: Kernel, spec: GrowthSpec, radii: np.ndarray) -> np.ndarray:
    n = kernel.n
    steps = 2.0 ** (np.arange(GROWTH_SAMPLES) / (GROWTH_SAMPLES - 1))
    out = np.empty(radii.shape)
    f = kernel.over_power(n + 1)
    for i, r in enumerate(radii):
        s = r * steps
        extra = [b for b in kernel.breaks if r < b <= 2 * r]
        if extra:
            s = np.concatenate([s, extra])
        lhs = float(np.max(kernel(s) / s**n))
        a, b = spec.k1 * r, spec.k2 * r
        rhs = integrate(f, a, b, breaks=[x for x in kernel.breaks if a < x < b], dyadic=True)
        if lhs == 0.0:
            out[i] = 0.0
        elif rhs <= 0.0:
            out[i] = math.inf
        else:
            out[i] = lhs / rhs
    return out


def check_growth(kernel: Kernel, spec: GrowthSpec, r_grid=None, refine: int = 2) -> ConditionReport:
    """Check ``sup_{r<s<=2r} rho(s)/s^n <= C int_{k1 r}^{k2 r} rho(t) t^{-n-1} dt``.

    The sup over ``s`` uses the closed interval: shipped kernels are
    continuous, so the value at ``s = r`` is a limit of admissible values.
    """
    radii = default_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if radii.size == 0:
        raise PreconditionError("empty grid")
    ratios = _growth_ratios(kernel, spec, radii)
    i = int(np.argmax(ratios))
    c = float(ratios[i])
    stable = math.isfinite(c)
    if refine > 1 and radii.size > 1:
        fine = refine_log_grid(radii, refine)
        j = int(np.argmax(_growth_ratios(kernel, spec, fine)))
        stable = summarize(c, radii[i], i, float(_growth_ratios(kernel, spec, fine[j:j + 1])[0]),
                           fine[j], j in (0, fine.size - 1)).stable
    spread = float(ratios.max() - ratios.min()) / max(float(ratios.max()), 1e-300) if np.isfinite(c) else math.inf
    return ConditionReport(
        "growth",
        holds=bool(c <= spec.C),
        empirical_C=c,
        extremal=float(radii[i]),
        stable=stable,
        divergent=not math.isfinite(c),
        detail={"ratios": ratios, "relative_spread": spread, "k1": spec.k1, "k2": spec.k2, "C": spec.C},
    )


def check_doubling(kernel: Kernel, r_grid=None, C: float | None = None) -> ConditionReport:
    """Smallest ``C`` with ``C^-1 g(t) <= g(r) <= C g(t)`` for ``g = rho/t^n``.

    All grid pairs with ``1/2 <= r/t <= 2`` are compared. ``holds`` means a
    finite constant (or one not above ``C`` when supplied).
    """
    radii = default_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if radii.size == 0:
        raise PreconditionError("empty grid")
    radii = np.sort(radii)
    g = kernel(radii) / radii**kernel.n
    best, pair = 1.0, (float(radii[0]), float(radii[0]))
    for i in range(radii.size):
        j_end = np.searchsorted(radii, 2.0 * radii[i] * (1 + 1e-12), side="right")
        for j in range(i + 1, j_end):
            a, b = g[i], g[j]
            if a == 0.0 and b == 0.0:
                continue
            ratio = math.inf if min(a, b) == 0.0 else max(a / b, b / a)
            if ratio > best:
                best, pair = ratio, (float(radii[i]), float(radii[j]))
    finite = math.isfinite(best)
    holds = finite and (C is None or best <= C)
    return ConditionReport("doubling", holds=holds, empirical_C=best, extremal=pair, divergent=not finite)
