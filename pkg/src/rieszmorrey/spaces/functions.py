"""Radial scale functions ``phi(x, r)`` and the test-function library."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..quadrature import Special, sphere_rule

PHI_FAMILIES = ("power", "power-log", "table")


@dataclass(frozen=True)
class PhiFunction:
    """A positive function ``phi(x, r)``; the shipped families do not depend on ``x``.

    ``power``: ``scale * r**exponent``; ``power-log``: additionally times
    ``log(e + r)**log_exponent``; ``table``: log-log interpolation of
    ``(r_i, phi_i)`` nodes, extended by the end slopes.
    """

    family: str = "power"
    exponent: float = 0.0
    log_exponent: float = 0.0
    scale: float = 1.0
    table: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.family not in PHI_FAMILIES:
            raise PreconditionError(f"unknown phi family {self.family!r}; expected one of {PHI_FAMILIES}")
        if not self.scale > 0:
            raise PreconditionError("phi scale must be positive")
        if self.family == "table":
            r, v = self._nodes()
            if r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0) or np.any(v <= 0):
                raise PreconditionError("phi table needs >= 2 nodes with increasing r > 0 and phi > 0")

    @classmethod
    def morrey(cls, lam: float, n: int, p: float) -> "PhiFunction":
        """``r**((lam - n)/p)``, the classical Morrey normalization."""
        return cls("power", exponent=(lam - n) / p, label=f"r^(({lam:g}-{n})/{p:g})")

    @classmethod
    def adams(cls, lam: float, n: int) -> "PhiFunction":
        """``r**(lam - n)``, the unpowered scale of the single-phi theorem."""
        return cls("power", exponent=lam - n, label=f"r^({lam:g}-{n})")

    @classmethod
    def power(cls, exponent: float, scale: float = 1.0) -> "PhiFunction":
        return cls("power", exponent=float(exponent), scale=scale)

    def _nodes(self):
        arr = np.asarray(self.table, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def __call__(self, x, r):
        r = np.asarray(r, dtype=float)
        if self.family == "power":
            return self.scale * r**self.exponent
        if self.family == "power-log":
            return self.scale * r**self.exponent * np.log(math.e + r) ** self.log_exponent
        nodes, vals = self._nodes()
        lr, lv = np.log(nodes), np.log(vals)
        x_ = np.log(r)
        out = np.interp(x_, lr, lv)
        lo = (lv[1] - lv[0]) / (lr[1] - lr[0])
        hi = (lv[-1] - lv[-2]) / (lr[-1] - lr[-2])
        out = np.where(x_ < lr[0], lv[0] + lo * (x_ - lr[0]), out)
        out = np.where(x_ > lr[-1], lv[-1] + hi * (x_ - lr[-1]), out)
        return self.scale * np.exp(out)

    def power_of(self, s: float) -> "PhiFunction":
        """``phi**s``."""
        if self.family == "table":
            r, v = self._nodes()
            return PhiFunction("table", table=tuple(zip(r.tolist(), (v**s).tolist())), scale=self.scale**s)
        return PhiFunction(self.family, self.exponent * s, self.log_exponent * s, self.scale**s,
                           label=f"({self.label or self.family})^{s:g}")

    def to_dict(self) -> dict:
        out = {"family": self.family, "scale": self.scale}
        if self.family == "table":
            out["table"] = [list(t) for t in self.table]
        else:
            out["exponent"] = self.exponent
            if self.family == "power-log":
                out["log_exponent"] = self.log_exponent
        return out


# ---------------------------------------------------------------------------
# test functions


def _pt(x, n):
    arr = np.asarray(0.0 if x is None else x, dtype=float).reshape(-1)
    if arr.size == 1 and n > 1:
        arr = np.full(n, float(arr[0])) if arr[0] == 0 else arr
    if arr.size != n:
        raise PreconditionError(f"expected a point in R^{n}, got {x!r}")
    return tuple(arr.tolist())


def as_points(y, n: int) -> np.ndarray:
    """Coerce ``y`` to an ``(m, n)`` array of points."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1, 1)
    if y.ndim == 1:
        y = y.reshape(-1, 1) if n == 1 else y.reshape(1, n)
    if y.shape[-1] != n:
        raise PreconditionError(f"points must have {n} coordinates")
    return y.reshape(-1, n)


def _dist(y, c):
    return np.linalg.norm(y - np.asarray(c), axis=1)


class TestFunction:
    """Base class for inputs of the norms and operators.

    Subclasses provide pointwise evaluation on ``(m, n)`` point arrays and
    the structural data quadrature needs: ``specials`` (jump spheres and
    singular points), ``support`` (enclosing ball or ``None``), and a
    ``majorant``: a non-increasing ``M`` with ``|f(y)| <= M(|y - c|)`` for the
    ``majorant_center`` ``c``.
    """

    __test__ = False  # keep pytest from collecting the class
    name = "f"
    n: int = 1
    nonnegative = True

    def __call__(self, y) -> np.ndarray:
        return self._eval(as_points(y, self.n))

    def _eval(self, y):
        raise NotImplementedError

    @property
    def specials(self) -> tuple:
        return ()

    @property
    def support(self):
        """``(center, radius)`` of a ball containing the support, or ``None``."""
        return None

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def majorant_center(self) -> tuple:
        return (0.0,) * self.n

    def majorant(self, s):
        raise NotImplementedError

    @property
    def peak(self) -> float:
        return float(self.majorant(np.array([0.0]))[0])

    def support_radius_from(self, x) -> float:
        """Radius of a ball about ``x`` outside which ``f`` vanishes."""
        sup = self.support
        if self.is_zero:
            return 0.0
        if sup is None:
            return math.inf
        c, r = sup
        return math.dist(c, x) + r

    def singular_points(self):
        """``[(point, exponent)]`` for the point singularities of ``|f|``."""
        return [(s.point, s.exponent) for s in self.specials if s.singular and s.exponent < 0]

    def ess_sup(self, center, radius) -> float:
        """``ess sup |f|`` on ``B(center, radius)`` (polar sample, singular points exact)."""
        center = np.asarray(_pt(center, self.n))
        for p, e in self.singular_points():
            if np.linalg.norm(np.asarray(p) - center) < radius:
                return math.inf
        dirs, _ = sphere_rule(self.n)
        radial = radius * (np.arange(0, 257) / 256.0) * (1 - 1e-12)
        pts = center + (radial[:, None, None] * dirs[None]).reshape(-1, self.n)
        vals = np.abs(self._eval(pts))
        vals = vals[np.isfinite(vals)]
        return float(vals.max()) if vals.size else 0.0

    # algebra ---------------------------------------------------------------

    def __mul__(self, c):
        return Scaled(self, float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        return Sum(self, other)

    def __neg__(self):
        return Scaled(self, -1.0)

    def restrict(self, center, radius, inside: bool = True) -> "TestFunction":
        """``f * chi_B`` (``inside``) or ``f * chi_{complement of B}``."""
        return Restricted(self, _pt(center, self.n), float(radius), inside)

    def dilate(self, lam: float) -> "TestFunction":
        """``y -> f(lam * y)``."""
        return Dilated(self, float(lam))

    def __repr__(self):
        return self.name


class Zero(TestFunction):
    def __init__(self, n: int = 1):
        self.n = n
        self.name = "zero"

    def _eval(self, y):
        return np.zeros(y.shape[0])

    @property
    def is_zero(self):
        return True

    @property
    def support(self):
        return ((0.0,) * self.n, 0.0)

    def majorant(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def ess_sup(self, center, radius):
        return 0.0


class BallIndicator(TestFunction):
    """``height * chi_{B(center, radius)}``."""

    def __init__(self, n: int = 1, radius: float = 1.0, center=None, height: float = 1.0):
        if not radius > 0:
            raise PreconditionError("indicator radius must be positive")
        self.n, self.radius, self.height = n, float(radius), float(height)
        self.center = _pt(center, n)
        self.nonnegative = height >= 0
        self.name = f"indicator(r={radius:g})" if not any(self.center) else f"indicator(c={list(self.center)},r={radius:g})"

    def _eval(self, y):
        return np.where(_dist(y, self.center) < self.radius, self.height, 0.0)

    @property
    def specials(self):
        return (Special(self.center, radii=(self.radius,)),)

    @property
    def support(self):
        return (self.center, self.radius)

    @property
    def majorant_center(self):
        return self.center

    def majorant(self, s):
        return np.where(np.asarray(s, dtype=float) < self.radius, abs(self.height), 0.0)

    def ess_sup(self, center, radius):
        return abs(self.height) if math.dist(_pt(center, self.n), self.center) < radius + self.radius else 0.0


class RadialPowerBump(TestFunction):
    """``height * |y - center|**(-gamma) * chi_{B(center, radius)}`` with ``gamma < n``."""

    def __init__(self, n: int = 1, gamma: float = 0.125, radius: float = 1.0, center=None, height: float = 1.0):
        if not gamma < n:
            raise PreconditionError(f"power bump needs gamma < n for local integrability, got gamma={gamma}")
        if not radius > 0:
            raise PreconditionError("bump radius must be positive")
        self.n, self.gamma, self.radius, self.height = n, float(gamma), float(radius), float(height)
        self.center = _pt(center, n)
        self.nonnegative = height >= 0
        self.name = f"power-bump(gamma={gamma:g},r={radius:g})"

    def _eval(self, y):
        d = _dist(y, self.center)
        inside = d < self.radius
        out = np.zeros(y.shape[0])
        with np.errstate(divide="ignore"):
            out[inside] = self.height * d[inside] ** (-self.gamma)
        return out

    @property
    def specials(self):
        return (Special(self.center, radii=(self.radius,), singular=self.gamma != 0, exponent=-self.gamma),)

    @property
    def support(self):
        return (self.center, self.radius)

    @property
    def majorant_center(self):
        return self.center

    def majorant(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            inner = np.maximum(s, 0.0) ** (-self.gamma) if self.gamma > 0 else np.full_like(s, self.radius ** (-self.gamma))
        return np.where(s < self.radius, abs(self.height) * inner, 0.0)


class Gaussian(TestFunction):
    """``height * exp(-|y - center|**2 / width**2)``."""

    def __init__(self, n: int = 1, width: float = 1.0, center=None, height: float = 1.0):
        if not width > 0:
            raise PreconditionError("Gaussian width must be positive")
        self.n, self.width, self.height = n, float(width), float(height)
        self.center = _pt(center, n)
        self.nonnegative = height >= 0
        self.name = f"gaussian(w={width:g})"

    def _eval(self, y):
        return self.height * np.exp(-((_dist(y, self.center) / self.width) ** 2))

    @property
    def specials(self):
        # soft markers keep panels resolved where the profile turns over
        return (Special(self.center, radii=(self.width,), graded_spheres=True),)

    @property
    def majorant_center(self):
        return self.center

    def majorant(self, s):
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        return abs(self.height) * np.exp(-((s / self.width) ** 2))


class ComplementPower(TestFunction):
    """``chi_{|y - center| > radius} * |y - center|**(-decay)``; the default decay is ``2n``."""

    def __init__(self, n: int = 1, decay: float | None = None, radius: float = 1.0, center=None, height: float = 1.0):
        self.n = n
        self.decay = float(2 * n if decay is None else decay)
        if not self.decay > 0:
            raise PreconditionError("complement power needs a positive decay exponent")
        self.radius, self.height = float(radius), float(height)
        self.center = _pt(center, n)
        self.nonnegative = height >= 0
        self.name = f"complement-power(d={self.decay:g})"

    def _eval(self, y):
        d = _dist(y, self.center)
        out = np.zeros(y.shape[0])
        outside = d > self.radius
        out[outside] = self.height * d[outside] ** (-self.decay)
        return out

    @property
    def specials(self):
        return (Special(self.center, radii=(self.radius,)),)

    @property
    def majorant_center(self):
        return self.center

    def majorant(self, s):
        s = np.asarray(s, dtype=float)
        return abs(self.height) * np.maximum(s, self.radius) ** (-self.decay)


class RadialTable(TestFunction):
    """Piecewise-linear radial profile about ``center``, zero beyond the last node."""

    def __init__(self, n: int, radii, values, center=None):
        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.size < 2 or r[0] < 0 or np.any(np.diff(r) <= 0) or r.shape != v.shape or not np.all(np.isfinite(v)):
            raise PreconditionError("radial table needs >= 2 finite nodes with increasing radii >= 0")
        self.n, self.r, self.v = n, r, v
        self.center = _pt(center, n)
        self.nonnegative = bool(np.all(v >= 0))
        self.name = f"radial-table({r.size} nodes)"

    def _eval(self, y):
        return np.interp(_dist(y, self.center), self.r, self.v, left=self.v[0], right=0.0)

    @property
    def specials(self):
        return (Special(self.center, radii=tuple(self.r[self.r > 0].tolist())),)

    @property
    def support(self):
        return (self.center, float(self.r[-1]))

    @property
    def majorant_center(self):
        return self.center

    def majorant(self, s):
        s = np.asarray(s, dtype=float)
        tail_max = np.maximum.accumulate(np.abs(self.v)[::-1])[::-1]
        idx = np.clip(np.searchsorted(self.r, s, side="right") - 1, 0, self.r.size - 1)
        return np.where(s <= self.r[-1], tail_max[idx], 0.0)


# ---------------------------------------------------------------------------
# derived views


class Scaled(TestFunction):
    def __init__(self, f: TestFunction, c: float):
        self.f, self.c, self.n = f, c, f.n
        self.nonnegative = f.nonnegative and c >= 0
        self.name = f"{c:g}*{f.name}"

    def _eval(self, y):
        return self.c * self.f._eval(y)

    @property
    def specials(self):
        return self.f.specials

    @property
    def support(self):
        return self.f.support

    @property
    def is_zero(self):
        return self.c == 0 or self.f.is_zero

    @property
    def majorant_center(self):
        return self.f.majorant_center

    def majorant(self, s):
        return abs(self.c) * self.f.majorant(s)

    def ess_sup(self, center, radius):
        return abs(self.c) * self.f.ess_sup(center, radius) if self.c else 0.0


class Sum(TestFunction):
    def __init__(self, f: TestFunction, g: TestFunction):
        if f.n != g.n:
            raise PreconditionError("cannot add functions of different dimensions")
        self.f, self.g, self.n = f, g, f.n
        self.nonnegative = f.nonnegative and g.nonnegative
        self.name = f"({f.name}+{g.name})"

    def _eval(self, y):
        return self.f._eval(y) + self.g._eval(y)

    @property
    def specials(self):
        return self.f.specials + self.g.specials

    @property
    def support(self):
        a, b = self.f.support, self.g.support
        if a is None or b is None:
            return None
        if self.f.is_zero:
            return b
        if self.g.is_zero:
            return a
        (c1, r1), (c2, r2) = a, b
        return (c1, max(r1, math.dist(c1, c2) + r2))

    @property
    def is_zero(self):
        return self.f.is_zero and self.g.is_zero

    @property
    def majorant_center(self):
        return self.f.majorant_center

    def majorant(self, s):
        s = np.asarray(s, dtype=float)
        shift = math.dist(self.f.majorant_center, self.g.majorant_center)
        return self.f.majorant(s) + self.g.majorant(np.maximum(s - shift, 0.0))


class Restricted(TestFunction):
    """``f * chi_B`` or ``f * chi_{complement of B}`` for the open ball ``B``."""

    def __init__(self, f: TestFunction, center, radius: float, inside: bool):
        if not radius > 0:
            raise PreconditionError("restriction radius must be positive")
        self.f, self.center, self.radius, self.inside, self.n = f, center, radius, inside, f.n
        self.nonnegative = f.nonnegative
        where = "in" if inside else "out"
        self.name = f"{f.name}|{where}(c={list(center)},r={radius:g})"

    def _eval(self, y):
        d = _dist(y, self.center)
        keep = d < self.radius if self.inside else d >= self.radius
        out = np.zeros(y.shape[0])
        if keep.any():
            out[keep] = self.f._eval(y[keep])
        return out

    @property
    def specials(self):
        return self.f.specials + (Special(self.center, radii=(self.radius,)),)

    @property
    def support(self):
        if not self.inside:
            return self.f.support
        own = (self.center, self.radius)
        sup = self.f.support
        return own if sup is None or sup[1] >= self.radius else sup

    @property
    def is_zero(self):
        return self.f.is_zero

    @property
    def majorant_center(self):
        return self.f.majorant_center

    def majorant(self, s):
        s = np.asarray(s, dtype=float)
        m = self.f.majorant(s)
        if self.inside:
            reach = math.dist(self.center, self.f.majorant_center) + self.radius
            m = np.where(s < reach, m, 0.0)
        return m


class Dilated(TestFunction):
    """``y -> f(lam * y)``."""

    def __init__(self, f: TestFunction, lam: float):
        if not lam > 0:
            raise PreconditionError("dilation factor must be positive")
        self.f, self.lam, self.n = f, lam, f.n
        self.nonnegative = f.nonnegative
        self.name = f"{f.name}({lam:g}.)"

    def _eval(self, y):
        return self.f._eval(self.lam * y)

    @property
    def specials(self):
        return tuple(
            Special(
                tuple(np.asarray(s.point) / self.lam),
                radii=tuple(r / self.lam for r in s.radii),
                singular=s.singular,
                exponent=s.exponent,
                graded_spheres=s.graded_spheres,
            )
            for s in self.f.specials
        )

    @property
    def support(self):
        sup = self.f.support
        if sup is None:
            return None
        c, r = sup
        return (tuple(np.asarray(c) / self.lam), r / self.lam)

    @property
    def is_zero(self):
        return self.f.is_zero

    @property
    def majorant_center(self):
        return tuple(np.asarray(self.f.majorant_center) / self.lam)

    def majorant(self, s):
        return self.f.majorant(self.lam * np.asarray(s, dtype=float))


class Poisoned(TestFunction):
    """Wraps ``f`` but returns NaN inside ``B(0, radius)``; used to exercise error isolation."""

    def __init__(self, f: TestFunction, radius: float = 0.5):
        self.f, self.n, self.bad = f, f.n, radius
        self.name = f"poisoned({f.name})"

    def _eval(self, y):
        out = self.f._eval(y)
        return np.where(np.linalg.norm(y, axis=1) < self.bad, np.nan, out)

    @property
    def specials(self):
        return self.f.specials

    @property
    def support(self):
        return self.f.support

    @property
    def majorant_center(self):
        return self.f.majorant_center

    def majorant(self, s):
        return self.f.majorant(s)
