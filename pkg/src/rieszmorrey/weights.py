"""Weights on R^n, ball masses and Muckenhoupt-type diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import PreconditionError
from .grids import BallGrid, summarize
from .quadrature import BallProfile, Special, ball_volume, integrate, sphere_area, sphere_rule
from .reports import ConditionReport

WEIGHT_FAMILIES = ("constant", "power", "power-log", "product")
HOLDER_SLACK = 1e-4


def _point(x, n: int) -> tuple:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size == 1 and n > 1 and float(arr[0]) == 0.0:
        arr = np.zeros(n)
    if arr.size != n:
        raise PreconditionError(f"expected a point in R^{n}, got {x!r}")
    return tuple(arr.tolist())


@dataclass(frozen=True)
class Ball:
    """The open ball ``B(center, radius)``."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(-1))
        object.__setattr__(self, "center", c)
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise PreconditionError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return float(ball_volume(self.n, self.radius))

    def scaled(self, k: float) -> "Ball":
        return Ball(self.center, k * self.radius)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Weight:
    """A positive weight from an admissible parametric family.

    Families
    --------
    ``constant``
        ``w = scale``.
    ``power``
        ``w(x) = scale * |x - center|**beta`` with ``beta > -n``.
    ``power-log``
        ``w(x) = scale * |x - center|**beta * log(e + |x - center|)**log_exponent``.
    ``product``
        ``w(x) = scale * prod_i |x - c_i|**beta_i`` with ``factors = ((c_i, beta_i), ...)``.
    """

    family: str
    n: int
    beta: float = 0.0
    center: tuple = ()
    log_exponent: float = 0.0
    scale: float = 1.0
    factors: tuple = ()

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise PreconditionError(f"unknown weight family {self.family!r}; expected one of {WEIGHT_FAMILIES}")
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise PreconditionError(f"dimension must satisfy 1 <= n <= 3, got {self.n!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise PreconditionError("weight scale must be positive")
        object.__setattr__(self, "center", _point(0.0 if np.size(self.center) == 0 else self.center, self.n))
        if self.family == "product":
            if not self.factors:
                raise PreconditionError("product weight needs at least one factor")
            object.__setattr__(
                self, "factors", tuple((_point(c, self.n), float(b)) for c, b in self.factors)
            )
        for c, b in self.powers:
            if not b > -self.n:
                raise PreconditionError(f"weight not locally integrable at {c}: beta > -n violated (beta={b}, n={self.n})")

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, n: int = 1, scale: float = 1.0) -> "Weight":
        return cls("constant", n, scale=scale)

    @classmethod
    def power(cls, beta: float, n: int = 1, center=None, scale: float = 1.0) -> "Weight":
        return cls("power", n, beta=float(beta), center=center if center is not None else (), scale=scale)

    @classmethod
    def product(cls, factors, n: int = 1, scale: float = 1.0) -> "Weight":
        return cls("product", n, factors=tuple(factors), scale=scale)

    # structure --------------------------------------------------------------

    @property
    def powers(self) -> tuple:
        """``((center, beta), ...)`` for every algebraic factor."""
        if self.family == "constant":
            return ()
        if self.family == "product":
            return self.factors
        return ((self.center, self.beta),)

    def specials(self, power: float = 1.0) -> tuple:
        return tuple(
            Special(point=c, singular=True, exponent=power * b) for c, b in self.powers if b != 0.0
        )

    def radial_about(self, x) -> bool:
        if self.family == "constant":
            return True
        x = _point(x, self.n)
        return all(np.allclose(c, x, rtol=0, atol=1e-14) for c, _ in self.powers)

    @property
    def is_pure_power(self) -> bool:
        return self.family == "power" or (self.family == "product" and len(self.factors) == 1)

    # evaluation -------------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.n)
        out = np.full(x.shape[0], self.scale)
        for c, b in self.powers:
            dist = np.linalg.norm(x - np.asarray(c), axis=1)
            out = out * dist**b
            if self.family == "power-log":
                out = out * np.log(math.e + dist) ** self.log_exponent
        return out

    def pow(self, s: float):
        """The map ``x -> w(x)**s``."""
        if s == 1.0:
            return self
        return lambda x: self(x) ** s

    def check_integrable(self, power: float, ball: Ball | None = None, what: str | None = None):
        """Raise unless ``w**power`` is integrable near every singular point in the closed ball."""
        label = what or f"w^{power:g}"
        for c, b in self.powers:
            if ball is not None:
                d = math.dist(c, ball.center)
                if d > ball.radius * (1 + 1e-12):
                    continue
            if not power * b > -self.n:
                raise PreconditionError(
                    f"{label} not locally integrable at {c}: power*beta > -n violated "
                    f"(power*beta={power * b:g}, -n={-self.n})"
                )

    def ess_sup_power(self, s: float, ball: Ball) -> float:
        """``ess sup_{x in ball} w(x)**s``.

        Exact for constant and single-power weights; for the other families
        the maximum over a polar sample of the ball (singular points excluded).
        """
        if self.family == "constant":
            return self.scale**s
        if self.is_pure_power:
            (c, b), = self.powers
            e = s * b
            d = math.dist(c, ball.center)
            R = ball.radius
            if e == 0:
                return self.scale**s
            if e > 0:
                return self.scale**s * (d + R) ** e
            if d < R * (1 + 1e-14):
                return math.inf
            return self.scale**s * (d - R) ** e
        dirs, _ = sphere_rule(self.n)
        radial = ball.radius * (np.arange(1, 129) / 128.0)
        pts = np.asarray(ball.center) + (radial[:, None, None] * dirs[None, :, :]).reshape(-1, self.n)
        pts = np.vstack([pts, np.asarray(ball.center)[None, :]])
        vals = self(pts) ** s
        vals = vals[np.isfinite(vals)]
        return float(vals.max())

    def to_dict(self) -> dict:
        out = {"family": self.family, "n": int(self.n), "scale": self.scale}
        if self.family in ("power", "power-log"):
            out.update(beta=self.beta, center=list(self.center))
        if self.family == "power-log":
            out["log_exponent"] = self.log_exponent
        if self.family == "product":
            out["factors"] = [[list(c), b] for c, b in self.factors]
        return out


@dataclass(frozen=True)
class ExponentSet:
    """Exponents ``1 <= p < q < inf`` and their conjugates."""

    p: float
    q: float
    allow_equal: bool = False
    p_conj: float = field(init=False)
    q_conj: float = field(init=False)

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        ok = 1 <= p and q < math.inf and (q >= p if self.allow_equal else q > p)
        if not ok:
            rel = "<=" if self.allow_equal else "<"
            raise PreconditionError(f"exponents need 1 <= p {rel} q < inf, got p={p}, q={q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p_conj", conjugate(p))
        object.__setattr__(self, "q_conj", conjugate(q))


def conjugate(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1)


@dataclass(frozen=True)
class DerivedExponents:
    r: float
    r_conj: float
    s: float
    s_conj: float


def derived_exponents(e: ExponentSet) -> DerivedExponents:
    """``r = 1 + q/p'``, ``r' = 1 + p'/q``, ``s = 1 + p/q'``, ``s' = 1 + q'/p``."""
    if e.p == 1:
        raise PreconditionError("derived exponents need p > 1 (p' is infinite at p = 1)")
    return DerivedExponents(
        r=1 + e.q / e.p_conj,
        r_conj=1 + e.p_conj / e.q,
        s=1 + e.p / e.q_conj,
        s_conj=1 + e.q_conj / e.p,
    )


# ---------------------------------------------------------------------------
# ball masses


def _primitive(k: float, u, v):
    """``int_u^v t**(k-1) dt`` for ``0 <= u <= v`` (vectorized)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if k == 0:
        with np.errstate(divide="ignore"):
            return np.log(v / u)
    return (v**k - u**k) / k


def _power_mass(n: int, e: float, d: float, R: float) -> float:
    """``int_{B(x,R)} |y - c|**e dy`` with ``|x - c| = d``."""
    k = e + n
    if d <= 1e-14 * R:
        return sphere_area(n) * R**k / k
    if n == 1:
        a, b = d - R, d + R
        if a >= 0:
            return float(_primitive(k, a, b))
        return float(_primitive(k, 0.0, -a) + _primitive(k, 0.0, b))
    # polar coordinates about the singular point, axially symmetric about the
    # line through both centers; psi is the angle to that line
    if n == 2:
        measure = lambda psi: 2.0 * np.ones_like(psi)
    else:
        measure = lambda psi: 2.0 * math.pi * np.sin(psi)
    if abs(d - R) <= 1e-14 * R:
        if n == 2:
            return 2.0 * (2 * d) ** k / k * math.sqrt(math.pi) * gamma_fn((k + 1) / 2) / (2 * gamma_fn(k / 2 + 1))
        return 2.0 * math.pi * (2 * d) ** k / (k * (k + 1))
    if d < R:
        def inner(psi):
            exit_ = d * np.cos(psi) + np.sqrt(R * R - (d * np.sin(psi)) ** 2)
            return _primitive(k, 0.0, exit_) * measure(psi)

        return integrate(inner, 0.0, math.pi, soft=[math.pi / 2])
    psi0 = math.asin(R / d)

    def outer(u):
        psi = psi0 * np.sin(u)
        half = np.sqrt(np.maximum(R * R - (d * np.sin(psi)) ** 2, 0.0))
        mid = d * np.cos(psi)
        return _primitive(k, mid - half, mid + half) * measure(psi) * psi0 * np.cos(u)

    return integrate(outer, 0.0, math.pi / 2, soft=[math.pi / 2])


def ball_mass(w: Weight, power: float, ball: Ball, tol: float = 1e-6) -> float:
    """``int_ball w**power``.

    Constant and single-power weights use closed forms or a one-dimensional
    angular integral; other families fall back to polar quadrature about the
    ball center, graded toward declared singular points.
    """
    if ball.n != w.n:
        raise PreconditionError(f"ball dimension {ball.n} does not match weight dimension {w.n}")
    w.check_integrable(power, ball)
    if w.family == "constant" or power == 0:
        return w.scale**power * ball.volume
    if w.is_pure_power:
        (c, b), = w.powers
        return w.scale**power * _power_mass(w.n, power * b, math.dist(c, ball.center), ball.radius)
    return float(_profile(w, power, ball.center)(ball.radius))


def _profile(w: Weight, power: float, center) -> BallProfile:
    return BallProfile(w.pow(power), center, w.n, specials=w.specials(power), radial=w.radial_about(center))


def ball_masses(w: Weight, power: float, center, radii) -> np.ndarray:
    """``w**power (B(center, r))`` for an array of radii."""
    radii = np.asarray(radii, dtype=float)
    center = _point(center, w.n)
    if radii.size == 0:
        return radii.copy()
    w.check_integrable(power, Ball(center, float(radii.max())))
    if w.family == "constant" or power == 0:
        return w.scale**power * ball_volume(w.n, radii)
    if w.is_pure_power:
        (c, b), = w.powers
        d = math.dist(c, center)
        return np.array([w.scale**power * _power_mass(w.n, power * b, d, r) for r in radii.ravel()]).reshape(radii.shape)
    return _profile(w, power, center)(radii)


# ---------------------------------------------------------------------------
# Muckenhoupt-type diagnostics


def _grid(ball_grid, n: int) -> BallGrid:
    grid = BallGrid.default(n) if ball_grid is None else ball_grid
    if not isinstance(grid, BallGrid):
        grid = BallGrid(*grid)
    if grid.empty:
        raise PreconditionError("empty grid")
    if grid.n != n:
        raise PreconditionError(f"ball grid dimension {grid.n} does not match weight dimension {n}")
    return grid


def _apq_values(w: Weight, e: ExponentSet, grid: BallGrid) -> np.ndarray:
    out = np.empty((grid.centers.shape[0], grid.radii.size))
    vol = ball_volume(w.n, grid.radii)
    for i, c in enumerate(grid.centers):
        first = (ball_masses(w, e.q, c, grid.radii) / vol) ** (1 / e.q)
        if e.p == 1:
            second = np.array([w.ess_sup_power(-1.0, Ball(c, r)) for r in grid.radii])
        else:
            second = (ball_masses(w, -e.p_conj, c, grid.radii) / vol) ** (1 / e.p_conj)
        out[i] = first * second
    return out


def _check_pair(w: Weight, e: ExponentSet):
    w.check_integrable(e.q, what=f"w^{e.q:g} (first factor)")
    if e.p > 1:
        w.check_integrable(-e.p_conj, what=f"w^{-e.p_conj:g} (second factor)")


def _sup_report(name, values, grid: BallGrid, fine_values, fine_grid: BallGrid | None, **extra) -> ConditionReport:
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    value = float(values[i, j])
    ball = Ball(grid.centers[i], float(grid.radii[j]))
    stable = math.isfinite(value)
    refined = value
    if fine_values is not None:
        fi, fj = np.unravel_index(int(np.argmax(fine_values)), fine_values.shape)
        refined = float(fine_values[fi, fj])
        s = summarize(value, ball.radius, int(j), refined, float(fine_grid.radii[fj]), fj in (0, fine_grid.radii.size - 1))
        stable = s.stable
    finite = math.isfinite(value)
    return ConditionReport(
        name,
        holds=finite,
        empirical_C=value,
        extremal=ball.to_dict(),
        stable=stable,
        divergent=not finite,
        detail={"refined_value": refined, **extra},
    )


def apq_characteristic(w: Weight, e: ExponentSet, ball_grid=None, refine: int = 2) -> ConditionReport:
    """Grid estimate of the ``A_{p,q}`` characteristic.

    ``sup_B (|B|^-1 int_B w^q)^{1/q} (|B|^-1 int_B w^{-p'})^{1/p'}``; for
    ``p = 1`` the second factor is ``ess sup_B 1/w``. ``empirical_C`` holds
    the estimate and ``extremal`` the maximizing ball.
    """
    grid = _grid(ball_grid, w.n)
    _check_pair(w, e)
    values = _apq_values(w, e, grid)
    fine = fine_values = None
    if refine > 1:
        fine = grid.refined(refine)
        fine_values = _apq_values(w, e, fine)
    return _sup_report("apq", values, grid, fine_values, fine, p=e.p, q=e.q)


def holder_lower_bound_check(w: Weight, e: ExponentSet, ball_grid=None) -> ConditionReport:
    """Check ``|B|^{1/p-1/q-1} ||w||_{L_q(B)} ||1/w||_{L_p'(B)} >= 1`` on every grid ball.

    ``empirical_C`` is the smallest observed value; the check holds when it
    is at least ``1 - 1e-4``.
    """
    grid = _grid(ball_grid, w.n)
    _check_pair(w, e)
    vals = np.empty((grid.centers.shape[0], grid.radii.size))
    vol = ball_volume(w.n, grid.radii)
    for i, c in enumerate(grid.centers):
        a = ball_masses(w, e.q, c, grid.radii) ** (1 / e.q)
        if e.p == 1:
            b = np.array([w.ess_sup_power(-1.0, Ball(c, r)) for r in grid.radii])
        else:
            b = ball_masses(w, -e.p_conj, c, grid.radii) ** (1 / e.p_conj)
        vals[i] = vol ** (1 / e.p - 1 / e.q - 1) * a * b
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    low = float(vals[i, j])
    return ConditionReport(
        "holder-lower-bound",
        holds=bool(low >= 1 - HOLDER_SLACK),
        empirical_C=low,
        extremal=Ball(grid.centers[i], float(grid.radii[j])).to_dict(),
        detail={"balls": int(vals.size)},
    )


def reverse_doubling_check(w: Weight, power: float, alpha1: float, alpha2: float, ball_grid=None) -> ConditionReport:
    """Check ``w^power(B(x, r)) <= alpha2 * w^power(B(x, alpha1 r))`` on every grid ball.

    ``empirical_C`` is the largest observed ratio.
    """
    if not alpha1 > 1:
        raise PreconditionError("reverse doubling needs alpha1 > 1")
    if not 0 < alpha2 < 1:
        raise PreconditionError("reverse doubling needs 0 < alpha2 < 1")
    grid = _grid(ball_grid, w.n)
    vals = np.empty((grid.centers.shape[0], grid.radii.size))
    for i, c in enumerate(grid.centers):
        vals[i] = ball_masses(w, power, c, grid.radii) / ball_masses(w, power, c, alpha1 * grid.radii)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    worst = float(vals[i, j])
    return ConditionReport(
        "reverse-doubling",
        holds=bool(worst <= alpha2),
        empirical_C=worst,
        extremal=Ball(grid.centers[i], float(grid.radii[j])).to_dict(),
        detail={"alpha1": alpha1, "alpha2": alpha2, "power": power},
    )
