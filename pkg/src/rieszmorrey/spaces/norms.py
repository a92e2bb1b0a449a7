"""Weighted Lebesgue, weak Lebesgue and generalized Morrey (quasi)norms.

All balls are handled in polar coordinates about their center. Strong norms
integrate ``|f|^p w^s`` with graded Gauss-Legendre panels; weak norms use
a distribution-function model built from samples along each ray (see
:class:`_RayCells`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError, PreconditionError
from ..grids import log_grid, refine_log_grid, summarize
from ..quadrature import BallProfile, _panels, ray_breaks, sphere_rule
from ..weights import Ball, Weight, ball_masses
from .functions import PhiFunction, TestFunction, _pt

DEFAULT_R_GRID = (1e-2, 1e2, 33)
LAMBDA_GRID_SIZE = 129


def default_r_grid() -> np.ndarray:
    return log_grid(*DEFAULT_R_GRID)


@dataclass(frozen=True)
class NormResult:
    """A grid supremum over radii (and centers for global norms)."""

    value: float
    r_star: float
    center_star: tuple
    stable: bool
    refined_value: float
    divergent: bool = False

    def to_dict(self) -> dict:
        from ..reports import jsonable

        return jsonable(
            {
                "value": self.value,
                "r_star": self.r_star,
                "center_star": list(self.center_star),
                "stable": self.stable,
                "refined_value": self.refined_value,
            }
        )


# ---------------------------------------------------------------------------
# integrability


def check_lp_integrable(f: TestFunction, w: Weight, power: float, ball: Ball, p: float):
    """Raise unless ``|f|^p w^power`` is integrable near every singular point in the closed ball."""
    w.check_integrable(power, ball)
    if p == math.inf:
        return
    n = f.n
    weight_at = {tuple(c): b for c, b in w.powers}
    for point, e in f.singular_points():
        if math.dist(point, ball.center) > ball.radius * (1 + 1e-12):
            continue
        total = p * e + power * weight_at.get(tuple(point), 0.0)
        if not total > -n:
            raise PreconditionError(
                f"|f|^{p:g} w^{power:g} not integrable at {point}: exponent {total:g} > -n={-n} violated"
            )


def _integrand(f: TestFunction, w: Weight, power: float, p: float):
    dens = w.pow(power)

    def G(y):
        v = np.abs(f._eval(y))
        return (v if p == 1 else v**p) * dens(y)

    return G


def _profile(f, w, power, p, center):
    specials = tuple(f.specials) + tuple(w.specials(power))
    return BallProfile(_integrand(f, w, power, p), center, f.n, specials=specials)


# ---------------------------------------------------------------------------
# strong norms


def lp_norm(f: TestFunction, w: Weight, power: float, ball: Ball, p: float, tol: float = 1e-8) -> float:
    """``(int_ball |f|^p w^power)^{1/p}``; ``p = inf`` gives ``ess sup_ball |f|``."""
    if not p >= 1:
        raise PreconditionError("p must be >= 1")
    _same_dim(f, w, ball)
    if f.is_zero:
        return 0.0
    check_lp_integrable(f, w, power, ball, p)
    if p == math.inf:
        return f.ess_sup(ball.center, ball.radius)
    val = float(_profile(f, w, power, p, ball.center)(ball.radius))
    return max(val, 0.0) ** (1.0 / p)


def lp_norm_profile(f: TestFunction, w: Weight, power: float, center, radii, p: float) -> np.ndarray:
    """``||f chi_{B(center, r)}||_{L_p(w^power)}`` for every radius, sharing one nested quadrature."""
    radii = np.asarray(radii, dtype=float)
    center = _pt(center, f.n)
    if f.is_zero:
        return np.zeros_like(radii)
    check_lp_integrable(f, w, power, Ball(center, float(radii.max())), p)
    if p == math.inf:
        return np.array([f.ess_sup(center, r) for r in radii.ravel()]).reshape(radii.shape)
    vals = _profile(f, w, power, p, center)(radii)
    return np.maximum(vals, 0.0) ** (1.0 / p)


def _same_dim(f, w, ball=None):
    if f.n != w.n or (ball is not None and ball.n != f.n):
        raise PreconditionError("function, weight and ball dimensions differ")


# ---------------------------------------------------------------------------
# weak norms


class _RayCells:
    """Cells of a polar decomposition of ``B(center, R)`` carrying samples of ``|f|``.

    Each cell spans two consecutive samples on a ray and carries its mass
    ``int w^power`` (spread uniformly over the cell) and the two sample
    values. Between samples ``log|f|`` is interpolated linearly in the log of
    the distance to the nearest singular point on the line of the ray, which
    is exact for local power behaviour; without singular points ``|f|`` is
    interpolated linearly. Jumps of
    ``f`` only occur at panel edges and samples are taken just inside each
    panel, so no cell straddles a jump.
    """

    EPS = 1e-12

    def __init__(self, f: TestFunction, w: Weight, power: float, center, R: float, breaks=()):
        n = f.n
        dirs, weights = sphere_rule(n)
        specials = tuple(f.specials) + tuple(w.specials(power))
        dens = w.pow(power)
        gx, gw = np.polynomial.legendre.leggauss(2)
        x20, _ = np.polynomial.legendre.leggauss(20)
        frac = np.concatenate([[self.EPS], 0.5 * (x20 + 1.0), [1.0 - self.EPS]])
        m = frac.size
        c = np.asarray(center, dtype=float)
        cols = {k: [] for k in ("va", "vb", "da", "db", "mass", "t_end")}
        for theta, a_w in zip(dirs, weights):
            brk, sing, soft = ray_breaks(c, theta, specials)
            brk = list(brk) + [x for x in breaks if 0 < x < R]
            edges, _ = _panels(0.0, R, brk, sing, soft, True, float(np.linalg.norm(c)))
            a, b = edges[:-1], edges[1:]
            s = a[:, None] + (b - a)[:, None] * frac
            s[:, 0] = np.maximum(s[:, 0], np.nextafter(a, b))
            s[:, -1] = np.minimum(s[:, -1], np.nextafter(b, a))
            vals = np.abs(f._eval(c + s.reshape(-1, 1) * theta)).reshape(s.shape)
            if not np.all(np.isfinite(vals)):
                bad = float(s[~np.isfinite(vals)][0])
                raise EvaluationError(f"non-finite function value at distance {bad!r} from {tuple(c)}", where=bad)
            anchors = np.asarray(sorted(set(sing) | set(_line_anchors(c, theta, specials))))
            if anchors.size:
                k = np.abs(0.5 * (a + b)[:, None] - anchors[None, :]).argmin(axis=1)
                d = np.abs(s - anchors[k][:, None])
            else:
                d = np.full_like(s, np.nan)  # smooth along this ray: interpolate linearly
            # mass of each cell; the first and last cells absorb the edge slivers
            left = np.concatenate([a[:, None], s[:, 1:-1]], axis=1)
            right = np.concatenate([s[:, 1:-1], b[:, None]], axis=1)
            half = 0.5 * (right - left)
            mid = 0.5 * (right + left)
            tq = mid[..., None] + half[..., None] * gx
            dq = dens(c + tq.reshape(-1, 1) * theta).reshape(tq.shape) * tq ** (n - 1)
            ray = {
                "mass": (a_w * half * (dq @ gw)).ravel(),
                "va": vals[:, :-1].ravel(),
                "vb": vals[:, 1:].ravel(),
                "da": d[:, :-1].ravel(),
                "db": d[:, 1:].ravel(),
                "t_end": right.ravel(),
            }
            for A in sing:
                if A > 0:
                    ray = _collapse_near(ray, s[:, :-1].ravel(), s[:, 1:].ravel(), s.ravel(), vals.ravel(), A)
            for key in cols:
                cols[key].append(ray[key])
        for key, parts in cols.items():
            setattr(self, key, np.concatenate(parts))

    def select(self, r: float) -> "_Cells":
        keep = self.t_end <= r * (1 + 1e-12)
        return _Cells(self.va[keep], self.vb[keep], self.da[keep], self.db[keep], self.mass[keep])

    def all(self) -> "_Cells":
        return _Cells(self.va, self.vb, self.da, self.db, self.mass)


NOISE_ZONE = 2.0**22 * np.finfo(float).eps
TINY = 1e-30


def _collapse_near(ray: dict, sl, sr, S, V, A: float) -> dict:
    """Replace the cells within floating-point noise of the singular point ``A``.

    Positions ``t`` with ``|t - A| < NOISE_ZONE * A`` cannot resolve the
    distance to ``A``. On each side the cells touching that zone are merged
    into one cell whose profile is the power law fitted through the two
    nearest clean samples.
    """
    z = NOISE_ZONE * A
    dirty = (np.abs(sl - A) < z) | (np.abs(sr - A) < z)
    if not dirty.any():
        return ray
    mid = 0.5 * (sl + sr)
    extra = {k: [] for k in ray}
    drop = np.zeros_like(dirty)
    for below in (True, False):
        side = dirty & ((mid < A) if below else (mid > A))
        clean = (S < A - z) if below else (S > A + z)
        if not side.any() or clean.sum() < 2:
            continue
        idx = np.flatnonzero(clean)
        order = np.argsort(S[idx])
        near, far = (idx[order[-1]], idx[order[-2]]) if below else (idx[order[0]], idx[order[1]])
        d2, d1 = abs(S[near] - A), abs(S[far] - A)
        v2, v1 = V[near], V[far]
        k = math.log(v2 / v1) / math.log(d2 / d1) if v1 > 0 and v2 > 0 and d1 != d2 else 0.0
        inner_v, inner_d = v2 * TINY**k, d2 * TINY
        cell = {
            "mass": ray["mass"][side].sum(),
            "va": v2 if below else inner_v,
            "vb": inner_v if below else v2,
            "da": d2 if below else inner_d,
            "db": inner_d if below else d2,
            "t_end": A if below else ray["t_end"][side].max(),
        }
        for key, val in cell.items():
            extra[key].append(val)
        drop |= side
    return {key: np.concatenate([ray[key][~drop], np.asarray(extra[key], dtype=float)]) for key in ray}


def _line_anchors(c, theta, specials):
    """Signed ray positions of singular points on the line through ``c`` along ``theta``."""
    out = []
    for sp in specials:
        if not sp.singular:
            continue
        d = np.asarray(sp.point, dtype=float) - c
        b = float(d @ theta)
        if float(d @ d) - b * b <= (1e-12 * (1.0 + abs(b))) ** 2:
            out.append(b)
    return out


class _Cells:
    """Distribution function ``mu(lam) = w^power{|f| >= lam}`` of a cell model."""

    def __init__(self, va, vb, da, db, mass):
        keep = (mass > 0) & (np.maximum(va, vb) > 0)
        self.va, self.vb, self.da, self.db, self.mass = va[keep], vb[keep], da[keep], db[keep], mass[keep]
        self.lo = np.minimum(self.va, self.vb)
        self.hi = np.maximum(self.va, self.vb)
        order = np.argsort(self.lo)
        self._lo_sorted = self.lo[order]
        self._mass_cum = np.concatenate([[0.0], np.cumsum(self.mass[order])])

    @property
    def empty(self) -> bool:
        return self.mass.size == 0

    def mu(self, lam: float) -> float:
        i = np.searchsorted(self._lo_sorted, lam, side="left")
        full = self._mass_cum[-1] - self._mass_cum[i]
        cross = (self.lo < lam) & (self.hi >= lam)
        if not cross.any():
            return float(full)
        va, vb, da, db = self.va[cross], self.vb[cross], self.da[cross], self.db[cross]
        lo = np.minimum(va, vb)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (math.log(lam) - np.log(va)) / (np.log(vb) - np.log(va))
            dstar = np.exp(np.log(da) + u * (np.log(db) - np.log(da)))
            geo = np.where(va > vb, dstar - da, db - dstar) / (db - da)
            lin = np.where(va > vb, (va - lam) / (va - vb), (vb - lam) / (vb - va))
        ok = (lo > 0) & (da > 0) & (db > 0) & np.isfinite(geo)
        frac = np.clip(np.where(ok, np.abs(geo), lin), 0.0, 1.0)
        return float(full + np.dot(self.mass[cross], frac))

    def weak_sup(self, q: float, lam_grid=None) -> float:
        """``sup_lam lam * mu(lam)^{1/q}`` by candidate search with local refinement.

        Candidates are the plateau values of ``|f|`` (where ``mu`` jumps), a
        log grid spanning the sampled values, and ``lam_grid``; the best
        candidate is then bracketed and refined three times.
        """
        if self.empty:
            return 0.0
        vmax = float(self.hi.max())
        vals = np.concatenate([self.lo, self.hi])
        vmin = float(vals[vals > 0].min())
        decades = math.log10(vmax / vmin) if vmax > vmin else 0.0
        num = int(min(max(8 * decades, LAMBDA_GRID_SIZE), 4000))
        flat = np.unique(self.hi[self.va == self.vb])
        if flat.size > 256:
            flat = flat[np.linspace(0, flat.size - 1, 256).astype(int)]
        cand = [log_grid(vmin, vmax, num), flat[flat > 0]]
        if lam_grid is not None:
            g = np.asarray(lam_grid, dtype=float)
            cand.append(g[(g > 0) & (g <= vmax)])
        lams = np.unique(np.concatenate(cand))
        score = lambda lam: lam * self.mu(lam) ** (1.0 / q)
        vals = np.array([score(x) for x in lams])
        i = int(np.argmax(vals))
        best = float(vals[i])
        lo_b, hi_b = lams[max(i - 1, 0)], lams[min(i + 1, lams.size - 1)]
        for _ in range(3):
            if not hi_b > lo_b:
                break
            sub = log_grid(lo_b, hi_b, 33)
            sv = np.array([score(x) for x in sub])
            j = int(np.argmax(sv))
            best = max(best, float(sv[j]))
            lo_b, hi_b = sub[max(j - 1, 0)], sub[min(j + 1, sub.size - 1)]
        return best


def default_lambda_grid(scale: float) -> np.ndarray:
    return log_grid(1e-6 * scale, 1e6 * scale, LAMBDA_GRID_SIZE)


def weak_lq_norm(f: TestFunction, w: Weight, power: float, ball: Ball, q: float, lam_grid=None) -> float:
    """``sup_{lam > 0} lam * (w^power({x in ball : |f(x)| > lam}))^{1/q}``."""
    if not q >= 1:
        raise PreconditionError("q must be >= 1")
    _same_dim(f, w, ball)
    if lam_grid is not None and np.asarray(lam_grid).size == 0:
        raise PreconditionError("empty threshold grid")
    if f.is_zero:
        return 0.0
    w.check_integrable(power, ball)
    return _RayCells(f, w, power, ball.center, ball.radius).all().weak_sup(q, lam_grid)


def weak_norm_profile(f: TestFunction, w: Weight, power: float, center, radii, q: float, lam_grid=None) -> np.ndarray:
    """:func:`weak_lq_norm` on ``B(center, r)`` for every radius."""
    radii = np.asarray(radii, dtype=float)
    center = _pt(center, f.n)
    if f.is_zero:
        return np.zeros_like(radii)
    R = float(radii.max())
    w.check_integrable(power, Ball(center, R))
    cells = _RayCells(f, w, power, center, R, breaks=radii.ravel().tolist())
    out = np.empty(radii.size)
    for i, r in enumerate(radii.ravel()):
        out[i] = cells.select(r).weak_sup(q, lam_grid)
    return out.reshape(radii.shape)


# ---------------------------------------------------------------------------
# Morrey norms


def _morrey_values(profile_fn, phi: PhiFunction, w: Weight, power: float, p: float, x0, radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    norms = profile_fn(radii)
    masses = ball_masses(w, power, x0, radii)
    return norms / (phi(np.asarray(x0), radii) * masses ** (1.0 / p))


def _local(profile_factory, phi, w, power, p, x0, r_grid, refine):
    radii = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if radii.size == 0:
        raise PreconditionError("empty radius grid")
    vals = _morrey_values(profile_factory, phi, w, power, p, x0, radii)
    i = int(np.argmax(vals))
    value = float(vals[i])
    if refine <= 1 or radii.size < 2:
        return NormResult(value, float(radii[i]), tuple(x0), math.isfinite(value), value)
    fine = refine_log_grid(radii, refine)
    fvals = _morrey_values(profile_factory, phi, w, power, p, x0, fine)
    j = int(np.argmax(fvals))
    s = summarize(value, float(radii[i]), i, float(fvals[j]), float(fine[j]), j in (0, fine.size - 1))
    return NormResult(value, float(radii[i]), tuple(x0), s.stable, s.refined_value, s.divergent)


def morrey_norm_local(f: TestFunction, p: float, phi: PhiFunction, w: Weight, power: float, x0, r_grid=None,
                      refine: int = 2) -> NormResult:
    """``sup_r phi(x0, r)^-1 (w^power(B))^{-1/p} ||f chi_B||_{L_p(w^power)}`` with ``B = B(x0, r)``.

    The supremum is a grid maximum; ``stable`` compares it with the maximum
    on the grid refined ``refine`` times.
    """
    _same_dim(f, w)
    x0 = _pt(x0, f.n)
    if f.is_zero:
        radii = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
        return NormResult(0.0, float(radii[0]), x0, True, 0.0)
    profile = _profile(f, w, power, p, x0) if p != math.inf else None

    def norms(radii):
        if profile is None:
            return lp_norm_profile(f, w, power, x0, radii, p)
        return np.maximum(profile(radii), 0.0) ** (1.0 / p)

    check_lp_integrable(f, w, power, Ball(x0, 1e300), p)
    return _local(norms, phi, w, power, p, x0, r_grid, refine)


def weak_morrey_norm_local(f: TestFunction, q: float, phi: PhiFunction, w: Weight, power: float, x0, r_grid=None,
                           lam_grid=None, refine: int = 2) -> NormResult:
    """The weak counterpart of :func:`morrey_norm_local` (weak ``L_q`` inside the supremum)."""
    _same_dim(f, w)
    x0 = _pt(x0, f.n)
    if f.is_zero:
        radii = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
        return NormResult(0.0, float(radii[0]), x0, True, 0.0)
    return _local(lambda radii: weak_norm_profile(f, w, power, x0, radii, q, lam_grid),
                  phi, w, power, q, x0, r_grid, refine)


def morrey_norm_global(f: TestFunction, p: float, phi: PhiFunction, w: Weight, power: float, center_grid,
                       r_grid=None, refine: int = 2, weak: bool = False) -> NormResult:
    """Add a supremum over ``center_grid`` to the local norm (``weak`` selects the weak variant)."""
    centers = np.atleast_2d(np.asarray(center_grid, dtype=float))
    if f.n == 1 and centers.shape[0] == 1 and centers.shape[1] != 1:
        centers = centers.T
    if centers.size == 0:
        raise PreconditionError("empty center grid")
    best, fine_best = None, None
    for c in centers:
        if weak:
            res = weak_morrey_norm_local(f, p, phi, w, power, c, r_grid, refine=refine)
        else:
            res = morrey_norm_local(f, p, phi, w, power, c, r_grid, refine=refine)
        if best is None or res.value > best.value:
            best = res
        if fine_best is None or res.refined_value > fine_best.refined_value:
            fine_best = res
    if refine <= 1:
        return best
    s = summarize(best.value, best.r_star, 0, fine_best.refined_value, fine_best.r_star,
                  fine_best.divergent)
    return NormResult(best.value, best.r_star, best.center_star, s.stable, s.refined_value, s.divergent)
