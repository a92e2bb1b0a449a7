"""Sufficiency conditions on (kernel, weight, phi) for the potential estimates.

Every checker returns a :class:`~rieszmorrey.reports.ConditionReport` with a
grid estimate of the smallest admissible constant, its maximizer, and a
stability flag from a second pass on a grid refined twofold and extended one
decade at both ends.

The tail integrals ``int_r^inf ... dt`` are evaluated on the interpolated
integrand described in :class:`_LogLog` and truncated with the dyadic
divergence detector shared with the kernel checks. Their ``divergent`` flag
refers to the integral; an unbounded supremum over ``r`` of a finite integral
makes the condition fail with ``stable=False`` instead.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EvaluationError, PreconditionError
from .grids import BallGrid, log_grid, refine_log_grid, summarize
from .kernel import Kernel
from .quadrature import ball_volume, suffix_integrals
from .reports import ConditionReport
from .spaces.functions import PhiFunction, _pt
from .weights import Ball, ExponentSet, Weight, ball_masses

DEFAULT_R_GRID = (1e-2, 1e2, 33)
TAIL_DECADES = 3
TABLE_PER_DECADE = 32
TABLE_REACH = 52  # decades past the largest radius; the dyadic detector stops sooner
FLAT_SLOPE = 1e-9


def default_r_grid() -> np.ndarray:
    return log_grid(*DEFAULT_R_GRID)


def _radii(grid) -> np.ndarray:
    g = default_r_grid() if grid is None else np.sort(np.asarray(grid, dtype=float).ravel())
    if g.size == 0:
        raise PreconditionError("empty grid")
    if np.any(g <= 0):
        raise PreconditionError("grid radii must be positive")
    return g


def _stable_pass(grid):
    return refine_log_grid(grid, 2, extend_decades=1.0)


class _LogLog:
    """Positive samples on a log grid, interpolated linearly in ``(log t, log v)``.

    Beyond the last sample the final slope is continued, which is exact for
    power laws. A zero sample makes the interpolant zero on its cells.
    """

    def __init__(self, t, v):
        self.lt = np.log(np.asarray(t, dtype=float))
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            self.lv = np.log(v)
        self.slope = (self.lv[-1] - self.lv[-2]) / (self.lt[-1] - self.lt[-2]) if v[-1] > 0 and v[-2] > 0 else 0.0

    def __call__(self, t):
        x = np.log(np.asarray(t, dtype=float))
        out = np.interp(x, self.lt, self.lv)
        far = x > self.lt[-1]
        out = np.where(far, self.lv[-1] + self.slope * (x - self.lt[-1]), out)
        return np.exp(out)


def _table_grid(lo: float, hi: float, reach: float) -> np.ndarray:
    decades = math.log10(hi / lo) + reach
    return np.geomspace(lo, lo * 10.0**decades, int(math.ceil(decades * TABLE_PER_DECADE)) + 1)


def _tail_inf(values, grid) -> np.ndarray:
    """``inf_{s >= t}`` over the samples, joined with the power-law limit at infinity."""
    v = np.asarray(values, dtype=float)
    suffix = np.minimum.accumulate(v[::-1])[::-1]
    lg = np.log(grid)
    with np.errstate(divide="ignore"):
        slope = (math.log(v[-1]) - math.log(v[-2])) / (lg[-1] - lg[-2]) if v[-1] > 0 and v[-2] > 0 else 0.0
    if slope < -FLAT_SLOPE:
        return np.zeros_like(suffix)  # the tail keeps decreasing to zero
    return suffix


def _ratio(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.full(a.shape, math.inf)
    np.divide(a, b, out=out, where=b > 0)
    out[a == 0] = 0.0
    return out


# ---------------------------------------------------------------------------
# kernel-weight condition


def _lebesgue_condition_values(kernel: Kernel, w: Weight, e: ExponentSet, grid: BallGrid) -> np.ndarray:
    out = np.empty((grid.centers.shape[0], grid.radii.size))
    r = grid.radii
    k = kernel(r) / r**kernel.n
    for i, c in enumerate(grid.centers):
        first = ball_masses(w, e.q, c, r) ** (1 / e.q)
        if e.p == 1:
            second = np.array([w.ess_sup_power(-1.0, Ball(c, x)) for x in r])
        else:
            second = ball_masses(w, -e.p_conj, c, r) ** (1 / e.p_conj)
        out[i] = np.where(k == 0, 0.0, k * first * second)
    return out


def check_lebesgue_condition(kernel: Kernel, w: Weight, p: float, q: float, ball_grid=None) -> ConditionReport:
    """``sup_B rho(r) r^-n (w^q(B))^{1/q} (int_B w^{-p'})^{1/p'}`` over a ball grid.

    For ``p = 1`` the last factor is ``ess sup_B 1/w``.
    """
    e = ExponentSet(p, q)
    if kernel.n != w.n:
        raise PreconditionError("kernel and weight dimensions differ")
    grid = BallGrid.default(w.n) if ball_grid is None else ball_grid
    if grid.empty:
        raise PreconditionError("empty grid")
    w.check_integrable(e.q, what=f"w^{e.q:g}")
    if e.p > 1:
        w.check_integrable(-e.p_conj, what=f"w^{-e.p_conj:g}")
    vals = _lebesgue_condition_values(kernel, w, e, grid)
    fine = BallGrid(grid.centers, _stable_pass(grid.radii))
    fvals = _lebesgue_condition_values(kernel, w, e, fine)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    fi, fj = np.unravel_index(int(np.argmax(fvals)), fvals.shape)
    s = summarize(float(vals[i, j]), float(grid.radii[j]), int(j), float(fvals[fi, fj]), float(fine.radii[fj]),
                  fj in (0, fine.radii.size - 1))
    value = math.inf if s.divergent else s.value
    return ConditionReport("lebesgue-condition", holds=bool(math.isfinite(value) and s.stable), empirical_C=value,
                           extremal=Ball(grid.centers[i], float(grid.radii[j])).to_dict(), stable=s.stable,
                           divergent=s.divergent, detail={"refined_value": s.refined_value, "p": p, "q": q})


# ---------------------------------------------------------------------------
# Spanne-type conditions


def _n_of(x0) -> int:
    return int(np.asarray(x0, dtype=float).reshape(-1).size)


def _pair_values(phi1, phi2, e: ExponentSet, x0, ts):
    n = _n_of(x0)
    grid = _table_grid(ts[0], ts[-1], TAIL_DECADES)
    lower = _tail_inf(phi1(x0, grid) * grid ** (n / e.p), grid)
    inf_at = _LogLog(grid, np.maximum(lower, 1e-300))(ts)
    inf_at[np.interp(np.log(ts), np.log(grid), lower) == 0] = 0.0
    return _ratio(inf_at, phi2(x0, ts / 2) * ts ** (n / e.q))


def check_spanne_pair(phi1: PhiFunction, phi2: PhiFunction, p: float, q: float, x0=0.0, t_grid=None) -> ConditionReport:
    """``sup_t inf_{s>t} phi1(x0, s) s^{n/p} / (phi2(x0, t/2) t^{n/q})``.

    The tail infimum is taken over a log grid reaching three decades past
    each ``t``, extended by the power-law limit of the last samples.
    """
    e = ExponentSet(p, q)
    x0 = _pt(x0, _n_of(x0))
    ts = _radii(t_grid)
    vals = _pair_values(phi1, phi2, e, x0, ts)
    fine = _stable_pass(ts)
    fvals = _pair_values(phi1, phi2, e, x0, fine)
    i, j = int(np.argmax(vals)), int(np.argmax(fvals))
    s = summarize(float(vals[i]), float(ts[i]), i, float(fvals[j]), float(fine[j]), j in (0, fine.size - 1))
    finite = math.isfinite(s.value) and not s.divergent
    return ConditionReport("spanne-pair", holds=bool(finite and s.stable), empirical_C=s.value if finite else math.inf,
                           extremal=float(ts[i]), stable=s.stable, divergent=not finite,
                           detail={"refined_value": s.refined_value})


def _tail_lhs(integrand, rs, breaks) -> tuple:
    try:
        vals, tail = suffix_integrals(integrand, rs, breaks=breaks)
    except EvaluationError:
        return np.full(rs.shape, math.inf), True
    return vals, bool(tail.divergent)


def _spanne_lhs(phi1, kernel, w, e: ExponentSet, x0, rs):
    """``int_r^inf`` of the weighted Spanne integrand for every radius."""
    n = kernel.n
    grid = _table_grid(rs[0], rs[-1], TABLE_REACH)
    mass_p = ball_masses(w, e.p, x0, grid)
    lower = _tail_inf(phi1(x0, grid) * mass_p ** (1 / e.p), grid)
    inf_at = _LogLog(grid, np.maximum(lower, 1e-300))
    vanishing = lower[-1] == 0
    mass_q = _LogLog(grid, ball_masses(w, e.q, x0, grid))
    hold = 0.0 if e.p == 1 else 1 / e.p_conj

    def integrand(t):
        if vanishing:
            return np.zeros_like(t)
        vol = ball_volume(n, t)
        return inf_at(t) * vol ** (hold + 1 / e.q) * mass_q(t) ** (-1 / e.q) * kernel(t) * t ** (-n - 1.0)

    return _tail_lhs(integrand, rs, kernel.breaks)


def check_spanne_integral(phi1: PhiFunction, phi2: PhiFunction, kernel: Kernel, w: Weight, p: float, q: float,
                          x0=0.0, r_grid=None, t_grid=None) -> ConditionReport:
    """``sup_r phi2(x0, r)^-1 int_r^inf A(t) dt`` with

    ``A(t) = inf_{s>t}[phi1(x0,s) (w^p(B_s))^{1/p}] |B_t|^{1/p'+1/q} (w^q(B_t))^{-1/q} rho(t) t^{-n-1}``,

    ``B_s = B(x0, s)``. For ``w = 1`` this is a multiple of
    ``inf_{s>t}[phi1(x0,s) s^{n/p}] rho(t) t^{-n/p-1}``. ``t_grid`` is
    accepted for symmetry with :func:`check_spanne_pair`; the tail infimum
    uses its own dense table.
    """
    e = ExponentSet(p, q)
    if kernel.n != w.n:
        raise PreconditionError("kernel and weight dimensions differ")
    x0 = _pt(x0, w.n)
    w.check_integrable(e.p, what=f"w^{e.p:g}")
    w.check_integrable(e.q, what=f"w^{e.q:g}")
    rs = _radii(r_grid)
    return _integral_report("spanne-integral", lambda radii: _spanne_lhs(phi1, kernel, w, e, x0, radii),
                            lambda radii: phi2(x0, radii), rs, {"p": p, "q": q})


def _integral_report(name, lhs_fn, scale_fn, rs, detail, extremal_center=None) -> ConditionReport:
    lhs, divergent = lhs_fn(rs)
    if divergent:
        return ConditionReport(name, holds=False, empirical_C=math.inf, extremal=float(rs[-1]), stable=True,
                               divergent=True, detail={**detail, "integral_divergent": True})
    vals = _ratio(lhs, scale_fn(rs))
    fine = _stable_pass(rs)
    flhs, fdiv = lhs_fn(fine)
    fvals = _ratio(flhs, scale_fn(fine)) if not fdiv else np.full(fine.shape, math.inf)
    i, j = int(np.argmax(vals)), int(np.argmax(fvals))
    s = summarize(float(vals[i]), float(rs[i]), i, float(fvals[j]), float(fine[j]), j in (0, fine.size - 1))
    value = float(vals[i])
    extremal = float(rs[i]) if extremal_center is None else {"center": list(extremal_center), "radius": float(rs[i])}
    return ConditionReport(name, holds=bool(math.isfinite(value) and s.stable), empirical_C=value, extremal=extremal,
                           stable=s.stable, divergent=bool(fdiv),
                           detail={**detail, "refined_value": s.refined_value, "integral_divergent": bool(fdiv),
                                   "sup_unbounded": bool(s.divergent)})


# ---------------------------------------------------------------------------
# Adams-type conditions


def _phi_pair_values(phi, x, radii):
    v = phi(x, radii)
    two_sided = float(v.max() / v.min()) if v.min() > 0 else math.inf
    tail_max = np.maximum.accumulate(v[::-1])[::-1]
    one_sided = float(np.max(_ratio(tail_max, v)))
    return two_sided, one_sided


def check_adams_phi(phi: PhiFunction, x_grid=None, rt_grid=None) -> ConditionReport:
    """Comparability of ``phi(x, .)`` over grid pairs, in two forms.

    The report verdict uses the one-sided form
    ``sup_{t>r} phi(x,t) <= C phi(x,r)``; ``detail["two_sided"]`` carries the
    smallest ``c`` with ``c^-1 phi(x,r) <= phi(x,t) <= c phi(x,r)`` over all
    grid pairs, which grows with the grid span for non-constant powers.
    """
    xs = np.atleast_2d(np.asarray([0.0] if x_grid is None else x_grid, dtype=float))
    if xs.shape[0] == 1 and xs.shape[1] > 1 and x_grid is not None and np.ndim(x_grid) == 1:
        xs = xs.T  # a flat list of one-dimensional centers
    rs = _radii(rt_grid)
    if xs.size == 0:
        raise PreconditionError("empty grid")
    fine = _stable_pass(rs)
    best = {"two": (0.0, None), "one": (0.0, None), "two_f": 0.0, "one_f": 0.0}
    for x in xs:
        x = tuple(x.tolist())
        two, one = _phi_pair_values(phi, x, rs)
        two_f, one_f = _phi_pair_values(phi, x, fine)
        if two >= best["two"][0]:
            best["two"] = (two, x)
        if one >= best["one"][0]:
            best["one"] = (one, x)
        best["two_f"] = max(best["two_f"], two_f)
        best["one_f"] = max(best["one_f"], one_f)
    one = summarize(best["one"][0], 0.0, 0, best["one_f"], 0.0, True)
    two = summarize(best["two"][0], 0.0, 0, best["two_f"], 0.0, True)
    one_ok = math.isfinite(one.value) and one.stable
    two_ok = math.isfinite(two.value) and two.stable
    notes = () if one_ok == two_ok else (
        "one-sided and two-sided comparability disagree; the verdict follows the one-sided form",)
    return ConditionReport(
        "adams-phi",
        holds=bool(one_ok),
        empirical_C=one.value if one_ok else math.inf,
        extremal={"x": list(best["one"][1]) if best["one"][1] else None},
        stable=one.stable,
        divergent=not one_ok,
        detail={"one_sided": {"C": one.value, "refined": one.refined_value, "stable": one.stable},
                "two_sided": {"c": two.value, "refined": two.refined_value, "stable": two.stable, "holds": two_ok}},
        notes=notes,
    )


def _adams_lhs(phi, kernel, w, e: ExponentSet, x, rs):
    n = kernel.n
    grid = _table_grid(rs[0], rs[-1], TABLE_REACH)
    mass = ball_masses(w, 1.0, x, grid)
    lower = _tail_inf((phi(x, grid) * mass) ** (1 / e.p), grid)
    inf_at = _LogLog(grid, np.maximum(lower, 1e-300))
    vanishing = lower[-1] == 0
    mass_at = _LogLog(grid, mass)

    def integrand(t):
        if vanishing:
            return np.zeros_like(t)
        return inf_at(t) * ball_volume(n, t) * mass_at(t) ** (-1 / e.p) * kernel(t) * t ** (-n - 1.0)

    return _tail_lhs(integrand, rs, kernel.breaks)


def check_adams_integral(phi: PhiFunction, kernel: Kernel, w: Weight, p: float, q: float, x_grid=None,
                         r_grid=None) -> ConditionReport:
    """``sup_{x,r} rho(r)^{p/(q-p)} int_r^inf A(x,t) dt`` with

    ``A(x,t) = inf_{s>t}[(phi(x,s) w(B(x,s)))^{1/p}] |B(x,t)| w(B(x,t))^{-1/p} rho(t) t^{-n-1}``,

    which for ``w = 1`` is a multiple of ``phi(x,t)^{1/p} rho(t)/t`` when
    ``phi(x,s)|B(x,s)|`` is non-decreasing.
    """
    e = ExponentSet(p, q)
    if kernel.n != w.n:
        raise PreconditionError("kernel and weight dimensions differ")
    xs = np.zeros((1, w.n)) if x_grid is None else np.asarray(x_grid, dtype=float).reshape(-1, w.n)
    if xs.shape[0] == 0:
        raise PreconditionError("empty grid")
    rs = _radii(r_grid)
    power = e.p / (e.q - e.p)

    def scale(radii):
        with np.errstate(divide="ignore"):  # a vanishing kernel gives an infinite scale and a zero ratio
            return kernel(radii) ** (-power)

    worst = None
    for x in xs:
        x = tuple(x.tolist())
        rep = _integral_report("adams-integral", lambda radii: _adams_lhs(phi, kernel, w, e, x, radii),
                               scale, rs, {"p": p, "q": q}, extremal_center=x)
        if worst is None or _worse(rep, worst):
            worst = rep
    return worst


def _worse(a: ConditionReport, b: ConditionReport) -> bool:
    if a.divergent != b.divergent:
        return a.divergent
    if a.holds != b.holds:
        return not a.holds
    return a.empirical_C > b.empirical_C


# ---------------------------------------------------------------------------
# exponent bookkeeping for power presets


def integrand_exponent(n: int, alpha: float, lam: float, p: float) -> float:
    """Exponent ``e`` with tail integrands ``~ t^(e-1)`` for power kernels and power ``phi``.

    Both tail conditions reduce, for ``w = 1``, ``rho = t^alpha`` and
    ``phi`` of Morrey type with parameter ``lam``, to ``e = (lam - n)/p + alpha``;
    the integrals are finite exactly when ``e < 0``.
    """
    return (lam - n) / p + alpha


def spanne_partner(n: int, alpha: float, lam: float, p: float, q: float) -> float:
    """The ``mu`` making ``phi2 = r^((mu-n)/q)`` balance the Spanne tail integral."""
    return n + q * integrand_exponent(n, alpha, lam, p)


def adams_exponent(n: int, alpha: float, lam: float, p: float) -> float:
    """The ``q`` balancing the Adams tail integral against ``rho(r)^{-p/(q-p)}``.

    Equivalent to ``1/p - 1/q = alpha/(n - lam)``; requires ``lam < n - alpha p``.
    """
    e = integrand_exponent(n, alpha, lam, p)
    if not e < 0:
        raise PreconditionError("no balancing exponent: the tail integral diverges")
    return p - alpha * p / e
