"""The generalized Riesz potential, the centered maximal function and split diagnostics.

``I_rho f(x) = int rho(|x - y|) |x - y|^{-n} f(y) dy`` is evaluated in polar
coordinates about ``x``: the Jacobian ``t^{n-1}`` turns the kernel into
``rho(t)/t`` along each ray, so the only remaining singularity at ``t = 0``
is the integrable ``t^{alpha - 1}`` handled by geometric grading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, PreconditionError, TruncationError
from .grids import log_grid, refine_log_grid, summarize
from .kernel import Kernel, tilde_rho
from .quadrature import BallProfile, Special, ball_volume, dyadic_tail, integrate, ray_breaks, sphere_area, sphere_rule
from .quadrature import suffix_integrals
from .spaces.functions import TestFunction, _pt
from .spaces.norms import NormResult, lp_norm_profile, weak_norm_profile
from .weights import Weight, ball_masses

DEFAULT_MAXIMAL_GRID = (1e-3, 1e3, 193)


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the polar quadrature used by :func:`riesz_apply`.

    ``radial_order`` is the Gauss-Legendre order per radial panel,
    ``angular_order`` selects the sphere rule (``None`` for the default),
    ``R_max`` truncates integrals over infinite supports and ``tol`` is the
    relative error budget for the truncated tail.
    """

    radial_order: int = 20
    angular_order: int | None = None
    R_max: float = 1e6
    tol: float = 1e-8

    def __post_init__(self):
        if self.radial_order < 1 or (self.angular_order is not None and self.angular_order < 1):
            raise PreconditionError("quadrature orders must be positive")
        if not (self.R_max > 0 and self.tol > 0):
            raise PreconditionError("R_max and tol must be positive")


DEFAULT_SPEC = QuadratureSpec()


def _check_at_point(f: TestFunction, kernel: Kernel, x):
    a = kernel.near_zero_exponent
    for point, e in f.singular_points():
        if math.dist(point, x) <= 1e-14 * (1 + math.hypot(*x)):
            if not a + e > 0:
                raise EvaluationError(
                    f"rho(t)/t * f is not integrable at x={x}: kernel order {a:g} plus f order {e:g} is not positive",
                    where=x,
                )


def _truncation_bound(f: TestFunction, kernel: Kernel, x, R: float, tol: float):
    """Majorant of ``int_{|y-x|>R} rho(|x-y|) |x-y|^{-n} |f(y)| dy``.

    For ``|x - c| <= R/2`` the bound uses ``M(t/2) >= M(t - |x - c|)``, which
    does not depend on ``x`` and is computed once per ``(f, kernel, R)``.
    """
    delta = math.dist(f.majorant_center, x)
    if delta <= 0.5 * R:
        key = (id(kernel), kernel, R, tol)
        cache = f.__dict__.setdefault("_truncation_cache", {})
        if key not in cache:
            cache[key] = _tail_majorant(f, kernel, R, tol, lambda t: 0.5 * t)
        return cache[key]
    return _tail_majorant(f, kernel, R, tol, lambda t: np.maximum(t - delta, 0.0))


def _tail_majorant(f, kernel, R, tol, shift):
    fn = lambda t: kernel(t) / t * f.majorant(shift(t))
    res = dyadic_tail(fn, R, tol=tol, breaks=kernel.breaks)
    return math.inf if res.divergent else sphere_area(kernel.n) * res.value


def _ray_integral(f, kernel, x, theta, R, order, with_error):
    brk, sing, soft = ray_breaks(x, theta, f.specials)
    brk = list(brk) + [b for b in kernel.breaks if 0 < b < R]
    sing = list(sing) + [0.0]

    offset = float(np.linalg.norm(x))

    def fn(t):
        return kernel(t) / t * f._eval(x + t[:, None] * theta)

    val = integrate(fn, 0.0, R, order=order, breaks=brk, singular=sing, soft=soft, dyadic=True,
                    offset=offset)
    if not with_error:
        return val, 0.0
    low = integrate(fn, 0.0, R, order=max(order // 2, 4), breaks=brk, singular=sing, soft=soft, dyadic=True,
                    offset=offset)
    return val, abs(val - low)


def riesz_apply(f: TestFunction, kernel: Kernel, x, spec: QuadratureSpec = DEFAULT_SPEC, with_error: bool = False):
    """``I_rho f(x)``; with ``with_error`` returns ``(value, estimated_error)``.

    Finite supports are integrated exactly to their edge. Otherwise rays are
    cut at ``spec.R_max`` and the tail is bounded through ``f.majorant``;
    a bound above ``spec.tol`` times the value raises :class:`TruncationError`.
    """
    if f.n != kernel.n:
        raise PreconditionError("function and kernel dimensions differ")
    x = np.asarray(_pt(x, f.n), dtype=float)
    if f.is_zero:
        return (0.0, 0.0) if with_error else 0.0
    _check_at_point(f, kernel, tuple(x))
    reach = f.support_radius_from(tuple(x))
    R = min(reach, kernel.support_end)
    tail = 0.0
    if not math.isfinite(R):
        R = spec.R_max
        tail = None
    elif reach > spec.R_max and kernel.support_end >= reach:
        raise PreconditionError(f"support radius {reach:g} about x exceeds R_max={spec.R_max:g}")
    dirs, weights = sphere_rule(f.n, spec.angular_order)
    total, err = 0.0, 0.0
    for theta, a_w in zip(dirs, weights):
        v, e = _ray_integral(f, kernel, x, theta, R, spec.radial_order, with_error)
        total += a_w * v
        err += a_w * e
    if tail is None:
        tail = _truncation_bound(f, kernel, tuple(x), R, spec.tol)
        if not tail <= spec.tol * max(abs(total), 1e-300):
            raise TruncationError(
                f"tail beyond R_max={R:g} is bounded only by {tail:.3g} (value {total:.6g})", where=tuple(x)
            )
    return (total, err + tail) if with_error else total


class RieszImage(TestFunction):
    """``I_rho f`` as a function, evaluated pointwise by :func:`riesz_apply` and memoized."""

    def __init__(self, f: TestFunction, kernel: Kernel, spec: QuadratureSpec = DEFAULT_SPEC):
        self.f, self.kernel, self.spec, self.n = f, kernel, spec, f.n
        self.nonnegative = f.nonnegative
        self.name = f"I[{f.name}]"
        self._cache: dict = {}

    @property
    def is_zero(self):
        return self.f.is_zero

    def _eval(self, y):
        out = np.empty(y.shape[0])
        for i, row in enumerate(y):
            key = row.tobytes()
            val = self._cache.get(key)
            if val is None:
                val = riesz_apply(self.f, self.kernel, row, self.spec)
                self._cache[key] = val
            out[i] = val
        return out

    @property
    def specials(self):
        gain = self.kernel.alpha if self.kernel.family != "table" else float(self.n)
        return tuple(
            Special(s.point, radii=s.radii, singular=s.singular, exponent=s.exponent + gain, graded_spheres=True)
            for s in self.f.specials
        )

    def majorant(self, s):
        raise NotImplementedError("no majorant is known for a potential")

    @property
    def peak(self):
        return math.inf


# ---------------------------------------------------------------------------
# maximal function


def maximal_apply(f: TestFunction, x, r_grid=None, refine: int = 2) -> NormResult:
    """Centered maximal function ``sup_r |B(x,r)|^-1 int_{B(x,r)} |f|`` as a grid supremum."""
    x = _pt(x, f.n)
    radii = log_grid(*DEFAULT_MAXIMAL_GRID) if r_grid is None else np.asarray(r_grid, dtype=float)
    if radii.size == 0:
        raise PreconditionError("empty radius grid")
    if f.is_zero:
        return NormResult(0.0, float(radii[0]), x, True, 0.0)
    prof = BallProfile(lambda y: np.abs(f._eval(y)), x, f.n, specials=f.specials)
    avg = lambda r: prof(r) / ball_volume(f.n, r)
    vals = avg(radii)
    i = int(np.argmax(vals))
    value = float(vals[i])
    if refine <= 1 or radii.size < 2:
        return NormResult(value, float(radii[i]), x, True, value)
    fine = refine_log_grid(radii, refine)
    fv = avg(fine)
    j = int(np.argmax(fv))
    s = summarize(value, float(radii[i]), i, float(fv[j]), float(fine[j]), j in (0, fine.size - 1))
    return NormResult(value, float(radii[i]), x, s.stable, s.refined_value, s.divergent)


# ---------------------------------------------------------------------------
# the far-part integral shared by the split and the local estimate


def _far_integrand(f, kernel, w, p, q, x, weak_p=False):
    """``t -> ||f chi_{B(x,t)}||_{L_p(w^p)} (w^q(B(x,t)))^{-1/q} rho(t) t^{-n-1}``."""
    n = kernel.n
    p_eff = 1.0 if weak_p else p
    prof = None
    if not f.is_zero:
        prof = BallProfile(
            lambda y: np.abs(f._eval(y)) ** p_eff * w.pow(p_eff)(y), x, n, specials=tuple(f.specials) + w.specials(p_eff)
        )

    def g(t):
        t = np.asarray(t, dtype=float)
        if prof is None:
            return np.zeros_like(t)
        norms = np.maximum(prof(t), 0.0) ** (1.0 / p_eff)
        return norms * ball_masses(w, q, x, t) ** (-1.0 / q) * kernel(t) * t ** (-n - 1.0)

    return g


def far_integrals(f, kernel, w, p, q, x, starts, weak_p=False, tol=1e-10):
    """``int_s^inf`` of :func:`_far_integrand` for every ascending start ``s``."""
    g = _far_integrand(f, kernel, w, p, q, tuple(x), weak_p)
    if f.is_zero:
        return np.zeros(np.asarray(starts).shape)
    brk = list(kernel.breaks)
    for s in f.specials:
        brk += [r + math.dist(s.point, x) for r in s.radii] + [abs(r - math.dist(s.point, x)) for r in s.radii]
    vals, _ = suffix_integrals(g, starts, tol=tol, breaks=sorted(set(b for b in brk if b > 0)))
    return vals


@dataclass(frozen=True)
class HedbergSplit:
    near_value: float
    far_value: float
    near_bound: float
    far_bound: float
    near_C: float
    far_C: float


def _ratio(a, b):
    if a == 0:
        return 0.0
    if b == 0:
        return math.inf
    return abs(a) / b


def hedberg_split_diagnostic(f: TestFunction, kernel: Kernel, x, r: float, spec: QuadratureSpec = DEFAULT_SPEC,
                             w: Weight | None = None, p: float = 2.0, q: float = 4.0, r_grid=None) -> HedbergSplit:
    """Split ``I_rho f(x)`` at radius ``2r`` and compare each part with its majorant.

    ``near_bound = Mf(x) * tilde_rho(r)``; ``far_bound`` is the tail integral
    ``int_{2r}^inf ||f chi_{B(x,t)}||_{L_p(w^p)} (w^q(B(x,t)))^{-1/q} rho(t) t^{-n-1} dt``.
    """
    if not r > 0:
        raise PreconditionError("split radius must be positive")
    x = _pt(x, f.n)
    w = w or Weight.constant(f.n)
    if f.is_zero:
        return HedbergSplit(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    near = riesz_apply(f.restrict(x, 2 * r, inside=True), kernel, x, spec)
    far = riesz_apply(f.restrict(x, 2 * r, inside=False), kernel, x, spec)
    near_bound = maximal_apply(f, x, r_grid, refine=1).value * tilde_rho(kernel, r)
    far_bound = float(far_integrals(f, kernel, w, p, q, x, [2 * r])[0])
    return HedbergSplit(near, far, near_bound, far_bound, _ratio(near, near_bound), _ratio(far, far_bound))


def near_sweep(f: TestFunction, kernel: Kernel, x, radii, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """``I_rho(f chi_{B(x,2r)})(x) / rho(r)`` over a radius sweep."""
    x = _pt(x, f.n)
    return np.array([riesz_apply(f.restrict(x, 2 * r), kernel, x, spec) / float(kernel(r)) for r in radii])


# ---------------------------------------------------------------------------
# two-term local estimate


@dataclass(frozen=True)
class TwoTermResult:
    r: float
    lhs: float
    term1: float
    term2: float
    empirical_C: float
    degenerate: bool
    notes: tuple = field(default=())


def local_two_term_sweep(f: TestFunction, kernel: Kernel, w: Weight, p: float, q: float, x0, radii,
                         spec: QuadratureSpec = DEFAULT_SPEC, weak: bool = False, image: RieszImage | None = None,
                         notes: tuple = ()) -> list:
    """The two-term local estimate on ``B(x0, r)`` for every radius.

    ``lhs = ||I_rho f chi_B||_{L_q(w^q)}`` (weak ``L_q`` when ``weak``),
    ``term1 = ||f chi_{2B}||_{L_p(w^p)}`` and
    ``term2 = (w^q(B))^{1/q} int_{2r}^inf ||f chi_{B(x0,t)}||_{L_p(w^p)} (w^q(B(x0,t)))^{-1/q} rho(t) t^{-n-1} dt``;
    the weak form uses ``p = 1``. ``empirical_C = lhs / (term1 + term2)``.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    x0 = _pt(x0, f.n)
    p_eff = 1.0 if weak else p
    if f.is_zero:
        return [TwoTermResult(float(r), 0.0, 0.0, 0.0, math.nan, True, notes) for r in radii]
    image = image or RieszImage(f, kernel, spec)
    if weak:
        lhs = weak_norm_profile(image, w, q, x0, radii, q)
    else:
        lhs = lp_norm_profile(image, w, q, x0, radii, q)
    term1 = lp_norm_profile(f, w, p_eff, x0, 2 * radii, p_eff)
    term2 = ball_masses(w, q, x0, radii) ** (1.0 / q) * far_integrals(f, kernel, w, p, q, x0, 2 * radii, weak_p=weak)
    out = []
    for r, a, b, c in zip(radii, lhs, term1, term2):
        denom = b + c
        degenerate = denom == 0 or not math.isfinite(denom)
        emp = math.nan if denom == 0 else (0.0 if not math.isfinite(denom) else a / denom)
        out.append(TwoTermResult(float(r), float(a), float(b), float(c), float(emp), bool(degenerate), notes))
    return out


def local_two_term_check(f: TestFunction, kernel: Kernel, w: Weight, p: float, q: float, x0, r: float,
                         spec: QuadratureSpec = DEFAULT_SPEC, weak: bool = False, check_condition: bool = True):
    """Single-radius form of :func:`local_two_term_sweep`, preceded by the kernel-weight condition check."""
    notes = ()
    if check_condition:
        from .conditions import check_lebesgue_condition
        from .grids import BallGrid

        rep = check_lebesgue_condition(kernel, w, 1.0 if weak else p, q, BallGrid([_pt(x0, f.n)], log_grid(1e-2, 1e2, 33)))
        if not rep.holds:
            notes = (f"warning: kernel-weight condition fails (C={rep.empirical_C})",)
    return local_two_term_sweep(f, kernel, w, p, q, x0, [r], spec, weak, notes=notes)[0]
