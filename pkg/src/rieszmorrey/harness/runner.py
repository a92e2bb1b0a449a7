"""Experiment runners: condition checks followed by norm-ratio sweeps over a test-function family.

Each row is computed in isolation from the resolved config tree, so rows can
run in worker processes and a failing row cannot affect the others. Rows are
assembled in config order whatever the degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..conditions import check_adams_integral, check_adams_phi, check_lebesgue_condition, check_spanne_integral, check_spanne_pair
from ..errors import ConfigError, RieszMorreyError
from ..grids import refine_log_grid
from ..hardy import HalfLineFunction, best_constant_B, hardy_inequality_check, hardy_sides, identity_embedding_check
from ..operators import RieszImage, local_two_term_sweep, maximal_apply
from ..reports import ConditionReport
from ..spaces.norms import morrey_norm_global, morrey_norm_local, weak_morrey_norm_local
from ..weights import apq_characteristic
from .config import ExperimentConfig, from_tree
from .report import BoundednessReport, Row

HEADER = (
    "radius convention: target norms are taken on the inner ball B(x0, r) and scaled by phi2(x0, r); "
    "the factor between B(x0, r) and B(x0, 2r) is absorbed into the empirical constant",
    "far-part quantities weight the target ball by w^q throughout",
    "sup ratios are grid maxima; 'stable' means a change below rtol when every grid is refined",
)


# ---------------------------------------------------------------------------
# conditions


def run_conditions(cfg: ExperimentConfig) -> tuple:
    """The sufficiency conditions relevant to ``cfg.kind``, in a fixed order."""
    if cfg.kind == "hardy":
        return _hardy_conditions(cfg)
    fams = cfg.condition_families
    k, w, e = cfg.kernel, cfg.weight, cfg.exponents
    out = []
    if "lebesgue-condition" in fams:
        out.append(check_lebesgue_condition(k, w, e.p, e.q))
    if "apq" in fams:
        out.append(apq_characteristic(w, e))
    spanne = cfg.kind in ("spanne", "weak-type") or (cfg.kind == "conditions-only" and cfg.phi1 is not None)
    if "spanne" in fams and spanne and cfg.phi1 is not None and cfg.phi2 is not None:
        out.append(check_spanne_pair(cfg.phi1, cfg.phi2, e.p, e.q, cfg.x0, cfg.t_grid))
        out.append(check_spanne_integral(cfg.phi1, cfg.phi2, k, w, e.p, e.q, cfg.x0, cfg.r_grid))
    adams = cfg.kind == "adams" or (cfg.kind == "conditions-only" and cfg.phi is not None)
    if "adams" in fams and adams and cfg.phi is not None:
        centers = _centers(cfg)
        out.append(check_adams_phi(cfg.phi, centers, cfg.r_grid))
        out.append(check_adams_integral(cfg.phi, k, w, e.p, e.q, centers, cfg.r_grid))
    return tuple(out)


def _centers(cfg):
    return cfg.centers if cfg.centers is not None else np.asarray([cfg.x0])


def _hardy_conditions(cfg) -> tuple:
    h = cfg.hardy
    B = best_constant_B(h.w1, h.w2, h.w, h.t_grid, refine=cfg.refine)
    best = ConditionReport("hardy-best-constant", holds=bool(not B.divergent and B.stable),
                           empirical_C=float(B), extremal=B.t_star, stable=B.stable, divergent=B.divergent,
                           detail=B.to_dict())
    out = [best]
    if not B.divergent:
        out.append(hardy_inequality_check(h.w1, h.w2, h.w, hardy_samples(cfg), C=float(B) * (1 + 1e-6),
                                          t_grid=h.t_grid))
    return tuple(out)


# ---------------------------------------------------------------------------
# rows


def _finite_ratio(t: float, s: float) -> float:
    if s == 0:
        return math.nan
    if not math.isfinite(s):
        return math.nan
    return t / s


def _rel_change(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.inf
    return abs(b - a) / max(abs(a), abs(b))


def _norm_row(fid, src, tgt, rtol, detail=None) -> Row:
    degenerate = src.value == 0
    divergent = bool(src.divergent or tgt.divergent or not math.isfinite(src.value) or not math.isfinite(tgt.value))
    ratio = _finite_ratio(tgt.value, src.value)
    refined = _finite_ratio(tgt.refined_value, src.refined_value)
    stable = bool(not degenerate and not divergent and src.stable and tgt.stable
                  and _rel_change(ratio, refined) < rtol)
    d = {"source_r_star": src.r_star, "target_r_star": tgt.r_star, "source_refined": src.refined_value,
         "target_refined": tgt.refined_value, **(detail or {})}
    return Row(fid, src.value, tgt.value, ratio, refined, stable, degenerate, divergent, None, d)


def _spanne_row(cfg: ExperimentConfig, fid, f) -> Row:
    e, w = cfg.exponents, cfg.weight
    image = RieszImage(f, cfg.kernel)
    if cfg.weak:
        src = morrey_norm_local(f, 1.0, cfg.phi1, w, 1.0, cfg.x0, cfg.r_grid, cfg.refine)
        tgt = weak_morrey_norm_local(image, e.q, cfg.phi2, w, e.q, cfg.x0, cfg.r_grid, refine=cfg.refine)
    else:
        src = morrey_norm_local(f, e.p, cfg.phi1, w, e.p, cfg.x0, cfg.r_grid, cfg.refine)
        tgt = morrey_norm_local(image, e.q, cfg.phi2, w, e.q, cfg.x0, cfg.r_grid, cfg.refine)
    return _norm_row(fid, src, tgt, cfg.rtol)


def _adams_row(cfg: ExperimentConfig, fid, f, index) -> Row:
    e, w = cfg.exponents, cfg.weight
    centers = _centers(cfg)
    src = morrey_norm_global(f, e.p, cfg.phi.power_of(1 / e.p), w, 1.0, centers, cfg.r_grid, cfg.refine)
    image = RieszImage(f, cfg.kernel)
    tgt = morrey_norm_global(image, e.q, cfg.phi.power_of(1 / e.q), w, 1.0, centers, cfg.r_grid, cfg.refine,
                             weak=cfg.weak)
    detail = {}
    if cfg.hedberg_samples and src.value > 0 and math.isfinite(src.value):
        detail["hedberg"] = hedberg_samples(cfg, f, image, src.value, index)
    return _norm_row(fid, src, tgt, cfg.rtol, detail)


def hedberg_samples(cfg: ExperimentConfig, f, image, norm: float, index: int) -> dict:
    """``|I f(y)| / (Mf(x)^{p/q} ||f||^{1-p/q})`` on seeded pairs with ``y`` in ``B(x, r)``.

    ``r`` is the balancing radius ``rho(r) = (||f|| / Mf(x))^{(q-p)/q}``,
    solved in closed form for power kernels; other kernels use ``y = x``.
    """
    e, n = cfg.exponents, cfg.n
    rng = np.random.default_rng([cfg.seed, index])
    lo, hi = cfg.hedberg_box
    worst, worst_pair, values = 0.0, None, []
    for _ in range(cfg.hedberg_samples):
        x = rng.uniform(lo, hi, size=n)
        u = rng.uniform(0.0, 1.0)
        theta = rng.normal(size=n)
        theta /= np.linalg.norm(theta)
        mf = maximal_apply(f, x, refine=1).value
        if mf == 0:
            values.append(0.0)
            continue
        r = 0.0
        if cfg.kernel.family == "power":
            r = (norm / mf) ** ((e.q - e.p) / (e.q * cfg.kernel.alpha))
        y = x + u * r * theta
        val = abs(float(image(y)[0])) / (mf ** (e.p / e.q) * norm ** (1 - e.p / e.q))
        values.append(val)
        if val >= worst:
            worst, worst_pair = val, {"x": x.tolist(), "y": y.tolist(), "r": r}
    return {"empirical_C": worst, "extremal": worst_pair, "samples": len(values)}


def _lemma_row(cfg: ExperimentConfig, fid, f) -> Row:
    e = cfg.exponents
    image = RieszImage(f, cfg.kernel)
    weak = cfg.weak

    def sweep(radii):
        res = local_two_term_sweep(f, cfg.kernel, cfg.weight, e.p, e.q, cfg.x0, radii, weak=weak, image=image)
        return [t for t in res if not t.degenerate]

    base = sweep(cfg.r_grid)
    fine = sweep(refine_log_grid(cfg.r_grid, cfg.refine)) if cfg.refine > 1 else base
    if not base:
        return Row(fid, 0.0, 0.0, math.nan, math.nan, False, True, False, None, {"sweep": []})
    best = max(base, key=lambda t: t.empirical_C)
    best_fine = max(t.empirical_C for t in fine)
    dom = [t.term1 / t.term2 if t.term2 > 0 else math.inf for t in base]
    ratio = best.empirical_C
    divergent = not (math.isfinite(ratio) and math.isfinite(best_fine))
    stable = bool(not divergent and _rel_change(ratio, best_fine) < cfg.rtol)
    detail = {
        "r_star": best.r,
        "term1": best.term1,
        "term2": best.term2,
        "term1_over_term2_max": max(dom),
        "sweep": [{"r": t.r, "lhs": t.lhs, "term1": t.term1, "term2": t.term2, "C": t.empirical_C} for t in base],
    }
    return Row(fid, best.term1 + best.term2, best.lhs, ratio, best_fine, stable, False, divergent, None, detail)


def hardy_samples(cfg: ExperimentConfig) -> list:
    """Seeded non-decreasing samples: a constant and log-linear tables with increasing nodes."""
    rng = np.random.default_rng([cfg.seed, 7])
    out = [HalfLineFunction.constant(1.0)]
    for _ in range(cfg.hardy.samples - 1):
        k = int(rng.integers(2, 9))
        t = np.sort(10.0 ** rng.uniform(-3, 3, size=k))
        t = np.unique(t)
        v = np.cumsum(rng.exponential(1.0, size=t.size))
        if rng.uniform() < 0.25:
            v[0] = 0.0
        out.append(HalfLineFunction.from_table(t, v))
    return out


def _hardy_row(cfg: ExperimentConfig, i: int) -> Row:
    h = cfg.hardy
    g = hardy_samples(cfg)[i]
    lhs, rhs = hardy_sides(h.w1, h.w2, h.w, g, h.t_grid)
    fine = refine_log_grid(h.t_grid, cfg.refine) if cfg.refine > 1 else h.t_grid
    lhs_f, rhs_f = hardy_sides(h.w1, h.w2, h.w, g, fine)
    ratio, refined = _finite_ratio(lhs, rhs), _finite_ratio(lhs_f, rhs_f)
    degenerate = rhs == 0
    divergent = not (math.isfinite(lhs) and math.isfinite(rhs))
    stable = bool(not degenerate and not divergent and _rel_change(ratio, refined) < cfg.rtol)
    return Row(f"g{i}", rhs, lhs, ratio, refined, stable, degenerate, divergent, None, {"g": g.to_dict()})


def _row(cfg: ExperimentConfig, index: int) -> Row:
    if cfg.kind == "hardy":
        fid = f"g{index}"
    else:
        fid, f = cfg.functions[index]
    try:
        if cfg.kind == "hardy":
            return _hardy_row(cfg, index)
        if f.is_zero:
            return Row(fid, 0.0, 0.0, math.nan, math.nan, False, True, False, None, {})
        if cfg.kind in ("spanne", "weak-type"):
            return _spanne_row(cfg, fid, f)
        if cfg.kind == "adams":
            return _adams_row(cfg, fid, f, index)
        if cfg.kind == "lemma-local":
            return _lemma_row(cfg, fid, f)
    except (RieszMorreyError, ArithmeticError, FloatingPointError) as exc:
        return Row(fid, error=f"{type(exc).__name__}: {exc}")
    raise ValueError(f"kind {cfg.kind!r} has no rows")


def _row_task(args) -> Row:
    tree, index = args
    return _row(from_tree(tree), index)


def _rows(cfg: ExperimentConfig, jobs: int) -> tuple:
    count = cfg.hardy.samples if cfg.kind == "hardy" else len(cfg.functions)
    if cfg.kind == "conditions-only" or count == 0:
        return ()
    if jobs <= 1 or count == 1:
        return tuple(_row(cfg, i) for i in range(count))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return tuple(pool.map(_row_task, [(cfg.tree, i) for i in range(count)]))


# ---------------------------------------------------------------------------
# assembly


def _verdict(cfg, rows, conditions, sup_stable) -> str:
    if cfg.kind == "conditions-only":
        return "conditions-hold" if all(c.holds for c in conditions) else "conditions-fail"
    if rows and all(r.degenerate for r in rows):
        return "vacuous"
    if not all(c.holds for c in conditions):
        return "conditions-fail"
    if any(r.error or r.divergent for r in rows) or not sup_stable:
        return "inconclusive"
    return "bounded-evidence"


def _sup(rows, attr):
    vals = [getattr(r, attr) for r in rows if not (r.degenerate or r.error) and not math.isnan(getattr(r, attr))]
    return max(vals) if vals else math.nan


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """Run the conditions and the row sweep for any experiment kind."""
    conditions = run_conditions(cfg)
    rows = _rows(cfg, jobs)
    sup, sup_fine = _sup(rows, "ratio"), _sup(rows, "ratio_refined")
    sup_stable = bool(math.isfinite(sup) and _rel_change(sup, sup_fine) < cfg.rtol)
    verdict = _verdict(cfg, rows, conditions, sup_stable)
    header = list(HEADER)
    for c in conditions:
        header.extend(c.notes)
    extra = {}
    hed = [r.detail["hedberg"] for r in rows if "hedberg" in r.detail]
    if hed:
        worst = max(hed, key=lambda h: h["empirical_C"])
        extra["hedberg"] = {"empirical_C": worst["empirical_C"], "extremal": worst["extremal"],
                            "samples": sum(h["samples"] for h in hed)}
    if cfg.kind == "hardy":
        h = cfg.hardy
        extra["identity_embedding"] = identity_embedding_check(h.w1, h.w2, h.t_grid, refine=cfg.refine).to_dict()
    if cfg.kind == "lemma-local":
        doms = [r.detail["term1_over_term2_max"] for r in rows if "term1_over_term2_max" in r.detail]
        extra["term1_over_term2_max"] = max(doms) if doms else math.nan
    return BoundednessReport(cfg.name, cfg.kind, cfg.tree, tuple(header), rows, conditions, sup, sup_fine,
                             sup_stable, verdict, extra)


def _expect(cfg, kinds):
    if cfg.kind not in kinds:
        raise ConfigError(f"expected a config of kind {' or '.join(kinds)}, got {cfg.kind!r}")


def run_spanne(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """Local Morrey norms of ``f`` and ``I_rho f`` at ``x0`` for every test function (``p > 1``)."""
    _expect(cfg, ("spanne",))
    return run_experiment(cfg, jobs)


def run_spanne_weak(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """The ``p = 1`` branch: weak local Morrey target and the ``A_{1,q}`` check."""
    _expect(cfg, ("weak-type",))
    return run_experiment(cfg, jobs)


def run_adams(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """Global Morrey norms with ``phi^{1/p}`` and ``phi^{1/q}`` plus the pointwise balancing diagnostic."""
    _expect(cfg, ("adams",))
    return run_experiment(cfg, jobs)


def run_lemma_local(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """Two-term local estimate swept over radii; rows report ``sup_r lhs / (term1 + term2)``."""
    _expect(cfg, ("lemma-local",))
    return run_experiment(cfg, jobs)


def run_hardy(cfg: ExperimentConfig, jobs: int = 1) -> BoundednessReport:
    """Best constant, identity embedding and the inequality on seeded non-decreasing samples."""
    _expect(cfg, ("hardy",))
    return run_experiment(cfg, jobs)
