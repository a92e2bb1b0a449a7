"""Experiment configuration: a strict TOML tree with a versioned schema.

Unknown keys anywhere in the tree are errors. A config may name a shipped
``preset``; its own keys are then merged over the preset, table by table.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, PreconditionError
from ..grids import log_grid
from ..hardy import HalfLineFunction
from ..kernel import Kernel
from ..spaces.functions import (
    BallIndicator,
    ComplementPower,
    Gaussian,
    PhiFunction,
    Poisoned,
    RadialPowerBump,
    RadialTable,
    TestFunction,
    Zero,
)
from ..weights import ExponentSet, Weight

SCHEMA = "rieszmorrey.config/1"
KINDS = ("spanne", "adams", "lemma-local", "weak-type", "hardy", "conditions-only")

_TOP = {"schema", "name", "kind", "n", "seed", "preset", "kernel", "weight", "exponents", "phi1", "phi2", "phi",
        "grid", "functions", "tolerances", "output", "hardy", "hedberg", "conditions"}
_TABLES = {
    "kernel": {"family", "alpha", "beta", "path", "t", "values"},
    "weight": {"family", "beta", "center", "log_exponent", "scale", "factors"},
    "exponents": {"p", "q"},
    "phi": {"family", "lam", "exponent", "log_exponent", "scale", "table"},
    "grid": {"x0", "r", "centers", "t", "balls"},
    "function": {"kind", "id", "radius", "center", "height", "gamma", "width", "decay", "radii", "values", "bad"},
    "tolerances": {"refine", "rtol"},
    "output": {"path", "format"},
    "hardy": {"w1", "w2", "w", "samples", "t"},
    "halfline": {"family", "coef", "gamma", "beta", "table"},
    "hedberg": {"samples", "x_box"},
    "conditions": {"families"},
}
FUNCTION_KINDS = ("indicator", "gaussian", "power-bump", "complement-power", "zero", "poisoned", "table")
CONDITION_FAMILIES = ("lebesgue-condition", "apq", "spanne", "adams", "hardy")


def _fail(where: str, msg: str):
    raise ConfigError(f"{where}: {msg}")


def _keys(table, allowed: set, where: str):
    if not isinstance(table, dict):
        _fail(where, "expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        _fail(where, f"unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")


def _num(table, key, where, default=None, positive=False):
    v = table.get(key, default)
    if v is None:
        _fail(where, f"missing {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, f"{key!r} must be a number")
    v = float(v)
    if not math.isfinite(v) or (positive and not v > 0):
        _fail(where, f"{key!r} must be {'positive and ' if positive else ''}finite")
    return v


def _grid3(spec, where) -> np.ndarray:
    if not (isinstance(spec, list) and len(spec) == 3):
        _fail(where, "expected [lo, hi, num]")
    lo, hi, num = spec
    if not (isinstance(num, int) and num >= 1 and 0 < lo <= hi and math.isfinite(hi)):
        _fail(where, "need 0 < lo <= hi and an integer num >= 1")
    return log_grid(float(lo), float(hi), int(num))


def merge(base: dict, over: dict) -> dict:
    """Table-wise merge of ``over`` onto ``base``; arrays and scalars replace."""
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def preset_names() -> list:
    root = resources.files(__package__).joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def preset_tree(name: str) -> dict:
    path = resources.files(__package__).joinpath("presets", f"{name}.toml")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return tomllib.loads(path.read_text())


def read_tree(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def resolve(tree: dict) -> dict:
    """Expand a ``preset`` reference; presets may not chain."""
    name = tree.get("preset")
    if name is None:
        return tree
    if not isinstance(name, str):
        _fail("preset", "must be a string")
    base = preset_tree(name)
    if "preset" in base:
        _fail(f"preset {name}", "presets may not reference other presets")
    over = {k: v for k, v in tree.items() if k != "preset"}
    return merge(base, over)


# ---------------------------------------------------------------------------
# builders


def build_kernel(spec: dict, n: int) -> Kernel:
    where = "kernel"
    _keys(spec, _TABLES["kernel"], where)
    fam = spec.get("family", "power")
    if fam == "power":
        return Kernel.power(_num(spec, "alpha", where), n)
    if fam == "power-log":
        return Kernel.power_log(_num(spec, "alpha", where), _num(spec, "beta", where), n)
    if fam == "table":
        if "path" in spec:
            return Kernel.from_file(spec["path"], n)
        if "t" not in spec or "values" not in spec:
            _fail(where, "table kernel needs 'path' or both 't' and 'values'")
        return Kernel.from_table(spec["t"], spec["values"], n)
    _fail(where, f"unknown family {fam!r}")


def build_weight(spec: dict, n: int) -> Weight:
    where = "weight"
    _keys(spec, _TABLES["weight"], where)
    fam = spec.get("family", "constant")
    scale = _num(spec, "scale", where, 1.0, positive=True)
    if fam == "constant":
        return Weight.constant(n, scale)
    if fam == "power":
        return Weight.power(_num(spec, "beta", where), n, spec.get("center"), scale)
    if fam == "power-log":
        return Weight("power-log", n, beta=_num(spec, "beta", where), center=spec.get("center") or (),
                      log_exponent=_num(spec, "log_exponent", where, 0.0), scale=scale)
    if fam == "product":
        return Weight.product(spec.get("factors", ()), n, scale)
    _fail(where, f"unknown family {fam!r}")


def build_phi(spec: dict, n: int, p: float, where: str) -> PhiFunction:
    """``family = "morrey"`` gives ``r^((lam - n)/p)``, ``"adams"`` gives ``r^(lam - n)``."""
    _keys(spec, _TABLES["phi"], where)
    fam = spec.get("family", "morrey")
    scale = _num(spec, "scale", where, 1.0, positive=True)
    if fam == "morrey":
        return PhiFunction("power", exponent=(_num(spec, "lam", where) - n) / p, scale=scale)
    if fam == "adams":
        return PhiFunction("power", exponent=_num(spec, "lam", where) - n, scale=scale)
    if fam == "power":
        return PhiFunction("power", exponent=_num(spec, "exponent", where), scale=scale)
    if fam == "power-log":
        return PhiFunction("power-log", exponent=_num(spec, "exponent", where),
                           log_exponent=_num(spec, "log_exponent", where), scale=scale)
    if fam == "table":
        return PhiFunction("table", table=tuple(map(tuple, spec.get("table", ()))), scale=scale)
    _fail(where, f"unknown family {fam!r}")


def build_function(spec: dict, n: int, index: int) -> tuple:
    where = f"functions[{index}]"
    _keys(spec, _TABLES["function"], where)
    kind = spec.get("kind")
    fid = spec.get("id") or f"f{index}"
    center = spec.get("center")
    height = _num(spec, "height", where, 1.0)
    if kind == "indicator":
        f = BallIndicator(n, _num(spec, "radius", where, 1.0, positive=True), center, height)
    elif kind == "gaussian":
        f = Gaussian(n, _num(spec, "width", where, 1.0, positive=True), center, height)
    elif kind == "power-bump":
        f = RadialPowerBump(n, _num(spec, "gamma", where), _num(spec, "radius", where, 1.0, positive=True), center,
                            height)
    elif kind == "complement-power":
        f = ComplementPower(n, spec.get("decay"), _num(spec, "radius", where, 1.0, positive=True), center, height)
    elif kind == "zero":
        f = Zero(n)
    elif kind == "table":
        f = RadialTable(n, spec.get("radii", ()), spec.get("values", ()), center)
    elif kind == "poisoned":
        f = Poisoned(BallIndicator(n, _num(spec, "radius", where, 1.0, positive=True), center, height),
                     _num(spec, "bad", where, 0.5, positive=True))
    else:
        _fail(where, f"unknown kind {kind!r}; expected one of {', '.join(FUNCTION_KINDS)}")
    return str(fid), f


def build_halfline(spec: dict, where: str) -> HalfLineFunction:
    _keys(spec, _TABLES["halfline"], where)
    fam = spec.get("family", "power")
    if fam == "table":
        arr = np.asarray(spec.get("table", ()), dtype=float).reshape(-1, 2)
        return HalfLineFunction.from_table(arr[:, 0], arr[:, 1])
    return HalfLineFunction(fam, coef=_num(spec, "coef", where, 1.0), gamma=_num(spec, "gamma", where, 0.0),
                            beta=_num(spec, "beta", where, 0.0))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HardySetup:
    w1: HalfLineFunction
    w2: HalfLineFunction
    w: HalfLineFunction
    samples: int
    t_grid: np.ndarray


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment. ``tree`` keeps the resolved key/value form for reports."""

    name: str
    kind: str
    n: int
    seed: int
    tree: dict
    kernel: Kernel | None = None
    weight: Weight | None = None
    exponents: ExponentSet | None = None
    phi1: PhiFunction | None = None
    phi2: PhiFunction | None = None
    phi: PhiFunction | None = None
    x0: tuple = (0.0,)
    r_grid: np.ndarray = field(default_factory=lambda: log_grid(1e-2, 1e2, 33))
    centers: np.ndarray | None = None
    t_grid: np.ndarray | None = None
    functions: tuple = ()
    refine: int = 2
    rtol: float = 0.05
    output_path: str | None = None
    output_format: str = "json"
    hardy: HardySetup | None = None
    hedberg_samples: int = 0
    hedberg_box: tuple = (-2.0, 2.0)
    condition_families: tuple = CONDITION_FAMILIES

    @property
    def weak(self) -> bool:
        return self.exponents is not None and self.exponents.p == 1

    def with_overrides(self, refine: int | None = None, seed: int | None = None) -> "ExperimentConfig":
        tree = copy.deepcopy(self.tree)
        if refine is not None:
            tree.setdefault("tolerances", {})["refine"] = refine
        if seed is not None:
            tree["seed"] = seed
        return from_tree(tree)


def load(path=None, preset: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Load a config file, a shipped preset, or a preset with a file merged over it."""
    if path is None and preset is None:
        raise ConfigError("need a config path or a preset name")
    tree = read_tree(path) if path is not None else {}
    if preset is not None:
        if "preset" in tree and tree["preset"] != preset:
            raise ConfigError(f"config names preset {tree['preset']!r} but {preset!r} was requested")
        tree = {**tree, "preset": preset}
        tree.setdefault("schema", SCHEMA)
    if overrides:
        tree = merge(tree, overrides)
    return from_tree(tree)


def from_tree(tree: dict) -> ExperimentConfig:
    tree = resolve(tree)
    _keys(tree, _TOP, "config")
    if tree.get("schema") != SCHEMA:
        _fail("schema", f"expected {SCHEMA!r}, got {tree.get('schema')!r}")
    kind = tree.get("kind")
    if kind not in KINDS:
        _fail("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    n = tree.get("n", 1)
    if not (isinstance(n, int) and 1 <= n <= 3):
        _fail("n", "dimension must be an integer in 1..3")
    seed = tree.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail("seed", "must be an integer")
    try:
        return _build(tree, kind, n, seed)
    except PreconditionError as exc:
        raise ConfigError(f"config {tree.get('name', '?')}: {exc}") from exc


def _build(tree, kind, n, seed) -> ExperimentConfig:
    kw: dict = {"name": str(tree.get("name", kind)), "kind": kind, "n": n, "seed": seed, "tree": tree}
    tol = tree.get("tolerances", {})
    _keys(tol, _TABLES["tolerances"], "tolerances")
    refine = tol.get("refine", 2)
    if not (isinstance(refine, int) and refine >= 1):
        _fail("tolerances", "'refine' must be an integer >= 1")
    kw["refine"] = refine
    kw["rtol"] = _num(tol, "rtol", "tolerances", 0.05, positive=True)
    out = tree.get("output", {})
    _keys(out, _TABLES["output"], "output")
    kw["output_path"] = out.get("path")
    kw["output_format"] = out.get("format", "json")
    if kw["output_format"] not in ("json", "csv"):
        _fail("output", "format must be 'json' or 'csv'")

    grid = tree.get("grid", {})
    _keys(grid, _TABLES["grid"], "grid")
    if "r" in grid:
        kw["r_grid"] = _grid3(grid["r"], "grid.r")
    if "t" in grid:
        kw["t_grid"] = _grid3(grid["t"], "grid.t")
    x0 = np.asarray(grid.get("x0", 0.0), dtype=float).reshape(-1)
    if x0.size == 1 and n > 1:
        x0 = np.full(n, x0[0])
    if x0.size != n:
        _fail("grid.x0", f"expected {n} coordinates")
    kw["x0"] = tuple(x0.tolist())
    if "centers" in grid:
        c = np.asarray(grid["centers"], dtype=float)
        c = c.reshape(-1, 1) if n == 1 else c.reshape(-1, n)
        if c.shape[0] == 0:
            _fail("grid.centers", "grid is empty")
        kw["centers"] = c

    if kind == "hardy":
        kw["hardy"] = _hardy_setup(tree.get("hardy"))
        return ExperimentConfig(**kw)

    for key in ("kernel", "weight", "exponents"):
        if key not in tree:
            _fail("config", f"missing [{key}] table")
    kw["kernel"] = build_kernel(tree["kernel"], n)
    kw["weight"] = build_weight(tree["weight"], n)
    ex = tree["exponents"]
    _keys(ex, _TABLES["exponents"], "exponents")
    e = ExponentSet(_num(ex, "p", "exponents"), _num(ex, "q", "exponents"))
    kw["exponents"] = e
    if "phi1" in tree:
        kw["phi1"] = build_phi(tree["phi1"], n, e.p, "phi1")
    if "phi2" in tree:
        kw["phi2"] = build_phi(tree["phi2"], n, e.q, "phi2")
    if "phi" in tree:
        kw["phi"] = build_phi(tree["phi"], n, 1.0, "phi")
    if kind in ("spanne", "weak-type") and (kw["phi1"] is None or kw["phi2"] is None):
        _fail("config", f"kind {kind!r} needs [phi1] and [phi2]")
    if kind == "adams" and kw["phi"] is None:
        _fail("config", "kind 'adams' needs [phi]")
    if kind == "weak-type" and e.p != 1:
        _fail("exponents", "kind 'weak-type' needs p = 1")

    funcs = tree.get("functions", [])
    if not isinstance(funcs, list):
        _fail("functions", "expected an array of tables")
    built = [build_function(spec, n, i) for i, spec in enumerate(funcs)]
    ids = [fid for fid, _ in built]
    if len(set(ids)) != len(ids):
        _fail("functions", "function ids must be unique")
    if kind != "conditions-only" and not built:
        _fail("functions", "the test-function family is empty")
    kw["functions"] = tuple(built)

    hed = tree.get("hedberg", {})
    _keys(hed, _TABLES["hedberg"], "hedberg")
    samples = hed.get("samples", 16 if kind == "adams" else 0)
    if not (isinstance(samples, int) and samples >= 0):
        _fail("hedberg", "'samples' must be a nonnegative integer")
    kw["hedberg_samples"] = samples
    box = hed.get("x_box", [-2.0, 2.0])
    if not (isinstance(box, list) and len(box) == 2 and box[0] < box[1]):
        _fail("hedberg", "'x_box' must be [lo, hi] with lo < hi")
    kw["hedberg_box"] = (float(box[0]), float(box[1]))

    cond = tree.get("conditions", {})
    _keys(cond, _TABLES["conditions"], "conditions")
    fams = tuple(cond.get("families", CONDITION_FAMILIES))
    bad = sorted(set(fams) - set(CONDITION_FAMILIES))
    if bad:
        _fail("conditions", f"unknown families {', '.join(bad)}")
    kw["condition_families"] = fams
    return ExperimentConfig(**kw)


def _hardy_setup(spec) -> HardySetup:
    if spec is None:
        _fail("config", "kind 'hardy' needs a [hardy] table")
    _keys(spec, _TABLES["hardy"], "hardy")
    for key in ("w1", "w2", "w"):
        if key not in spec:
            _fail("hardy", f"missing {key!r}")
    samples = spec.get("samples", 64)
    if not (isinstance(samples, int) and samples >= 1):
        _fail("hardy", "'samples' must be a positive integer")
    t = _grid3(spec["t"], "hardy.t") if "t" in spec else log_grid(1e-4, 1e4, 129)
    return HardySetup(build_halfline(spec["w1"], "hardy.w1"), build_halfline(spec["w2"], "hardy.w2"),
                      build_halfline(spec["w"], "hardy.w"), samples, t)
