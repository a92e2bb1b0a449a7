"""Boundedness reports and their byte-deterministic JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..reports import ConditionReport, jsonable

REPORT_SCHEMA = "rieszmorrey.report/1"
CSV_COLUMNS = ("function_id", "source_norm", "target_norm", "ratio", "stable")
VERDICTS = ("bounded-evidence", "conditions-fail", "vacuous", "inconclusive", "conditions-hold")


@dataclass(frozen=True)
class Row:
    """One test function: its source and target norms and their quotient.

    ``ratio_refined`` is the same quotient with both norms recomputed on the
    refined grid; ``stable`` compares the two. ``degenerate`` rows have a zero
    source norm and carry ``nan``; ``error`` holds the message of a failed row.
    """

    function_id: str
    source_norm: float = math.nan
    target_norm: float = math.nan
    ratio: float = math.nan
    ratio_refined: float = math.nan
    stable: bool = False
    degenerate: bool = False
    divergent: bool = False
    error: str | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable({
            "function_id": self.function_id,
            "source_norm": self.source_norm,
            "target_norm": self.target_norm,
            "ratio": self.ratio,
            "ratio_refined": self.ratio_refined,
            "stable": self.stable,
            "degenerate": self.degenerate,
            "divergent": self.divergent,
            "error": self.error,
            "detail": self.detail,
        })


@dataclass(frozen=True)
class BoundednessReport:
    """Outcome of one experiment.

    ``sup_ratio`` is the largest finite row ratio and ``sup_ratio_refined``
    its counterpart on the refined grids; ``sup_stable`` holds when they
    differ by less than the configured relative tolerance. Wall-clock times
    are deliberately absent so that reports are byte-reproducible.
    """

    name: str
    kind: str
    config: dict
    header: tuple
    rows: tuple
    conditions: tuple
    sup_ratio: float
    sup_ratio_refined: float
    sup_stable: bool
    verdict: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "bounded-evidence" and not (all(c.holds for c in self.conditions) and self.sup_stable):
            raise ValueError("bounded-evidence needs every condition to hold and a stable sup ratio")

    @property
    def empirical_constant(self) -> float:
        return self.sup_ratio

    @property
    def conditions_hold(self) -> bool:
        return all(c.holds for c in self.conditions)

    def condition(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.condition == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return jsonable({
            "schema": REPORT_SCHEMA,
            "name": self.name,
            "kind": self.kind,
            "header": list(self.header),
            "config": self.config,
            "verdict": self.verdict,
            "sup_ratio": self.sup_ratio,
            "sup_ratio_refined": self.sup_ratio_refined,
            "sup_stable": self.sup_stable,
            "empirical_constant": self.empirical_constant,
            "conditions": [c.to_dict() for c in self.conditions],
            "rows": [r.to_dict() for r in self.rows],
            "extra": self.extra,
        })


def _csv_float(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def render(report: BoundednessReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for r in report.rows:
            out.writerow([r.function_id, _csv_float(r.source_norm), _csv_float(r.target_norm), _csv_float(r.ratio),
                          "true" if r.stable else "false"])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}; expected json or csv")


def render_conditions(reports) -> str:
    return json.dumps([c.to_dict() for c in reports], indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(text: str, path) -> None:
    """Write ``text`` to ``path``, re-raising I/O failures with the path in the message."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report to {path}: {exc.strerror or exc}", str(path)) from exc


def emit_report(report: BoundednessReport, fmt: str, path) -> None:
    """Serialize ``report`` as ``json`` or ``csv`` to ``path``."""
    write_text(render(report, fmt), path)
