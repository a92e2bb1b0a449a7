"""Condition reports shared by the checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


def jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and infinities to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return jsonable(value.tolist())
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one sufficiency condition on a grid.

    Attributes
    ----------
    condition : str
        Identifier such as ``"growth"`` or ``"spanne-integral"``.
    holds : bool
        Verdict. A report that holds always has a finite ``empirical_C``.
    empirical_C : float
        Grid estimate of the smallest admissible constant (``inf`` when
        divergent).
    extremal : Any
        Grid point attaining the estimate (a radius, a pair or a ball).
    stable : bool
        Whether the estimate moved by less than 5% under refinement.
    divergent : bool
        Whether the underlying quantity was judged infinite.
    detail : dict
        Extra condition-specific values.
    notes : tuple of str
        Caveats recorded alongside the verdict.
    """

    condition: str
    holds: bool
    empirical_C: float
    extremal: Any = None
    stable: bool = True
    divergent: bool = False
    detail: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.holds and not math.isfinite(self.empirical_C):
            raise ValueError("a holding condition must have a finite constant")

    def to_dict(self) -> dict:
        return jsonable(
            {
                "condition": self.condition,
                "holds": self.holds,
                "empirical_C": self.empirical_C,
                "extremal": self.extremal,
                "stable": self.stable,
                "divergent": self.divergent,
                "detail": self.detail,
                "notes": list(self.notes),
            }
        )
