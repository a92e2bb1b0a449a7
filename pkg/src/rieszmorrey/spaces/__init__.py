"""Test functions, scale functions and weighted (weak) Lebesgue and Morrey norms."""

from .functions import (
    BallIndicator,
    ComplementPower,
    Dilated,
    Gaussian,
    PhiFunction,
    RadialPowerBump,
    RadialTable,
    Restricted,
    Scaled,
    Sum,
    TestFunction,
    Zero,
)
from .norms import (
    NormResult,
    lp_norm,
    lp_norm_profile,
    morrey_norm_global,
    morrey_norm_local,
    weak_lq_norm,
    weak_morrey_norm_local,
    weak_norm_profile,
)

__all__ = [
    "BallIndicator",
    "ComplementPower",
    "Dilated",
    "Gaussian",
    "NormResult",
    "PhiFunction",
    "RadialPowerBump",
    "RadialTable",
    "Restricted",
    "Scaled",
    "Sum",
    "TestFunction",
    "Zero",
    "lp_norm",
    "lp_norm_profile",
    "morrey_norm_global",
    "morrey_norm_local",
    "weak_lq_norm",
    "weak_morrey_norm_local",
    "weak_norm_profile",
]
