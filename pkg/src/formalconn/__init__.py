"""Exact computation with formal flat GL_n-bundles on the punctured disk.

Building blocks: cyclotomic scalars and truncated Puiseux series, point
gradings of the loop algebra, block-Coxeter maximal tori, strata and slopes,
gauge reduction to formal types, and orbit classification under the relative
affine Weyl group.
"""

from .errors import (
    BaseFieldError,
    FormalConnError,
    InsufficientPrecision,
    InvalidFormalType,
    NoSolution,
    NotCompatible,
    NotInHx,
    NotNormalizer,
    NotRegular,
    NotRegularClass,
    ParseError,
    Resonant,
    ZeroInput,
    ZeroSeries,
)
from .scalars import Cyclotomic, PuiseuxSeries, Rat, ratio

__all__ = [
    "BaseFieldError",
    "Cyclotomic",
    "FormalConnError",
    "InsufficientPrecision",
    "InvalidFormalType",
    "NoSolution",
    "NotCompatible",
    "NotInHx",
    "NotNormalizer",
    "NotRegular",
    "NotRegularClass",
    "ParseError",
    "PuiseuxSeries",
    "Rat",
    "Resonant",
    "ZeroInput",
    "ZeroSeries",
    "ratio",
]
