"""Thermal cones: future, past and incomparable regions under (thermo)majorisation."""

from .simplex_core import (
    BetaOrder,
    GibbsContext,
    LorenzCurve,
    Relation,
    ValidationError,
    beta_order,
    classify,
    classify_many,
    thermo_curve,
    thermomajorises,
)

__version__ = "0.1.0"

__all__ = [
    "BetaOrder",
    "GibbsContext",
    "LorenzCurve",
    "Relation",
    "ValidationError",
    "beta_order",
    "classify",
    "classify_many",
    "thermo_curve",
    "thermomajorises",
    "__version__",
]
