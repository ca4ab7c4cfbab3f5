"""Numerical laboratory for the dynamics of Zorich maps.

The map is ``Z(x) = nu * exp(x3) * h(x1, x2)``, where ``h`` sends the
square ``lam*Q`` onto a hemisphere (or another face) and is extended to the
plane by reflections.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    InadmissibleError,
    OverflowGuardError,
    RegimeError,
    SeamError,
    ZorichError,
)
from .geometry import FaceModel, MapParams, generalized_face, get_face
from .zorich import jacobian_fd, zorich_eval, zorich_iterate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "FaceModel",
    "InadmissibleError",
    "MapParams",
    "OverflowGuardError",
    "RegimeError",
    "SeamError",
    "ZorichError",
    "generalized_face",
    "get_face",
    "jacobian_fd",
    "zorich_eval",
    "zorich_iterate",
]
