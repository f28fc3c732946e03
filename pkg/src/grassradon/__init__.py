"""Radon transform on Grassmannians over R, C and H, with the cone
calculus needed to invert it and a seeded Monte Carlo verification suite."""

from .fields import ALL_FIELDS, COMPLEX, QUATERNION, REAL, FieldTag, field_from_string

__version__ = "0.1.0"

__all__ = [
    "ALL_FIELDS",
    "COMPLEX",
    "QUATERNION",
    "REAL",
    "FieldTag",
    "field_from_string",
    "__version__",
    # submodules form the public API surface
    "algebra",
    "cayley",
    "checks",
    "cone",
    "geometry",
    "operators",
    "sampling",
]

from . import algebra, cayley, checks, cone, geometry, operators, sampling  # noqa: E402
