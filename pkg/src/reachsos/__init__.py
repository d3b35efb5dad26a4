"""reachsos: certified outer bounds of finite-horizon reachable sets.

Computes outer bounds for forward reachable sets of uncertain polynomial
systems by assembling dissipation-inequality conditions into sum-of-squares
programs, solving them by bisection over a quasi-convex scalar, and
re-verifying every certificate with independent residual checks and
Monte-Carlo simulation.
"""

from .poly import (
    Polynomial,
    PolyParseError,
    StructuralError,
    Var,
    VarRegistry,
    format_polynomial,
    parse_polynomial,
)

__version__ = "0.1.0"

__all__ = [
    "Polynomial",
    "PolyParseError",
    "StructuralError",
    "Var",
    "VarRegistry",
    "format_polynomial",
    "parse_polynomial",
    "__version__",
]
