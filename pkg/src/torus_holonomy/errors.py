"""Exceptions raised by the torus holonomy library."""


class TorusHolonomyError(Exception):
    """Base class for all library errors."""


class DegenerateChart(TorusHolonomyError, ArithmeticError):
    """The (phi, theta) chart is singular: c + a*cos(theta) vanishes."""


class ZeroTangent(TorusHolonomyError, ValueError):
    """A winding loop with p = q = 0 has no tangent direction."""


class UnsupportedLoop(TorusHolonomyError, ValueError):
    """The requested operation is not defined for this loop."""


class DivergentAnholonomy(TorusHolonomyError, ArithmeticError):
    """The projection ratio has a vanishing denominator."""
