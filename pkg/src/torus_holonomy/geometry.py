"""Torus surface, metric, Levi-Civita connection and winding loops.

The torus is embedded as

    x1 = (c + a cos(theta)) cos(phi)
    x2 = (c + a cos(theta)) sin(phi)
    x3 = a sin(theta)

with ``a`` the tube radius and ``c`` the central radius.  Every loop is
traversed with a parameter ``lam`` in [0, 2*pi] and moves with constant
chart velocity, ``(phi, theta) = start + lam * (dphi, dtheta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.integrate import simpson

from .errors import DegenerateChart, ZeroTangent

TWO_PI = 2.0 * math.pi

#: |n + cos(theta)| below this is treated as a chart pinch point.
PINCH_TOL = 1e-12

DEFAULT_PANELS = 8192


@dataclass(frozen=True)
class Torus:
    """A regular (ring, horn or spindle) torus with radii ``a`` and ``c``."""

    a: float
    c: float

    def __post_init__(self):
        for name in ("a", "c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"torus radius {name} must be finite and > 0, got {value!r}")

    @classmethod
    def from_aspect(cls, n: float, a: float = 1.0) -> "Torus":
        """Build a torus from its aspect ratio ``n = c / a``."""
        return cls(a=float(a), c=float(n) * float(a))

    @property
    def n(self) -> float:
        return self.c / self.a

    @property
    def kind(self) -> str:
        """``"ring"``, ``"horn"`` or ``"spindle"`` by aspect ratio."""
        if self.c > self.a:
            return "ring"
        if self.c == self.a:
            return "horn"
        return "spindle"

    def radius_at(self, theta):
        """Distance from the central axis, ``c + a cos(theta)``."""
        return self.c + self.a * np.cos(theta)


class SurfacePoint(NamedTuple):
    phi: float
    theta: float


class TangentVector(NamedTuple):
    """Contravariant components ``(P^phi, P^theta)``."""

    p_phi: float
    p_theta: float


class MetricAtTheta(NamedTuple):
    g_phiphi: float
    g_thetatheta: float


class ChristoffelAtTheta(NamedTuple):
    """The two independent non-zero connection coefficients.

    ``gamma_phi_phitheta`` is Gamma^phi_{phi theta} (= Gamma^phi_{theta phi}),
    ``gamma_theta_phiphi`` is Gamma^theta_{phi phi}.
    """

    gamma_phi_phitheta: float
    gamma_theta_phiphi: float


# -- loops ------------------------------------------------------------------


class _Loop:
    """Shared behaviour of the three loop kinds.

    Subclasses provide ``start`` (a SurfacePoint) and ``rates``
    (``(dphi/dlam, dtheta/dlam)``).
    """

    start: SurfacePoint
    rates: tuple

    def point(self, lam):
        dphi, dtheta = self.rates
        return SurfacePoint(self.start.phi + dphi * lam, self.start.theta + dtheta * lam)

    @property
    def is_closed(self) -> bool:
        return all(float(r).is_integer() for r in self.rates)


@dataclass(frozen=True)
class Toroidal(_Loop):
    """Circle of constant poloidal angle ``theta0`` around the central axis."""

    theta0: float = 0.0

    @property
    def start(self):
        return SurfacePoint(0.0, self.theta0)

    @property
    def rates(self):
        return (1.0, 0.0)

    @property
    def kind(self):
        return "toroidal"


@dataclass(frozen=True)
class Poloidal(_Loop):
    """Meridian circle of constant toroidal angle ``phi0`` around the tube."""

    phi0: float = 0.0

    @property
    def start(self):
        return SurfacePoint(self.phi0, 0.0)

    @property
    def rates(self):
        return (0.0, 1.0)

    @property
    def kind(self):
        return "poloidal"


@dataclass(frozen=True)
class Winding(_Loop):
    """Curve ``phi = p*lam, theta = q*lam``; a torus knot for coprime p, q >= 2."""

    p: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError("winding numbers must be finite")
        if self.p < 0 or self.q < 0:
            raise ValueError(f"winding numbers must be >= 0, got ({self.p}, {self.q})")

    @property
    def start(self):
        return SurfacePoint(0.0, 0.0)

    @property
    def rates(self):
        return (float(self.p), float(self.q))

    @property
    def omega(self) -> float:
        """Winding number q/p (infinite for p = 0)."""
        return math.inf if self.p == 0 else self.q / self.p

    @property
    def kind(self) -> str:
        """Topological class of the curve.

        ``"knot"`` (coprime p, q >= 2), ``"unknot"`` (p or q equal to 1),
        ``"open"`` (non-integer p or q: a slanted path that does not close),
        ``"repeated"`` (integers sharing a factor, i.e. a closed curve traced
        several times) or ``"degenerate"`` for p = q = 0.
        """
        if not self.is_closed:
            return "open"
        p, q = int(self.p), int(self.q)
        if p == 0 and q == 0:
            return "degenerate"
        if p == 1 or q == 1:
            return "unknot"
        if math.gcd(p, q) == 1:
            return "knot"
        return "repeated"


Loop = Union[Toroidal, Poloidal, Winding]


def loop_point(loop: Loop, lam) -> SurfacePoint:
    """Chart coordinates of the loop at parameter ``lam`` (unwrapped)."""
    return loop.point(lam)


# -- metric and connection --------------------------------------------------


def embed(torus: Torus, pt) -> np.ndarray:
    """Cartesian position of a chart point; vectorises over array angles."""
    phi, theta = pt
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    radius = torus.c + torus.a * np.cos(theta)
    return np.stack(
        np.broadcast_arrays(radius * np.cos(phi), radius * np.sin(phi), torus.a * np.sin(theta)),
        axis=-1,
    )


def metric_at(torus: Torus, theta: float) -> MetricAtTheta:
    radius = torus.c + torus.a * math.cos(theta)
    return MetricAtTheta(radius * radius, torus.a * torus.a)


def _check_chart(torus: Torus, theta: float) -> float:
    radius = torus.c + torus.a * math.cos(theta)
    if abs(radius) < PINCH_TOL * torus.a:
        raise DegenerateChart(
            f"chart is singular at theta={theta!r} for n={torus.n!r} (c + a cos(theta) = {radius!r})"
        )
    return radius


def christoffel_at(torus: Torus, theta: float) -> ChristoffelAtTheta:
    """Levi-Civita connection of the torus metric at poloidal angle ``theta``.

    Gamma^theta_{phi phi} = -(1/2) g^{theta theta} d_theta g_{phi phi}
    = +sin(theta) (c + a cos(theta)) / a.
    """
    radius = _check_chart(torus, theta)
    s = math.sin(theta)
    return ChristoffelAtTheta(-torus.a * s / radius, s * radius / torus.a)


# -- tangents ---------------------------------------------------------------


def _rates_checked(loop: Loop):
    dphi, dtheta = loop.rates
    if dphi == 0 and dtheta == 0:
        raise ZeroTangent(f"{loop!r} has no tangent direction")
    return dphi, dtheta


def unit_tangent_chart(torus: Torus, loop: Loop, lam: float) -> TangentVector:
    """Unit tangent of the loop in chart components, g(u, u) = 1."""
    dphi, dtheta = _rates_checked(loop)
    theta = loop.point(lam).theta
    radius = _check_chart(torus, theta)
    speed = math.hypot(radius * dphi, torus.a * dtheta)
    return TangentVector(dphi / speed, dtheta / speed)


def chart_basis(torus: Torus, pt) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate basis vectors (d embed/d phi, d embed/d theta) at a point."""
    phi, theta = pt
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    radius = torus.c + torus.a * np.cos(theta)
    zero = np.zeros_like(radius * phi)
    e_phi = np.stack(np.broadcast_arrays(-radius * np.sin(phi), radius * np.cos(phi), zero), axis=-1)
    e_theta = np.stack(
        np.broadcast_arrays(
            -torus.a * np.sin(theta) * np.cos(phi),
            -torus.a * np.sin(theta) * np.sin(phi),
            torus.a * np.cos(theta) + zero,
        ),
        axis=-1,
    )
    return e_phi, e_theta


def loop_velocity(torus: Torus, loop: Loop, lam) -> np.ndarray:
    """d embed(loop_point(lam)) / d lam; vectorises over ``lam``."""
    dphi, dtheta = loop.rates
    e_phi, e_theta = chart_basis(torus, loop.point(np.asarray(lam, dtype=float)))
    return dphi * e_phi + dtheta * e_theta


def unit_tangent_embedded(torus: Torus, loop: Loop, lam) -> np.ndarray:
    """Euclidean unit tangent: pushforward of :func:`unit_tangent_chart`."""
    _rates_checked(loop)
    lam = np.asarray(lam, dtype=float)
    theta = loop.point(lam).theta
    if np.any(np.abs(torus.c + torus.a * np.cos(theta)) < PINCH_TOL * torus.a) and loop.rates[0] != 0:
        raise DegenerateChart("loop passes through a pinch point")
    vel = loop_velocity(torus, loop, lam)
    return vel / np.linalg.norm(vel, axis=-1, keepdims=True)


# -- lengths ----------------------------------------------------------------


def _simpson_grid(panels: int) -> np.ndarray:
    if panels < 2 or panels % 2:
        raise ValueError(f"Simpson quadrature needs an even panel count >= 2, got {panels}")
    return np.linspace(0.0, TWO_PI, panels + 1)


def loop_speed(torus: Torus, loop: Loop, lam) -> np.ndarray:
    """|d embed / d lam| along the loop."""
    dphi, dtheta = loop.rates
    theta = loop.point(np.asarray(lam, dtype=float)).theta
    radius = torus.c + torus.a * np.cos(theta)
    return np.hypot(radius * dphi, torus.a * dtheta)


def loop_length(torus: Torus, loop: Loop, panels: int = DEFAULT_PANELS) -> float:
    """Arc length over lam in [0, 2*pi] by composite Simpson quadrature."""
    lam = _simpson_grid(panels)
    return float(simpson(loop_speed(torus, loop, lam), x=lam))


def approx_knot_length(torus: Torus, p: int, q: int) -> float:
    """Mean of the extreme-speed lengths of a (p, q) winding.

    pi*a*(sqrt(q^2 + p^2 (n+1)^2) + sqrt(q^2 + p^2 (n-1)^2))
    """
    if p == 0 and q == 0:
        raise ZeroTangent("(p, q) = (0, 0) has no length")
    n = torus.n
    return math.pi * torus.a * (math.hypot(q, p * (n + 1)) + math.hypot(q, p * (n - 1)))
