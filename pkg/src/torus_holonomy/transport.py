"""Parallel transport along torus loops and the anholonomy ratio Sigma.

Two independent routes are provided: closed-form solutions of the transport
equations for toroidal, poloidal and winding loops, and a fixed-step RK4
integration of ``dP^j/dlam = -Gamma^j_{ik} (dx^i/dlam) P^k``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateChart, DivergentAnholonomy, UnsupportedLoop
from .geometry import (
    PINCH_TOL,
    TWO_PI,
    Loop,
    Poloidal,
    SurfacePoint,
    TangentVector,
    Toroidal,
    Torus,
    Winding,
    christoffel_at,
    metric_at,
    unit_tangent_chart,
)

DEFAULT_STEPS = 2**16


@dataclass(frozen=True)
class TransportResult:
    """Outcome of transporting ``p0`` along a loop.

    ``sigma`` is NaN when the initial projection onto the loop tangent
    vanishes.  ``norm_drift`` is the largest relative deviation of
    g(P, P) from its initial value seen along the path.
    """

    p_final: TangentVector
    sigma: float
    norm_drift: float
    method: str
    steps: Optional[int] = None
    samples: Optional[list] = field(default=None, compare=False)


@dataclass(frozen=True)
class SweepRow:
    theta0: float
    n: float
    sigma: Optional[float]

    @property
    def divergent(self) -> bool:
        return self.sigma is None


# -- basic pieces -----------------------------------------------------------


def projection(torus: Torus, at: SurfacePoint, u: TangentVector, p: TangentVector) -> float:
    """Metric inner product g(u, p) at the point ``at``."""
    g = metric_at(torus, at.theta)
    return g.g_phiphi * u.p_phi * p.p_phi + g.g_thetatheta * u.p_theta * p.p_theta


def norm_squared(torus: Torus, at: SurfacePoint, p: TangentVector) -> float:
    return projection(torus, at, p, p)


def pt_rhs(torus: Torus, loop: Loop, lam: float, p: TangentVector) -> TangentVector:
    """Right-hand side of the transport equation, dP/dlam."""
    dphi, dtheta = loop.rates
    gam = christoffel_at(torus, loop.point(lam).theta)
    return TangentVector(
        -gam.gamma_phi_phitheta * (dphi * p.p_theta + dtheta * p.p_phi),
        -gam.gamma_theta_phiphi * dphi * p.p_phi,
    )


def _path_crosses_pinch(torus: Torus, loop: Loop, lam_end: float) -> bool:
    n = torus.n
    theta_start = loop.start.theta
    dtheta = loop.rates[1]
    if dtheta == 0 or n > 1:
        return abs(n + math.cos(theta_start)) < PINCH_TOL
    # n + cos(theta) has roots at theta = +-arccos(-n) (mod 2 pi)
    root = math.acos(-n)
    lo, hi = sorted((theta_start, theta_start + dtheta * lam_end))
    for base in (root, TWO_PI - root):
        k = math.ceil((lo - base) / TWO_PI - 1e-15)
        if base + k * TWO_PI <= hi + 1e-15:
            return True
    return False


def _require_regular_path(torus: Torus, loop: Loop, lam_end: float):
    if _path_crosses_pinch(torus, loop, lam_end):
        raise DegenerateChart(f"{loop!r} passes through a pinch circle of the n={torus.n!r} torus")


def anholonomy_ratio(
    torus: Torus, loop: Loop, p0: TangentVector, p_end: TangentVector, lam_end: float = TWO_PI
) -> float:
    """Projection of ``p_end`` onto the initial unit tangent over that of ``p0``.

    Each projection uses the metric where its vector lives, so for an open
    (slanted) path the final projection is taken at the endpoint.  Returns
    NaN if the initial projection vanishes.
    """
    u0 = unit_tangent_chart(torus, loop, 0.0)
    before = projection(torus, loop.point(0.0), u0, p0)
    scale = math.sqrt(max(norm_squared(torus, loop.point(0.0), p0), 0.0))
    if abs(before) <= PINCH_TOL * scale or scale == 0.0:
        return math.nan
    return projection(torus, loop.point(lam_end), u0, p_end) / before


# -- numeric route ----------------------------------------------------------


def _rhs_closure(torus: Torus, loop: Loop):
    a, c = torus.a, torus.c
    dphi, dtheta = loop.rates
    theta_start = loop.start.theta
    cos, sin = math.cos, math.sin

    def rhs(lam, pphi, ptheta):
        theta = theta_start + dtheta * lam
        s = sin(theta)
        radius = c + a * cos(theta)
        return (a * s / radius) * (dphi * ptheta + dtheta * pphi), -(radius * s / a) * dphi * pphi

    return rhs


def transport_numeric(
    torus: Torus,
    loop: Loop,
    p0: TangentVector,
    steps: int = DEFAULT_STEPS,
    lam_end: float = TWO_PI,
    n_samples: int = 0,
) -> TransportResult:
    """Fixed-step classical RK4 integration of parallel transport.

    ``n_samples`` > 0 records the vector at that many evenly spaced
    parameter values (plus the start), which requires ``steps`` to be a
    multiple of ``n_samples``.
    """
    if steps < 16:
        raise ValueError(f"need at least 16 RK4 steps, got {steps}")
    if n_samples and steps % n_samples:
        raise ValueError("steps must be a multiple of n_samples")
    p0 = TangentVector(float(p0[0]), float(p0[1]))
    _require_regular_path(torus, loop, lam_end)

    rhs = _rhs_closure(torus, loop)
    a2, c, a = torus.a**2, torus.c, torus.a
    dtheta = loop.rates[1]
    theta_start = loop.start.theta
    cos = math.cos

    def g_norm(lam, x, y):
        radius = c + a * cos(theta_start + dtheta * lam)
        return radius * radius * x * x + a2 * y * y

    norm0 = g_norm(0.0, *p0)
    h = lam_end / steps
    x, y = p0
    drift = 0.0
    sample_every = steps // n_samples if n_samples else 0
    samples = [(0.0, p0)] if n_samples else None
    for i in range(steps):
        lam = i * h
        k1x, k1y = rhs(lam, x, y)
        k2x, k2y = rhs(lam + 0.5 * h, x + 0.5 * h * k1x, y + 0.5 * h * k1y)
        k3x, k3y = rhs(lam + 0.5 * h, x + 0.5 * h * k2x, y + 0.5 * h * k2y)
        k4x, k4y = rhs(lam + h, x + h * k3x, y + h * k3y)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        lam_next = (i + 1) * h
        if norm0 > 0.0:
            dev = abs(g_norm(lam_next, x, y) - norm0) / norm0
            if dev > drift:
                drift = dev
        if sample_every and (i + 1) % sample_every == 0:
            samples.append((lam_next, TangentVector(x, y)))

    p_final = TangentVector(x, y)
    return TransportResult(
        p_final=p_final,
        sigma=anholonomy_ratio(torus, loop, p0, p_final, lam_end),
        norm_drift=drift,
        method="numeric",
        steps=steps,
        samples=samples,
    )


# -- closed-form route ------------------------------------------------------


def transport_closed_form(torus: Torus, loop: Loop, p0: TangentVector, lam: float) -> TangentVector:
    """Exact transported vector at parameter ``lam``.

    Toroidal loops rotate with frequency alpha = sin(theta0); poloidal loops
    rescale P^phi by (c + a)/(c + a cos(theta)).  Winding loops use the
    substitution z = c + a cos(q lam), under which P depends on the path
    only through z, so any loop that returns z to its start returns P.
    """
    a, c = torus.a, torus.c
    p_phi0, p_theta0 = float(p0[0]), float(p0[1])

    if isinstance(loop, Toroidal):
        radius = c + a * math.cos(loop.theta0)
        if abs(radius) < PINCH_TOL * a:
            raise DegenerateChart(f"toroidal loop at theta0={loop.theta0!r} sits on a pinch circle")
        angle = math.sin(loop.theta0) * lam
        cs, sn = math.cos(angle), math.sin(angle)
        return TangentVector(
            p_phi0 * cs + (a * p_theta0 / radius) * sn,
            p_theta0 * cs - (radius * p_phi0 / a) * sn,
        )

    if isinstance(loop, Poloidal):
        _require_regular_path(torus, loop, lam)
        return TangentVector((c + a) * p_phi0 / (c + a * math.cos(lam)), p_theta0)

    if isinstance(loop, Winding):
        p, q = float(loop.p), float(loop.q)
        if q == 0.0:
            if p == 0.0:
                raise UnsupportedLoop("winding (0, 0) does not move")
            # theta stays at 0 where the connection vanishes
            return TangentVector(p_phi0, p_theta0)
        _require_regular_path(torus, loop, lam)
        z0 = c + a
        z = c + a * math.cos(q * lam)
        k = p / (a * q)  # z / (a * omega) = k * z
        u0, u = k * z0, k * z
        amp_a = p_theta0 * math.cos(u0) - (z0 / a) * p_phi0 * math.sin(u0)
        amp_b = p_theta0 * math.sin(u0) + (z0 / a) * p_phi0 * math.cos(u0)
        return TangentVector(
            (a / z) * (-amp_a * math.sin(u) + amp_b * math.cos(u)),
            amp_a * math.cos(u) + amp_b * math.sin(u),
        )

    raise UnsupportedLoop(f"no closed form for {loop!r}")


def transport_closed(
    torus: Torus, loop: Loop, p0: TangentVector, lam_end: float = TWO_PI, n_samples: int = 0
) -> TransportResult:
    """Closed-form counterpart of :func:`transport_numeric`.

    ``norm_drift`` is evaluated at the sample points (and the end); it is
    zero up to round-off.
    """
    p0 = TangentVector(float(p0[0]), float(p0[1]))
    lams = [lam_end * k / n_samples for k in range(n_samples + 1)] if n_samples else [lam_end]
    vectors = [transport_closed_form(torus, loop, p0, lam) for lam in lams]
    norm0 = norm_squared(torus, loop.point(0.0), p0)
    drift = 0.0
    if norm0 > 0.0:
        drift = max(abs(norm_squared(torus, loop.point(lam), v) - norm0) / norm0 for lam, v in zip(lams, vectors))
    return TransportResult(
        p_final=vectors[-1],
        sigma=anholonomy_ratio(torus, loop, p0, vectors[-1], lam_end),
        norm_drift=drift,
        method="closed",
        samples=list(zip(lams, vectors)) if n_samples else None,
    )


# -- Sigma for toroidal loops -----------------------------------------------


def sweep_p0(torus: Torus) -> TangentVector:
    """Reference initial vector with P^theta/P^phi = n + 1 and unit length at theta = 0.

    For a = 1 this is (1/((n+1) sqrt 2), 1/sqrt 2).
    """
    r2 = math.sqrt(2.0)
    return TangentVector(1.0 / ((torus.n + 1.0) * r2 * torus.a), 1.0 / (r2 * torus.a))


def sigma_closed_form(torus: Torus, loop: Toroidal) -> float:
    """Sigma(n, theta0) = cos(2 pi alpha) + (n+1) sin(2 pi alpha)/(n + cos theta0).

    Evaluated for the :func:`sweep_p0` initial vector, alpha = sin(theta0).
    """
    if not isinstance(loop, Toroidal):
        raise UnsupportedLoop("the closed-form Sigma is defined for toroidal loops only")
    n = torus.n
    denom = n + math.cos(loop.theta0)
    if abs(denom) < PINCH_TOL:
        raise DivergentAnholonomy(f"n + cos(theta0) vanishes at theta0={loop.theta0!r}, n={n!r}")
    two_pi_alpha = TWO_PI * math.sin(loop.theta0)
    return math.cos(two_pi_alpha) + (n + 1.0) * math.sin(two_pi_alpha) / denom


def sigma_from_projections(torus: Torus, theta0: float, p0: TangentVector) -> float:
    """Sigma as the ratio of the start and end projections for general ``p0``."""
    a = torus.a
    radius = torus.c + a * math.cos(theta0)
    alpha = math.sin(theta0)
    start = radius * p0.p_phi
    end = radius * p0.p_phi * math.cos(TWO_PI * alpha) + a * p0.p_theta * math.sin(TWO_PI * alpha)
    if abs(start) < PINCH_TOL * math.hypot(radius * p0.p_phi, a * p0.p_theta):
        raise DivergentAnholonomy("initial projection vanishes")
    return end / start


def pinch_angles(n: float, lo: float, hi: float) -> list[float]:
    """Roots of n + cos(theta) in [lo, hi], ascending."""
    if n > 1.0:
        return []
    root = math.acos(-n)
    found = set()
    for base in (root, TWO_PI - root):
        k = math.ceil((lo - base) / TWO_PI)
        while base + k * TWO_PI <= hi:
            found.add(base + k * TWO_PI)
            k += 1
    return sorted(found)


def sigma_sweep(n: float, a: float, theta0_grid: Sequence[float], jobs: int = 1) -> list[SweepRow]:
    """Sigma over a grid of toroidal loops.

    A row is divergent (``sigma is None``) if n + cos(theta0) vanishes there
    or if it is the grid point nearest to a root of n + cos(theta0), so a
    divergence always shows up within one grid cell of where it occurs.
    """
    grid = np.asarray(theta0_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("theta0 grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("theta0 grid must be strictly increasing")
    if grid[0] < -1e-12 or grid[-1] > TWO_PI + 1e-12:
        raise ValueError("theta0 grid must lie in [0, 2 pi]")
    torus = Torus.from_aspect(n, a)

    marked = set()
    for root in pinch_angles(torus.n, float(grid[0]), float(grid[-1])):
        marked.add(int(np.argmin(np.abs(grid - root))))

    def row(k):
        theta0 = float(grid[k])
        if k in marked:
            return SweepRow(theta0, torus.n, None)
        try:
            return SweepRow(theta0, torus.n, sigma_closed_form(torus, Toroidal(theta0)))
        except DivergentAnholonomy:
            return SweepRow(theta0, torus.n, None)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(row, range(grid.size)))
    return [row(k) for k in range(grid.size)]
