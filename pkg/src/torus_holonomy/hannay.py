"""Hannay angle for a particle sliding on a loop of a revolving torus.

Two frameworks are implemented.  The line-integral route takes the
Omega-gradient of W = oint (Omega x r) . dr, i.e. the loop's area vector
G = oint r x dr, and applies

    delta_s     = -(1/L) * sum_i G_i * 2 pi n_i
    delta_theta = (2 pi / L) * delta_s

The Berry route integrates the tangential rotating-frame acceleration

    s'' = t . (Omega^2 r - (Omega . r) Omega - Omega_dot x r)

either loop-averaged (the adiabatic limit) or as a full ODE.  The Coriolis
force is normal to the path and drops out.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import PchipInterpolator

from .errors import UnsupportedLoop
from .geometry import (
    DEFAULT_PANELS,
    TWO_PI,
    Loop,
    Torus,
    Winding,
    embed,
    loop_length,
    loop_speed,
    loop_velocity,
    unit_tangent_embedded,
)

FRAMEWORKS = ("LineIntegral", "BerryAveraged", "BerrySimulated")

ARC_TABLE_KNOTS = 4096


@dataclass(frozen=True)
class OmegaProfile:
    """Angular velocity ramped linearly from zero.

    Omega_i(t) = (4 pi n_i / T) (t / T), so that the integral of Omega_i over
    [0, T] is 2 pi n_i and so is the integral of (T - t) dOmega_i/dt.
    """

    n1: int = 0
    n2: int = 0
    n3: int = 0
    T: float = 1.0
    ramp: str = "linear-from-zero"

    def __post_init__(self):
        if self.ramp != "linear-from-zero":
            raise ValueError(f"unknown ramp {self.ramp!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("process time T must be positive")

    @property
    def windings(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3], dtype=float)

    def omega(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(t, 4.0 * math.pi * self.windings / self.T**2)

    def omega_dot(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(np.ones_like(t), 4.0 * math.pi * self.windings / self.T**2)


@dataclass(frozen=True)
class HannayReport:
    line_integral_coeffs: tuple
    loop_length: float
    delta_s: float
    delta_theta: float
    framework: str


@dataclass(frozen=True)
class SimulationResult:
    """Report of a simulated run plus the sampled trajectory.

    ``trajectory`` has columns (t, s, s_dot), one row per particle circuit.
    """

    report: HannayReport
    trajectory: np.ndarray = field(compare=False)


def _require_closed(loop: Loop):
    if not loop.is_closed:
        raise UnsupportedLoop(f"{loop!r} is not a closed loop")
    if loop.rates == (0.0, 0.0):
        raise UnsupportedLoop("winding (0, 0) is not a loop")


def _grid(panels: int) -> np.ndarray:
    if panels < 2 or panels % 2:
        raise ValueError(f"Simpson quadrature needs an even panel count >= 2, got {panels}")
    return np.linspace(0.0, TWO_PI, panels + 1)


def loop_area_vector(torus: Torus, loop: Loop, panels: int = DEFAULT_PANELS) -> np.ndarray:
    """G = oint r x dr, the gradient of W with respect to Omega."""
    lam = _grid(panels)
    r = embed(torus, loop.point(lam))
    dr = loop_velocity(torus, loop, lam)
    return simpson(np.cross(r, dr), x=lam, axis=0)


def omega_cross_r_integral(torus: Torus, loop: Loop, omega, panels: int = DEFAULT_PANELS) -> float:
    """W = oint (Omega x r) . dr = Omega . oint (r x dr) for constant Omega."""
    _require_closed(loop)
    return float(np.dot(np.asarray(omega, dtype=float), loop_area_vector(torus, loop, panels)))


def _report(coeffs, length, delta_s, framework) -> HannayReport:
    return HannayReport(
        line_integral_coeffs=tuple(float(g) for g in coeffs),
        loop_length=float(length),
        delta_s=float(delta_s),
        delta_theta=float(TWO_PI * delta_s / length),
        framework=framework,
    )


def hannay_angle_line_integral(
    torus: Torus, loop: Loop, profile: OmegaProfile, panels: int = DEFAULT_PANELS
) -> HannayReport:
    _require_closed(loop)
    coeffs = loop_area_vector(torus, loop, panels)
    length = loop_length(torus, loop, panels)
    delta_s = -float(np.dot(coeffs, TWO_PI * profile.windings)) / length
    return _report(coeffs, length, delta_s, "LineIntegral")


def berry_acceleration(torus: Torus, loop: Loop, lam, omega, omega_dot):
    """Tangential acceleration s'' at ``lam`` for instantaneous Omega, dOmega/dt.

    Broadcasts over ``lam`` (shape (m,)) and over leading axes of
    ``omega``/``omega_dot`` (shape (..., 3)), giving shape (..., m).
    """
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    r = embed(torus, loop.point(lam))
    t = unit_tangent_embedded(torus, loop, lam)
    omega = np.asarray(omega, dtype=float)
    omega_dot = np.asarray(omega_dot, dtype=float)
    omega_sq = np.sum(omega * omega, axis=-1)[..., None]
    centrifugal = omega_sq * np.sum(t * r, axis=-1) - (omega @ r.T) * (omega @ t.T)
    euler = omega_dot @ np.cross(r, t).T  # t . (w x r) = w . (r x t)
    out = centrifugal - euler
    if scalar:
        out = out[..., 0]
        return float(out) if out.ndim == 0 else out
    return out


def berry_averaged_shift(
    torus: Torus,
    loop: Loop,
    profile: OmegaProfile,
    panels: int = DEFAULT_PANELS,
    time_panels: int = 64,
) -> HannayReport:
    """delta_s = int_0^T (T - t) <s''>(t) dt with <.> the arc-length loop average."""
    _require_closed(loop)
    lam = _grid(panels)
    speed = loop_speed(torus, loop, lam)
    length = float(simpson(speed, x=lam))
    times = np.linspace(0.0, profile.T, _even(time_panels) + 1)
    accel = berry_acceleration(torus, loop, lam, profile.omega(times), profile.omega_dot(times))
    mean_accel = simpson(accel * speed, x=lam, axis=-1) / length
    delta_s = float(simpson((profile.T - times) * mean_accel, x=times))
    return _report(loop_area_vector(torus, loop, panels), length, delta_s, "BerryAveraged")


def _even(k: int) -> int:
    if k < 2 or k % 2:
        raise ValueError(f"need an even panel count >= 2, got {k}")
    return k


class ArcLengthMap:
    """Arc length <-> loop parameter over one traversal.

    Built from a cumulative Simpson table of the speed on uniform knots and
    inverted by monotone (PCHIP) cubic interpolation.
    """

    def __init__(self, torus: Torus, loop: Loop, knots: int = ARC_TABLE_KNOTS):
        lam = np.linspace(0.0, TWO_PI, knots + 1)
        # Simpson needs a midpoint per interval: integrate on the doubled grid
        fine = np.linspace(0.0, TWO_PI, 2 * knots + 1)
        s_fine = cumulative_simpson(loop_speed(torus, loop, fine), x=fine, initial=0.0)
        s = s_fine[::2]
        self.length = float(s[-1])
        self._interp = PchipInterpolator(s, lam)
        self._breaks = self._interp.x.tolist()
        self._coeffs = self._interp.c.T.tolist()
        self._lam = lam

    def lam_of_s(self, s: float) -> float:
        """Loop parameter at arc length ``s`` (unwrapped, any real ``s``)."""
        laps, rem = divmod(s, self.length)
        k = bisect.bisect_right(self._breaks, rem) - 1
        k = min(max(k, 0), len(self._coeffs) - 1)
        c3, c2, c1, c0 = self._coeffs[k]
        dx = rem - self._breaks[k]
        return laps * TWO_PI + ((c3 * dx + c2) * dx + c1) * dx + c0


def _point_closure(torus: Torus, loop: Loop):
    a, c = torus.a, torus.c
    dphi, dtheta = loop.rates
    phi_s, theta_s = loop.start
    cos, sin, sqrt = math.cos, math.sin, math.sqrt

    def point(lam):
        phi = phi_s + dphi * lam
        theta = theta_s + dtheta * lam
        cp, sp, ct, st = cos(phi), sin(phi), cos(theta), sin(theta)
        radius = c + a * ct
        r = (radius * cp, radius * sp, a * st)
        vx = -dphi * radius * sp - dtheta * a * st * cp
        vy = dphi * radius * cp - dtheta * a * st * sp
        vz = dtheta * a * ct
        inv = 1.0 / sqrt(vx * vx + vy * vy + vz * vz)
        return r, (vx * inv, vy * inv, vz * inv)

    return point


def berry_simulate(
    torus: Torus,
    loop: Loop,
    profile: OmegaProfile,
    circuits: int = 1000,
    steps_per_circuit: int = 256,
    knots: int = ARC_TABLE_KNOTS,
) -> SimulationResult:
    """Integrate the un-averaged tangential dynamics with RK4.

    The particle starts at s = 0 with speed circuits * L / T.  The deviation
    sigma = s - p0 t is integrated instead of s to keep round-off at the
    scale of the shift; delta_s = sigma(T).
    """
    _require_closed(loop)
    if circuits < 1:
        raise ValueError("circuits must be >= 1")
    arc = ArcLengthMap(torus, loop, knots)
    length = loop_length(torus, loop)
    scale = arc.length / length
    big_t = profile.T
    speed0 = circuits * length / big_t
    w = 4.0 * math.pi * profile.windings / big_t**2
    w1, w2, w3 = (float(x) for x in w)
    point = _point_closure(torus, loop)
    lam_of_s = arc.lam_of_s

    def accel(t, sigma):
        r, tan = point(lam_of_s((speed0 * t + sigma) * scale))
        o1, o2, o3 = w1 * t, w2 * t, w3 * t
        rx, ry, rz = r
        tx, ty, tz = tan
        o_r = o1 * rx + o2 * ry + o3 * rz
        o_t = o1 * tx + o2 * ty + o3 * tz
        t_r = tx * rx + ty * ry + tz * rz
        # t . (w x r) with w = dOmega/dt
        euler = tx * (w2 * rz - w3 * ry) + ty * (w3 * rx - w1 * rz) + tz * (w1 * ry - w2 * rx)
        return (o1 * o1 + o2 * o2 + o3 * o3) * t_r - o_r * o_t - euler

    steps = circuits * steps_per_circuit
    h = big_t / steps
    sigma, vel = 0.0, 0.0
    rows = [(0.0, 0.0, speed0)]
    for i in range(steps):
        t = i * h
        k1v = accel(t, sigma)
        k1x = vel
        k2v = accel(t + 0.5 * h, sigma + 0.5 * h * k1x)
        k2x = vel + 0.5 * h * k1v
        k3v = accel(t + 0.5 * h, sigma + 0.5 * h * k2x)
        k3x = vel + 0.5 * h * k2v
        k4v = accel(t + h, sigma + h * k3x)
        k4x = vel + h * k3v
        sigma += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        vel += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if (i + 1) % steps_per_circuit == 0:
            t_next = (i + 1) * h
            rows.append((t_next, speed0 * t_next + sigma, speed0 + vel))

    report = _report(loop_area_vector(torus, loop), length, sigma, "BerrySimulated")
    return SimulationResult(report, np.array(rows))


def reference_knot_angle(torus: Torus, loop: Winding, profile: OmegaProfile, length: float) -> float:
    """Reference knot estimate -(2 pi^2 / L^2) p (2c^2 + a^2) pi, times n3.

    Half the value the line-integral rule gives; kept for comparison only.
    """
    return -(2.0 * math.pi**2 / length**2) * loop.p * (2.0 * torus.c**2 + torus.a**2) * math.pi * profile.n3


@dataclass(frozen=True)
class FrameworkComparison:
    """Hannay angles from each framework and their pairwise |differences|.

    For closed winding loops ``knot_reference`` holds the reference estimate
    and ``knot_ratio`` the generic-rule angle divided by it.
    """

    delta_theta: dict
    differences: dict
    reports: dict = field(compare=False)
    knot_reference: Optional[float] = None
    knot_ratio: Optional[float] = None


def compare_frameworks(
    torus: Torus,
    loop: Loop,
    profile: OmegaProfile,
    simulate: bool = False,
    circuits: int = 1000,
    panels: int = DEFAULT_PANELS,
) -> FrameworkComparison:
    reports = {
        "LineIntegral": hannay_angle_line_integral(torus, loop, profile, panels),
        "BerryAveraged": berry_averaged_shift(torus, loop, profile, panels),
    }
    if simulate:
        reports["BerrySimulated"] = berry_simulate(torus, loop, profile, circuits).report
    angles = {k: r.delta_theta for k, r in reports.items()}
    names = list(angles)
    diffs = {
        f"{x}-{y}": abs(angles[x] - angles[y]) for i, x in enumerate(names) for y in names[i + 1:]
    }
    ref = ratio = None
    if isinstance(loop, Winding):
        ref = reference_knot_angle(torus, loop, profile, reports["LineIntegral"].loop_length)
        ratio = angles["LineIntegral"] / ref if ref != 0 else math.nan
    return FrameworkComparison(angles, diffs, reports, ref, ratio)
