import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson, trapezoid

from torus_holonomy.errors import UnsupportedLoop
from torus_holonomy.geometry import Poloidal, Toroidal, Torus, Winding, loop_length, loop_speed
from torus_holonomy.hannay import (
    ArcLengthMap,
    OmegaProfile,
    berry_acceleration,
    berry_averaged_shift,
    berry_simulate,
    compare_frameworks,
    hannay_angle_line_integral,
    loop_area_vector,
    omega_cross_r_integral,
)

PI = math.pi
TWO_PI = 2 * PI


# -- reference expansions -------------------------------------------------------
# The Euler (dOmega/dt) parts are as printed.  The centrifugal parts are written
# with -(Omega.r)(Omega.t); the printed expansions carry the opposite sign on
# those terms (and cos 2theta for cos 2phi in the toroidal case).


def toroidal_expansion(a, c, theta0, phi, om, dom, printed_centrifugal=False):
    r = c + a * math.cos(theta0)
    h = a * math.sin(theta0)
    o1, o2, o3 = om
    d1, d2, d3 = dom
    centrifugal = 0.5 * r * (o1**2 - o2**2) * math.sin(2 * phi) - o1 * o2 * r * math.cos(2 * phi) + h * o3 * (
        o1 * math.sin(phi) - o2 * math.cos(phi)
    )
    if printed_centrifugal:
        centrifugal = 0.5 * r * (o2**2 - o1**2) * math.sin(2 * phi) + o1 * o2 * r * math.cos(2 * phi) + h * o3 * (
            o2 * math.cos(phi) - o1 * math.sin(phi)
        )
    euler = h * (d2 * math.sin(phi) + d1 * math.cos(phi)) - r * d3
    return centrifugal + euler


def poloidal_expansion(a, c, phi0, theta, om, dom, printed_centrifugal=False):
    o1, o2, o3 = om
    d1, d2, _ = dom
    k2 = o1**2 * math.cos(phi0) ** 2 + o2**2 * math.sin(phi0) ** 2 + o1 * o2 * math.sin(2 * phi0)
    k = o1 * math.cos(phi0) + o2 * math.sin(phi0)
    sign = 1.0 if printed_centrifugal else -1.0
    cross = -k2 * (c + a * math.cos(theta)) * math.sin(theta) + 0.5 * a * o3**2 * math.sin(2 * theta) + k * o3 * (
        c * math.cos(theta) + a * math.cos(2 * theta)
    )
    omega_sq = o1**2 + o2**2 + o3**2
    return sign * cross - c * omega_sq * math.sin(theta) - (d1 * math.sin(phi0) - d2 * math.cos(phi0)) * (
        a + c * math.cos(theta)
    )


def knot_expansion(a, c, p, q, lam, o3, d3):
    r = c + a * math.cos(q * lam)
    root = math.sqrt(q * q * a * a + p * p * r * r)
    return -p * r * r * d3 / root - r * a * q * math.sin(q * lam) * o3**2 / root


class TestProfile:
    @pytest.mark.parametrize("n", [(1, 0, 0), (0, 2, -1), (3, 1, 1)])
    def test_integral_normalisation(self, n):
        profile = OmegaProfile(*n, T=2.5)
        t = np.linspace(0, profile.T, 2**16)
        np.testing.assert_allclose(trapezoid(profile.omega(t), t, axis=0), TWO_PI * np.array(n), rtol=0, atol=1e-12)

    def test_integration_by_parts(self):
        profile = OmegaProfile(1, -2, 3, T=0.7)
        t = np.linspace(0, profile.T, 2**16)
        lhs = trapezoid((profile.T - t)[:, None] * profile.omega_dot(t), t, axis=0)
        rhs = trapezoid(profile.omega(t), t, axis=0)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10)
        assert np.all(profile.omega(0.0) == 0)

    def test_bad_ramp(self):
        with pytest.raises(ValueError):
            OmegaProfile(1, 0, 0, ramp="step")


class TestLineIntegral:
    @pytest.mark.parametrize("theta0", [0.0, 0.7, PI / 2, 2.4, PI])
    def test_toroidal(self, theta0):
        a, c = 1.0, 2.5
        w = omega_cross_r_integral(Torus(a, c), Toroidal(theta0), [0.0, 0.0, 1.3])
        assert w == pytest.approx(TWO_PI * (c + a * math.cos(theta0)) ** 2 * 1.3, rel=1e-12)

    @pytest.mark.parametrize("phi0", np.linspace(0, TWO_PI, 7))
    def test_poloidal(self, phi0):
        a, c = 1.3, 2.0
        w = omega_cross_r_integral(Torus(a, c), Poloidal(phi0), [0.4, -0.9, 0.0])
        assert w == pytest.approx(TWO_PI * a**2 * (0.4 * math.sin(phi0) + 0.9 * math.cos(phi0)), abs=1e-12)

    def test_trefoil(self):
        assert omega_cross_r_integral(Torus(1, 2), Winding(2, 3), [0, 0, 1]) == pytest.approx(18 * PI, rel=1e-12)

    def test_against_adaptive_quadrature(self):
        # independent of the Simpson path: scalar triple product integrated with quad
        torus, loop, om = Torus(0.8, 2.2), Winding(3, 4), np.array([0.3, -0.2, 0.9])

        def integrand(lam):
            phi, theta = 3 * lam, 4 * lam
            r = torus.c + torus.a * math.cos(theta)
            pos = np.array([r * math.cos(phi), r * math.sin(phi), torus.a * math.sin(theta)])
            vel = np.array([
                -3 * r * math.sin(phi) - 4 * torus.a * math.sin(theta) * math.cos(phi),
                3 * r * math.cos(phi) - 4 * torus.a * math.sin(theta) * math.sin(phi),
                4 * torus.a * math.cos(theta),
            ])
            return float(om @ np.cross(pos, vel))

        ref, _ = quad(integrand, 0, TWO_PI, limit=400, epsabs=1e-12)
        assert omega_cross_r_integral(torus, loop, om) == pytest.approx(ref, abs=1e-9)

    def test_linear_in_omega(self):
        rng = np.random.default_rng(3)
        torus = Torus(1, 2)
        for loop in (Toroidal(0.4), Poloidal(1.0), Winding(2, 3)):
            for _ in range(5):
                x, y = rng.normal(size=(2, 3))
                alpha, beta = rng.normal(size=2)
                lhs = omega_cross_r_integral(torus, loop, alpha * x + beta * y)
                rhs = alpha * omega_cross_r_integral(torus, loop, x) + beta * omega_cross_r_integral(torus, loop, y)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_selection_rules(self):
        torus = Torus(1, 2)
        g = loop_area_vector(torus, Toroidal(0.9))
        assert abs(g[0]) < 1e-10 and abs(g[1]) < 1e-10
        g = loop_area_vector(torus, Poloidal(0.9))
        assert abs(g[2]) < 1e-10
        for pq in [(2, 3), (3, 2), (1, 5), (5, 1), (3, 4), (1, 2)]:
            g = loop_area_vector(torus, Winding(*pq))
            assert abs(g[0]) < 1e-10 and abs(g[1]) < 1e-10
        # harmonics resonate when p = q or p = 2q
        for pq in [(1, 1), (2, 1)]:
            assert abs(loop_area_vector(torus, Winding(*pq))[1]) > 1.0

    @pytest.mark.parametrize("a, c", [(1, 2), (0.5, 3), (2, 2.5)])
    def test_closed_forms_on_grid(self, a, c):
        torus = Torus(a, c)
        for theta0 in np.linspace(0, TWO_PI, 5):
            ref = TWO_PI * (c + a * math.cos(theta0)) ** 2
            assert loop_area_vector(torus, Toroidal(theta0))[2] == pytest.approx(ref, rel=1e-9)
        for phi0 in np.linspace(0.1, TWO_PI, 5):
            g = loop_area_vector(torus, Poloidal(phi0))
            assert g[0] == pytest.approx(TWO_PI * a * a * math.sin(phi0), rel=1e-9, abs=1e-12)
            assert g[1] == pytest.approx(-TWO_PI * a * a * math.cos(phi0), rel=1e-9, abs=1e-12)
        for p, q in [(2, 3), (3, 2), (3, 4), (1, 5)]:
            ref = p * (2 * c * c + a * a) * PI
            assert loop_area_vector(torus, Winding(p, q))[2] == pytest.approx(ref, rel=1e-9)

    def test_open_loop_rejected(self):
        with pytest.raises(UnsupportedLoop):
            omega_cross_r_integral(Torus(1, 2), Winding(0.5, 1), [0, 0, 1])


class TestHannayLineIntegral:
    @pytest.mark.parametrize("theta0", [0.0, 1.0, PI / 2, PI])
    def test_toroidal_full_turn(self, theta0):
        rep = hannay_angle_line_integral(Torus(1, 2), Toroidal(theta0), OmegaProfile(n3=1))
        assert rep.delta_theta == pytest.approx(-TWO_PI, abs=1e-10)
        assert rep.delta_s == pytest.approx(-TWO_PI * (2 + math.cos(theta0)), abs=1e-10)
        assert rep.framework == "LineIntegral"

    @pytest.mark.parametrize("phi0", np.linspace(0, TWO_PI, 8, endpoint=False))
    def test_poloidal(self, phi0):
        rep = hannay_angle_line_integral(Torus(1, 2), Poloidal(phi0), OmegaProfile(n1=1))
        assert rep.delta_theta == pytest.approx(-TWO_PI * math.sin(phi0), abs=1e-10)

    def test_poloidal_cancellation(self):
        # n1 sin(phi0) = n2 cos(phi0)
        phi0 = math.atan2(2, 1)
        rep = hannay_angle_line_integral(Torus(1, 2), Poloidal(phi0), OmegaProfile(n1=1, n2=2))
        assert abs(rep.delta_theta) < 1e-10

    def test_knot_rule(self):
        torus = Torus(1, 2)
        rep = hannay_angle_line_integral(torus, Winding(2, 3), OmegaProfile(n3=1))
        length = loop_length(torus, Winding(2, 3))
        assert rep.delta_theta == pytest.approx(-(4 * PI**2 / length**2) * 2 * PI * 9, rel=1e-12)

    def test_angle_from_shift(self):
        rep = hannay_angle_line_integral(Torus(1, 3), Winding(3, 2), OmegaProfile(1, 2, 1))
        assert rep.delta_theta == pytest.approx(TWO_PI * rep.delta_s / rep.loop_length, rel=1e-15)


class TestBerryAcceleration:
    def test_toroidal_euler_only(self):
        a, c, theta0, w = 1.0, 2.0, 0.7, 0.35
        lam = np.linspace(0, TWO_PI, 11)
        acc = berry_acceleration(Torus(a, c), Toroidal(theta0), lam, [0, 0, 0], [0, 0, w])
        np.testing.assert_allclose(acc, -(c + a * math.cos(theta0)) * w, rtol=1e-14)

    def test_poloidal_euler_only(self):
        a, c, phi0 = 1.0, 2.0, 0.6
        w1, w2 = 0.3, -0.8
        theta = np.linspace(0, TWO_PI, 11)
        acc = berry_acceleration(Torus(a, c), Poloidal(phi0), theta, [0, 0, 0], [w1, w2, 0])
        expected = -(w1 * math.sin(phi0) - w2 * math.cos(phi0)) * (a + c * np.cos(theta))
        np.testing.assert_allclose(acc, expected, atol=1e-14)

    def test_knot_expansion(self):
        a, c, p, q = 1.0, 2.0, 2, 3
        om3, w = 0.9, -0.4
        for lam in np.linspace(0, TWO_PI, 64):
            acc = berry_acceleration(Torus(a, c), Winding(p, q), lam, [0, 0, om3], [0, 0, w])
            assert acc == pytest.approx(knot_expansion(a, c, p, q, lam, om3, w), abs=1e-9)

    def test_toroidal_expansion(self):
        rng = np.random.default_rng(11)
        a, c, theta0 = 1.0, 2.5, 0.8
        for phi in np.linspace(0, TWO_PI, 32):
            om, dom = rng.normal(size=(2, 3))
            acc = berry_acceleration(Torus(a, c), Toroidal(theta0), phi, om, dom)
            assert acc == pytest.approx(toroidal_expansion(a, c, theta0, phi, om, dom), abs=1e-9)

    def test_poloidal_expansion(self):
        rng = np.random.default_rng(12)
        a, c, phi0 = 1.0, 2.5, 0.8
        for theta in np.linspace(0, TWO_PI, 32):
            om, dom = rng.normal(size=(2, 3))
            acc = berry_acceleration(Torus(a, c), Poloidal(phi0), theta, om, dom)
            assert acc == pytest.approx(poloidal_expansion(a, c, phi0, theta, om, dom), abs=1e-9)

    def test_printed_centrifugal_signs_differ(self):
        om, dom = (0.5, 0.2, 0.3), (0.0, 0.0, 0.0)
        acc = berry_acceleration(Torus(1, 2), Toroidal(0.8), 0.4, om, dom)
        assert acc != pytest.approx(toroidal_expansion(1, 2, 0.8, 0.4, om, dom, printed_centrifugal=True), abs=1e-3)

    def test_centrifugal_averages_out(self):
        # Omega^2 t.r and (Omega.r)(Omega.t) are exact derivatives along a closed loop
        torus = Torus(1, 2)
        lam = np.linspace(0, TWO_PI, 4097)
        for loop in (Toroidal(0.5), Poloidal(0.5), Winding(2, 3)):
            acc = berry_acceleration(torus, loop, lam, [0.4, -0.7, 1.1], [0, 0, 0])
            assert abs(simpson(acc * loop_speed(torus, loop, lam), x=lam)) < 1e-10


class TestBerryAveraged:
    @pytest.mark.parametrize("theta0", [0.0, PI / 3, PI / 2, PI])
    def test_toroidal(self, theta0):
        a, c = 1.0, 3.0
        rep = berry_averaged_shift(Torus(a, c), Toroidal(theta0), OmegaProfile(n3=1))
        assert rep.delta_s == pytest.approx(-TWO_PI * (c + a * math.cos(theta0)), abs=1e-9)
        assert rep.delta_theta == pytest.approx(-TWO_PI, abs=1e-10)

    @pytest.mark.parametrize("phi0", [0.3, 1.2, 2.9, 4.4])
    def test_poloidal_matches_line(self, phi0):
        torus, loop, prof = Torus(1, 2), Poloidal(phi0), OmegaProfile(n1=1)
        avg = berry_averaged_shift(torus, loop, prof)
        assert avg.delta_theta == pytest.approx(-TWO_PI * math.sin(phi0), abs=1e-10)
        assert avg.delta_theta == pytest.approx(hannay_angle_line_integral(torus, loop, prof).delta_theta, abs=1e-8)

    @pytest.mark.parametrize("loop", [Toroidal(0.4), Poloidal(1.0), Winding(2, 3)])
    def test_no_rotation(self, loop):
        assert berry_averaged_shift(Torus(1, 2), loop, OmegaProfile()).delta_s == 0.0

    def test_framework_agreement_grid(self):
        for n in (1.5, 3.0):
            torus = Torus.from_aspect(n)
            for loop in [Toroidal(t) for t in (0.2, 1.9, 4.0)] + [Poloidal(p) for p in (0.5, 2.0, 5.5)]:
                for prof in (OmegaProfile(0, 0, 1), OmegaProfile(1, 2, 0), OmegaProfile(2, -1, 3)):
                    line = hannay_angle_line_integral(torus, loop, prof).delta_theta
                    avg = berry_averaged_shift(torus, loop, prof).delta_theta
                    assert abs(line - avg) < 1e-8


class TestArcLength:
    def test_inverse_map_against_quad(self):
        torus = Torus(1, 2)
        loop = Winding(2, 3)
        arc = ArcLengthMap(torus, loop)
        speed = lambda x: math.sqrt(9 + 4 * (2 + math.cos(3 * x)) ** 2)
        for lam in (0.3, 1.7, 4.4, 6.1):
            s, _ = quad(speed, 0, lam, epsabs=1e-13)
            assert arc.lam_of_s(s) == pytest.approx(lam, abs=1e-8)
        assert arc.lam_of_s(arc.length + 1e-3) == pytest.approx(TWO_PI + arc.lam_of_s(1e-3), abs=1e-12)

    def test_length_matches(self):
        torus = Torus(1, 2)
        loop = Winding(3, 4)
        assert ArcLengthMap(torus, loop).length == pytest.approx(loop_length(torus, loop), rel=1e-12)


class TestBerrySimulate:
    @pytest.mark.parametrize("loop", [Toroidal(0.0), Poloidal(0.7), Winding(2, 3)])
    def test_no_rotation(self, loop):
        res = berry_simulate(Torus(1, 2), loop, OmegaProfile(), circuits=5)
        assert abs(res.report.delta_s) < 1e-12

    def test_trajectory_shape(self):
        res = berry_simulate(Torus(1, 2), Toroidal(0.2), OmegaProfile(n3=1), circuits=7)
        assert res.trajectory.shape == (8, 3)
        assert res.trajectory[-1, 0] == pytest.approx(1.0)

    def test_poloidal_adiabatic(self):
        res = berry_simulate(Torus(1, 2), Poloidal(PI / 2), OmegaProfile(n1=1), circuits=1000)
        assert res.report.delta_theta == pytest.approx(-TWO_PI, rel=0.05)

    def test_converges_with_circuits(self):
        torus, loop, prof = Torus(1, 2), Toroidal(PI / 3), OmegaProfile(n1=1, n3=1)
        target = berry_averaged_shift(torus, loop, prof).delta_theta
        errs = [abs(berry_simulate(torus, loop, prof, k).report.delta_theta - target) for k in (10, 100, 1000)]
        assert errs[0] > errs[1] > errs[2]

    def test_knot_converges_to_average(self):
        torus, loop, prof = Torus(1, 2), Winding(2, 3), OmegaProfile(n3=1)
        target = berry_averaged_shift(torus, loop, prof).delta_theta
        errs = [abs(berry_simulate(torus, loop, prof, k).report.delta_theta - target) for k in (10, 100)]
        assert errs[1] < errs[0]
        assert errs[1] < 1e-4


class TestCompare:
    def test_toroidal(self):
        comp = compare_frameworks(Torus(1, 2), Toroidal(0.9), OmegaProfile(n3=1))
        assert comp.differences["LineIntegral-BerryAveraged"] < 1e-8
        assert comp.knot_reference is None

    def test_poloidal(self):
        comp = compare_frameworks(Torus(1, 2), Poloidal(0.9), OmegaProfile(n1=1, n2=1))
        assert comp.differences["LineIntegral-BerryAveraged"] < 1e-8

    def test_knot_factor(self):
        comp = compare_frameworks(Torus(1, 2), Winding(2, 3), OmegaProfile(n3=1))
        assert comp.knot_ratio == pytest.approx(2.0, abs=1e-6)
        assert comp.delta_theta["LineIntegral"] == pytest.approx(2 * comp.knot_reference, rel=1e-9)

    def test_with_simulation(self):
        comp = compare_frameworks(Torus(1, 2), Toroidal(0.0), OmegaProfile(n3=1), simulate=True, circuits=20)
        assert set(comp.delta_theta) == {"LineIntegral", "BerryAveraged", "BerrySimulated"}
        assert len(comp.differences) == 3
