"""
Unit tests for the theta series and the Weierstrass functions.
"""

import cmath
import math
import unittest

from elliptic_core import (ThetaParams, cubic_residual, elliptic_from_periods, eta_plus_e1_omega, eta_via_zeta,
                           half_period_map_values, half_period_roots, legendre_residual, quarter_period_shift,
                           theta1, theta1_derivatives, theta_delta_conj, theta_delta_eval, theta_derivatives,
                           wp_eval)
from errors import EllipticPoleError, ModularDomainError
from lattice_moduli import make_lattice


class ThetaTests(unittest.TestCase):
    """theta1 and the normalized lattice theta function"""
    def setUp(self):
        self.tau = 0.3 + 1.1j

    def testOddAndQuasiPeriodic(self):
        """theta1 is odd, pi-antiperiodic and picks up -exp(-2iv - i pi tau) under v + pi tau"""
        v = 0.4 - 0.2j
        self.assertAlmostEqual(theta1(-v, self.tau), -theta1(v, self.tau), places=12)
        self.assertAlmostEqual(theta1(v + math.pi, self.tau), -theta1(v, self.tau), places=12)
        expected = -cmath.exp(-2j * v - 1j * math.pi * self.tau) * theta1(v, self.tau)
        self.assertAlmostEqual(theta1(v + math.pi * self.tau, self.tau), expected, places=10)

    def testDerivativeAtZero(self):
        """theta1(0) = 0 and theta1'(0) is nonzero"""
        t0, t1, t2, _ = theta1_derivatives(0j, self.tau)
        self.assertAlmostEqual(t0, 0)
        self.assertAlmostEqual(t2, 0)
        self.assertGreater(abs(t1), 0.1)

    def testJacobiProduct(self):
        """theta1'(0) = theta2(0) theta3(0) theta4(0)"""
        derivative = theta_derivatives(1, 0j, self.tau, 1)[1]
        product = 1
        for n in (2, 3, 4):
            product *= theta_derivatives(n, 0j, self.tau, 0)[0]
        self.assertAlmostEqual(derivative, product, places=12)

    def testWorkingPrecision(self):
        """Raising the working precision leaves the rounded values unchanged"""
        v = 0.4 - 0.2j
        self.assertAlmostEqual(theta1(v, self.tau, dps=50), theta1(v, self.tau), places=14)

    def testThetaDelta(self):
        """theta_Delta(z) = z + O(z^3), odd and antiperiodic under gen1"""
        lat = make_lattice((1.0, 0.0), (0.3, 1.1))
        params = ThetaParams.from_lattice(lat)
        z = 1e-4 * (1 + 1j)
        self.assertAlmostEqual(theta_delta_eval(params, z) / z, 1.0, places=7)
        w = 0.25 + 0.4j
        self.assertAlmostEqual(theta_delta_eval(params, -w), -theta_delta_eval(params, w), places=12)
        self.assertAlmostEqual(theta_delta_eval(params, w + 1), -theta_delta_eval(params, w), places=12)

    def testConjugateTheta(self):
        """For a rectangular lattice theta_Delta is real on the real axis"""
        params = ThetaParams.from_lattice(make_lattice((1.0, 0.0), (0.0, 1.5)))
        self.assertAlmostEqual(theta_delta_conj(params, 0.3), theta_delta_eval(params, 0.3), places=12)
        self.assertAlmostEqual(theta_delta_eval(params, 0.3).imag, 0.0, places=12)


class WeierstrassTests(unittest.TestCase):
    """wp, wp' and zeta through theta logarithmic derivatives"""
    def setUp(self):
        self.data = elliptic_from_periods(0.5, 0.2 + 0.7j)
        self.square = elliptic_from_periods(0.5, 0.5j)

    def testLegendreRelation(self):
        """eta omega' - eta' omega = i pi / 2"""
        self.assertLess(legendre_residual(self.data), 1e-12)
        self.assertLess(legendre_residual(self.square), 1e-12)

    def testHalfPeriodValues(self):
        """wp(omega) = e1, e1 + e2 + e3 = 0 and zeta(omega) = eta"""
        self.assertAlmostEqual(wp_eval(self.data, self.data.omega)[0], self.data.e1, places=10)
        self.assertAlmostEqual(self.data.e1 + self.data.e2 + self.data.e3, 0, places=9)
        self.assertAlmostEqual(eta_via_zeta(self.data), self.data.eta, places=10)

    def testCubic(self):
        """wp'^2 = 4 wp^3 - g2 wp - g3 at generic points"""
        for z in (0.11 + 0.05j, 0.3 - 0.2j, 0.7 + 0.9j):
            self.assertLess(cubic_residual(self.data, z), 1e-10)

    def testHalfPeriodRoots(self):
        """r_i^2 = wp - e_i and -2 r1 r2 r3 = wp' away from the half periods"""
        for z in (0.11 + 0.05j, 0.3 - 0.2j, 0.7 + 0.9j):
            wp, wpp, _ = wp_eval(self.data, z)
            r1, r2, r3 = half_period_roots(self.data, z)
            self.assertAlmostEqual(r1 ** 2, wp - self.data.e1, places=9)
            self.assertAlmostEqual(r2 ** 2, wp - self.data.e2, places=9)
            self.assertAlmostEqual(r3 ** 2, wp - self.data.e3, places=9)
            self.assertAlmostEqual(-2 * r1 * r2 * r3, wpp, places=8)

    def testGaps(self):
        """The stored gaps match the differences of the e_i on a moderate lattice"""
        e1, e2, e3 = self.data.e1, self.data.e2, self.data.e3
        for gap, expected in zip(self.data.gaps, (e1 - e2, e1 - e3, e2 - e3)):
            self.assertAlmostEqual(gap, expected, places=9)
        self.assertAlmostEqual(eta_plus_e1_omega(self.data), self.data.eta + e1 * self.data.omega, places=10)

    def testThinRectangle(self):
        """e1 - e2 keeps its relative accuracy when it is far below e1"""
        data = elliptic_from_periods(0.5, 0.025j)
        fine = elliptic_from_periods(0.5, 0.025j, dps=60)
        gap = data.gaps[0].real
        self.assertGreater(gap, 0)
        self.assertLess(gap, 1e-6 * abs(data.e1))
        self.assertLess(abs(gap - fine.gaps[0].real), 1e-10 * gap)
        self.assertGreater(quarter_period_shift(data), 0)
        exact = eta_plus_e1_omega(fine)
        self.assertLess(abs(eta_plus_e1_omega(data) - exact), 1e-12 * abs(data.e1 * data.omega))

    def testParityAndPeriodicity(self):
        """wp is even and periodic; zeta is odd and shifts by 2 eta"""
        z = 0.13 + 0.21j
        wp, wpp, zeta = wp_eval(self.data, z)
        wp_m, wpp_m, zeta_m = wp_eval(self.data, -z)
        self.assertAlmostEqual(wp_m, wp, places=10)
        self.assertAlmostEqual(wpp_m, -wpp, places=9)
        self.assertAlmostEqual(zeta_m, -zeta, places=10)
        shifted = wp_eval(self.data, z + 2 * self.data.omega)
        self.assertAlmostEqual(shifted[0], wp, places=9)
        self.assertAlmostEqual(shifted[2], zeta + 2 * self.data.eta, places=9)

    def testSquareSymmetry(self):
        """On the square lattice e2 = 0, e3 = -e1 and g3 = 0"""
        self.assertAlmostEqual(self.square.e2, 0, places=10)
        self.assertAlmostEqual(self.square.e3, -self.square.e1, places=10)
        self.assertAlmostEqual(self.square.g3, 0, places=9)

    def testPoles(self):
        """Lattice points raise EllipticPoleError"""
        with self.assertRaises(EllipticPoleError):
            wp_eval(self.data, 0)
        with self.assertRaises(EllipticPoleError):
            wp_eval(self.data, 2 * self.data.omega + 2 * self.data.omega_prime)

    def testBadPeriods(self):
        """Negatively oriented periods are rejected"""
        with self.assertRaises(ModularDomainError):
            elliptic_from_periods(0.5, -0.5j)


class HalfPeriodMapTests(unittest.TestCase):
    """Closed forms of -wp'/(wp - e1) at quarter periods"""

    def testClosedMatchesDirect(self):
        """Closed forms agree with direct evaluation on a rectangular lattice"""
        data = elliptic_from_periods(0.5, 0.8j)
        rows = half_period_map_values(data)
        self.assertEqual([row.label for row in rows], ["+w/2", "-w/2", "+w/2+w'", "-w/2+w'"])
        for row in rows:
            self.assertAlmostEqual(row.wp_closed, row.wp_direct.real, places=8)
            self.assertAlmostEqual(row.quotient_closed, row.quotient_direct.real, places=7)
            self.assertAlmostEqual(row.quotient_direct.imag, 0, places=8)

    def testNonRectangular(self):
        """Oblique period data is rejected"""
        with self.assertRaises(ModularDomainError):
            half_period_map_values(elliptic_from_periods(0.5, 0.2 + 0.7j))


if __name__ == '__main__':
    unittest.main()
