"""
Unit tests for the explicit minimizer families and the conformal class bound.
"""

import math
import unittest

import numpy as np

from errors import ModularDomainError
from lattice_moduli import in_fundamental_domain, square_lattice
from min_family import (EIGHT_PI, Genus1Point, _family_raw, _tau_of, disconnected_curve_functions, genus0_min_curve,
                        genus1_closed_form_w, genus1_data, genus1_family_point, genus1_parameters_for_tau, genus1_point,
                        monotone_sweep, wbound_of_tau)


class Genus0Tests(unittest.TestCase):
    """Quadrics g(k, k) = c"""

    def testSquareLattice(self):
        """c = 1/4 and W = pi^2 on Z^2 with four minimizing dual vectors"""
        curve = genus0_min_curve(square_lattice())
        self.assertAlmostEqual(curve.constant, 0.25)
        self.assertAlmostEqual(curve.w, math.pi ** 2, places=12)
        self.assertEqual(len(curve.minimizers), 4)


class Genus1Tests(unittest.TestCase):
    """The rectangular Weierstrass family"""

    def testClosedForm(self):
        """W at z1 = omega/2 matches the closed form"""
        for t in (0.05, 0.07, 0.3, 1.0, 3.0):
            value = genus1_family_point(genus1_point(t))
            self.assertAlmostEqual(value.w, genus1_closed_form_w(genus1_data(t)), places=9)
            self.assertAlmostEqual(value.tau_unreduced.real, 0.0, places=9)

    def testSweepLimits(self):
        """W decreases from 4 pi towards pi^2"""
        rows = monotone_sweep(np.geomspace(0.05, 20.0, 100))
        self.assertLess(abs(rows[-1][1] - math.pi ** 2), 0.02 * math.pi ** 2)
        self.assertLess(abs(rows[0][1] - 4 * math.pi), 0.05 * 4 * math.pi)
        self.assertTrue(all(b[1] < a[1] for a, b in zip(rows, rows[1:])))

    def testThinLimit(self):
        """Near t = 0.05 W stays finite and just below 4 pi"""
        for t in (0.05, 0.07):
            data = genus1_data(t)
            _, w, _ = _family_raw(data, data.omega / 2)
            self.assertTrue(math.isfinite(w))
            self.assertLess(abs(w), 4 * math.pi)
            self.assertLess(abs(abs(w) - 4 * math.pi), 0.05 * 4 * math.pi)

    def testWorkingPrecision(self):
        """W(1) computed at two working precisions agrees"""
        coarse = monotone_sweep([1.0])[0][1]
        fine = monotone_sweep([1.0], dps=50)[0][1]
        self.assertLess(abs(coarse - fine), 1e-9)

    def testGenusZeroLimit(self):
        """At t = 20 the family energy is within 2% of the square quadric"""
        w = genus1_family_point(genus1_point(20.0)).w
        quadric = genus0_min_curve(square_lattice()).w
        self.assertLess(abs(w - quadric), 0.02 * quadric)

    def testSweepGrid(self):
        """The grid must increase"""
        with self.assertRaises(ValueError):
            monotone_sweep([1.0, 0.5])

    def testReducedValue(self):
        """Family values are reduced into the fundamental domain with W > 0"""
        value = genus1_family_point(genus1_point(1.3, 0.2))
        self.assertTrue(in_fundamental_domain(value.tau))
        self.assertGreater(value.w, 0)
        self.assertAlmostEqual(value.word.apply(value.tau_unreduced), value.tau, places=10)
        self.assertTrue(value.minimizing)

    def testPointValidation(self):
        """z1 must lie on omega/2 + omega'[-1, 1] and the labels must be odd"""
        data = genus1_data(1.0)
        with self.assertRaises(ModularDomainError):
            Genus1Point(data, 0.1 + 0j)
        with self.assertRaises(ValueError):
            Genus1Point(data, data.omega / 2, h_label=2)
        with self.assertRaises(ModularDomainError):
            genus1_data(-1.0)

    def testInverseMap(self):
        """genus1_parameters_for_tau lands on a point with the requested tau"""
        for target in (1.5j, 2j, 0.3 + 1.5j):
            t, s = genus1_parameters_for_tau(target)
            self.assertGreater(t, 0)
            self.assertLessEqual(abs(s), 1)
            self.assertAlmostEqual(_tau_of(math.log(t), s), target, places=8)

    def testInverseOnAxis(self):
        """Imaginary targets are met on s = 0 and larger Im tau needs larger t"""
        t_low, s_low = genus1_parameters_for_tau(1.5j)
        t_high, s_high = genus1_parameters_for_tau(2j)
        self.assertAlmostEqual(s_low, 0.0, places=8)
        self.assertAlmostEqual(s_high, 0.0, places=8)
        self.assertLess(t_low, t_high)

    def testInverseDomain(self):
        """Points inside the unit disk are refused"""
        with self.assertRaises(ModularDomainError):
            genus1_parameters_for_tau(0.5j)


class BoundTests(unittest.TestCase):
    """Disconnected curve and the per class bound"""

    def testDisconnectedCurve(self):
        """Half period values on Z^2 and 4 pi per sheet"""
        curve = disconnected_curve_functions(square_lattice())
        expected = {"omega": (-0.5, 0.0), "omega'": (0.0, -0.5), "omega+omega'": (-0.5, -0.5)}
        for key, (x, y) in expected.items():
            self.assertAlmostEqual(curve.half_period_values[key][0], x, places=9)
            self.assertAlmostEqual(curve.half_period_values[key][1], y, places=9)
        self.assertAlmostEqual(curve.w_per_sheet, 4 * math.pi, places=6)

    def testSquareTorus(self):
        """The (1,1) class on the square torus gives 2 pi^2"""
        point = wbound_of_tau(1j)
        bound = point.classes["(1,1)"]
        self.assertEqual(bound.case_id, "3e")
        self.assertAlmostEqual(bound.w, 2 * math.pi ** 2, places=9)
        self.assertAlmostEqual(point.w_min, 2 * math.pi ** 2, places=9)
        self.assertTrue(point.classes["(1,0)"].upper_bound_only)

    def testTallTorus(self):
        """Every class at tau = 2i lies above the square torus minimum 2 pi^2"""
        point = wbound_of_tau(2j)
        square = wbound_of_tau(1j).w_min
        self.assertEqual(len(point.classes), 3)
        for bound in point.classes.values():
            self.assertGreaterEqual(bound.w, point.w_min)
        self.assertGreaterEqual(point.w_min, square - 1e-9)
        self.assertLessEqual(point.w_min, EIGHT_PI + 1e-9)

    def testBoundContinuity(self):
        """w_min moves by at most a bounded multiple of the step along an imaginary path"""
        path = [1j * y for y in np.linspace(1.3, 1.5, 5)]
        values = [wbound_of_tau(tau).w_min for tau in path]
        for (a, wa), (b, wb) in zip(zip(path, values), zip(path[1:], values[1:])):
            self.assertLess(abs(wb - wa), 20.0 * abs(b - a))

    def testOutsideDomain(self):
        """wbound_of_tau needs a reduced modulus"""
        with self.assertRaises(ModularDomainError):
            wbound_of_tau(0.5j)


if __name__ == '__main__':
    unittest.main()
