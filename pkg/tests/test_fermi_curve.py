"""
Unit tests for branch tracing, handle moduli and Willmore energies.
"""

import math
import unittest

import numpy as np

from dirac_bloch import FourierPotential, slice_values
from errors import EigenvalueCollisionError, PotentialSymmetryError
from fermi_curve import (analytic_single_mode_curve, circle_path, handle_center, handle_modulus, trace_branch,
                         weak_singularity_report, willmore_from_handles, willmore_pairing, willmore_residue_fit)
from lattice_moduli import HalfPeriodClass, square_lattice


class TraceTests(unittest.TestCase):
    """Continuation of one sheet along a path"""
    def setUp(self):
        self.lat = square_lattice()

    def testFreeCircleCloses(self):
        """A free sheet followed around a circle returns to its start"""
        path = circle_path(0.3 + 0.2j, 0.1, 64)
        branch = trace_branch(FourierPotential.zero(), self.lat, path, -0.2 + 0.3j, 2)
        self.assertTrue(branch.closed)
        self.assertLess(branch.endpoint_mismatch, 1e-10)
        np.testing.assert_allclose(branch.yp, 1j * branch.xp, atol=1e-10)

    def testConstantBranchOnCurve(self):
        """Traced points of a constant potential satisfy the closed form equation"""
        u = 0.3
        pot = FourierPotential.constant(u)
        path = 0.3 + 0.2j + np.linspace(0.0, 0.5, 26)
        start = slice_values(pot, self.lat, path[0], 4)
        seed = start[np.argmin(np.abs(start - 1j * path[0]))]
        branch = trace_branch(pot, self.lat, path, seed, 4)
        self.assertGreaterEqual(len(branch.xp), 26)
        for xp, yp in zip(branch.xp, branch.yp):
            k = self.lat.from_quasi_momenta(xp, yp)
            self.assertLess(abs(analytic_single_mode_curve(u, (0, 0), self.lat, k, window=5)), 1e-6)
        self.assertTrue(np.all(branch.runner_up >= 2 * branch.match_distance))

    def testCollision(self):
        """A seed on a free double point is ambiguous"""
        with self.assertRaises(EigenvalueCollisionError) as ctx:
            trace_branch(FourierPotential.zero(), self.lat, [0j, 0.1 + 0j], 0j, 2)
        self.assertEqual(ctx.exception.location, 0j)

    def testShortPath(self):
        """A branch needs two path points"""
        with self.assertRaises(ValueError):
            trace_branch(FourierPotential.zero(), self.lat, [0.1], 0.1j, 2)


class EnergyTests(unittest.TestCase):
    """Three routes to the Willmore energy"""
    def setUp(self):
        self.lat = square_lattice()

    def testPairing(self):
        """4 int V W for the bundled examples"""
        self.assertAlmostEqual(willmore_pairing(FourierPotential.constant(math.pi / math.sqrt(2)),
                                                self.lat).real, 2 * math.pi ** 2, places=12)
        self.assertAlmostEqual(willmore_pairing(FourierPotential.single_mode(0.1, (1, 0)), self.lat).real,
                               0.04, places=12)
        self.assertEqual(willmore_pairing(FourierPotential.zero(), self.lat), 0)

    def testResidueFitConstant(self):
        """The 1/k1 coefficient at infinity reproduces 2 pi^2 within 1%"""
        fit = willmore_residue_fit(FourierPotential.constant(math.pi / math.sqrt(2)), self.lat, 4)
        self.assertLess(abs(fit.w_value.real - 2 * math.pi ** 2), 0.01 * 2 * math.pi ** 2)
        self.assertLess(fit.residual, 1e-4)

    def testSingleModeHandle(self):
        """A small single mode opens one handle with t close to |u|^2"""
        pot = FourierPotential.single_mode(0.1, (1, 0))
        handle = handle_modulus(pot, self.lat, (1, 0), 4)
        self.assertLess(abs(handle.t_value.real - 0.01), 1e-4)
        self.assertGreaterEqual(handle.t_value.real, 0)
        w = willmore_from_handles([handle], self.lat).real
        self.assertLess(abs(w - 0.04), 0.01 * 0.04)
        half = handle_modulus(FourierPotential.single_mode(0.05, (1, 0)), self.lat, (1, 0), 4)
        self.assertLess(abs(half.t_value.real - 0.0025), 2.5e-5)
        self.assertAlmostEqual(handle.t_value.real / half.t_value.real, 4.0, delta=0.04)

    def testAnalyticCurve(self):
        """The free curve contains (1/2, i/2)"""
        self.assertAlmostEqual(analytic_single_mode_curve(0.0, (0, 0), self.lat, (0.5, 0.5j)), 0)
        np.testing.assert_allclose(handle_center(self.lat, (0, 1)), [0.5j, -0.5])
        np.testing.assert_allclose(handle_center(self.lat, (1, 0)), [-0.5, -0.5j])


class SingularityTests(unittest.TestCase):
    """Sheets through half lattice points"""
    def setUp(self):
        self.lat = square_lattice()

    def testConstantQuadruplePoint(self):
        """Four sheets of u = pi/sqrt2 meet over [(1,1)/2]"""
        pot = FourierPotential.constant(math.pi / math.sqrt(2))
        report = weak_singularity_report(pot, self.lat, HalfPeriodClass(1, 1), 2)
        self.assertTrue(report.on_curve)
        self.assertEqual(report.multiplicity, 4)

    def testOffCurve(self):
        """A smaller constant misses the half lattice point"""
        report = weak_singularity_report(FourierPotential.constant(0.3), self.lat, HalfPeriodClass(1, 1), 2)
        self.assertFalse(report.on_curve)
        self.assertEqual(report.points, [])

    def testGeneralPair(self):
        """The orbit taxonomy refuses potentials without a real structure"""
        pot = FourierPotential.general({(0, 0): 1.0}, {(0, 0): 2.0})
        with self.assertRaises(PotentialSymmetryError):
            weak_singularity_report(pot, self.lat, HalfPeriodClass(1, 0), 2)


if __name__ == '__main__':
    unittest.main()
