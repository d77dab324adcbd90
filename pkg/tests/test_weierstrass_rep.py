"""
Unit tests for periodic kernel combinations, immersions and their Willmore energy.
"""

import math
import unittest

import numpy as np

from dirac_bloch import FourierPotential, clifford_potential, kernel_at
from errors import DegenerateMetricError, NoWeierstrassSpinorError, PeriodicityError
from lattice_moduli import square_lattice
from weierstrass_rep import (ImmersionGrid, clifford_spinor, conformality_residual, immersion_from_spinor,
                             orbit_equations, orbit_pair_solution, solve_periodicity_combination, sphere_grid,
                             willmore_convergence, willmore_quadrature)


class OrbitTests(unittest.TestCase):
    """Closed form solutions of the bilinear orbit equations"""
    def setUp(self):
        self.z1, self.z2 = 0.3 - 0.7j, 1.1 + 0.2j

    def testEqualSlopes(self):
        """alpha = beta is solved by (i z1, -i z2)"""
        alpha = 0.4 + 1.3j
        z3, z4 = orbit_pair_solution(self.z1, self.z2, alpha, alpha)
        np.testing.assert_allclose(orbit_equations([self.z1, self.z2, z3, z4], alpha, alpha), 0, atol=1e-12)

    def testConjugateSlopes(self):
        """alpha = conj(beta) is solved by (z2, -z1)"""
        alpha = 0.4 + 1.3j
        z3, z4 = orbit_pair_solution(self.z1, self.z2, alpha, alpha.conjugate())
        self.assertEqual((z3, z4), (self.z2, -self.z1))
        np.testing.assert_allclose(orbit_equations([self.z1, self.z2, z3, z4], alpha, alpha.conjugate()), 0,
                                   atol=1e-12)

    def testGenericSlopes(self):
        """Any other pair has only the trivial solution"""
        with self.assertRaises(NoWeierstrassSpinorError):
            orbit_pair_solution(self.z1, self.z2, 1 + 1j, 2.0)


class PeriodicityTests(unittest.TestCase):
    """Kernel combinations with vanishing periodicity integrals"""
    def setUp(self):
        self.lat = square_lattice()

    def testCliffordCombination(self):
        """The Clifford kernel closes and its immersion has energy 2 pi^2"""
        kernel = kernel_at(clifford_potential(), self.lat, (0.5, 0.5), (1, 24))
        solution = solve_periodicity_combination(kernel)
        self.assertLess(max(abs(v) for v in solution.integrals), 1e-10)
        lead = solution.coefficients[np.nonzero(np.abs(solution.coefficients) > 1e-8)[0][0]]
        self.assertAlmostEqual(lead, 1.0)
        grid = immersion_from_spinor(solution.spinor, 128)
        self.assertLess(conformality_residual(grid), 1e-6)
        self.assertLess(abs(willmore_quadrature(grid) - 2 * math.pi ** 2), 0.01 * 2 * math.pi ** 2)

    def testConstantHasNoCombination(self):
        """The four dimensional kernel of u = pi/sqrt2 has no closing combination"""
        kernel = kernel_at(FourierPotential.constant(math.pi / math.sqrt(2)), self.lat, (0.5, 0.5), 2)
        self.assertEqual(len(kernel), 4)
        with self.assertRaises(NoWeierstrassSpinorError):
            solve_periodicity_combination(kernel, random_seeds=4)
        with self.assertRaises(PeriodicityError):
            immersion_from_spinor(kernel[0], 16)

    def testRefusals(self):
        """Small kernels and incompatible slopes are refused up front"""
        kernel = kernel_at(clifford_potential(), self.lat, (0.5, 0.5), (1, 24))
        with self.assertRaises(NoWeierstrassSpinorError):
            solve_periodicity_combination(kernel[:1])
        with self.assertRaises(NoWeierstrassSpinorError):
            solve_periodicity_combination(kernel, slopes=(1 + 1j, 2.0))


class ImmersionTests(unittest.TestCase):
    """Immersion of the projected Clifford spinor"""
    def setUp(self):
        self.chi = clifford_spinor()

    def testCliffordEnergy(self):
        """W = 2 pi^2 and the grid is conformal"""
        grid = immersion_from_spinor(self.chi, 64)
        np.testing.assert_allclose(grid.points[0, 0], 0)
        self.assertEqual(grid.mesh_rows().shape, (64 * 64, 3))
        self.assertLess(conformality_residual(grid), 1e-6)
        coarse, fine, change = willmore_convergence(self.chi, 64)
        self.assertLess(abs(fine - 2 * math.pi ** 2), 0.01 * 2 * math.pi ** 2)
        self.assertLess(change, 1e-3)

    def testRealScaling(self):
        """A real factor lambda scales X by lambda^2 and keeps W"""
        base = immersion_from_spinor(self.chi, 64)
        scaled = immersion_from_spinor(self.chi.scaled(1.5), 64)
        np.testing.assert_allclose(scaled.points, 2.25 * base.points, atol=1e-10)
        self.assertAlmostEqual(willmore_quadrature(scaled) / willmore_quadrature(base), 1.0, places=8)

    def testPhaseInvariance(self):
        """A unit phase rotates X and keeps W"""
        base = willmore_quadrature(immersion_from_spinor(self.chi, 64))
        rotated = willmore_quadrature(immersion_from_spinor(self.chi.scaled(np.exp(0.4j)), 64))
        self.assertAlmostEqual(rotated / base, 1.0, places=8)

    def testPerturbedGrid(self):
        """Breaking conformality is detected"""
        grid = immersion_from_spinor(self.chi, 64)
        s = np.arange(64) / 64
        bump = 0.1 * np.sin(2 * math.pi * s)[:, None] * np.ones(64)[None, :]
        points = grid.points.copy()
        points[..., 0] += bump
        self.assertGreater(conformality_residual(ImmersionGrid(points, grid.lattice)), 1e-3)


class QuadratureTests(unittest.TestCase):
    """Energy of known surfaces"""

    def testDoubleSphere(self):
        """The twice covered unit sphere has W = 8 pi"""
        self.assertLess(abs(willmore_quadrature(sphere_grid(64), min_det=0.0) - 8 * math.pi), 1e-3 * 8 * math.pi)

    def testDegenerate(self):
        """A constant map has no metric"""
        with self.assertRaises(DegenerateMetricError):
            willmore_quadrature(ImmersionGrid(np.zeros((16, 16, 3)), square_lattice()))


if __name__ == '__main__':
    unittest.main()
