"""
Unit tests for the Baecklund transformation.
"""

import math
import unittest

import numpy as np

from backlund import (GridSpinor, backlund_potential, backlund_spinor, grid_dirac_residual, invariance_check,
                      inverse_backlund_constant)
from dirac_bloch import FourierPotential, kernel_at, p_symbol
from errors import KernelResidualError, NonvanishingError, PotentialSymmetryError
from lattice_moduli import square_lattice


def _plane_wave(u, angle, n=32):
    """Constant kernel spinor of (u, u) at a real k with pi^2 |k|^2 = u^2."""
    k = (u / math.pi) * np.array([math.cos(angle), math.sin(angle)], dtype=complex)
    b = -u / p_symbol(k)
    return GridSpinor.from_grid(k, square_lattice(), np.full((n, n), 1.0, dtype=complex),
                                np.full((n, n), b, dtype=complex))


class BacklundTests(unittest.TestCase):
    """Transformations generated by constant potentials"""
    def setUp(self):
        self.lat = square_lattice()
        self.u = 1.0
        self.pot = FourierPotential.constant(self.u)
        self.chi = _plane_wave(self.u, 0.3)

    def testGeneratorInKernel(self):
        """The plane wave solves D(u, u, k)"""
        U, W = self.pot.grid_values(self.chi.n)
        self.assertLess(grid_dirac_residual(U, W, self.chi), 1e-12)
        self.assertAlmostEqual(self.chi.margin, 1.0)

    def testConstantStaysConstant(self):
        """U' is a constant of the same modulus with the same Fermi curve"""
        result = backlund_potential(self.pot, self.chi, 4)
        self.assertEqual(list(result.potential.coeffs_V), [(0, 0)])
        self.assertAlmostEqual(abs(result.potential.coeffs_V[(0, 0)]), self.u, places=10)
        self.assertLess(result.tail_mass, 1e-10)
        slices = [0.1 + 0.05j, 0.37 - 0.2j, -0.25 + 0.3j]
        report = invariance_check(self.pot, result.potential, self.lat, slices, 4)
        self.assertTrue(report.passed)
        self.assertLess(report.max_distance, 1e-8)

    def testScaledControl(self):
        """A rescaled potential has a different Fermi curve"""
        slices = [0.1 + 0.05j, 0.37 - 0.2j]
        report = invariance_check(self.pot, self.pot.scaled(1.1), self.lat, slices, 4)
        self.assertFalse(report.passed)

    def testInverseConstant(self):
        """The transposed construction preserves |u|"""
        k = (self.u / math.pi) * np.array([math.cos(0.7), math.sin(0.7)], dtype=complex)
        self.assertAlmostEqual(abs(inverse_backlund_constant(self.u, k)), self.u, places=12)
        with self.assertRaises(KernelResidualError):
            inverse_backlund_constant(self.u, np.zeros(2, dtype=complex))

    def testSpinorOfGenerator(self):
        """The transformation annihilates its own generator"""
        image = backlund_spinor(self.chi, self.chi)
        self.assertLess(np.abs(image.f1).max(), 1e-12)
        self.assertLess(np.abs(image.f2).max(), 1e-12)

    def testVanishingGenerator(self):
        """A spinor with a zero is refused"""
        n = 16
        s = np.arange(n) / n
        f1 = np.sin(2 * math.pi * s)[:, None] * np.ones(n)[None, :]
        chi = GridSpinor.from_grid(np.zeros(2), self.lat, f1.astype(complex), np.zeros((n, n), dtype=complex))
        with self.assertRaises(NonvanishingError):
            backlund_spinor(chi, chi)
        with self.assertRaises(NonvanishingError):
            backlund_potential(self.pot, chi, 2)

    def testNotInKernel(self):
        """A spinor outside the kernel is refused"""
        n = 16
        chi = GridSpinor.from_grid(np.zeros(2), self.lat, np.ones((n, n), dtype=complex),
                                   np.zeros((n, n), dtype=complex))
        with self.assertRaises(KernelResidualError):
            backlund_potential(self.pot, chi, 2)

    def testGeneralPair(self):
        """Only pairs (U, Ubar) can be transformed"""
        pot = FourierPotential.general({(0, 0): 1.0}, {(0, 0): 2.0})
        with self.assertRaises(PotentialSymmetryError):
            backlund_potential(pot, self.chi, 2)


class GridSpinorTests(unittest.TestCase):
    """Modal and spectral derivatives agree"""

    def testFromKernelMatchesFromGrid(self):
        """Derivatives from the modes equal FFT derivatives of the sampled spinor"""
        pot = FourierPotential.constant(math.pi / math.sqrt(2))
        spinor = kernel_at(pot, square_lattice(), (0.5, 0.5), 2)[0]
        exact = GridSpinor.from_kernel(spinor, 16)
        spectral = GridSpinor.from_grid(spinor.k, spinor.lattice, exact.f1, exact.f2)
        for name in ("df1", "df2", "dbf1", "dbf2"):
            np.testing.assert_allclose(getattr(spectral, name), getattr(exact, name), atol=1e-10)


if __name__ == '__main__':
    unittest.main()
