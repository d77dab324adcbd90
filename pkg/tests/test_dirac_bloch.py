"""
Unit tests for the truncated Dirac operator, its slices and kernels.
"""

import math
import unittest

import numpy as np

from dirac_bloch import (FourierPotential, KernelSpinor, clifford_potential, fermi_slice, free_resolvent_kernel,
                         involution_images, kernel_at, mode_indices, periodicity_integrals, slice_values)
from errors import (CutoffError, EllipticPoleError, NonHalfLatticeError, PotentialSymmetryError)
from lattice_moduli import square_lattice


class PotentialTests(unittest.TestCase):
    """Coefficient bookkeeping and symmetry classes"""

    def testEtaPairConjugates(self):
        """W(kappa) = conj(U(-kappa))"""
        pot = FourierPotential.eta_pair({(1, 0): 0.1 + 0.2j})
        self.assertEqual(pot.coeffs_W, {(-1, 0): 0.1 - 0.2j})

    def testSymmetryViolation(self):
        """An eta_pair with the wrong W is rejected"""
        with self.assertRaises(PotentialSymmetryError):
            FourierPotential({(1, 0): 1.0}, {}, "eta_pair")
        with self.assertRaises(PotentialSymmetryError):
            FourierPotential.sigma_real({(1, 0): 1.0})

    def testDerivedDowngrade(self):
        """Scaling by a complex number breaks sigma_real"""
        pot = FourierPotential.constant(1.0)
        self.assertEqual(pot.symmetry, "sigma_real")
        self.assertEqual(pot.scaled(1j).symmetry, "general_pair")
        self.assertEqual(pot.scaled(2.0).symmetry, "sigma_real")

    def testCliffordGrid(self):
        """The truncated series reproduces pi/sqrt2 - pi/(sqrt2 - sin(2 pi x2))"""
        V, W = clifford_potential().grid_values(64)
        x2 = np.arange(64) / 64
        expected = math.pi / math.sqrt(2) - math.pi / (math.sqrt(2) - np.sin(2 * math.pi * x2))
        np.testing.assert_allclose(V[0], expected, atol=1e-7)
        np.testing.assert_allclose(V, W)

    def testCutoffCheck(self):
        """A window smaller than the support is refused"""
        pot = FourierPotential.single_mode(0.1, (3, 0))
        with self.assertRaises(CutoffError):
            fermi_slice(pot, square_lattice(), 0.1, 2)
        with self.assertRaises(CutoffError):
            mode_indices(-1)


class SliceTests(unittest.TestCase):
    """Fermi curve points over x-p = const"""
    def setUp(self):
        self.lat = square_lattice()

    def testFreeLines(self):
        """Free slices lie on y-p = -n2 +- i(x-p + n1)"""
        K = 2
        xp = 0.31 - 0.17j
        values = slice_values(FourierPotential.zero(), self.lat, xp, K)
        self.assertEqual(len(values), 2 * (2 * K + 1) ** 2)
        for y in values:
            best = min(abs(y - (-n2 + s * 1j * (xp + n1)))
                       for n1 in range(-K, K + 1) for n2 in range(-K, K + 1) for s in (1, -1))
            self.assertLess(best, 1e-10)

    def testSortedAndTagged(self):
        """Slice points are sorted by (Re, Im) and tagged with window modes"""
        points = fermi_slice(FourierPotential.single_mode(0.1, (1, 0)), self.lat, 0.2 + 0.1j, 2)
        keys = [(round(p.yp.real, 9), round(p.yp.imag, 9)) for p in points]
        self.assertEqual(keys, sorted(keys))
        self.assertTrue(all(abs(p.tag[0]) <= 2 and abs(p.tag[1]) <= 2 for p in points))

    def testSliceIsKernel(self):
        """Every slice point carries a kernel vector of D"""
        pot = FourierPotential.single_mode(0.1, (1, 0))
        xp = 0.2 + 0.1j
        values = slice_values(pot, self.lat, xp, 3)
        yp = values[np.argmin(np.abs(values))]
        kernel = kernel_at(pot, self.lat, self.lat.from_quasi_momenta(xp, yp), 3)
        self.assertGreaterEqual(len(kernel), 1)
        self.assertAlmostEqual(np.linalg.norm(kernel[0].vector), 1.0)


class KernelTests(unittest.TestCase):
    """Kernels at half lattice points"""
    def setUp(self):
        self.lat = square_lattice()

    def testConstantKernel(self):
        """u = pi/sqrt2 has a four dimensional kernel at (1/2, 1/2)"""
        pot = FourierPotential.constant(math.pi / math.sqrt(2))
        kernel = kernel_at(pot, self.lat, (0.5, 0.5), 2)
        self.assertEqual(len(kernel), 4)
        self.assertEqual(kernel[0].character, (-1, -1))

    def testCliffordKernel(self):
        """The Clifford potential has a two dimensional kernel with vanishing integrals"""
        kernel = kernel_at(clifford_potential(), self.lat, (0.5, 0.5), (1, 24))
        self.assertEqual(len(kernel), 2)
        for spinor in kernel:
            for value in periodicity_integrals(spinor):
                self.assertLess(abs(value), 1e-8)

    def testNonHalfLattice(self):
        """Periodicity integrals need 2k in the dual lattice"""
        spinor = KernelSpinor(np.array([0.3, 0.0], dtype=complex), self.lat, (1, 1),
                              np.zeros((9, 2), dtype=complex))
        with self.assertRaises(NonHalfLatticeError):
            periodicity_integrals(spinor)

    def testInvolutions(self):
        """sigma and rho images solve their operators for a real constant"""
        pot = FourierPotential.constant(math.pi / math.sqrt(2))
        spinor = kernel_at(pot, self.lat, (0.5, 0.5), 2)[0]
        images = involution_images(spinor, pot, ("sigma", "rho"))
        self.assertLess(images["sigma"].residual, 1e-8)
        self.assertLess(images["rho"].residual, 1e-8)
        np.testing.assert_allclose(images["sigma"].curve_point, -spinor.k)
        with self.assertRaises(PotentialSymmetryError):
            involution_images(spinor, pot, ("eta",))

    def testEtaInvolution(self):
        """eta maps a kernel of an eta pair to one at -conj(k)"""
        pot = FourierPotential.constant(math.pi / math.sqrt(2) * np.exp(0.3j))
        self.assertEqual(pot.symmetry, "eta_pair")
        spinor = kernel_at(pot, self.lat, (0.5, 0.5), 2)[0]
        image = involution_images(spinor, pot, ("eta",))["eta"]
        self.assertLess(image.residual, 1e-8)
        np.testing.assert_allclose(image.spinor.k, -spinor.k.conj())


class ResolventTests(unittest.TestCase):
    """Free resolvent kernel from theta_Delta"""

    def testDiagonalBehavior(self):
        """K1 behaves like 1/(z - z') near the diagonal"""
        k = np.array([0.2 + 0.1j, 0.3])
        w = 1e-6 * (1 + 2j)
        kernel = free_resolvent_kernel(square_lattice(), k, 0.3 + 0.2j + w, 0.3 + 0.2j)
        self.assertAlmostEqual(kernel[0, 1] * w, 1.0, places=4)
        self.assertEqual(kernel[0, 0], 0)

    def testPole(self):
        """Coinciding points are a pole"""
        with self.assertRaises(EllipticPoleError):
            free_resolvent_kernel(square_lattice(), np.array([0.2 + 0.1j, 0.3]), 0.1, 0.1)


if __name__ == '__main__':
    unittest.main()
