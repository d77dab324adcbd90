"""Weierstrass representation: periodic kernel spinors, immersions into R^3 and their energy.

A kernel spinor chi of D(U, U, k) with 2k in the dual lattice defines the
closed one-form

    (Re(chi1^2 dz - chi2^2 dzbar), Im(chi1^2 dz - chi2^2 dzbar),
     chi1 conj(chi2) dz + conj(chi1) chi2 dzbar)

whose periods are the three periodicity integrals. When they vanish the
one-form integrates to a conformal immersion of the torus.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from custom_logger import CustomLogger
from dirac_bloch import KernelSpinor, _reflected_positions, mode_indices, periodicity_integrals
from errors import DegenerateMetricError, NoWeierstrassSpinorError, PeriodicityError
from lattice_moduli import Lattice, square_lattice

logger = CustomLogger(__name__)

SLOPE_TOL = 1e-8
SOLVER_TOL = 1e-10
CLOSED_TOL = 1e-8
DEGENERATE_TOL = 1e-10
ZERO_MASK_TOL = 1e-10


def orbit_equations(z: Sequence[complex], alpha: complex, beta: complex) -> np.ndarray:
    """The four bilinear residuals for coefficients (z1, z2) on one orbit and (z3, z4) on the other.

    Both orbits are written in the normal form where the bilinear forms
    <<J., .>> and <<conj(.), .>> are diag(1, -1) and [[0, 1], [1, 0]],
    scaled by the slopes alpha and beta of the curve at the orbits.
    """
    z1, z2, z3, z4 = (complex(v) for v in z)
    a, b = complex(alpha), complex(beta)
    return np.array([
        (z1 * z2.conjugate() + z1.conjugate() * z2) + (z3 * z4.conjugate() + z3.conjugate() * z4),
        (z1 ** 2 - z2 ** 2) + (z3 ** 2 - z4 ** 2),
        (a * z1 * z2.conjugate() + a.conjugate() * z1.conjugate() * z2)
        + (b * z3 * z4.conjugate() + b.conjugate() * z3.conjugate() * z4),
        (a * z1 ** 2 - a.conjugate() * z2 ** 2) + (b * z3 ** 2 - b.conjugate() * z4 ** 2),
    ])


def orbit_pair_solution(z1: complex, z2: complex, alpha: complex, beta: complex,
                        tol: float = SLOPE_TOL) -> Tuple[complex, complex]:
    """(z3, z4) completing (z1, z2) to a solution of orbit_equations.

    alpha = beta gives (i z1, -i z2); alpha = conj(beta) gives (z2, -z1).

    Raises:
        NoWeierstrassSpinorError: for any other pair of slopes, where only the trivial solution exists
    """
    if abs(alpha - beta) <= tol * max(1.0, abs(alpha)):
        return 1j * z1, -1j * z2
    if abs(alpha - np.conj(beta)) <= tol * max(1.0, abs(alpha)):
        return z2, -z1
    raise NoWeierstrassSpinorError(
        f"no Weierstrass potential in this gauge: slopes {alpha} and {beta} are neither equal nor conjugate")


@dataclass
class PeriodicSolution:
    """Kernel combination with vanishing periodicity integrals.

    coefficients are normalized so that the first nonzero one equals 1;
    family_dimension is the real dimension of the solution cone at this point.
    """
    spinor: KernelSpinor
    coefficients: np.ndarray
    integrals: Tuple[complex, complex, complex]
    family_dimension: int


def _quadratic_forms(kernel: Sequence[KernelSpinor]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """B1, B2 (bilinear) and H (sesquilinear) with I1 = z^T B1 z, I2 = z^T B2 z, I3 = z^T H conj(z)."""
    first = kernel[0]
    lat = first.lattice
    xp, yp = lat.quasi_momenta(first.k.real)
    m = (int(round(2 * xp.real)), int(round(2 * yp.real)))
    partner = _reflected_positions(first.modes, m, first.cutoff)
    valid = partner >= 0
    C = np.stack([s.coeffs for s in kernel])
    B1 = lat.vol * np.einsum("in,jn->ij", C[:, valid, 0], C[:, partner[valid], 0])
    B2 = lat.vol * np.einsum("in,jn->ij", C[:, valid, 1], C[:, partner[valid], 1])
    H = lat.vol * np.einsum("in,jn->ij", C[:, :, 0], C[:, :, 1].conj())
    return B1, B2, H


def _integrals_of(z: np.ndarray, forms) -> np.ndarray:
    B1, B2, H = forms
    return np.array([z @ B1 @ z, z @ B2 @ z, z @ H @ z.conj()])


def _residual_vector(x: np.ndarray, forms) -> np.ndarray:
    d = x.size // 2
    z = x[:d] + 1j * x[d:]
    I = _integrals_of(z, forms)
    return np.concatenate([I.real, I.imag, [np.vdot(z, z).real - 1.0]])


def _seeds(d: int, slopes: Optional[Tuple[complex, complex]], rng: np.random.Generator,
           random_seeds: int) -> List[np.ndarray]:
    seeds = [np.eye(d, dtype=complex)[j] for j in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            for w in (1, -1, 1j, -1j):
                z = np.zeros(d, dtype=complex)
                z[i], z[j] = 1.0, w
                seeds.append(z / math.sqrt(2))
    if d == 4 and slopes is not None:
        for z1, z2 in ((1, 0), (0, 1), (1, 1)):
            z3, z4 = orbit_pair_solution(z1, z2, *slopes)
            z = np.array([z1, z2, z3, z4], dtype=complex)
            seeds.append(z / np.linalg.norm(z))
    for _ in range(random_seeds):
        z = rng.normal(size=d) + 1j * rng.normal(size=d)
        seeds.append(z / np.linalg.norm(z))
    return seeds


def _family_dimension(z: np.ndarray, forms) -> int:
    """2d minus the rank of the real Jacobian of the three integrals."""
    d = z.size
    x = np.concatenate([z.real, z.imag])
    h = 1e-7
    rows = []
    for i in range(2 * d):
        step = np.zeros(2 * d)
        step[i] = h
        rows.append((_residual_vector(x + step, forms)[:6] - _residual_vector(x - step, forms)[:6]) / (2 * h))
    jac = np.array(rows).T
    return 2 * d - int(np.linalg.matrix_rank(jac, tol=1e-6 * max(1.0, np.abs(jac).max())))


def solve_periodicity_combination(kernel: Sequence[KernelSpinor],
                                  slopes: Optional[Tuple[complex, complex]] = None,
                                  tol: float = SOLVER_TOL, seed: int = 0,
                                  random_seeds: int = 16) -> PeriodicSolution:
    """Combination of kernel spinors whose three periodicity integrals vanish.

    Args:
        kernel: spinors of one kernel at a half-lattice point k
        slopes: d y-p / d x-p at the two orbits over k, when the preimage has exactly two orbits
        tol: acceptance threshold on |I1|, |I2|, |I3|

    Raises:
        NoWeierstrassSpinorError: for a kernel of dimension below 2, slopes that are
            neither equal nor conjugate, or when no seed converges below tol
    """
    if len(kernel) < 2:
        raise NoWeierstrassSpinorError(f"kernel dimension {len(kernel)} is below 2")
    first = kernel[0]
    if any(s.cutoff != first.cutoff or not np.allclose(s.k, first.k) for s in kernel):
        raise ValueError("kernel spinors must share k and the cutoff")
    if slopes is not None:
        alpha, beta = slopes
        scale = max(1.0, abs(alpha))
        if abs(alpha - beta) > SLOPE_TOL * scale and abs(alpha - np.conj(beta)) > SLOPE_TOL * scale:
            raise NoWeierstrassSpinorError(
                f"no Weierstrass potential in this gauge: slopes {alpha} and {beta}")
    # raises NonHalfLatticeError away from the half lattice
    periodicity_integrals(first)

    forms = _quadratic_forms(kernel)
    d = len(kernel)
    rng = np.random.default_rng(seed)
    best, best_norm = None, math.inf
    for start in _seeds(d, slopes, rng, random_seeds):
        I = _integrals_of(start, forms)
        if np.abs(I).max() < tol:
            best, best_norm = start, float(np.abs(I).max())
            break
        fit = least_squares(_residual_vector, np.concatenate([start.real, start.imag]), args=(forms,),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        z = fit.x[:d] + 1j * fit.x[d:]
        z = z / np.linalg.norm(z)
        err = float(np.abs(_integrals_of(z, forms)).max())
        if err < best_norm:
            best, best_norm = z, err
        if err < tol:
            break
    if best is None or best_norm >= tol:
        raise NoWeierstrassSpinorError(
            f"no kernel combination closes: smallest periodicity residual {best_norm:.3e}")

    coeffs = sum(z * s.coeffs for z, s in zip(best, kernel))
    coeffs = coeffs / np.linalg.norm(coeffs)
    spinor = KernelSpinor(first.k, first.lattice, first.cutoff, coeffs, first.character, 0.0)
    lead = best[np.nonzero(np.abs(best) > 1e-8)[0][0]]
    family = _family_dimension(best, forms)
    integrals = periodicity_integrals(spinor)
    logger.debug(f"Periodic combination found, residual {best_norm:.3e}, family dimension {family}")
    return PeriodicSolution(spinor, best / lead, integrals, family)


@dataclass
class ImmersionGrid:
    """Samples of X: R^2/lattice -> R^3 on the grid [i, j] -> (i*gen1 + j*gen2)/n, possibly offset.

    weight holds |chi|^2 when the grid comes from a spinor; cells where it is
    tiny are left out of the conformality report.
    """
    points: np.ndarray
    lattice: Lattice
    residuals: Tuple[complex, complex, complex] = (0j, 0j, 0j)
    weight: Optional[np.ndarray] = None
    spinor: Optional[KernelSpinor] = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def mesh_rows(self) -> np.ndarray:
        """(n*n, 3) array, row-major."""
        return self.points.reshape(-1, 3)


def _wave_numbers(n: int) -> Tuple[np.ndarray, np.ndarray]:
    freq = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    a, b = np.meshgrid(freq, freq, indexing="ij")
    return a, b


def immersion_from_spinor(chi: KernelSpinor, n: int = 128, tol: float = CLOSED_TOL) -> ImmersionGrid:
    """Integrate the Weierstrass one-form of chi spectrally, pinned at X(0) = 0.

    Raises:
        NonHalfLatticeError: unless 2k is a dual lattice vector
        PeriodicityError: if a periodicity integral exceeds tol
    """
    integrals = periodicity_integrals(chi)
    worst = max(abs(v) for v in integrals)
    if worst > tol:
        raise PeriodicityError(f"periodicity integrals {integrals} exceed {tol}; the immersion does not close")
    lat = chi.lattice
    psi1, psi2 = chi.evaluate(n)
    F, G, H = psi1 ** 2, psi2 ** 2, psi1 * psi2.conj()
    along_x1 = np.stack([(F - G).real, (F - G).imag, 2 * H.real], axis=-1)
    along_x2 = np.stack([-(F + G).imag, (F + G).real, -2 * H.imag], axis=-1)
    gens = lat.generators
    spectra = [np.fft.fft2(along_x1 * gens[i, 0] + along_x2 * gens[i, 1], axes=(0, 1)) for i in range(2)]

    freq = np.fft.fftfreq(n, d=1.0 / n)
    a, b = np.meshgrid(freq, freq, indexing="ij")
    denom = 2j * math.pi * (a ** 2 + b ** 2)
    denom[0, 0] = 1.0
    X_hat = (a[..., None] * spectra[0] + b[..., None] * spectra[1]) / denom[..., None]
    mean_period = max(np.abs(spectra[0][0, 0]).max(), np.abs(spectra[1][0, 0]).max()) / (n * n)
    if mean_period > 1e-6:
        logger.warning(f"Grid mean of the one-form is {mean_period:.3e}; the grid may be too coarse")
    X_hat[0, 0] = 0.0
    X = np.fft.ifft2(X_hat, axes=(0, 1)).real
    X -= X[0, 0]
    logger.debug(f"Immersion on a {n}x{n} grid, periodicity residual {worst:.3e}")
    return ImmersionGrid(X, lat, integrals, np.abs(psi1) ** 2 + np.abs(psi2) ** 2, chi)


def _derivatives(grid: ImmersionGrid):
    """First and second derivatives of X with respect to the plane coordinates x1, x2."""
    a, b = _wave_numbers(grid.n)
    spectrum = np.fft.fft2(grid.points, axes=(0, 1))
    ds = [2j * math.pi * a[..., None], 2j * math.pi * b[..., None]]
    first_s = [np.fft.ifft2(d * spectrum, axes=(0, 1)).real for d in ds]
    second_s = [[np.fft.ifft2(ds[p] * ds[q] * spectrum, axes=(0, 1)).real for q in range(2)] for p in range(2)]
    inv = np.linalg.inv(grid.lattice.generators)
    first = [sum(inv[j, p] * first_s[p] for p in range(2)) for j in range(2)]
    second = [[sum(inv[j, p] * inv[l, q] * second_s[p][q] for p in range(2) for q in range(2))
               for l in range(2)] for j in range(2)]
    return first, second


def _fundamental_forms(grid: ImmersionGrid):
    (X1, X2), second = _derivatives(grid)
    E = np.einsum("ijk,ijk->ij", X1, X1)
    F = np.einsum("ijk,ijk->ij", X1, X2)
    G = np.einsum("ijk,ijk->ij", X2, X2)
    return E, F, G, X1, X2, second


def willmore_quadrature(grid: ImmersionGrid, min_det: float = DEGENERATE_TOL) -> float:
    """Integral of H^2 dmu with spectral fundamental forms and the trapezoidal rule.

    Raises:
        DegenerateMetricError: if EG - F^2 drops below min_det times its maximum
    """
    E, F, G, X1, X2, second = _fundamental_forms(grid)
    det = E * G - F ** 2
    top = float(det.max())
    if top <= 0 or float(det.min()) <= min_det * top:
        raise DegenerateMetricError(f"metric determinant ratio {float(det.min()) / max(top, 1e-300):.3e}")
    normal = np.cross(X1, X2) / np.sqrt(det)[..., None]
    L = np.einsum("ijk,ijk->ij", second[0][0], normal)
    M = np.einsum("ijk,ijk->ij", second[0][1], normal)
    N = np.einsum("ijk,ijk->ij", second[1][1], normal)
    H = (E * N - 2 * F * M + G * L) / (2 * det)
    value = grid.lattice.vol * float(np.mean(H ** 2 * np.sqrt(det)))
    logger.debug(f"Willmore quadrature on {grid.n}x{grid.n}: {value:.12g}")
    return value


def willmore_convergence(chi: KernelSpinor, n: int = 128) -> Tuple[float, float, float]:
    """(W at n, W at 2n, relative change) for the immersion of chi."""
    coarse = willmore_quadrature(immersion_from_spinor(chi, n))
    fine = willmore_quadrature(immersion_from_spinor(chi, 2 * n))
    return coarse, fine, abs(fine - coarse) / abs(fine)


def conformality_residual(grid: ImmersionGrid, mask_tol: float = ZERO_MASK_TOL) -> float:
    """max of |E - G| / (E + G) and |F| / (E + G), skipping cells near spinor zeros."""
    E, F, G, *_ = _fundamental_forms(grid)
    trace = E + G
    keep = trace > 0
    if grid.weight is not None:
        keep &= grid.weight >= mask_tol * float(grid.weight.max())
    if not keep.any():
        return 0.0
    ratio = np.maximum(np.abs(E - G), np.abs(F))[keep] / trace[keep]
    return float(ratio.max())


def clifford_spinor(cutoff: Tuple[int, int] = (1, 24), samples: int = 256) -> KernelSpinor:
    """Kernel spinor of clifford_potential at k = (1/2, 1/2), projected from its closed form.

    With s = 2 pi x2 - pi/2 and D = sqrt(2) - cos s,
    chi = e^{pi i x1} (sin((s + pi/4)/2), i sin((s - pi/4)/2)) / D.
    """
    lat = square_lattice()
    k = np.array([0.5, 0.5], dtype=complex)
    x2 = np.arange(samples) / samples
    sigma = 2 * math.pi * x2 - math.pi / 2
    D = math.sqrt(2) - np.cos(sigma)
    # periodic parts e_-k chi depend on x2 only
    back = np.exp(-1j * math.pi * x2)
    f1 = back * np.sin((sigma + math.pi / 4) / 2) / D
    f2 = back * 1j * np.sin((sigma - math.pi / 4) / 2) / D
    s1, s2 = np.fft.fft(f1) / samples, np.fft.fft(f2) / samples
    modes = mode_indices(cutoff)
    coeffs = np.zeros((len(modes), 2), dtype=complex)
    on_axis = modes[:, 0] == 0
    coeffs[on_axis, 0] = s1[modes[on_axis, 1] % samples]
    coeffs[on_axis, 1] = s2[modes[on_axis, 1] % samples]
    coeffs /= np.linalg.norm(coeffs)
    return KernelSpinor(k, lat, tuple(cutoff), coeffs, (-1, -1), 0.0)


def sphere_grid(n: int) -> ImmersionGrid:
    """Unit sphere covered twice, theta = pi sin^2(pi s2), sampled at s2 = (j + 1/2)/n off the poles."""
    s1 = np.arange(n) / n
    s2 = (np.arange(n) + 0.5) / n
    phi, t = np.meshgrid(2 * math.pi * s1, s2, indexing="ij")
    theta = math.pi * np.sin(math.pi * t) ** 2
    points = np.stack([np.cos(phi) * np.sin(theta), np.sin(phi) * np.sin(theta), np.cos(theta)], axis=-1)
    return ImmersionGrid(points, square_lattice())
