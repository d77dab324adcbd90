"""Forward Baecklund transformation of (U, Ubar) potentials and their kernel spinors.

Spinors are handled through their periodic parts f = e_-k * chi on an n x n
grid together with the covariant derivatives Df = e_-k d chi and
Dbf = e_-k dbar chi. The Bloch factor cancels in every quotient below, so
complex k is allowed.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from custom_logger import CustomLogger
from dirac_bloch import (Cutoff, FourierPotential, Index, KernelSpinor, _symmetry_violation,
                         normalize_cutoff, p_symbol, q_symbol, slice_values)
from errors import (KernelResidualError, NonvanishingError, PotentialSymmetryError,
                    SliceMismatchError)
from lattice_moduli import Lattice

logger = CustomLogger(__name__)

DEFAULT_GRID = 64
MARGIN_TOL = 1e-6
KERNEL_TOL = 1e-7
INVARIANCE_GATE = 1e-4


@dataclass
class GridSpinor:
    """Periodic parts of a spinor and its covariant derivatives on the grid [i, j] -> (i*gen1 + j*gen2)/n."""
    k: np.ndarray
    lattice: Lattice
    f1: np.ndarray
    f2: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    dbf1: np.ndarray
    dbf2: np.ndarray

    @property
    def n(self) -> int:
        return self.f1.shape[0]

    @property
    def margin(self) -> float:
        """min |chi| / max |chi| over the grid."""
        norm = np.sqrt(np.abs(self.f1) ** 2 + np.abs(self.f2) ** 2)
        top = float(norm.max())
        return float(norm.min()) / top if top > 0 else 0.0

    @classmethod
    def from_kernel(cls, spinor: KernelSpinor, n: int = DEFAULT_GRID) -> 'GridSpinor':
        """Exact derivatives from the modal representation."""
        f1, f2 = spinor.periodic_grid(n)
        df1, df2 = spinor.periodic_grid(n, "d")
        dbf1, dbf2 = spinor.periodic_grid(n, "dbar")
        return cls(spinor.k, spinor.lattice, f1, f2, df1, df2, dbf1, dbf2)

    @classmethod
    def from_grid(cls, k, lat: Lattice, f1: np.ndarray, f2: np.ndarray) -> 'GridSpinor':
        """Derivatives by fast Fourier differentiation of the periodic parts."""
        k = np.asarray(k, dtype=complex)
        n = f1.shape[0]
        freq = np.fft.fftfreq(n, d=1.0 / n)
        n1, n2 = np.meshgrid(freq, freq, indexing="ij")
        vec = (k[:, None, None] + n1[None] * lat.kappa_hat[:, None, None]
               + n2[None] * lat.kappa_check[:, None, None])
        P = p_symbol(vec)
        Q = q_symbol(vec)
        out = []
        for f in (f1, f2):
            spectrum = np.fft.fft2(f)
            out.append((np.fft.ifft2(P * spectrum), np.fft.ifft2(Q * spectrum)))
        (df1, dbf1), (df2, dbf2) = out
        return cls(k, lat, np.asarray(f1, dtype=complex), np.asarray(f2, dtype=complex), df1, df2, dbf1, dbf2)

    def scaled(self, s: complex) -> 'GridSpinor':
        return GridSpinor(self.k, self.lattice, s * self.f1, s * self.f2, s * self.df1, s * self.df2,
                          s * self.dbf1, s * self.dbf2)


def grid_dirac_residual(U: np.ndarray, W: np.ndarray, spinor: GridSpinor) -> float:
    """Relative max-norm residual of (U, d; -dbar, W) applied to the spinor."""
    r1 = U * spinor.f1 + spinor.df2
    r2 = -spinor.dbf1 + W * spinor.f2
    scale = max(np.abs(spinor.df2).max(), np.abs(spinor.dbf1).max(),
                np.abs(U * spinor.f1).max(), np.abs(W * spinor.f2).max(), 1e-300)
    return float(max(np.abs(r1).max(), np.abs(r2).max()) / scale)


def _require_eta(pot: FourierPotential) -> None:
    if pot.symmetry != "eta_pair" and _symmetry_violation(pot.coeffs_V, pot.coeffs_W, "eta_pair"):
        raise PotentialSymmetryError("the Baecklund transformation needs a pair (U, Ubar)")


def _check_generator(pot: FourierPotential, chi: GridSpinor) -> None:
    if chi.margin <= MARGIN_TOL:
        raise NonvanishingError(f"generating spinor margin {chi.margin:.3e} is below {MARGIN_TOL}")
    U, W = pot.grid_values(chi.n)
    residual = grid_dirac_residual(U, W, chi)
    if residual > KERNEL_TOL:
        raise KernelResidualError(f"generating spinor has kernel residual {residual:.3e}")


def _coefficients(chi: GridSpinor):
    """a, b of the transformation; c = -conj(b), d = conj(a)."""
    norm = np.abs(chi.f1) ** 2 + np.abs(chi.f2) ** 2
    a = -(chi.df1 * chi.f1.conj() + chi.f2 * chi.dbf2.conj()) / norm
    b = (chi.f1 * chi.dbf2.conj() - chi.df1 * chi.f2.conj()) / norm
    return a, b


@dataclass
class BacklundResult:
    potential: FourierPotential
    grid_values: np.ndarray
    tail_mass: float
    margin: float


def _to_coefficients(values: np.ndarray, K: Cutoff) -> Tuple[Dict[Index, complex], float]:
    n = values.shape[0]
    K1, K2 = normalize_cutoff(K)
    spectrum = np.fft.fft2(values) / (n * n)
    total = float(np.sum(np.abs(spectrum) ** 2))
    coeffs: Dict[Index, complex] = {}
    kept = 0.0
    scale = float(np.abs(spectrum).max()) if total > 0 else 0.0
    for a in range(-K1, K1 + 1):
        for b in range(-K2, K2 + 1):
            c = complex(spectrum[a % n, b % n])
            kept += abs(c) ** 2
            if abs(c) > 1e-14 * scale:
                coeffs[(a, b)] = c
    tail = math.sqrt(max(total - kept, 0.0) / total) if total > 0 else 0.0
    return coeffs, tail


def backlund_potential(pot: FourierPotential, chi: GridSpinor, K: Cutoff) -> BacklundResult:
    """U' = (dbar chi2 conj(chi1) - chi2 dbar conj(chi1)) / |chi|^2 truncated at K.

    Raises:
        PotentialSymmetryError: unless pot is a pair (U, Ubar)
        NonvanishingError: if the generating spinor comes too close to zero
        KernelResidualError: if chi misses the kernel of D(U, Ubar, k)
    """
    _require_eta(pot)
    _check_generator(pot, chi)
    _, b = _coefficients(chi)
    u_new = b.conj()
    coeffs, tail = _to_coefficients(u_new, K)
    if tail > 1e-8:
        logger.warning(f"Transformed potential has L2 tail {tail:.3e} beyond the cutoff {K}")
    logger.debug(f"Baecklund potential with {len(coeffs)} modes, margin {chi.margin:.3e}")
    return BacklundResult(FourierPotential.eta_pair(coeffs), u_new, tail, chi.margin)


def backlund_spinor(psi: GridSpinor, chi: GridSpinor) -> GridSpinor:
    """psi' = (d + a, b; c, dbar + d) psi; vanishes identically at psi = chi.

    Raises:
        NonvanishingError: if chi comes too close to zero
    """
    if chi.margin <= MARGIN_TOL:
        raise NonvanishingError(f"generating spinor margin {chi.margin:.3e} is below {MARGIN_TOL}")
    if psi.n != chi.n:
        raise ValueError("spinors must share one grid")
    a, b = _coefficients(chi)
    c, d = -b.conj(), a.conj()
    g1 = psi.df1 + a * psi.f1 + b * psi.f2
    g2 = c * psi.f1 + psi.dbf2 + d * psi.f2
    return GridSpinor.from_grid(psi.k, psi.lattice, g1, g2)


def inverse_backlund_constant(u: complex, k, a: complex = 1.0) -> complex:
    """Constant U' from the transposed kernel vector phi = (a, -u a / Q(k)) e_k of a constant potential.

    U' = ((d phi2) conj(phi1) - phi2 d conj(phi1)) / |phi|^2 reduces to
    b conj(a) (P - conj(Q)) / (|a|^2 + |b|^2).
    """
    k = np.asarray(k, dtype=complex)
    P, Q = p_symbol(k), q_symbol(k)
    if abs(Q) < 1e-14:
        raise KernelResidualError("Q(k) vanishes; no transposed kernel vector of this form")
    b = -u * a / Q
    return complex(b * np.conj(a) * (P - np.conj(Q)) / (abs(a) ** 2 + abs(b) ** 2))


@dataclass
class InvarianceReport:
    distances: List[float]
    max_distance: float
    passed: bool


def invariance_check(first: FourierPotential, second: FourierPotential, lat: Lattice,
                     slices: Sequence[complex], K: Cutoff, gate: float = INVARIANCE_GATE) -> InvarianceReport:
    """Matched-point distance of fermi_slice outputs over the given x-p values.

    Raises:
        SliceMismatchError: if a slice has different eigenvalue counts
    """
    distances = []
    for xp in slices:
        a = slice_values(first, lat, xp, K)
        b = slice_values(second, lat, xp, K)
        if len(a) != len(b):
            raise SliceMismatchError(f"slice at x-p={xp} has {len(a)} and {len(b)} points")
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        distances.append(float(cost[rows, cols].max()) if len(rows) else 0.0)
    worst = max(distances, default=0.0)
    logger.debug(f"Invariance over {len(distances)} slices: max distance {worst:.3e}")
    return InvarianceReport(distances, worst, worst <= gate)
