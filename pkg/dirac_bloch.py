"""Fourier-Galerkin truncation of the periodic Dirac operator (V, d; -dbar, W).

Modes are the dual lattice indices n = (n1, n2), meaning kappa = n1*kappa_hat +
n2*kappa_check, ordered row-major with n1 in [-K1, K1] and n2 in [-K2, K2]:

    idx(n) = (n1 + K1) * (2*K2 + 1) + (n2 + K2)

Spinor components are interleaved, so row 2*idx(n) + s holds component s+1
of mode n. On a Bloch function e_k = exp(2 pi i g(k, x)) the derivatives act
as multipliers P(k) = pi*(k2 + i*k1) for d and Q(k) = pi*(-k2 + i*k1) for dbar.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from custom_logger import CustomLogger
from elliptic_core import ThetaParams, theta_delta_conj, theta_delta_eval
from errors import (CutoffError, EllipticPoleError, KernelResidualError, LatticeError,
                    NonHalfLatticeError, PotentialSymmetryError)
from lattice_moduli import Lattice, free_double_points, g

logger = CustomLogger(__name__)

Index = Tuple[int, int]
Cutoff = Union[int, Tuple[int, int]]

SYMMETRIES = ("general_pair", "eta_pair", "sigma_real")
SYMMETRY_TOL = 1e-12
KERNEL_REL_TOL = 1e-8
KERNEL_AMBIGUITY_TOL = 1e-6
SORT_DIGITS = 9


def normalize_cutoff(K: Cutoff) -> Tuple[int, int]:
    if isinstance(K, (tuple, list)):
        K1, K2 = int(K[0]), int(K[1])
    else:
        K1 = K2 = int(K)
    if K1 < 0 or K2 < 0:
        raise CutoffError(f"cutoff must be non-negative, got {K}")
    return K1, K2


def mode_indices(K: Cutoff) -> np.ndarray:
    """Integer array of shape (M, 2) listing the modes in matrix order."""
    K1, K2 = normalize_cutoff(K)
    n1, n2 = np.meshgrid(np.arange(-K1, K1 + 1), np.arange(-K2, K2 + 1), indexing="ij")
    return np.stack([n1.ravel(), n2.ravel()], axis=1)


def mode_position(n: Index, K: Cutoff) -> int:
    K1, K2 = normalize_cutoff(K)
    if abs(n[0]) > K1 or abs(n[1]) > K2:
        raise CutoffError(f"mode {n} outside the cutoff window {K}")
    return (n[0] + K1) * (2 * K2 + 1) + (n[1] + K2)


def p_symbol(v) -> complex:
    """Multiplier of d on e_v."""
    return math.pi * (v[1] + 1j * v[0])


def q_symbol(v) -> complex:
    """Multiplier of dbar on e_v."""
    return math.pi * (-v[1] + 1j * v[0])


def _clean(coeffs: Dict[Index, complex]) -> Dict[Index, complex]:
    return {(int(n[0]), int(n[1])): complex(c) for n, c in coeffs.items() if c != 0}


@dataclass(frozen=True)
class FourierPotential:
    """Finitely supported Fourier coefficients of a potential pair (V, W).

    Attributes:
        coeffs_V: dual lattice index -> amplitude of V
        coeffs_W: dual lattice index -> amplitude of W
        symmetry: 'general_pair', 'eta_pair' (W = conj(V), the pair (U, Ubar))
            or 'sigma_real' (W = V with V real valued)
    """
    coeffs_V: Dict[Index, complex] = field(default_factory=dict)
    coeffs_W: Dict[Index, complex] = field(default_factory=dict)
    symmetry: str = "general_pair"

    def __post_init__(self):
        if self.symmetry not in SYMMETRIES:
            raise PotentialSymmetryError(f"unknown symmetry {self.symmetry!r}")
        problem = _symmetry_violation(self.coeffs_V, self.coeffs_W, self.symmetry)
        if problem:
            raise PotentialSymmetryError(problem)

    @classmethod
    def general(cls, coeffs_V: Dict[Index, complex], coeffs_W: Dict[Index, complex]) -> 'FourierPotential':
        return cls(_clean(coeffs_V), _clean(coeffs_W), "general_pair")

    @classmethod
    def eta_pair(cls, coeffs_U: Dict[Index, complex]) -> 'FourierPotential':
        """The pair (U, Ubar): W(kappa) = conj(U(-kappa))."""
        V = _clean(coeffs_U)
        W = {(-n[0], -n[1]): c.conjugate() for n, c in V.items()}
        return cls(V, W, "eta_pair")

    @classmethod
    def sigma_real(cls, coeffs_U: Dict[Index, complex]) -> 'FourierPotential':
        """The pair (U, U) for a real valued U."""
        V = _clean(coeffs_U)
        return cls(V, dict(V), "sigma_real")

    @classmethod
    def constant(cls, u: complex) -> 'FourierPotential':
        u = complex(u)
        if u.imag == 0:
            return cls.sigma_real({(0, 0): u})
        return cls.eta_pair({(0, 0): u})

    @classmethod
    def single_mode(cls, u: complex, kappa: Index) -> 'FourierPotential':
        """(u psi_kappa, ubar psi_-kappa)."""
        return cls.eta_pair({tuple(kappa): u})

    @classmethod
    def zero(cls) -> 'FourierPotential':
        return cls({}, {}, "sigma_real")

    @property
    def support(self) -> Tuple[int, int]:
        keys = list(self.coeffs_V) + list(self.coeffs_W)
        if not keys:
            return 0, 0
        return max(abs(n[0]) for n in keys), max(abs(n[1]) for n in keys)

    def check_cutoff(self, K: Cutoff) -> Tuple[int, int]:
        K1, K2 = normalize_cutoff(K)
        s1, s2 = self.support
        if s1 > K1 or s2 > K2:
            raise CutoffError(f"cutoff {(K1, K2)} is smaller than the potential support {(s1, s2)}")
        return K1, K2

    def _derived(self, V: Dict[Index, complex], W: Dict[Index, complex]) -> 'FourierPotential':
        V, W = _clean(V), _clean(W)
        symmetry = self.symmetry
        if _symmetry_violation(V, W, symmetry):
            symmetry = "general_pair"
        return FourierPotential(V, W, symmetry)

    def scaled(self, s: complex) -> 'FourierPotential':
        """(sV, sW)."""
        return self._derived({n: s * c for n, c in self.coeffs_V.items()},
                             {n: s * c for n, c in self.coeffs_W.items()})

    def phase_rotated(self, z: complex) -> 'FourierPotential':
        """(zV, W/z); the Fermi curve does not depend on z."""
        return self._derived({n: z * c for n, c in self.coeffs_V.items()},
                             {n: c / z for n, c in self.coeffs_W.items()})

    def gauge_shifted(self, kappa: Index) -> 'FourierPotential':
        """(psi_-kappa V, psi_kappa W)."""
        a, b = kappa
        return self._derived({(n[0] - a, n[1] - b): c for n, c in self.coeffs_V.items()},
                             {(n[0] + a, n[1] + b): c for n, c in self.coeffs_W.items()})

    def swapped(self) -> 'FourierPotential':
        """(W, V)."""
        return self._derived(self.coeffs_W, self.coeffs_V)

    def grid_values(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """V and W sampled at x = (i*gen1 + j*gen2)/n, arrays indexed [i, j]."""
        return _synthesize(self.coeffs_V, n), _synthesize(self.coeffs_W, n)


def _symmetry_violation(V: Dict[Index, complex], W: Dict[Index, complex], symmetry: str) -> Optional[str]:
    keys = set(V) | set(W) | {(-n[0], -n[1]) for n in set(V) | set(W)}
    for n in keys:
        m = (-n[0], -n[1])
        v, w = V.get(n, 0j), W.get(n, 0j)
        if symmetry == "eta_pair" and abs(w - V.get(m, 0j).conjugate()) > SYMMETRY_TOL:
            return f"eta_pair requires W{n} = conj(V{m})"
        if symmetry == "sigma_real":
            if abs(v - w) > SYMMETRY_TOL:
                return f"sigma_real requires W = V, differs at {n}"
            if abs(V.get(m, 0j) - v.conjugate()) > SYMMETRY_TOL:
                return f"sigma_real requires V real valued, fails at {n}"
    return None


def _synthesize(coeffs: Dict[Index, complex], n: int) -> np.ndarray:
    spectrum = np.zeros((n, n), dtype=complex)
    for (a, b), c in coeffs.items():
        if abs(a) >= n // 2 or abs(b) >= n // 2:
            raise CutoffError(f"grid {n} too coarse for mode {(a, b)}")
        spectrum[a % n, b % n] += c
    return np.fft.ifft2(spectrum) * n * n


def clifford_potential(max_mode: int = 24) -> FourierPotential:
    """U(x) = pi/sqrt2 - pi/(sqrt2 - sin(2 pi x2)) on the square lattice.

    Fourier series: U(0,0) = pi/sqrt2 - pi and U(0,m) = -pi r^|m| (-i)^m with
    r = sqrt2 - 1, truncated at |m| <= max_mode.
    """
    r = math.sqrt(2) - 1
    coeffs: Dict[Index, complex] = {(0, 0): math.pi / math.sqrt(2) - math.pi}
    for m in range(1, max_mode + 1):
        coeffs[(0, m)] = -math.pi * r ** m * (-1j) ** m
        coeffs[(0, -m)] = -math.pi * r ** m * (1j) ** m
    return FourierPotential.sigma_real(coeffs)


def _convolution_matrix(coeffs: Dict[Index, complex], K: Tuple[int, int]) -> np.ndarray:
    """C[i, j] = coeffs(n_i - n_j), restricted to the window."""
    K1, K2 = K
    modes = mode_indices(K)
    C = np.zeros((len(modes), len(modes)), dtype=complex)
    for (d1, d2), val in coeffs.items():
        src1 = modes[:, 0] - d1
        src2 = modes[:, 1] - d2
        ok = (np.abs(src1) <= K1) & (np.abs(src2) <= K2)
        rows = np.nonzero(ok)[0]
        cols = (src1[ok] + K1) * (2 * K2 + 1) + (src2[ok] + K2)
        C[rows, cols] += val
    return C


@dataclass
class BlochMatrix:
    """Dense truncated operator with the data it was assembled at."""
    matrix: np.ndarray
    cutoff: Tuple[int, int]
    modes: np.ndarray
    k: Optional[np.ndarray] = None
    xp: Optional[complex] = None
    transpose: bool = False

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _mode_vectors(lat: Lattice, modes: np.ndarray) -> np.ndarray:
    return modes[:, :1] * lat.kappa_hat + modes[:, 1:] * lat.kappa_check


def _dirac_from_symbols(pot: FourierPotential, K: Tuple[int, int], P: np.ndarray, Q: np.ndarray,
                        transpose: bool) -> np.ndarray:
    M = len(P)
    D = np.zeros((2 * M, 2 * M), dtype=complex)
    D[0::2, 0::2] = _convolution_matrix(pot.coeffs_V, K)
    D[1::2, 1::2] = _convolution_matrix(pot.coeffs_W, K)
    idx = np.arange(M)
    if transpose:
        D[2 * idx, 2 * idx + 1] = Q
        D[2 * idx + 1, 2 * idx] = -P
    else:
        D[2 * idx, 2 * idx + 1] = P
        D[2 * idx + 1, 2 * idx] = -Q
    return D


def assemble_dirac(pot: FourierPotential, lat: Lattice, k, K: Cutoff,
                   transpose: bool = False) -> BlochMatrix:
    """Truncated D(V, W, k) = (V, d; -dbar, W) acting on e_k times periodic spinors.

    With transpose=True the formal transpose (V, dbar; -d, W) is assembled.

    Raises:
        CutoffError: if K is smaller than the potential support
    """
    K = pot.check_cutoff(K)
    k = np.asarray(k, dtype=complex)
    modes = mode_indices(K)
    shifted = k + _mode_vectors(lat, modes)
    P = math.pi * (shifted[:, 1] + 1j * shifted[:, 0])
    Q = math.pi * (-shifted[:, 1] + 1j * shifted[:, 0])
    return BlochMatrix(_dirac_from_symbols(pot, K, P, Q, transpose), K, modes, k=k, transpose=transpose)


def _slope_matrices(pot: FourierPotential, lat: Lattice, xp: complex, K: Tuple[int, int]):
    """Split D(xp*kappa_hat + yp*kappa_check) = A(xp) + yp*B."""
    modes = mode_indices(K)
    base = xp * lat.kappa_hat.astype(complex) + _mode_vectors(lat, modes)
    P = math.pi * (base[:, 1] + 1j * base[:, 0])
    Q = math.pi * (-base[:, 1] + 1j * base[:, 0])
    A = _dirac_from_symbols(pot, K, P, Q, False)
    pc, qc = p_symbol(lat.kappa_check), q_symbol(lat.kappa_check)
    return A, pc, qc, modes


def assemble_dtilde(pot: FourierPotential, lat: Lattice, xp: complex, K: Cutoff) -> BlochMatrix:
    """Matrix whose eigenvalues are pi*y-p over the slice x-p = xp.

    Writing D = A(xp) + yp*B with B block diagonal, the matrix is -pi*B^-1*A(xp).

    Raises:
        LatticeError: if g(kappa_check, kappa_check) vanishes
        CutoffError: if K is smaller than the potential support
    """
    K = pot.check_cutoff(K)
    if abs(g(lat.kappa_check, lat.kappa_check)) < 1e-14:
        raise LatticeError("g(kappa_check, kappa_check) = 0, the slice basis is degenerate")
    A, pc, qc, modes = _slope_matrices(pot, lat, complex(xp), K)
    Dt = np.empty_like(A)
    # B^-1 per mode is [[0, -1/qc], [1/pc, 0]]
    Dt[0::2, :] = -math.pi * (-A[1::2, :] / qc)
    Dt[1::2, :] = -math.pi * (A[0::2, :] / pc)
    return BlochMatrix(Dt, K, modes, xp=complex(xp))


@dataclass(frozen=True)
class SlicePoint:
    """One Fermi curve point over a slice: y-p and the dominant mode of its eigenvector."""
    yp: complex
    tag: Index


def _sort_key(z: complex) -> Tuple[float, float]:
    return round(z.real, SORT_DIGITS), round(z.imag, SORT_DIGITS)


def fermi_slice(pot: FourierPotential, lat: Lattice, xp: complex, K: Cutoff) -> List[SlicePoint]:
    """All y-p with (xp, yp) on the truncated Fermi curve, sorted by (Re, Im) rounded to 1e-9."""
    bm = assemble_dtilde(pot, lat, xp, K)
    values, vectors = scipy.linalg.eig(bm.matrix)
    weights = np.abs(vectors[0::2, :]) ** 2 + np.abs(vectors[1::2, :]) ** 2
    dominant = np.argmax(weights, axis=0)
    points = [SlicePoint(complex(v) / math.pi, (int(bm.modes[d, 0]), int(bm.modes[d, 1])))
              for v, d in zip(values, dominant)]
    points.sort(key=lambda p: _sort_key(p.yp))
    return points


def slice_values(pot: FourierPotential, lat: Lattice, xp: complex, K: Cutoff) -> np.ndarray:
    return np.array([p.yp for p in fermi_slice(pot, lat, xp, K)])


def half_lattice_character(lat: Lattice, k, tol: float = 1e-10) -> Optional[Tuple[int, int]]:
    """The {+1, -1} values of exp(2 pi i g(gen, k)) when 2k is a real dual lattice vector."""
    k = np.asarray(k, dtype=complex)
    if np.max(np.abs(k.imag)) > tol:
        return None
    xp, yp = lat.quasi_momenta(k.real)
    twice = np.array([2 * xp.real, 2 * yp.real])
    if np.max(np.abs(twice - np.round(twice))) > tol:
        return None
    m = np.round(twice).astype(int)
    return int((-1) ** (m[0] % 2)), int((-1) ** (m[1] % 2))


@dataclass
class KernelSpinor:
    """Unit-norm kernel vector of D(V, W, k) in the mode basis.

    coeffs has shape (modes, 2); psi_s(x) = e_k(x) * sum_n coeffs[n, s] e_n(x).
    """
    k: np.ndarray
    lattice: Lattice
    cutoff: Tuple[int, int]
    coeffs: np.ndarray
    character: Optional[Tuple[int, int]] = None
    sigma: float = 0.0

    @property
    def modes(self) -> np.ndarray:
        return mode_indices(self.cutoff)

    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def coefficient(self, n: Index) -> np.ndarray:
        K1, K2 = self.cutoff
        if abs(n[0]) > K1 or abs(n[1]) > K2:
            return np.zeros(2, dtype=complex)
        return self.coeffs[mode_position(n, self.cutoff)]

    def scaled(self, s: complex) -> 'KernelSpinor':
        return KernelSpinor(self.k, self.lattice, self.cutoff, s * self.coeffs, self.character, self.sigma)

    def symbols(self) -> Tuple[np.ndarray, np.ndarray]:
        """P(k + kappa_n) and Q(k + kappa_n) per mode."""
        shifted = self.k + _mode_vectors(self.lattice, self.modes)
        return (math.pi * (shifted[:, 1] + 1j * shifted[:, 0]),
                math.pi * (-shifted[:, 1] + 1j * shifted[:, 0]))

    def periodic_grid(self, n: int, derivative: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Periodic parts e_-k * psi (or e_-k * d psi, e_-k * dbar psi) on an n x n grid.

        Grid point [i, j] is x = (i*gen1 + j*gen2)/n.
        """
        K1, K2 = self.cutoff
        if n <= 2 * max(K1, K2):
            raise CutoffError(f"grid {n} too coarse for cutoff {self.cutoff}")
        c = self.coeffs.copy()
        if derivative is not None:
            P, Q = self.symbols()
            factor = {"d": P, "dbar": Q}[derivative]
            c = c * factor[:, None]
        out = []
        for s in range(2):
            spectrum = np.zeros((n, n), dtype=complex)
            spectrum[self.modes[:, 0] % n, self.modes[:, 1] % n] = c[:, s]
            out.append(np.fft.ifft2(spectrum) * n * n)
        return out[0], out[1]

    def phase_grid(self, n: int) -> np.ndarray:
        """e_k on the grid."""
        xp, yp = self.lattice.quasi_momenta(self.k)
        s = np.arange(n) / n
        return np.exp(2j * math.pi * (xp * s[:, None] + yp * s[None, :]))

    def evaluate(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """psi_1, psi_2 on the grid, Bloch phase included."""
        f1, f2 = self.periodic_grid(n)
        phase = self.phase_grid(n)
        return phase * f1, phase * f2


def relative_residual(matrix: np.ndarray, vector: np.ndarray) -> float:
    norm = np.linalg.norm(matrix, 2) * np.linalg.norm(vector)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(matrix @ vector) / norm)


def kernel_at(pot: FourierPotential, lat: Lattice, k, K: Cutoff) -> List[KernelSpinor]:
    """Right singular vectors of D(V, W, k) with singular value below 1e-8 * ||D||.

    Values between 1e-8 and 1e-6 relative are logged as ambiguous and left out.
    """
    bm = assemble_dirac(pot, lat, k, K)
    _, s, vh = scipy.linalg.svd(bm.matrix)
    s_max = s[0] if s[0] > 0 else 1.0
    rel = s / s_max
    ambiguous = rel[(rel >= KERNEL_REL_TOL) & (rel < KERNEL_AMBIGUITY_TOL)]
    if ambiguous.size:
        logger.warning(f"Kernel at k={bm.k} is ambiguous: singular values {ambiguous} relative to ||D||")
    character = half_lattice_character(lat, bm.k)
    spinors = []
    for i in np.nonzero(rel < KERNEL_REL_TOL)[0]:
        vec = vh[i].conj()
        spinors.append(KernelSpinor(bm.k, lat, bm.cutoff, vec.reshape(-1, 2), character, float(s[i])))
    logger.debug(f"Kernel dimension {len(spinors)} at k={bm.k}")
    return spinors


def free_resolvent_kernel(lat: Lattice, k, z: complex, zprime: complex,
                          params: Optional[ThetaParams] = None) -> np.ndarray:
    """Integral kernel ((0, K1), (-K2, 0)) of the inverse of ((0, d), (-dbar, 0)) at k.

    K1 is holomorphic and K2 antiholomorphic in z; both behave like
    1/(z - z') and 1/(zbar - zbar') on the diagonal.

    Raises:
        EllipticPoleError: if z - z', z+(k) or conj(z-(k)) lies in the lattice
    """
    k = np.asarray(k, dtype=complex)
    params = params or ThetaParams.from_lattice(lat)
    gen1 = lat.gen1_complex
    w = complex(z) - complex(zprime)
    z_plus = lat.vol * (1j * k[0] - k[1])
    z_minus = lat.vol * (1j * k[0] + k[1])
    for label, value in (("z - z'", w), ("z+(k)", z_plus), ("conj(z-(k))", z_minus.conjugate())):
        if _near_lattice(lat, value):
            raise EllipticPoleError(f"{label} = {value} lies in the period lattice")

    xk = complex(g(lat.gen1, k))
    k1 = (cmath.exp(2j * math.pi * xk * w / gen1)
          * theta_delta_eval(params, w + z_plus)
          / (theta_delta_eval(params, w) * theta_delta_eval(params, z_plus)))
    wb = w.conjugate()
    k2 = (cmath.exp(2j * math.pi * xk * wb / gen1.conjugate())
          * theta_delta_conj(params, wb + z_minus)
          / (theta_delta_conj(params, wb) * theta_delta_conj(params, z_minus)))
    return np.array([[0, k1], [-k2, 0]], dtype=complex)


def _near_lattice(lat: Lattice, w: complex, tol: float = 1e-12) -> bool:
    coords = np.linalg.solve(lat.generators.T, np.array([w.real, w.imag]))
    return bool(np.all(np.abs(coords - np.round(coords)) < tol))


def periodicity_integrals(spinor: KernelSpinor) -> Tuple[complex, complex, complex]:
    """(int psi1^2, int psi2^2, int psi1 conj(psi2)) over the torus, by Parseval.

    Raises:
        NonHalfLatticeError: unless Im k = 0 and 2k is a dual lattice vector
    """
    lat = spinor.lattice
    if half_lattice_character(lat, spinor.k) is None:
        raise NonHalfLatticeError(f"k={spinor.k} is not a half period of the dual lattice")
    xp, yp = lat.quasi_momenta(spinor.k.real)
    m = (int(round(2 * xp.real)), int(round(2 * yp.real)))
    c = spinor.coeffs
    partner = _reflected_positions(spinor.modes, m, spinor.cutoff)
    valid = partner >= 0
    I1 = lat.vol * np.sum(c[valid, 0] * c[partner[valid], 0])
    I2 = lat.vol * np.sum(c[valid, 1] * c[partner[valid], 1])
    I3 = lat.vol * np.sum(c[:, 0] * c[:, 1].conj())
    return complex(I1), complex(I2), complex(I3)


def _reflected_positions(modes: np.ndarray, m: Index, K: Tuple[int, int]) -> np.ndarray:
    """Position of -m - n for each mode n, or -1 outside the window."""
    K1, K2 = K
    r1 = -m[0] - modes[:, 0]
    r2 = -m[1] - modes[:, 1]
    ok = (np.abs(r1) <= K1) & (np.abs(r2) <= K2)
    return np.where(ok, (r1 + K1) * (2 * K2 + 1) + (r2 + K2), -1)


@dataclass
class InvolutionImage:
    """Transformed kernel spinor, the operator it solves and its curve point."""
    name: str
    curve_point: np.ndarray
    spinor: KernelSpinor
    operator: BlochMatrix
    residual: float


def _flip_modes(coeffs: np.ndarray) -> np.ndarray:
    # symmetric windows reverse under n -> -n
    return coeffs[::-1]


def involution_images(spinor: KernelSpinor, pot: FourierPotential,
                      which: Tuple[str, ...] = ("sigma", "rho", "eta"),
                      tol: float = KERNEL_REL_TOL) -> Dict[str, InvolutionImage]:
    """Transport a kernel spinor of D(V, W, k) through the involutions.

    sigma: J psi = (psi2, -psi1) solves the transposed operator of (W, V) at k;
        the curve point is -k.
    rho: conj(psi) solves the transposed operator of (V, V) at -conj(k)
        (sigma_real potentials).
    eta: J conj(psi) solves D(V, W) itself at -conj(k) (eta_pair potentials).

    Raises:
        PotentialSymmetryError: if the potential lacks the symmetry an involution needs
        KernelResidualError: if a transported spinor misses its operator
    """
    lat, K = spinor.lattice, spinor.cutoff
    c = spinor.coeffs
    images: Dict[str, InvolutionImage] = {}
    for name in which:
        if name == "sigma":
            k_new = spinor.k
            coeffs = np.stack([c[:, 1], -c[:, 0]], axis=1)
            operator = assemble_dirac(pot.swapped(), lat, k_new, K, transpose=True)
            curve_point = -spinor.k
        elif name == "rho":
            if pot.symmetry != "sigma_real":
                raise PotentialSymmetryError("rho needs a sigma_real potential")
            k_new = -spinor.k.conj()
            coeffs = _flip_modes(c.conj())
            operator = assemble_dirac(pot, lat, k_new, K, transpose=True)
            curve_point = spinor.k.conj()
        elif name == "eta":
            if pot.symmetry != "eta_pair":
                raise PotentialSymmetryError("eta needs an eta_pair potential")
            k_new = -spinor.k.conj()
            flipped = _flip_modes(c.conj())
            coeffs = np.stack([flipped[:, 1], -flipped[:, 0]], axis=1)
            operator = assemble_dirac(pot, lat, k_new, K)
            curve_point = k_new
        else:
            raise ValueError(f"unknown involution {name!r}")
        image = KernelSpinor(k_new, lat, K, coeffs, half_lattice_character(lat, k_new), spinor.sigma)
        residual = relative_residual(operator.matrix, image.vector)
        if residual > tol:
            raise KernelResidualError(f"{name} image has residual {residual:.3e}")
        images[name] = InvolutionImage(name, curve_point, image, operator, residual)
    return images


def covariant_shift(lat: Lattice, kappa: Index) -> Tuple[complex, complex]:
    """(dx, dy) with slice of (psi_-kappa V, psi_kappa W) at xp = slice of (V, W) at xp - dx, plus dy.

    Both shifts are the quasi-momenta of k-_kappa; the y-p relation holds modulo Z.
    """
    k_minus, _ = free_double_points(lat.dual_vector(*kappa))
    return lat.quasi_momenta(k_minus)

