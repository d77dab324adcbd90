"""Lattice and dual lattice arithmetic, conformal moduli and SL(2,Z) reduction.

Conventions: a lattice is given by its oriented generators (gen1, gen2);
the dual generators satisfy g(gen_i, dual_j) = delta_ij with g the Euclidean
bilinear form (extended complex-bilinearly, never sesquilinearly).
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from custom_logger import CustomLogger
from errors import LatticeError, ModularDomainError

logger = CustomLogger(__name__)

BOUNDARY_TOL = 1e-12


def g(v, w) -> complex:
    """Complex bilinear extension of the Euclidean scalar product."""
    v = np.asarray(v)
    w = np.asarray(w)
    return v[0] * w[0] + v[1] * w[1]


@dataclass(frozen=True)
class Lattice:
    """Period lattice with positively oriented generators.

    Attributes:
        gen1: first generator as a real 2-vector
        gen2: second generator as a real 2-vector
        swapped: True when make_lattice had to swap the inputs to fix orientation
    """
    gen1: Tuple[float, float]
    gen2: Tuple[float, float]
    swapped: bool = False

    @property
    def vol(self) -> float:
        return self.gen1[0] * self.gen2[1] - self.gen1[1] * self.gen2[0]

    @property
    def generators(self) -> np.ndarray:
        """Rows are gen1 and gen2."""
        return np.array([self.gen1, self.gen2], dtype=float)

    @property
    def dual_generators(self) -> np.ndarray:
        """Rows are the dual generators (kappa_hat, kappa_check)."""
        return np.linalg.inv(self.generators).T

    @property
    def kappa_hat(self) -> np.ndarray:
        return self.dual_generators[0]

    @property
    def kappa_check(self) -> np.ndarray:
        return self.dual_generators[1]

    @property
    def gen1_complex(self) -> complex:
        return complex(self.gen1[0], self.gen1[1])

    @property
    def gen2_complex(self) -> complex:
        return complex(self.gen2[0], self.gen2[1])

    def dual_vector(self, n1: float, n2: float) -> np.ndarray:
        """Plane vector n1*kappa_hat + n2*kappa_check."""
        return n1 * self.kappa_hat + n2 * self.kappa_check

    def quasi_momenta(self, k) -> Tuple[complex, complex]:
        """Coordinates (x-p, y-p) = (g(gen1, k), g(gen2, k)) of a (complex) k."""
        return complex(g(self.gen1, k)), complex(g(self.gen2, k))

    def from_quasi_momenta(self, xp: complex, yp: complex) -> np.ndarray:
        """Inverse of quasi_momenta: k = xp*kappa_hat + yp*kappa_check."""
        return xp * self.kappa_hat.astype(complex) + yp * self.kappa_check.astype(complex)

    def contains(self, v, tol: float = 1e-9) -> bool:
        """True when the plane vector v lies in the lattice."""
        coords = np.linalg.solve(self.generators.T, np.asarray(v, dtype=float))
        return bool(np.all(np.abs(coords - np.round(coords)) < tol))


def make_lattice(gen1: Sequence[float], gen2: Sequence[float]) -> Lattice:
    """Build a lattice, swapping generators if their orientation is negative.

    Raises:
        LatticeError: if the generators are parallel or zero
    """
    a = tuple(float(x) for x in gen1)
    b = tuple(float(x) for x in gen2)
    det = a[0] * b[1] - a[1] * b[0]
    scale = math.hypot(*a) * math.hypot(*b)
    if scale == 0.0 or abs(det) <= 1e-12 * scale:
        raise LatticeError(f"degenerate lattice generators {a}, {b}")
    if det < 0:
        logger.debug(f"Swapping generators {a}, {b} to fix orientation")
        return Lattice(b, a, swapped=True)
    return Lattice(a, b)


def square_lattice() -> Lattice:
    return make_lattice((1.0, 0.0), (0.0, 1.0))


def lattice_from_tau(tau: complex) -> Lattice:
    """Lattice generated by (1, 0) and (Re tau, Im tau)."""
    if tau.imag <= 0:
        raise ModularDomainError(f"Im(tau) must be positive, got {tau}")
    return make_lattice((1.0, 0.0), (tau.real, tau.imag))


def same_lattice(first: Lattice, second: Lattice, tol: float = 1e-9) -> bool:
    """True when two generator pairs span the same lattice."""
    return (first.contains(second.gen1, tol) and first.contains(second.gen2, tol)
            and second.contains(first.gen1, tol) and second.contains(first.gen2, tol))


@dataclass(frozen=True)
class ConformalClass:
    """Conformal class of a torus, Im(tau) > 0."""
    tau: complex

    def __post_init__(self):
        if not self.tau.imag > 0:
            raise ModularDomainError(f"Im(tau) must be positive, got {self.tau}")


def tau_of_lattice(lat: Lattice) -> ConformalClass:
    """Modulus of the lattice after rotating and scaling gen1 onto (1, 0)."""
    return ConformalClass(lat.gen2_complex / lat.gen1_complex)


@dataclass(frozen=True)
class HalfPeriodClass:
    """Element [(r1*kappa_hat + r2*kappa_check)/2] of the dual lattice modulo 2."""
    r1: int
    r2: int

    def __post_init__(self):
        if self.r1 not in (0, 1) or self.r2 not in (0, 1):
            raise ValueError(f"half period residues must be bits, got ({self.r1}, {self.r2})")

    @property
    def is_zero(self) -> bool:
        return self.r1 == 0 and self.r2 == 0

    @staticmethod
    def nonzero() -> List['HalfPeriodClass']:
        return [HalfPeriodClass(1, 0), HalfPeriodClass(0, 1), HalfPeriodClass(1, 1)]

    def label(self) -> str:
        return f"({self.r1},{self.r2})"


def half_period_point(lat: Lattice, c: HalfPeriodClass) -> np.ndarray:
    """The plane vector kappa/2 representing the class."""
    return lat.dual_vector(c.r1, c.r2) / 2.0


LETTER_MATRICES: Dict[str, Tuple[int, int, int, int]] = {
    "T": (1, 1, 0, 1),
    "T^-1": (1, -1, 0, 1),
    "S": (0, -1, 1, 0),
}


def matmul2(m: Tuple[int, int, int, int], n: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
    a, b, c, d = m
    e, f, g_, h = n
    return (a * e + b * g_, a * f + b * h, c * e + d * g_, c * f + d * h)


def mobius(matrix: Tuple[int, int, int, int], tau: complex) -> complex:
    a, b, c, d = matrix
    return (a * tau + b) / (c * tau + d)


@dataclass(frozen=True)
class SL2Word:
    """A word in S, T, T^-1; letters are listed in order of application."""
    letters: Tuple[str, ...] = ()
    matrix: Tuple[int, int, int, int] = (1, 0, 0, 1)

    def append(self, letter: str) -> 'SL2Word':
        return SL2Word(self.letters + (letter,), matmul2(LETTER_MATRICES[letter], self.matrix))

    def apply(self, tau: complex) -> complex:
        return mobius(self.matrix, tau)

    def __str__(self) -> str:
        return " ".join(self.letters) if self.letters else "identity"


def word_from_letters(letters: Sequence[str]) -> SL2Word:
    word = SL2Word()
    for letter in letters:
        word = word.append(letter)
    return word


def apply_word(word: SL2Word, tau: complex) -> complex:
    """Apply the word letter by letter (same result as the stored matrix)."""
    for letter in word.letters:
        tau = mobius(LETTER_MATRICES[letter], tau)
    return tau


def in_fundamental_domain(tau: complex, tol: float = 1e-12) -> bool:
    return tau.imag > 0 and abs(tau.real) <= 0.5 + tol and abs(tau) >= 1 - tol


def reduce_to_fundamental(tau: complex, max_steps: int = 10000) -> Tuple[complex, SL2Word]:
    """Reduce tau into M1 = {|Re tau| <= 1/2, |tau| >= 1}.

    Boundary ties are resolved to Re tau in (-1/2, 1/2] and, on the unit
    circle, to Re tau >= 0.

    Returns:
        (reduced tau, word mapping the input to it)
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise ModularDomainError(f"Im(tau) must be positive, got {tau}")
    word = SL2Word()
    for _ in range(max_steps):
        n = math.floor(tau.real + 0.5)
        if n != 0:
            letter = "T^-1" if n > 0 else "T"
            for _ in range(abs(n)):
                word = word.append(letter)
            tau = tau - n
        if abs(tau) < 1 - BOUNDARY_TOL:
            word = word.append("S")
            tau = -1 / tau
            continue
        break
    else:
        raise ModularDomainError(f"reduction of {tau} did not terminate")

    if abs(tau.real + 0.5) <= BOUNDARY_TOL:
        word = word.append("T")
        tau = tau + 1
    if abs(abs(tau) - 1) <= BOUNDARY_TOL and tau.real < -BOUNDARY_TOL:
        word = word.append("S")
        tau = -1 / tau
    logger.debug(f"Reduced modulus to {tau} via {word}")
    return tau, word


def half_period_sublattice(lat: Lattice, c: HalfPeriodClass) -> Lattice:
    """Index-two superlattice whose dual maps onto {0, [kappa/2]}.

    The dual lattice is spanned by (kappa_hat, 2 kappa_check) for (1,0),
    (2 kappa_hat, kappa_check) for (0,1) and (kappa_hat + kappa_check,
    2 kappa_check) for (1,1).
    """
    if c.is_zero:
        raise ModularDomainError("the zero half period class has no sublattice")
    a = np.array(lat.gen1)
    b = np.array(lat.gen2)
    if (c.r1, c.r2) == (1, 0):
        return make_lattice(a, b / 2.0)
    if (c.r1, c.r2) == (0, 1):
        return make_lattice(a / 2.0, b)
    return make_lattice(a, (b - a) / 2.0)


def sublattice_tau(tau: complex, c: HalfPeriodClass) -> complex:
    """Modulus of the sublattice of the normalized lattice (1, tau), unreduced."""
    if c.is_zero:
        raise ModularDomainError("the zero half period class has no sublattice")
    if (c.r1, c.r2) == (1, 0):
        return tau / 2
    if (c.r1, c.r2) == (0, 1):
        return 2 * tau
    return (tau - 1) / 2


@dataclass(frozen=True)
class SublatticeCase:
    """One entry of the enumerated tau -> tau' list over M1."""
    case_id: str
    tau_prime: complex
    preimages: Tuple[HalfPeriodClass, HalfPeriodClass]
    curve: HalfPeriodClass
    genus: int


_KH = HalfPeriodClass(1, 0)
_KC = HalfPeriodClass(0, 1)
_KB = HalfPeriodClass(1, 1)


def _le(x: float, y: float) -> bool:
    return x <= y + 1e-12


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= 1e-9


# case id -> (class, domain predicate, map, preimages, curve, genus rule)
_CASES = {
    "1a": (_KH, lambda t: _le(2, abs(t)),
           lambda t: t / 2, (_KH, _KB), _KB, lambda t: 2),
    "1b": (_KH, lambda t: _le(abs(t), 2) and _le(2, abs(t + 2)) and _le(2, abs(t - 2)),
           lambda t: -2 / t, (_KC, _KB), _KB,
           lambda t: 1 if _eq(abs(t + 2), 2) or _eq(abs(t - 2), 2) else 2),
    "1c": (_KH, lambda t: _le(abs(t + 2), 2),
           lambda t: -2 / t - 1, (_KH, _KC), _KH, lambda t: 1),
    "1d": (_KH, lambda t: _le(abs(t - 2), 2),
           lambda t: -2 / t + 1, (_KH, _KC), _KH, lambda t: 1),
    "2a": (_KC, lambda t: _le(-0.25, t.real) and _le(t.real, 0.25),
           lambda t: 2 * t, (_KC, _KB), _KB,
           lambda t: 1 if _eq(abs(t.real), 0.25) else 2),
    "2b": (_KC, lambda t: _le(t.real, -0.25),
           lambda t: 2 * t + 1, (_KH, _KC), _KH, lambda t: 1),
    "2c": (_KC, lambda t: _le(0.25, t.real),
           lambda t: 2 * t - 1, (_KH, _KC), _KH, lambda t: 1),
    "3a": (_KB, lambda t: _le(2, abs(t + 1)) and _le(2, abs(t - 1)) and _le(t.real, 0),
           lambda t: (t + 1) / 2, (_KC, _KB), _KB,
           lambda t: 1 if _eq(t.real, 0) else 2),
    "3b": (_KB, lambda t: _le(2, abs(t + 1)) and _le(2, abs(t - 1)) and _le(0, t.real),
           lambda t: (t - 1) / 2, (_KC, _KB), _KB,
           lambda t: 1 if _eq(t.real, 0) else 2),
    "3c": (_KB, lambda t: _le(abs(t + 1), 2) and _le(2, abs(t - 1)),
           lambda t: -2 / (t + 1), (_KH, _KB), _KB,
           lambda t: 1 if _eq(abs(t - 1), 2) else 2),
    "3d": (_KB, lambda t: _le(2, abs(t + 1)) and _le(abs(t - 1), 2),
           lambda t: -2 / (t - 1), (_KH, _KB), _KB,
           lambda t: 1 if _eq(abs(t + 1), 2) else 2),
    "3e": (_KB, lambda t: _le(abs(t + 1), 2) and _le(abs(t - 1), 2) and _le(t.real, 0),
           lambda t: (t - 1) / (t + 1), (_KH, _KC), _KH,
           lambda t: 0 if _eq(t.real, 0) else 1),
    "3f": (_KB, lambda t: _le(abs(t + 1), 2) and _le(abs(t - 1), 2) and _le(0, t.real),
           lambda t: -(t + 1) / (t - 1), (_KH, _KC), _KH,
           lambda t: 0 if _eq(t.real, 0) else 1),
}

CASE_IDS = tuple(_CASES.keys())


def tau_sublattice_map(tau: complex, c: HalfPeriodClass, case_id: str) -> SublatticeCase:
    """Evaluate one case of the enumerated tau -> tau' list.

    Raises:
        ModularDomainError: unknown case, wrong class or tau outside the case domain
    """
    if case_id not in _CASES:
        raise ModularDomainError(f"unknown case {case_id!r}")
    cls, domain, mapping, preimages, curve, genus = _CASES[case_id]
    if cls != c:
        raise ModularDomainError(f"case {case_id} belongs to class {cls.label()}, not {c.label()}")
    if tau.imag <= 0 or not domain(tau):
        raise ModularDomainError(f"tau={tau} is outside the domain of case {case_id}")
    return SublatticeCase(case_id, complex(mapping(tau)), preimages, curve, genus(tau))


def classify_sublattice_case(tau: complex, c: HalfPeriodClass) -> SublatticeCase:
    """First case (in list order) of the class whose domain contains tau."""
    for case_id, (cls, domain, _, _, _, _) in _CASES.items():
        if cls == c and domain(tau):
            return tau_sublattice_map(tau, c, case_id)
    raise ModularDomainError(f"no case of class {c.label()} contains tau={tau}")


def free_double_points(kappa) -> Tuple[np.ndarray, np.ndarray]:
    """Double point pair (k_minus, k_plus) of the free Fermi curve for a dual vector."""
    k1, k2 = float(kappa[0]), float(kappa[1])
    k_minus = np.array([-k1 / 2 - 1j * k2 / 2, -k2 / 2 + 1j * k1 / 2])
    k_plus = k_minus + np.array([k1, k2])
    return k_minus, k_plus


def shortest_dual_vectors(lat: Lattice, rel_tol: float = 1e-12) -> List[Tuple[int, int]]:
    """All shortest nonzero dual lattice indices, sorted lexicographically."""
    bound = min(np.linalg.norm(lat.kappa_hat), np.linalg.norm(lat.kappa_check))
    n1_max = int(math.floor(bound * math.hypot(*lat.gen1) + 1e-9))
    n2_max = int(math.floor(bound * math.hypot(*lat.gen2) + 1e-9))
    best: Optional[float] = None
    found: List[Tuple[int, int]] = []
    for n1 in range(-n1_max, n1_max + 1):
        for n2 in range(-n2_max, n2_max + 1):
            if n1 == 0 and n2 == 0:
                continue
            norm2 = float(np.sum(lat.dual_vector(n1, n2) ** 2))
            if best is None or norm2 < best * (1 - rel_tol):
                best = norm2
                found = [(n1, n2)]
            elif norm2 <= best * (1 + rel_tol):
                found.append((n1, n2))
    return sorted(found)
