"""Singularity sets of the holomorphic structure and their energy contributions.

A set N is stored by its negative elements and by the non-negative integers
it misses; both lists have the same length m. The local contribution to the
Willmore energy is 4 pi (sum(excluded) - sum(negatives)).
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Sequence, Tuple, Union

from custom_logger import CustomLogger
from errors import SingSetError

logger = CustomLogger(__name__)


@dataclass(frozen=True)
class SingSet:
    """negatives strictly decreasing and < 0, excluded strictly increasing and >= 0."""
    negatives: Tuple[int, ...]
    excluded: Tuple[int, ...]

    def __post_init__(self):
        neg, exc = tuple(self.negatives), tuple(self.excluded)
        if len(neg) != len(exc):
            raise SingSetError(f"{len(neg)} negative elements but {len(exc)} excluded ones")
        if any(n >= 0 for n in neg) or any(b >= a for a, b in zip(neg, neg[1:])):
            raise SingSetError(f"negatives must be strictly decreasing and negative: {neg}")
        if any(n < 0 for n in exc) or any(b <= a for a, b in zip(exc, exc[1:])):
            raise SingSetError(f"excluded must be strictly increasing and non-negative: {exc}")
        object.__setattr__(self, "negatives", neg)
        object.__setattr__(self, "excluded", exc)

    @classmethod
    def from_elements(cls, negatives: Sequence[int], excluded: Sequence[int]) -> 'SingSet':
        """Build from unordered collections."""
        if len(set(negatives)) != len(negatives) or len(set(excluded)) != len(excluded):
            raise SingSetError("repeated elements")
        return cls(tuple(sorted(negatives, reverse=True)), tuple(sorted(excluded)))

    @property
    def m(self) -> int:
        return len(self.negatives)

    @property
    def sigma_plus(self) -> int:
        return sum(self.excluded)

    @property
    def sigma_minus(self) -> int:
        return sum(self.negatives)

    @property
    def depth(self) -> int:
        """d = -min(N); zero for N = N0."""
        return -min(self.negatives) if self.negatives else 0

    def contains(self, n: int) -> bool:
        if n < 0:
            return n in self.negatives
        return n not in self.excluded

    def label(self) -> str:
        return ",".join(str(n) for n in sorted(self.negatives) + list(self.excluded))


def wsing_of_set(s: SingSet) -> int:
    """Multiplier of 4 pi: sigma_plus - sigma_minus."""
    return s.sigma_plus - s.sigma_minus


def _sort_key(s: SingSet):
    return wsing_of_set(s), s.m, -s.sigma_minus, tuple(-n for n in s.negatives), s.excluded


def enumerate_sets(max_multiplier: int) -> List[SingSet]:
    """All sets with 1 <= multiplier <= max_multiplier.

    Sorted by multiplier, then m, then the sum of negatives (closest to zero
    first), then the elements.
    """
    if max_multiplier < 1:
        raise ValueError(f"max_multiplier must be at least 1, got {max_multiplier}")
    found = []
    m = 1
    while m * m <= max_multiplier:
        # m distinct negatives sum to at least m(m+1)/2 in magnitude, excluded to m(m-1)/2
        neg_cap = max_multiplier - m * (m - 1) // 2
        exc_cap = max_multiplier - m * (m + 1) // 2
        for neg in combinations(range(1, neg_cap + 1), m):
            neg_sum = sum(neg)
            if neg_sum > neg_cap:
                continue
            for exc in combinations(range(0, exc_cap + 1), m):
                if neg_sum + sum(exc) <= max_multiplier:
                    found.append(SingSet(tuple(-n for n in neg), exc))
        m += 1
    found.sort(key=_sort_key)
    logger.debug(f"Enumerated {len(found)} singularity sets up to {4 * max_multiplier} pi")
    return found


def group_sets(sets: Sequence[SingSet]) -> Dict[int, Dict[int, List[SingSet]]]:
    """multiplier -> m -> sets, keeping the input order."""
    grouped: Dict[int, Dict[int, List[SingSet]]] = {}
    for s in sets:
        grouped.setdefault(wsing_of_set(s), {}).setdefault(s.m, []).append(s)
    return grouped


def render_table(max_multiplier: int) -> List[Dict[str, str]]:
    """Rows (W_sing, m = 1, m = 2, ...) with sets written as negatives then excluded elements."""
    grouped = group_sets(enumerate_sets(max_multiplier))
    max_m = max((m for row in grouped.values() for m in row), default=1)
    rows = []
    for multiplier in range(1, max_multiplier + 1):
        row = {"W_sing": f"{4 * multiplier}pi"}
        for m in range(1, max_m + 1):
            row[f"m={m}"] = "  ".join(s.label() for s in grouped.get(multiplier, {}).get(m, []))
        rows.append(row)
    return rows


Number = Union[int, Fraction]


@dataclass
class BlowupPolynomials:
    """p_l in monomial form (highest degree first) and q_l = (1, a_1, ..., a_d)."""
    depth: int
    zeros: List[int]
    p_coeffs: List[Number]
    q_coeffs: List[Number]
    integral: bool


def _poly_mul(p: List[Fraction], q: List[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _basis(i: int, d: int) -> List[Fraction]:
    """(z + i + 1)(z + i + 2)...(z + d), highest degree first."""
    poly = [Fraction(1)]
    for j in range(i + 1, d + 1):
        poly = _poly_mul(poly, [Fraction(1), Fraction(j)])
    return poly


def _eval(poly: List[Fraction], z: int) -> Fraction:
    acc = Fraction(0)
    for c in poly:
        acc = acc * z + c
    return acc


def _solve_exact(matrix: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    n = len(rhs)
    a = [row[:] + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise SingSetError("the vanishing conditions are not independent")
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def _as_int(x: Fraction) -> Number:
    return int(x) if x.denominator == 1 else x


def blowup_polynomials(s: SingSet) -> BlowupPolynomials:
    """p_l = (z+1)...(z+d) + a_1 (z+2)...(z+d) + ... + a_d vanishing on {n >= -d} minus N.

    Solved in exact rational arithmetic; a_1 is checked against -(sigma_plus - sigma_minus).

    Raises:
        SingSetError: for the empty set or an inconsistent system
    """
    if not s.negatives:
        raise SingSetError("the set N0 has no blow-up polynomial")
    d = s.depth
    zeros = [n for n in range(-d, 0) if n not in s.negatives] + list(s.excluded)
    if len(zeros) != d:
        raise SingSetError(f"expected {d} vanishing conditions, found {len(zeros)}")
    lead = _basis(0, d)
    bases = [_basis(i, d) for i in range(1, d + 1)]
    matrix = [[_eval(b, n) for b in bases] for n in zeros]
    rhs = [-_eval(lead, n) for n in zeros]
    a = _solve_exact(matrix, rhs)

    p = lead[:]
    for coeff, basis in zip(a, bases):
        offset = len(p) - len(basis)
        for j, c in enumerate(basis):
            p[offset + j] += coeff * c
    q = [Fraction(1)] + a
    integral = all(c.denominator == 1 for c in p + q)
    if not integral:
        logger.warning(f"Non-integral blow-up coefficients for {s.label()}")
    if a[0] != -wsing_of_set(s):
        raise SingSetError(f"a_1 = {a[0]} disagrees with the energy multiplier {wsing_of_set(s)}")
    return BlowupPolynomials(d, zeros, [_as_int(c) for c in p], [_as_int(c) for c in q], integral)
