"""Weierstrass elliptic functions and the normalized theta function theta_Delta.

Theta values come from mpmath's jtheta at a fixed working precision, with
q = exp(i pi tau) after reducing the period basis to the modular fundamental
domain and the argument into the fundamental cell. Results are returned as
Python complex numbers.
"""
import math
from dataclasses import dataclass, field
from typing import List, Tuple

from mpmath import mp

from custom_logger import CustomLogger
from errors import EllipticPoleError, ModularDomainError
from lattice_moduli import Lattice, reduce_to_fundamental

logger = CustomLogger(__name__)

WORKING_DPS = 30
POLE_RADIUS = 1e-12
POLE_WARNING_RADIUS = 1e-6

# parity of a half period in the reduced basis -> theta index of wp - e at it
_HALF_PERIOD_THETA = {(1, 0): 2, (1, 1): 3, (0, 1): 4}


def _jtheta(n: int, v, tau, derivative: int = 0):
    """theta_n(v|tau) at the current working precision, with q^(1/4) = exp(i pi tau / 4)."""
    tau = mp.mpc(tau)
    q = mp.exp(1j * mp.pi * tau)
    value = mp.jtheta(n, mp.mpc(v), q, derivative)
    if n in (1, 2):
        value *= mp.exp(1j * mp.pi * tau / 4) / mp.power(q, mp.mpf(1) / 4)
    return value


def theta_derivatives(n: int, v: complex, tau: complex, order: int = 3,
                      dps: int = WORKING_DPS) -> Tuple[complex, ...]:
    """theta_n(v|tau) and its first `order` v-derivatives.

    The caller is responsible for keeping |Im v| of the order of pi*Im(tau)/2.
    """
    with mp.workdps(dps):
        return tuple(complex(_jtheta(n, v, tau, k)) for k in range(order + 1))


def theta1_derivatives(v: complex, tau: complex, dps: int = WORKING_DPS) -> Tuple[complex, complex, complex, complex]:
    return theta_derivatives(1, v, tau, 3, dps)


def theta1(v: complex, tau: complex, dps: int = WORKING_DPS) -> complex:
    """theta1(v|tau) with argument reduction v = u + m*pi + n*pi*tau.

    theta1(u + m pi + n pi tau) = (-1)^(m+n) exp(-i(2 n u + n^2 pi tau)) theta1(u)
    """
    v, tau = complex(v), complex(tau)
    n = round(v.imag / (math.pi * tau.imag))
    u1 = v - n * math.pi * tau
    m = round(u1.real / math.pi)
    u = u1 - m * math.pi
    with mp.workdps(dps):
        factor = (-1) ** ((m + n) % 2) * mp.exp(-1j * (2 * n * mp.mpc(u) + n * n * mp.pi * mp.mpc(tau)))
        return complex(factor * _jtheta(1, u, tau))


@dataclass
class EllipticData:
    """Half periods with their quasi periods, half-period values and invariants.

    gaps holds (e1 - e2, e1 - e3, e2 - e3) from theta quotients, accurate even
    when two half-period values nearly coincide. The private fields hold the
    SL(2,Z)-reduced basis used for evaluation.
    """
    omega: complex
    omega_prime: complex
    eta: complex
    eta_prime: complex
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    gaps: Tuple[complex, complex, complex] = (0j, 0j, 0j)
    dps: int = WORKING_DPS
    _omega_r: complex = field(default=0j, repr=False)
    _omega_prime_r: complex = field(default=0j, repr=False)
    _matrix: Tuple[int, int, int, int] = field(default=(1, 0, 0, 1), repr=False)
    _theta_index: Tuple[int, int, int] = field(default=(2, 3, 4), repr=False)

    @property
    def tau(self) -> complex:
        return self.omega_prime / self.omega

    @property
    def _tau_r(self) -> complex:
        return self._omega_prime_r / self._omega_r


def _reduce_argument(data: EllipticData, z: complex) -> Tuple[complex, int, int]:
    """Write z = z0 + 2m*omega_r + 2n*omega'_r with z0 in the central cell."""
    w = z / (2 * data._omega_r)
    tau = data._tau_r
    y = w.imag / tau.imag
    x = w.real - y * tau.real
    n = round(y)
    m = round(x)
    z0 = z - 2 * m * data._omega_r - 2 * n * data._omega_prime_r
    return z0, m, n


def _quasi_periods(data: EllipticData):
    """(eta_r, eta'_r) of the reduced basis at the current working precision."""
    omega_r, omega_prime_r = mp.mpc(data._omega_r), mp.mpc(data._omega_prime_r)
    tau = data._tau_r
    eta_r = -mp.pi ** 2 * _jtheta(1, 0, tau, 3) / (12 * omega_r * _jtheta(1, 0, tau, 1))
    eta_prime_r = (eta_r * omega_prime_r - 0.5j * mp.pi) / omega_r
    return eta_r, eta_prime_r


def _input_quasi_periods(data: EllipticData):
    """(eta, eta') of the input basis, through the inverse matrix [[d, -b], [-c, a]]."""
    a, b, c, d = data._matrix
    eta_r, eta_prime_r = _quasi_periods(data)
    return -c * eta_prime_r + a * eta_r, d * eta_prime_r - b * eta_r


def _wp_reduced(data: EllipticData, z0: complex, eta_r):
    """(wp, wp', zeta) at a point of the central cell."""
    omega_r = mp.mpc(data._omega_r)
    tau = data._tau_r
    v0 = mp.pi * mp.mpc(z0) / (2 * omega_r)
    t0, t1, t2, t3 = (_jtheta(1, v0, tau, k) for k in range(4))
    L1, L2, L3 = t1 / t0, t2 / t0, t3 / t0
    k = mp.pi / (2 * omega_r)
    zeta = eta_r * mp.mpc(z0) / omega_r + k * L1
    wp = -eta_r / omega_r - k ** 2 * (L2 - L1 ** 2)
    wpp = -k ** 3 * (L3 - 3 * L1 * L2 + 2 * L1 ** 3)
    return wp, wpp, zeta


def _theta_index(matrix: Tuple[int, int, int, int], p: int, r: int) -> int:
    """Theta index for the half period p*omega + r*omega' in the reduced basis."""
    a, b, c, d = matrix
    return _HALF_PERIOD_THETA[((p * a - r * b) % 2, (r * d - p * c) % 2)]


def elliptic_from_periods(omega: complex, omega_prime: complex, dps: int = WORKING_DPS) -> EllipticData:
    """Build EllipticData for the lattice 2*omega*Z + 2*omega'*Z.

    Raises:
        ModularDomainError: if Im(omega'/omega) <= 0
    """
    omega = complex(omega)
    omega_prime = complex(omega_prime)
    if omega == 0 or not (omega_prime / omega).imag > 0:
        raise ModularDomainError(f"Im(omega'/omega) must be positive, got {omega}, {omega_prime}")

    _, word = reduce_to_fundamental(omega_prime / omega)
    a, b, c, d = word.matrix
    omega_prime_r = a * omega_prime + b * omega
    omega_r = c * omega_prime + d * omega
    labels = tuple(_theta_index(word.matrix, p, r) for p, r in ((1, 0), (1, 1), (0, 1)))

    data = EllipticData(omega, omega_prime, 0j, 0j, 0j, 0j, 0j, 0j, 0j, dps=dps,
                        _omega_r=omega_r, _omega_prime_r=omega_prime_r, _matrix=word.matrix,
                        _theta_index=labels)
    with mp.workdps(dps):
        eta, eta_prime = _input_quasi_periods(data)
    data.eta, data.eta_prime = complex(eta), complex(eta_prime)
    data.e1 = wp_eval(data, omega)[0]
    data.e2 = wp_eval(data, omega + omega_prime)[0]
    data.e3 = wp_eval(data, omega_prime)[0]
    data.g2 = 2 * (data.e1 ** 2 + data.e2 ** 2 + data.e3 ** 2)
    data.g3 = 4 * data.e1 * data.e2 * data.e3
    _, r12, r13 = half_period_roots(data, omega)
    data.gaps = (r12 ** 2, r13 ** 2, half_period_roots(data, omega + omega_prime)[2] ** 2)
    logger.debug(f"Elliptic data for tau={omega_prime / omega}: e=({data.e1}, {data.e2}, {data.e3})")
    return data


def _check_pole(data: EllipticData, z: complex, z0: complex) -> None:
    scale = abs(data._omega_r)
    if abs(z0) < POLE_RADIUS * scale:
        raise EllipticPoleError(f"z={z} is a lattice pole")
    if abs(z0) < POLE_WARNING_RADIUS * scale:
        logger.warning(f"z={z} is within {POLE_WARNING_RADIUS} of a pole; accuracy degrades")


def wp_eval(data: EllipticData, z: complex) -> Tuple[complex, complex, complex]:
    """Return (wp(z), wp'(z), zeta(z)).

    Raises:
        EllipticPoleError: if z lies within the pole guard radius of a lattice point
    """
    z = complex(z)
    z0, m, n = _reduce_argument(data, z)
    _check_pole(data, z, z0)
    with mp.workdps(data.dps):
        eta_r, eta_prime_r = _quasi_periods(data)
        wp, wpp, zeta0 = _wp_reduced(data, z0, eta_r)
        zeta = zeta0 + 2 * m * eta_r + 2 * n * eta_prime_r
        return complex(wp), complex(wpp), complex(zeta)


def half_period_roots(data: EllipticData, z: complex) -> Tuple[complex, complex, complex]:
    """(r1, r2, r3) with wp(z) - e_i = r_i^2 and wp'(z) = -2 r1 r2 r3.

    Each r_i is the theta quotient (pi/2omega) theta1'(0) theta_j(v) / (theta_j(0) theta1(v))
    in the reduced basis, so wp(z) - e_i keeps its relative accuracy when
    wp(z) is close to e_i.

    Raises:
        EllipticPoleError: if z lies within the pole guard radius of a lattice point
    """
    z = complex(z)
    z0, _, _ = _reduce_argument(data, z)
    _check_pole(data, z, z0)
    with mp.workdps(data.dps):
        omega_r = mp.mpc(data._omega_r)
        tau = data._tau_r
        v0 = mp.pi * mp.mpc(z0) / (2 * omega_r)
        scale = mp.pi * _jtheta(1, 0, tau, 1) / (2 * omega_r * _jtheta(1, v0, tau))
        roots = {j: scale * _jtheta(j, v0, tau) / _jtheta(j, 0, tau) for j in (2, 3, 4)}
        return tuple(complex(roots[j]) for j in data._theta_index)


def eta_plus_e1_omega(data: EllipticData) -> complex:
    """eta + e1*omega, evaluated at working precision before rounding."""
    with mp.workdps(data.dps):
        eta, _ = _input_quasi_periods(data)
        eta_r, _ = _quasi_periods(data)
        z0, _, _ = _reduce_argument(data, data.omega)
        e1 = _wp_reduced(data, z0, eta_r)[0]
        return complex(eta + e1 * mp.mpc(data.omega))


def eta_via_zeta(data: EllipticData) -> complex:
    """zeta(omega) evaluated through the theta logarithmic derivative route."""
    return wp_eval(data, data.omega)[2]


def legendre_residual(data: EllipticData) -> float:
    return abs(data.eta * data.omega_prime - data.eta_prime * data.omega - 0.5j * math.pi)


def cubic_residual(data: EllipticData, z: complex) -> float:
    """Relative residual of wp'^2 = 4 wp^3 - g2 wp - g3."""
    wp, wpp, _ = wp_eval(data, z)
    rhs = 4 * wp ** 3 - data.g2 * wp - data.g3
    return abs(wpp ** 2 - rhs) / max(abs(rhs), abs(wpp) ** 2, 1.0)


@dataclass(frozen=True)
class ThetaParams:
    """theta_Delta data: scale gen1 (complexified) and modulus gen2/gen1."""
    scale: complex
    tau: complex
    theta1_prime0: complex

    @classmethod
    def from_lattice(cls, lat: Lattice) -> 'ThetaParams':
        scale = lat.gen1_complex
        tau = lat.gen2_complex / scale
        if tau.imag <= 0:
            raise ModularDomainError(f"theta modulus {tau} not in the upper half plane")
        return cls(scale, tau, theta_derivatives(1, 0j, tau, 1)[1])


def theta_delta_eval(params: ThetaParams, z: complex) -> complex:
    """theta_Delta(z) = gen1 * theta1(pi z / gen1 | tau) / (pi theta1'(0|tau)).

    Odd, entire, theta_Delta(z) = z + O(z^3), antiperiodic under gen1.
    """
    v = math.pi * complex(z) / params.scale
    return params.scale * theta1(v, params.tau) / (math.pi * params.theta1_prime0)


def theta_delta_conj(params: ThetaParams, z: complex) -> complex:
    """Conjugate theta function z -> conj(theta_Delta(conj z))."""
    return theta_delta_eval(params, complex(z).conjugate()).conjugate()


@dataclass(frozen=True)
class HalfPeriodValue:
    label: str
    z: complex
    wp_closed: float
    wp_direct: complex
    quotient_closed: float
    quotient_direct: complex


def is_rectangular(data: EllipticData, tol: float = 1e-12) -> bool:
    if abs(data.omega.imag) > tol * abs(data.omega) or data.omega.real <= 0:
        return False
    ratio = data.omega_prime / data.omega
    return abs(ratio.real) <= tol * abs(ratio) and ratio.imag > 0


def quarter_period_shift(data: EllipticData) -> float:
    """s = sqrt(2 e1^2 + e2 e3) = sqrt((e1 - e2)(2 e1 + e2)) for rectangular data."""
    return math.sqrt(data.gaps[0].real * (2 * data.e1.real + data.e2.real))


def half_period_map_values(data: EllipticData) -> List[HalfPeriodValue]:
    """Values of -wp'/(wp - e1) at +-omega/2 and +-omega/2 + omega'.

    With s = sqrt(2 e1^2 + e2 e3) the closed forms are wp = e1 +- s and
    -wp'/(wp - e1) = +-2 sqrt((3 e1 s +- (4 e1^2 + 2 e2 e3)) / s) = +-2 sqrt(3 e1 +- 2 s);
    the sign is matched to the direct evaluation, which uses
    -wp'/(wp - e1) = 2 r2 r3 / r1.

    Raises:
        ModularDomainError: for non-rectangular period data
    """
    if not is_rectangular(data):
        raise ModularDomainError("half period map values need omega > 0 and omega'/omega in iR+")
    e1 = data.e1.real
    s = quarter_period_shift(data)
    rows = []
    points = [("+w/2", data.omega / 2, 1), ("-w/2", -data.omega / 2, 1),
              ("+w/2+w'", data.omega / 2 + data.omega_prime, -1),
              ("-w/2+w'", -data.omega / 2 + data.omega_prime, -1)]
    for label, z, branch in points:
        wp = wp_eval(data, z)[0]
        r1, r2, r3 = half_period_roots(data, z)
        direct = 2 * r2 * r3 / r1
        magnitude = 2 * math.sqrt(max(3 * e1 + branch * 2 * s, 0.0))
        closed = math.copysign(magnitude, direct.real)
        rows.append(HalfPeriodValue(label, z, e1 + branch * s, wp, closed, direct))
    return rows
