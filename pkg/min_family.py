"""Explicit minimizer families: genus 0, the genus 1 Weierstrass family, the
curve with disconnected normalization and the conformal class bound.

The genus 1 family lives on the rectangular curve C/(2 omega Z + 2 omega' Z)
with omega = 1/2 and omega' = i t/2; the marked orbit sits at
z1 = omega/2 + s*omega'. Its first integral depends only on t and s.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from custom_logger import CustomLogger
from elliptic_core import (EllipticData, elliptic_from_periods, eta_plus_e1_omega, half_period_roots, is_rectangular,
                          quarter_period_shift, wp_eval)
from errors import EllipticPoleError, ModularDomainError, MonotonicityError, RootFindingError
from lattice_moduli import (ConformalClass, HalfPeriodClass, Lattice, SL2Word, classify_sublattice_case,
                            g, in_fundamental_domain, lattice_from_tau, reduce_to_fundamental,
                            shortest_dual_vectors)

logger = CustomLogger(__name__)

EIGHT_PI = 8 * math.pi
TWO_PI_SQUARED = 2 * math.pi ** 2
NEWTON_TOL = 1e-9
NEWTON_MAX_ITER = 60


@dataclass
class Genus0Curve:
    """The quadric g(k, k) = constant of least energy on a lattice."""
    constant: float
    w: float
    minimizers: List[Tuple[int, int]]


def genus0_min_curve(lat: Lattice) -> Genus0Curve:
    """c = g(kappa*, kappa*)/4 for a shortest dual vector kappa*, W = 4 pi^2 vol c."""
    minimizers = shortest_dual_vectors(lat)
    kappa = lat.dual_vector(*minimizers[0])
    c = float(g(kappa, kappa)) / 4
    return Genus0Curve(c, 4 * math.pi ** 2 * lat.vol * c, minimizers)


@dataclass
class Genus1Point:
    """Point of the genus 1 family.

    Attributes:
        elliptic: rectangular period data (omega > 0, omega'/omega in iR+)
        z1: the type 1 orbit point on omega/2 + omega'*[-1, 1]
        h_label: odd integer multiplying the x-p lattice (1 for minimizers)
        c_label: odd integer generating the effective dual lattice (1 for minimizers)
        n_shift: integer shift of Re tau
    """
    elliptic: EllipticData
    z1: complex
    h_label: int = 1
    c_label: int = 1
    n_shift: int = 0

    def __post_init__(self):
        if not is_rectangular(self.elliptic):
            raise ModularDomainError("the genus 1 family needs omega > 0 and omega'/omega in iR+")
        if self.h_label % 2 == 0 or self.c_label % 2 == 0:
            raise ValueError("h_label and c_label must be odd")
        omega, omega_p = self.elliptic.omega, self.elliptic.omega_prime
        offset = (complex(self.z1) - omega / 2) / omega_p
        if abs(offset.imag) > 1e-9 or abs(offset.real) > 1 + 1e-9:
            raise ModularDomainError(f"z1={self.z1} is not on omega/2 + omega'*[-1, 1]")

    @property
    def minimizing(self) -> bool:
        return self.h_label == 1 and self.c_label == 1


@dataclass
class FamilyValue:
    """Conformal class and first integral of a family point.

    tau_unreduced is the value of the explicit formulas; tau is its
    reduction to the fundamental domain by word.
    """
    tau: complex
    w: float
    tau_unreduced: complex
    word: SL2Word
    alpha: float
    minimizing: bool = True


def _family_raw(data: EllipticData, z1: complex, h: int = 1, c: int = 1, n: int = 0) -> Tuple[complex, float, float]:
    # wp - e1 = r1^2 and wp' = -2 r1 r2 r3, so alpha and Im tau are quotients of theta values
    r1, r2, r3 = half_period_roots(data, z1)
    if abs(r2 * r3) <= 1e-14 * abs(r1):
        raise EllipticPoleError(f"wp' vanishes at z1={z1}; alpha is undefined")
    zeta1 = wp_eval(data, z1)[2]
    zeta2 = wp_eval(data, z1 + data.omega)[2]
    omega, eta = data.omega, data.eta
    alpha = h * r1 / (2 * r2 * r3)
    im_tau = (c * omega / (h * math.pi)) * r2 * r3 / r1
    re_tau = -(c / (h * math.pi * 1j)) * (2 * eta * z1 - omega * (zeta1 + zeta2 - eta)) + n
    w = 8 * math.pi * alpha * c * eta_plus_e1_omega(data)
    if abs(w.imag) > 1e-8 * max(1.0, abs(w)):
        logger.warning(f"First integral at z1={z1} has imaginary part {w.imag:.3e}")
    return complex(re_tau.real, im_tau.real), float(w.real), float(alpha.real)


def genus1_family_point(p: Genus1Point) -> FamilyValue:
    """(tau, W) of a family point, with tau reduced to the fundamental domain.

    The sign of alpha is fixed so that W > 0.

    Raises:
        EllipticPoleError: if wp'(z1) vanishes
    """
    tau_raw, w, alpha = _family_raw(p.elliptic, p.z1, p.h_label, p.c_label, p.n_shift)
    if w < 0:
        w, alpha = -w, -alpha
    if tau_raw.imag <= 0:
        raise ModularDomainError(f"family point z1={p.z1} gives Im(tau) = {tau_raw.imag}")
    tau, word = reduce_to_fundamental(tau_raw)
    if not p.minimizing:
        logger.warning(f"Labels ({p.h_label}, {p.c_label}) do not describe a minimizer")
    return FamilyValue(tau, w, tau_raw, word, alpha, p.minimizing)


def genus1_data(t: float, dps: Optional[int] = None) -> EllipticData:
    """Period data with omega = 1/2 and omega' = i t/2."""
    if t <= 0:
        raise ModularDomainError(f"t must be positive, got {t}")
    if dps is None:
        return elliptic_from_periods(0.5, 0.5j * t)
    return elliptic_from_periods(0.5, 0.5j * t, dps)


def genus1_point(t: float, s: float = 0.0) -> Genus1Point:
    data = genus1_data(t)
    return Genus1Point(data, data.omega / 2 + s * data.omega_prime)


def genus1_closed_form_w(data: EllipticData) -> float:
    """4 pi (eta + e1 omega) sqrt(s / (3 e1 s + 4 e1^2 + 2 e2 e3)), s = sqrt(2 e1^2 + e2 e3).

    The first integral at z1 = omega/2 in closed form. Since 4 e1^2 + 2 e2 e3 = 2 s^2
    the root is 1 / sqrt(3 e1 + 2 s), and s is built from the gap e1 - e2.
    """
    s = quarter_period_shift(data)
    return float(4 * math.pi * eta_plus_e1_omega(data).real / math.sqrt(3 * data.e1.real + 2 * s))


def monotone_sweep(t_grid: Sequence[float], dps: Optional[int] = None) -> List[Tuple[float, float]]:
    """W(t) at z1 = omega/2 over an increasing grid.

    Raises:
        MonotonicityError: if W fails to decrease strictly, naming the offending pair
    """
    grid = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t_grid must be strictly increasing")
    rows = []
    for t in grid:
        data = genus1_data(t, dps)
        _, w, _ = _family_raw(data, data.omega / 2)
        rows.append((t, abs(w)))
    for (t0, w0), (t1, w1) in zip(rows, rows[1:]):
        if not w1 < w0:
            raise MonotonicityError(f"W({t1}) = {w1!r} does not decrease from W({t0}) = {w0!r}")
    logger.debug(f"Swept {len(rows)} points: W from {rows[0][1]:.9g} to {rows[-1][1]:.9g}")
    return rows


def _tau_of(log_t: float, s: float) -> complex:
    data = genus1_data(math.exp(log_t))
    tau, _, _ = _family_raw(data, data.omega / 2 + s * data.omega_prime)
    return tau


def genus1_parameters_for_tau(tau: complex, tol: float = NEWTON_TOL) -> Tuple[float, float]:
    """(t, s) with tau(t, s) = tau.

    The seed solves Im tau(t, 0) = |tau| with brentq in log t, then damped Newton
    on both coordinates (log t, s) solves the full system.

    Raises:
        ModularDomainError: if tau lies outside {|Re tau| <= 1, |tau| > 1}
        RootFindingError: if either stage fails; the last residual is attached
    """
    tau = complex(tau)
    if abs(tau.real) > 1 + 1e-12 or abs(tau) <= 1 or tau.imag <= 0:
        raise ModularDomainError(f"tau={tau} is outside the genus 1 family domain")

    lo, hi = math.log(1e-2), math.log(1e2)
    f = lambda lt: _tau_of(lt, 0.0).imag - abs(tau)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise RootFindingError(f"|tau|={abs(tau)} is not bracketed on s = 0", residual=min(abs(f_lo), abs(f_hi)))
    log_t = brentq(f, lo, hi, xtol=1e-14)
    x = np.array([log_t, 0.0])

    def residual(v):
        z = _tau_of(v[0], v[1]) - tau
        return np.array([z.real, z.imag])

    r = residual(x)
    h = 1e-6
    for iteration in range(NEWTON_MAX_ITER):
        norm = float(np.linalg.norm(r))
        if norm < tol:
            break
        jac = np.empty((2, 2))
        for j in range(2):
            step = np.zeros(2)
            step[j] = h
            jac[:, j] = (residual(x + step) - residual(x - step)) / (2 * h)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise RootFindingError("singular Jacobian in the genus 1 solve", residual=norm)
        damping = 1.0
        while damping > 1e-4:
            candidate = x + damping * dx
            if abs(candidate[1]) <= 1 and np.linalg.norm(residual(candidate)) < norm:
                break
            damping /= 2
        else:
            raise RootFindingError("damped Newton stalled in the genus 1 solve", residual=norm)
        x = candidate
        r = residual(x)
        logger.debug(f"Newton iteration {iteration}: residual {np.linalg.norm(r):.3e}")
    else:
        raise RootFindingError("genus 1 solve did not converge", residual=float(np.linalg.norm(r)))
    return math.exp(x[0]), float(x[1])


@dataclass
class DisconnectedCurve:
    """x-p(z), y-p(z) on one component, its half period values and first integral per sheet."""
    elliptic: EllipticData
    xp: Callable[[complex], complex]
    yp: Callable[[complex], complex]
    half_period_values: Dict[str, Tuple[complex, complex]]
    w_per_sheet: float


def _residue_at_zero(f: Callable[[complex], complex], radius: float, samples: int = 64) -> complex:
    theta = 2 * math.pi * np.arange(samples) / samples
    z = radius * np.exp(1j * theta)
    # (1/2 pi i) * contour integral with dz = i z dtheta
    return complex(np.mean([f(zj) * zj for zj in z]))


def disconnected_curve_functions(lat: Lattice) -> DisconnectedCurve:
    """x-p(z) = i(omega' zeta(z) - eta' z)/pi and y-p(z) = -i(omega zeta(z) - eta z)/pi.

    Half periods come from the dual lattice: 2 omega = kappa_hat_1 + i kappa_hat_2
    and 2 omega' = kappa_check_1 + i kappa_check_2.
    """
    kh, kc = lat.kappa_hat, lat.kappa_check
    data = elliptic_from_periods(complex(kh[0], kh[1]) / 2, complex(kc[0], kc[1]) / 2)
    omega, omega_p, eta, eta_p = data.omega, data.omega_prime, data.eta, data.eta_prime

    def xp(z: complex) -> complex:
        return 1j * (omega_p * wp_eval(data, z)[2] - eta_p * z) / math.pi

    def yp(z: complex) -> complex:
        return -1j * (omega * wp_eval(data, z)[2] - eta * z) / math.pi

    table = {label: (xp(z), yp(z)) for label, z in
             (("omega", omega), ("omega'", omega_p), ("omega+omega'", omega + omega_p))}

    def form(z: complex) -> complex:
        wp = wp_eval(data, z)[0]
        dxp = 1j * (-omega_p * wp - eta_p) / math.pi
        return yp(z) * dxp

    residue = _residue_at_zero(form, 0.25 * min(abs(omega), abs(omega_p)))
    w = abs(8 * math.pi ** 2 * 1j * residue)
    logger.debug(f"Disconnected curve residue {residue:.12g}, W per sheet {w:.12g}")
    return DisconnectedCurve(data, xp, yp, table, w)


@dataclass
class ClassBound:
    """Energy of the minimizer over one half period class."""
    half_period: HalfPeriodClass
    case_id: str
    tau_prime: complex
    genus: int
    curve: str
    w: float
    upper_bound_only: bool = False
    parameters: Optional[Tuple[float, float]] = None


@dataclass
class BoundPoint:
    tau: ConformalClass
    classes: Dict[str, ClassBound] = field(default_factory=dict)
    w_min: float = math.inf


def sublattice_bound(tau: complex, c: HalfPeriodClass) -> ClassBound:
    """W over [kappa/2] as twice the energy of the family curve on the index two sublattice.

    Genus 0 cases use the quadric of the sublattice, genus 1 cases solve the
    family for tau'; genus 2 curves are not computed and report the 8 pi bound.
    """
    case = classify_sublattice_case(tau, c)
    curve = f"[{case.curve.label()}/2] genus {case.genus}"
    if case.genus == 0:
        w = 2 * genus0_min_curve(lattice_from_tau(case.tau_prime)).w
        return ClassBound(c, case.case_id, case.tau_prime, 0, curve, w)
    if case.genus == 1:
        t, s = genus1_parameters_for_tau(case.tau_prime)
        value = genus1_family_point(genus1_point(t, s))
        return ClassBound(c, case.case_id, case.tau_prime, 1, curve, 2 * value.w, parameters=(t, s))
    return ClassBound(c, case.case_id, case.tau_prime, case.genus, curve, EIGHT_PI, upper_bound_only=True)


def wbound_of_tau(tau: complex) -> BoundPoint:
    """Per class energies and their minimum for tau in the fundamental domain.

    Raises:
        ModularDomainError: if tau is outside the fundamental domain
        RootFindingError: if a genus 1 solve fails
    """
    tau = complex(tau)
    if not in_fundamental_domain(tau):
        raise ModularDomainError(f"tau={tau} is not in the fundamental domain")
    point = BoundPoint(ConformalClass(tau))
    for c in HalfPeriodClass.nonzero():
        bound = sublattice_bound(tau, c)
        point.classes[c.label()] = bound
        point.w_min = min(point.w_min, bound.w)
    if point.w_min > EIGHT_PI + 1e-6 or point.w_min < TWO_PI_SQUARED - 1e-6:
        logger.warning(f"w_min={point.w_min} at tau={tau} is outside [2 pi^2, 8 pi]")
    logger.debug(f"Bound at tau={tau}: w_min={point.w_min:.12g}")
    return point
