"""Branch tracing, handle moduli and Willmore energy of Fermi curves.

The curve is sampled through slices x-p = const of the truncated operator
(see dirac_bloch.fermi_slice); a point is k = x-p * kappa_hat + y-p * kappa_check.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from custom_logger import CustomLogger
from dirac_bloch import (Cutoff, FourierPotential, Index, _slope_matrices, fermi_slice,
                         normalize_cutoff, p_symbol, q_symbol, slice_values)
from errors import (EigenvalueCollisionError, HandleNotIsolableError, PotentialSymmetryError,
                    ResidueFitError)
from lattice_moduli import HalfPeriodClass, Lattice, free_double_points, g

logger = CustomLogger(__name__)

MAX_BISECT = 8
CLOSED_TOL = 1e-8
RESIDUE_GATE = 1e-4


@dataclass
class FermiBranch:
    """Samples (x-p, y-p) of one sheet with per-step matching certificates.

    match_distance[i] is the distance of sample i from its predictor and
    runner_up[i] the distance of the next closest eigenvalue.
    """
    xp: np.ndarray
    yp: np.ndarray
    match_distance: np.ndarray
    runner_up: np.ndarray
    closed: bool = False

    @property
    def endpoint_mismatch(self) -> float:
        return float(abs(self.yp[-1] - self.yp[0]))


def _nearest_two(values: np.ndarray, target: complex) -> Tuple[complex, float, float]:
    dist = np.abs(values - target)
    order = np.argsort(dist)
    d1 = float(dist[order[0]])
    d2 = float(dist[order[1]]) if len(order) > 1 else math.inf
    return complex(values[order[0]]), d1, d2


def _ambiguous(d1: float, d2: float) -> bool:
    return d2 < max(2 * d1, 1e-10)


def _advance(pot, lat, K, xp0, y0, slope, xp1, depth) -> List[Tuple[complex, complex, float, float]]:
    """Samples from xp0 (excluded) to xp1 (included), halving the step on ambiguous matches."""
    predicted = y0 + slope * (xp1 - xp0)
    y1, d1, d2 = _nearest_two(slice_values(pot, lat, xp1, K), predicted)
    if not _ambiguous(d1, d2):
        return [(xp1, y1, d1, d2)]
    if depth >= MAX_BISECT:
        raise EigenvalueCollisionError(f"eigenvalues collide near x-p={xp1}, y-p={predicted}",
                                       location=complex(xp1))
    mid = (xp0 + xp1) / 2
    first = _advance(pot, lat, K, xp0, y0, slope, mid, depth + 1)
    xm, ym = first[-1][0], first[-1][1]
    return first + _advance(pot, lat, K, xm, ym, (ym - y0) / (xm - xp0), xp1, depth + 1)


def trace_branch(pot: FourierPotential, lat: Lattice, xp_path: Sequence[complex], seed_yp: complex,
                 K: Cutoff) -> FermiBranch:
    """Continue the sheet through (xp_path[0], seed_yp) along the path.

    Raises:
        EigenvalueCollisionError: if two eigenvalues cannot be told apart after
            eight step halvings; the collision location is attached
    """
    path = np.asarray(xp_path, dtype=complex)
    if len(path) < 2:
        raise ValueError("a branch needs at least two path points")
    y0, d1, d2 = _nearest_two(slice_values(pot, lat, path[0], K), seed_yp)
    if _ambiguous(d1, d2):
        raise EigenvalueCollisionError(f"seed y-p={seed_yp} is ambiguous at x-p={path[0]}",
                                       location=complex(path[0]))
    h = 1e-7 * max(abs(path[1] - path[0]), 1e-3)
    y_h, _, _ = _nearest_two(slice_values(pot, lat, path[0] + h, K), y0)
    slope = (y_h - y0) / h

    samples = [(path[0], y0, d1, d2)]
    for xp1 in path[1:]:
        xp0, yp0 = samples[-1][0], samples[-1][1]
        samples.extend(_advance(pot, lat, K, xp0, yp0, slope, xp1, 0))
        if len(samples) >= 2:
            (xa, ya), (xb, yb) = samples[-2][:2], samples[-1][:2]
            slope = (yb - ya) / (xb - xa)
    xs = np.array([s[0] for s in samples])
    ys = np.array([s[1] for s in samples])
    closed = bool(abs(xs[-1] - xs[0]) < CLOSED_TOL and abs(ys[-1] - ys[0]) < CLOSED_TOL)
    logger.debug(f"Traced {len(xs)} samples, closed={closed}")
    return FermiBranch(xs, ys, np.array([s[2] for s in samples]), np.array([s[3] for s in samples]), closed)


def circle_path(center: complex, radius: float, samples: int = 128) -> np.ndarray:
    """Closed counter-clockwise circle, first point repeated at the end."""
    theta = np.linspace(0.0, 2 * math.pi, samples + 1)
    return center + radius * np.exp(1j * theta)


@dataclass
class HandleModulus:
    """Modulus t(kappa) = pi * contour integral of k1 dk2 around one handle."""
    kappa: Index
    center: np.ndarray
    branch_points: Tuple[complex, complex]
    t_value: complex
    orientation: int = 1
    samples: int = 0


def handle_center(lat: Lattice, kappa: Index) -> np.ndarray:
    """The double point -k+_kappa of the free curve that a (kappa) mode opens."""
    _, k_plus = free_double_points(lat.dual_vector(*kappa))
    return -k_plus


def _two_nearest(values: np.ndarray, target: complex) -> np.ndarray:
    order = np.argsort(np.abs(values - target))
    return values[order[:2]]


def _branch_points(pot, lat, K, xp_c: complex, yp_c: complex, scale: float) -> Tuple[complex, complex]:
    """Roots of the discriminant (y1 - y2)^2 fitted by a quadratic in x-p near the centre."""
    offsets = np.linspace(-scale, scale, 7)
    disc = []
    for d in offsets:
        y1, y2 = _two_nearest(slice_values(pot, lat, xp_c + d, K), yp_c)
        disc.append((y1 - y2) ** 2)
    coeffs = np.polyfit(offsets.astype(complex), np.array(disc), 2)
    roots = np.roots(coeffs)
    if len(roots) < 2:
        return xp_c, xp_c
    return complex(xp_c + roots[0]), complex(xp_c + roots[1])


def handle_modulus(pot: FourierPotential, lat: Lattice, kappa: Index, K: Cutoff,
                   samples: int = 256, fit_scale: float = 1e-2) -> HandleModulus:
    """t(kappa) by the trapezoidal rule on a circle of radius 3x the branch point separation.

    One sheet is followed once around the circle; dk2/dtheta comes from the
    FFT of the sampled values. For eta_pair potentials the orientation is
    chosen so that Re t >= 0 and recorded.

    Raises:
        HandleNotIsolableError: if the tracked sheet meets other spectrum
    """
    center = handle_center(lat, kappa)
    xp_c, yp_c = lat.quasi_momenta(center)
    b1, b2 = _branch_points(pot, lat, K, xp_c, yp_c, fit_scale)
    separation = abs(b1 - b2)
    if separation < 1e-9:
        logger.debug(f"Handle {kappa} is closed (separation {separation:.2e})")
        return HandleModulus(tuple(kappa), center, (b1, b2), 0j, 1, 0)

    mid = (b1 + b2) / 2
    radius = 3 * separation
    theta = 2 * math.pi * np.arange(samples) / samples
    xs = mid + radius * np.exp(1j * theta)
    ys = np.empty(samples, dtype=complex)
    start = _two_nearest(slice_values(pot, lat, xs[0], K), yp_c)
    ys[0] = start[0]
    previous = ys[0]
    step = 0j
    for j in range(1, samples):
        y, d1, d2 = _nearest_two(slice_values(pot, lat, xs[j], K), previous + step)
        if _ambiguous(d1, d2):
            raise HandleNotIsolableError(f"handle {kappa} is not isolable at x-p={xs[j]}")
        step = y - previous
        ys[j] = previous = y
    closing, _, _ = _nearest_two(slice_values(pot, lat, xs[0], K), previous + step)
    if abs(closing - ys[0]) > 1e-6 * max(1.0, abs(ys[0])):
        raise HandleNotIsolableError(f"contour around handle {kappa} did not close on one sheet")

    k_points = np.array([lat.from_quasi_momenta(x, y) for x, y in zip(xs, ys)])
    k1 = k_points[:, 0]
    k2 = k_points[:, 1]
    m = np.fft.fftfreq(samples, d=1.0 / samples)
    dk2 = np.fft.ifft(1j * m * np.fft.fft(k2))
    t = math.pi * np.sum(k1 * dk2) * (2 * math.pi / samples)

    orientation = 1
    if pot.symmetry == "eta_pair" and t.real < 0:
        t = -t
        orientation = -1
    logger.debug(f"Handle {kappa}: branch points {b1:.6g}, {b2:.6g}, t={t:.12g}")
    return HandleModulus(tuple(kappa), center, (b1, b2), complex(t), orientation, samples)


def willmore_from_handles(handles: Sequence[HandleModulus], lat: Lattice, threshold: float = 1e-8) -> complex:
    """4 * vol * sum of t(kappa) over handles with |t| above threshold."""
    return 4 * lat.vol * sum((h.t_value for h in handles if abs(h.t_value) > threshold), 0j)


def willmore_pairing(pot: FourierPotential, lat: Lattice) -> complex:
    """4 * int V W = 4 * vol * sum_kappa V(kappa) W(-kappa)."""
    total = sum((c * pot.coeffs_W.get((-n[0], -n[1]), 0j) for n, c in pot.coeffs_V.items()), 0j)
    return 4 * lat.vol * complex(total)


@dataclass
class ResidueFit:
    """Fit of k2 - i k1 = -i c/k1 + d2/k1^2 + d3/k1^3 + d4/k1^4 on the infinity+ sheet."""
    w_value: complex
    c: complex
    coefficients: np.ndarray
    residual: float
    k1: np.ndarray
    k2: np.ndarray


def willmore_residue_fit(pot: FourierPotential, lat: Lattice, K: Cutoff,
                         fit_range: Optional[Tuple[float, float]] = None, samples: int = 16,
                         offset: float = 0.25) -> ResidueFit:
    """Willmore energy 8 pi^2 vol c from the 1/k1 coefficient of k2 at infinity+.

    The sheet is followed along x-p = s + i*offset, s in fit_range (default
    [K/2, 3K/4]); the offset keeps the samples between the double points of
    the free curve, which sit on the half-integer grid.

    Raises:
        ResidueFitError: if the least squares residual exceeds 1e-4
    """
    K1, K2 = normalize_cutoff(K)
    Kmin = min(K1, K2)
    lo, hi = fit_range if fit_range is not None else (Kmin / 2, 3 * Kmin / 4)
    kh, kc = lat.kappa_hat, lat.kappa_check
    # free Q = 0 line k2 = i k1 in slice coordinates
    ratio = (1j * kh[0] - kh[1]) / (kc[1] - 1j * kc[0])
    xps = np.linspace(lo, hi, samples) + 1j * offset
    k1s, k2s = [], []
    for xp in xps:
        values = slice_values(pot, lat, xp, K)
        yp, _, _ = _nearest_two(values, xp * ratio)
        k = lat.from_quasi_momenta(xp, yp)
        k1s.append(k[0])
        k2s.append(k[1])
    k1 = np.array(k1s)
    k2 = np.array(k2s)
    design = np.stack([-1j / k1, k1 ** -2, k1 ** -3, k1 ** -4], axis=1)
    rhs = k2 - 1j * k1
    coeffs, _, _, _ = np.linalg.lstsq(design, rhs, rcond=None)
    residual = float(np.linalg.norm(design @ coeffs - rhs) / math.sqrt(samples))
    if residual > RESIDUE_GATE:
        raise ResidueFitError(f"residue fit residual {residual:.3e} above {RESIDUE_GATE}; "
                              "widen the range or raise the cutoff")
    c = complex(coeffs[0])
    w = 8 * math.pi ** 2 * lat.vol * c
    logger.debug(f"Residue fit c={c:.12g}, W={w:.12g}, residual={residual:.2e}")
    return ResidueFit(w, c, coeffs, residual, k1, k2)


def analytic_single_mode_curve(u: complex, kappa: Index, lat: Lattice, k, window: int = 2) -> complex:
    """pi^2 g(k + k+_kappa + kappa', same) - u*conj(u) of least modulus over |kappa'| <= window.

    Vanishes exactly on the Fermi curve of (u psi_kappa, conj(u) psi_-kappa).
    """
    k = np.asarray(k, dtype=complex)
    _, k_plus = free_double_points(lat.dual_vector(*kappa))
    best = None
    for n1 in range(-window, window + 1):
        for n2 in range(-window, window + 1):
            v = k + k_plus + lat.dual_vector(n1, n2)
            value = math.pi ** 2 * complex(g(v, v)) - abs(u) ** 2
            if best is None or abs(value) < abs(best):
                best = value
    return complex(best)


@dataclass
class SingularPoint:
    """One sheet through the half period point."""
    mode: Index
    slope: complex


@dataclass
class Orbit:
    kind: str
    points: List[int]


@dataclass
class WeakSingularityReport:
    half_period: HalfPeriodClass
    on_curve: bool
    multiplicity: int
    points: List[SingularPoint] = field(default_factory=list)
    orbits: List[Orbit] = field(default_factory=list)
    pencil_slopes: List[complex] = field(default_factory=list)
    cusps: int = 0

    @property
    def orbit_types(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for orbit in self.orbits:
            counts[orbit.kind] = counts.get(orbit.kind, 0) + 1
        return counts


def _pencil_slopes(pot, lat, K, xp0: complex, yp0: complex, tol: float) -> Tuple[List[complex], int]:
    """Slopes dy-p/dx-p from the kernel pencil and the number of cusp directions."""
    K = normalize_cutoff(K)
    A, pc, qc, modes = _slope_matrices(pot, lat, xp0, K)
    M = len(modes)
    B = np.zeros_like(A)
    dX = np.zeros_like(A)
    idx = np.arange(M)
    B[2 * idx, 2 * idx + 1] = pc
    B[2 * idx + 1, 2 * idx] = -qc
    dX[2 * idx, 2 * idx + 1] = p_symbol(lat.kappa_hat)
    dX[2 * idx + 1, 2 * idx] = -q_symbol(lat.kappa_hat)
    D = A + yp0 * B
    u, s, vh = scipy.linalg.svd(D)
    null = s / s[0] < tol
    if not np.any(null):
        return [], 0
    Psi = vh[null].conj().T
    Phi = u[:, null]
    By = Phi.conj().T @ B @ Psi
    Bx = Phi.conj().T @ dX @ Psi
    scale = max(np.linalg.norm(By), np.linalg.norm(Bx), 1e-300)
    stacked_s = scipy.linalg.svdvals(np.vstack([Bx, By]) / scale)
    cusps = int(np.sum(stacked_s < 1e-6))
    if cusps:
        return [], cusps
    slopes = scipy.linalg.eigvals(-np.linalg.solve(By, Bx))
    return sorted((complex(z) for z in slopes), key=lambda z: (round(z.real, 9), round(z.imag, 9))), 0


def _classify_orbits(points: List[SingularPoint], m: Index, conj_flips_modes: bool, tol: float) -> List[Orbit]:
    """Group sheets into orbits of sigma (k -> -k) and the antiholomorphic involution.

    sigma sends the sheet through mode n to the sheet through mode -m-n with
    the same slope; the antiholomorphic involution conjugates the slope (and,
    for eta, also flips the mode).
    """
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def partner(i, target_mode, target_slope):
        candidates = [j for j in range(n)
                      if points[j].mode == target_mode and abs(points[j].slope - target_slope) < tol]
        if i in candidates:
            return i
        return candidates[0] if candidates else None

    sigma_fixed, conj_fixed = [False] * n, [False] * n
    for i, p in enumerate(points):
        flipped = (-m[0] - p.mode[0], -m[1] - p.mode[1])
        j = partner(i, flipped, p.slope)
        if j is not None:
            sigma_fixed[i] = j == i
            parent[find(i)] = find(j)
        target = flipped if conj_flips_modes else p.mode
        j = partner(i, target, p.slope.conjugate())
        if j is not None:
            conj_fixed[i] = j == i
            parent[find(i)] = find(j)

    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    orbits = []
    for members in groups.values():
        if len(members) == 2 and all(conj_fixed[i] for i in members):
            kind = "type1"
        elif len(members) == 2 and all(sigma_fixed[i] for i in members):
            kind = "type2"
        elif len(members) == 4 and not any(sigma_fixed[i] or conj_fixed[i] for i in members):
            kind = "type3"
        else:
            kind = "other"
        orbits.append(Orbit(kind, sorted(members)))
    orbits.sort(key=lambda o: o.points)
    return orbits


def weak_singularity_report(pot: FourierPotential, lat: Lattice, c: HalfPeriodClass, K: Cutoff,
                            tol: float = 1e-6, h: float = 1e-5) -> WeakSingularityReport:
    """Sheets of the curve through [kappa/2] with their slopes and orbit decomposition.

    The point is x-p = r1/2, y-p = r2/2. Slopes per sheet come from central
    differences over x-p +- h; the pencil slopes and cusp count come from the
    kernel of D at the point.

    Raises:
        PotentialSymmetryError: for general pairs
        EigenvalueCollisionError: if eigenvalues sit in the band between tol and 100*tol
    """
    if pot.symmetry not in ("sigma_real", "eta_pair"):
        raise PotentialSymmetryError("the orbit taxonomy needs a sigma_real or eta_pair potential")
    xp0, yp0 = c.r1 / 2, c.r2 / 2
    values = slice_values(pot, lat, xp0, K)
    dist = np.abs(values - yp0)
    if np.any((dist >= tol) & (dist < 100 * tol)):
        raise EigenvalueCollisionError(f"ambiguous multiplicity at [{c.label()}/2]", location=complex(xp0))
    multiplicity = int(np.sum(dist < tol))
    report = WeakSingularityReport(c, multiplicity > 0, multiplicity)
    if not multiplicity:
        return report

    radius = 1e3 * h
    near = {}
    for sign in (1, -1):
        pts = [p for p in fermi_slice(pot, lat, xp0 + sign * h, K) if abs(p.yp - yp0) < radius]
        near[sign] = pts
    plus, minus = near[1], near[-1]
    if len(plus) == multiplicity and len(minus) == multiplicity:
        cost = np.abs(np.array([[(a.yp - yp0) + (b.yp - yp0) for b in minus] for a in plus]))
        rows, cols = linear_sum_assignment(cost)
        for i, j in zip(rows, cols):
            slope = (plus[i].yp - minus[j].yp) / (2 * h)
            report.points.append(SingularPoint(plus[i].tag, complex(slope)))
        report.points.sort(key=lambda p: (p.mode, round(p.slope.real, 6), round(p.slope.imag, 6)))
        report.orbits = _classify_orbits(report.points, (c.r1, c.r2), pot.symmetry == "eta_pair", 1e-4)
    else:
        logger.warning(f"Sheets through [{c.label()}/2] do not separate linearly; slopes omitted")

    report.pencil_slopes, report.cusps = _pencil_slopes(pot, lat, K, xp0, yp0, 1e-8)
    logger.debug(f"Half period {c.label()}: multiplicity {multiplicity}, orbits {report.orbit_types}")
    return report
