"""Numbered end-to-end checks run by the `verify` command.

Each check returns (passed, detail) and never raises for a numerical
mismatch; domain errors propagate to the caller.
"""
import cmath
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from backlund import GridSpinor, backlund_potential, invariance_check
from custom_logger import CustomLogger
from dirac_bloch import (FourierPotential, clifford_potential, kernel_at, p_symbol, slice_values)
from elliptic_core import (ThetaParams, cubic_residual, elliptic_from_periods, legendre_residual,
                           theta_delta_eval)
from fermi_curve import (analytic_single_mode_curve, handle_modulus, trace_branch, willmore_from_handles,
                         willmore_pairing, willmore_residue_fit)
from lattice_moduli import (HalfPeriodClass, LETTER_MATRICES, Lattice, apply_word, g, half_period_point,
                            half_period_sublattice, in_fundamental_domain, make_lattice, reduce_to_fundamental,
                            square_lattice, tau_sublattice_map, word_from_letters)
from min_family import (disconnected_curve_functions, genus0_min_curve, genus1_closed_form_w, genus1_data,
                        monotone_sweep, wbound_of_tau, _family_raw)
from sing_ledger import blowup_polynomials, enumerate_sets, render_table
from weierstrass_rep import (conformality_residual, immersion_from_spinor, solve_periodicity_combination,
                             willmore_quadrature)

logger = CustomLogger(__name__)

Result = Tuple[bool, str]

SINGULARITY_TABLE = [
    {"W_sing": "4pi", "m=1": "-1,0", "m=2": ""},
    {"W_sing": "8pi", "m=1": "-1,1  -2,0", "m=2": ""},
    {"W_sing": "12pi", "m=1": "-1,2  -2,1  -3,0", "m=2": ""},
    {"W_sing": "16pi", "m=1": "-1,3  -2,2  -3,1  -4,0", "m=2": "-2,-1,0,1"},
    {"W_sing": "20pi", "m=1": "-1,4  -2,3  -3,2  -4,1  -5,0", "m=2": "-2,-1,0,2  -3,-1,0,1"},
]


def _matched_distance(first: np.ndarray, second: np.ndarray) -> float:
    if len(first) != len(second):
        return math.inf
    cost = np.abs(first[:, None] - second[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if len(rows) else 0.0


def check_free_curve(seed: int = 0, K: int = 4) -> Result:
    """Zero potential slices lie on y-p = -n2 +- i(x-p + n1)."""
    rng = np.random.default_rng(seed)
    lat = square_lattice()
    pot = FourierPotential.zero()
    worst = 0.0
    window = range(-K, K + 1)
    for _ in range(50):
        xp = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        for y in slice_values(pot, lat, xp, K):
            best = min(abs(y - (-n2 + sign * 1j * (xp + n1)))
                       for n1 in window for n2 in window for sign in (1, -1))
            worst = max(worst, best)
    return worst < 1e-10, f"max distance to the free lines {worst:.2e}"


def check_constant_curve(seed: int = 0, K: int = 4) -> Result:
    """Traced and sliced points of constant potentials satisfy pi^2 g(k+kappa', k+kappa') = u^2."""
    rng = np.random.default_rng(seed)
    lat = square_lattice()
    worst = 0.0
    for u in (0.3, math.pi / math.sqrt(2)):
        pot = FourierPotential.constant(u)
        points = []
        for _ in range(10):
            xp = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
            points.extend((xp, y) for y in slice_values(pot, lat, xp, K))
        path = 0.3 + 0.2j + np.linspace(0.0, 0.5, 26)
        start = slice_values(pot, lat, path[0], K)
        seed_yp = start[np.argmin(np.abs(start - 1j * path[0]))]
        branch = trace_branch(pot, lat, path, seed_yp, K)
        points.extend(zip(branch.xp, branch.yp))
        for xp, yp in points:
            k = lat.from_quasi_momenta(xp, yp)
            worst = max(worst, abs(analytic_single_mode_curve(u, (0, 0), lat, k, window=K + 1)))
    return worst < 1e-6, f"max curve equation residual {worst:.2e}"


def check_willmore_agreement(seed: int = 0, K: int = 4) -> Result:
    """Pairing, residue fit and handle sum agree to 1%."""
    lat = square_lattice()
    details, passed = [], True
    constant = FourierPotential.constant(math.pi / math.sqrt(2))
    w_pair = willmore_pairing(constant, lat).real
    w_fit = willmore_residue_fit(constant, lat, K).w_value.real
    passed &= abs(w_pair - 2 * math.pi ** 2) < 1e-12
    passed &= abs(w_pair - w_fit) <= 0.01 * w_pair
    details.append(f"constant: pairing {w_pair:.6g}, residue {w_fit:.6g}")

    single = FourierPotential.single_mode(0.1, (1, 0))
    w_pair = willmore_pairing(single, lat).real
    w_fit = willmore_residue_fit(single, lat, K).w_value.real
    w_handle = willmore_from_handles([handle_modulus(single, lat, (1, 0), K)], lat).real
    passed &= abs(w_pair - 0.04) < 1e-12
    passed &= abs(w_pair - w_fit) <= 0.01 * w_pair
    passed &= abs(w_pair - w_handle) <= 0.01 * w_pair
    details.append(f"single mode: pairing {w_pair:.6g}, residue {w_fit:.6g}, handles {w_handle:.6g}")
    return bool(passed), "; ".join(details)


def check_singularity_table(seed: int = 0) -> Result:
    """singtable up to 20 pi and integral blow-up polynomials."""
    rows = render_table(5)
    same = rows == SINGULARITY_TABLE
    bad = []
    for s in enumerate_sets(5):
        poly = blowup_polynomials(s)
        if not poly.integral or poly.p_coeffs[0] != 1 or poly.q_coeffs[0] != 1:
            bad.append(s.label())
    detail = "table matches" if same else f"table differs: {rows}"
    if bad:
        detail += f"; non-integral polynomials for {bad}"
    return same and not bad, detail


def check_elliptic_identities(seed: int = 0) -> Result:
    """Legendre relation, the cubic for wp' and theta_Delta normalization."""
    rng = np.random.default_rng(seed)
    legendre, cubic, theta = 0.0, 0.0, 0.0
    for _ in range(50):
        omega = cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi))
        tau = complex(rng.uniform(-1, 1), rng.uniform(0.5, 3.0))
        data = elliptic_from_periods(omega, omega * tau)
        legendre = max(legendre, legendre_residual(data))
        z = complex(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)) * omega
        cubic = max(cubic, cubic_residual(data, z))
    for _ in range(10):
        lat = make_lattice((1.0, 0.0), (rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.0)))
        params = ThetaParams.from_lattice(lat)
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        shifted = theta_delta_eval(params, z + lat.gen1_complex)
        theta = max(theta, abs(shifted + theta_delta_eval(params, z)))
        h = 1e-6
        theta = max(theta, abs(theta_delta_eval(params, h) / h - 1))
    passed = legendre < 1e-12 and cubic < 1e-10 and theta < 1e-10
    return passed, f"Legendre {legendre:.1e}, cubic {cubic:.1e}, theta {theta:.1e}"


def check_genus1_family(seed: int = 0) -> Result:
    """Monotone decrease of W(t), its limits and the closed form at z1 = omega/2."""
    grid = np.geomspace(0.05, 20.0, 100)
    rows = monotone_sweep(grid)
    w_small, w_large = rows[0][1], rows[-1][1]
    closed = 0.0
    for t in (0.05, 0.07, 0.3, 1.0, 3.0):
        data = genus1_data(t)
        _, w, _ = _family_raw(data, data.omega / 2)
        closed = max(closed, abs(abs(w) - genus1_closed_form_w(data)))
    passed = (abs(w_large - math.pi ** 2) <= 0.02 * math.pi ** 2
              and abs(w_small - 4 * math.pi) <= 0.05 * 4 * math.pi and closed < 1e-9)
    return passed, f"W(0.05)={w_small:.6g}, W(20)={w_large:.6g}, closed form gap {closed:.1e}"


def check_square_bound(seed: int = 0) -> Result:
    """The (1,1) class on the square torus gives 2 pi^2.

    Each class is rebuilt from its sublattice: half the volume, and for (1,1)
    the quadric constant 1/2 so that 2 * 4 pi^2 * vol * c = 2 pi^2.
    """
    lat = square_lattice()
    point = wbound_of_tau(1j)
    w11 = point.classes["(1,1)"].w
    target = 2 * math.pi ** 2
    vol_gap = 0.0
    for c in HalfPeriodClass.nonzero():
        sub = half_period_sublattice(lat, c)
        vol_gap = max(vol_gap, abs(sub.vol - lat.vol / 2))
    quadric = genus0_min_curve(half_period_sublattice(lat, HalfPeriodClass(1, 1)))
    passed = (abs(w11 - target) <= 1e-6 * target and abs(point.w_min - target) <= 1e-6 * target
              and vol_gap < 1e-12 and abs(quadric.constant - 0.5) < 1e-12 and abs(2 * quadric.w - target) < 1e-9)
    return passed, (f"W[(1,1)]={w11:.12g}, w_min={point.w_min:.12g}, volume gap {vol_gap:.1e}, "
                    f"c={quadric.constant:.12g}")


def check_disconnected_curve(seed: int = 0) -> Result:
    """Half period values and 4 pi per sheet."""
    curve = disconnected_curve_functions(square_lattice())
    expected = {"omega": (-0.5, 0.0), "omega'": (0.0, -0.5), "omega+omega'": (-0.5, -0.5)}
    gap = max(abs(curve.half_period_values[key][0] - x) + abs(curve.half_period_values[key][1] - y)
              for key, (x, y) in expected.items())
    passed = gap < 1e-9 and abs(curve.w_per_sheet - 4 * math.pi) < 1e-6
    return passed, f"value gap {gap:.1e}, W per sheet {curve.w_per_sheet:.12g}"


def check_clifford_pipeline(seed: int = 0, n: int = 128) -> Result:
    """Kernel, periodic combination, immersion and energy of the Clifford torus."""
    lat = square_lattice()
    pot = clifford_potential()
    kernel = kernel_at(pot, lat, (0.5, 0.5), (1, 24))
    if len(kernel) != 2:
        return False, f"kernel dimension {len(kernel)}"
    solution = solve_periodicity_combination(kernel, seed=seed)
    grid = immersion_from_spinor(solution.spinor, n)
    conformal = conformality_residual(grid)
    energy = willmore_quadrature(grid)
    l2 = willmore_pairing(pot, lat).real
    target = 2 * math.pi ** 2
    periodic = max(abs(v) for v in solution.integrals)
    passed = (periodic < 1e-10 and conformal < 1e-6 and abs(energy - target) <= 0.01 * target
              and abs(energy - l2) <= 0.01 * l2)
    return passed, (f"periodicity {periodic:.1e}, conformality {conformal:.1e}, "
                    f"W {energy:.6g}, 4|U|^2 {l2:.6g}")


def check_backlund_invariance(seed: int = 0, K: int = 4) -> Result:
    """A constant potential transforms into a phase rotation of itself; 1.1 U does not share its curve."""
    lat = square_lattice()
    u = 1.0
    pot = FourierPotential.constant(u)
    angle = 0.3
    k = (u / math.pi) * np.array([math.cos(angle), math.sin(angle)], dtype=complex)
    a = 1.0
    b = -u * a / p_symbol(k)
    n = 32
    chi = GridSpinor.from_grid(k, lat, np.full((n, n), a, dtype=complex), np.full((n, n), b, dtype=complex))
    result = backlund_potential(pot, chi, K)
    u_new = result.potential.coeffs_V.get((0, 0), 0j)
    slices = [0.1 + 0.05j, 0.37 - 0.2j, -0.25 + 0.3j]
    same = invariance_check(pot, result.potential, lat, slices, K)
    control = invariance_check(pot, pot.scaled(1.1), lat, slices, K)
    passed = abs(abs(u_new) - abs(u)) < 1e-10 and same.max_distance < 1e-8 and not control.passed
    return passed, (f"|U'|={abs(u_new):.12g}, slice distance {same.max_distance:.1e}, "
                    f"control distance {control.max_distance:.1e}")


def check_modular_arithmetic(seed: int = 0) -> Result:
    """Word round trips, the 3e fixed point and index two sublattices."""
    rng = np.random.default_rng(seed)
    letters = list(LETTER_MATRICES)
    worst = 0.0
    for _ in range(1000):
        while True:
            tau0 = complex(rng.uniform(-0.45, 0.45), rng.uniform(1.05, 3.0))
            if abs(tau0) > 1.05:
                break
        word = word_from_letters([letters[i] for i in rng.integers(0, 3, size=rng.integers(1, 7))])
        tau = apply_word(word, tau0)
        worst = max(worst, abs(tau - word.apply(tau0)) / abs(tau))
        reduced, back = reduce_to_fundamental(tau)
        worst = max(worst, abs(reduced - tau0), abs(back.apply(tau) - reduced))
        if not in_fundamental_domain(reduced):
            worst = math.inf
    fixed = tau_sublattice_map(1j, HalfPeriodClass(1, 1), "3e").tau_prime
    coset = 0.0
    for _ in range(20):
        lat = make_lattice((rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5)),
                           (rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0)))
        for c in HalfPeriodClass.nonzero():
            coset = max(coset, _coset_defect(lat, c))
    passed = worst < 1e-12 and abs(fixed - 1j) < 1e-12 and coset < 1e-9
    return passed, f"round trip {worst:.1e}, 3e fixed point {abs(fixed - 1j):.1e}, coset {coset:.1e}"


def _coset_defect(lat: Lattice, c: HalfPeriodClass, span: int = 3) -> float:
    """Enumerate sub/lat coset representatives and compare with {0, gamma}.

    Points of the superlattice are reduced to lattice coordinates modulo 1;
    an index two superlattice yields exactly two classes, the nontrivial one
    pairs to an integer with kappa = 2 * half_period_point.
    """
    sub = half_period_sublattice(lat, c)
    kappa = 2 * half_period_point(lat, c)
    defect = abs(sub.vol - lat.vol / 2)
    defect += 0.0 if sub.contains(lat.gen1) and sub.contains(lat.gen2) else 1.0
    basis = lat.generators.T
    representatives = {}
    for m1 in range(-span, span + 1):
        for m2 in range(-span, span + 1):
            v = m1 * np.array(sub.gen1) + m2 * np.array(sub.gen2)
            frac = np.mod(np.linalg.solve(basis, v), 1.0)
            halves = np.round(2 * frac)
            defect = max(defect, float(np.max(np.abs(2 * frac - halves))))
            key = (int(halves[0]) % 2, int(halves[1]) % 2)
            representatives.setdefault(key, v)
    if len(representatives) != 2 or (0, 0) not in representatives:
        return 1.0 + defect
    gamma = next(v for key, v in representatives.items() if key != (0, 0))
    value = float(g(kappa, gamma))
    return max(defect, abs(value - round(value)))


def check_involution_symmetries(seed: int = 0, K: int = 4) -> Result:
    """eta and sigma symmetries of slices of bundled potentials."""
    rng = np.random.default_rng(seed)
    lat = square_lattice()
    eta_pot = FourierPotential.single_mode(0.1, (1, 0))
    sigma_pot = clifford_potential(max_mode=3)
    worst = 0.0
    for _ in range(5):
        xp = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
        here = slice_values(eta_pot, lat, xp, K)
        there = slice_values(eta_pot, lat, -xp.conjugate(), K)
        worst = max(worst, _matched_distance(-here.conj(), there))
        here = slice_values(sigma_pot, lat, xp, K)
        there = slice_values(sigma_pot, lat, -xp, K)
        worst = max(worst, _matched_distance(-here, there))
    return worst < 1e-9, f"max symmetry defect {worst:.1e}"


CRITERIA: List[Tuple[str, Callable[..., Result]]] = [
    ("1 free curve", check_free_curve),
    ("2 constant curve", check_constant_curve),
    ("3 Willmore agreement", check_willmore_agreement),
    ("4 singularity table", check_singularity_table),
    ("5 elliptic identities", check_elliptic_identities),
    ("6 genus 1 family", check_genus1_family),
    ("7 square torus bound", check_square_bound),
    ("8 disconnected curve", check_disconnected_curve),
    ("9 Clifford pipeline", check_clifford_pipeline),
    ("10 Baecklund invariance", check_backlund_invariance),
    ("11 modular arithmetic", check_modular_arithmetic),
    ("12 involution symmetries", check_involution_symmetries),
]
