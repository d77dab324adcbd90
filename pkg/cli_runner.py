import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from acceptance_checks import CRITERIA
from backlund import DEFAULT_GRID, GridSpinor, backlund_potential, invariance_check
from custom_logger import CustomLogger
from dirac_bloch import FourierPotential, fermi_slice, kernel_at, normalize_cutoff, slice_values
from display_data import DisplayData, display_verify_report
from errors import ConfigError, FermiLabError
from fermi_curve import (handle_modulus, trace_branch, willmore_from_handles, willmore_pairing,
                         willmore_residue_fit)
from file_operations import FileOperations, RunConfig, load_config
from lattice_moduli import HalfPeriodClass, classify_sublattice_case, reduce_to_fundamental, square_lattice
from min_family import wbound_of_tau
from sing_ledger import render_table
from statistics_tracker import StatisticsTracker
from weierstrass_rep import (conformality_residual, immersion_from_spinor, solve_periodicity_combination,
                             willmore_quadrature)

logger = CustomLogger(__name__)

THREADS_ENV = 'FERMILAB_THREADS'


def parse_complex(text: str) -> complex:
    """Accept '5+0.3i', '3.3i', '-0.5' or '1+2j'."""
    cleaned = text.strip().replace(' ', '').replace('i', 'j')
    if cleaned.endswith('j') and cleaned[:-1] in ('', '+', '-'):
        cleaned = cleaned[:-1] + '1j'
    try:
        return complex(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def parse_pair(text: str) -> Tuple[complex, complex]:
    parts = text.split(',')
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma separated values, got {text!r}")
    return parse_complex(parts[0]), parse_complex(parts[1])


def parse_modes(text: str) -> List[Tuple[int, int]]:
    """'1,0;0,1' -> [(1, 0), (0, 1)]."""
    modes = []
    for chunk in text.split(';'):
        a, b = chunk.split(',')
        modes.append((int(a), int(b)))
    return modes


def format_complex(z: complex, digits: int = 6) -> str:
    re = 0.0 if abs(z.real) < 0.5 * 10 ** -digits else z.real
    if abs(z.imag) < 0.5 * 10 ** -digits:
        return f"{re:.{digits}f}"
    if re == 0.0:
        return f"{z.imag:.{digits}f}i"
    return f"{re:.{digits}f}{z.imag:+.{digits}f}i"


def max_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return min(8, os.cpu_count() or 1)
    try:
        return max(1, int(value))
    except ValueError:
        raise ConfigError([f"{THREADS_ENV}: expected an integer, got {value!r}"])


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON run configuration')
    common.add_argument('--out', default='results', help='Directory for CSV and mesh artifacts (default: results)')
    common.add_argument('--cutoff', type=int, help='Fourier cutoff K, overrides the config')
    common.add_argument('--seed', type=int, help='Seed for randomized steps, overrides the config')
    common.add_argument('--tol', type=float, help='Tolerance, overrides the config')
    common.add_argument('--debug', action='store_true', help='Enable debug logging')
    common.add_argument('--stats', action='store_true', help='Show per-phase timing')

    parser = argparse.ArgumentParser(description='Fermi curves of periodic Dirac operators and their Willmore energy')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('fermi-slice', parents=[common], help='Fermi curve points over one x-p value')
    p.add_argument('--xp', type=parse_complex, required=True, help='x-p value, e.g. 0.3+0.1i')

    p = sub.add_parser('fermi-trace', parents=[common], help='Follow one sheet along a straight x-p path')
    p.add_argument('--start', type=parse_complex, required=True)
    p.add_argument('--end', type=parse_complex, required=True)
    p.add_argument('--samples', type=int, default=64)
    p.add_argument('--seed-yp', type=parse_complex, help='y-p near which the branch starts (default i*start)')

    p = sub.add_parser('handles', parents=[common], help='Handle moduli t(kappa)')
    p.add_argument('--kappa', type=parse_modes, default=[(1, 0)], help="modes as '1,0;0,1'")
    p.add_argument('--samples', type=int, default=256)

    p = sub.add_parser('willmore', parents=[common], help='First integral by independent methods')
    p.add_argument('--methods', default='pairing,residue', help='comma list of pairing, residue, handles')
    p.add_argument('--kappa', type=parse_modes, default=None, help='handle modes for the handles method')

    p = sub.add_parser('minbound', parents=[common], help='Per class minimal energies over conformal classes')
    p.add_argument('--tau', type=parse_complex, action='append', help='tau in the fundamental domain (repeatable)')

    p = sub.add_parser('singtable', parents=[common], help='Singularity sets and their energies')
    p.add_argument('--max', type=int, default=5, dest='max_multiplier', help='largest multiple of 4 pi')

    p = sub.add_parser('tau', parents=[common], help='Modular reduction and sublattice cases')
    p.add_argument('action', choices=['reduce', 'sublattice'])
    p.add_argument('--tau', type=parse_complex, required=True)

    p = sub.add_parser('backlund', parents=[common], help='Baecklund transform by a kernel spinor')
    p.add_argument('--k', type=parse_pair, required=True, help='quasi momentum k1,k2 on the Fermi curve')
    p.add_argument('--grid', type=int, default=None)
    p.add_argument('--slices', type=parse_complex, nargs='*', default=[0.1 + 0.05j, 0.37 - 0.2j])

    p = sub.add_parser('immersion', parents=[common], help='Weierstrass immersion from a periodic kernel spinor')
    p.add_argument('--k', type=parse_pair, default=(0.5, 0.5), help='half lattice point k1,k2')
    p.add_argument('--grid', type=int, default=None)

    sub.add_parser('verify', parents=[common], help='Run the numbered acceptance checks')
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Load the config file (or defaults) and apply flag overrides."""
    if args.config:
        config = load_config(args.config)
    else:
        config = RunConfig(square_lattice(), FourierPotential.zero())
    errors = []
    if args.cutoff is not None:
        if args.cutoff <= 0:
            errors.append("--cutoff: must be positive")
        config.cutoff = args.cutoff
    if args.seed is not None:
        config.seed = args.seed
    if args.tol is not None:
        if args.tol <= 0:
            errors.append("--tol: must be positive")
        config.tolerance = args.tol
    if errors:
        raise ConfigError(errors)
    return config


def cutoff_for(config: RunConfig) -> Tuple[int, int]:
    """The configured cutoff per direction, raised to the potential support when needed."""
    K = normalize_cutoff(config.cutoff)
    support = config.potential.support
    raised = (max(K[0], support[0]), max(K[1], support[1]))
    if raised != K:
        logger.warning(f"Cutoff {K} is below the potential support {support}; using {raised}")
    return raised


def cmd_fermi_slice(args, config: RunConfig, out: Path) -> int:
    points = fermi_slice(config.potential, config.lattice, args.xp, cutoff_for(config))
    rows = [{"xp": complex(args.xp), "yp": p.yp, "n1": p.tag[0], "n2": p.tag[1]} for p in points]
    FileOperations(out / 'fermi_slice.csv').write_table(rows, ["xp", "yp", "n1", "n2"])
    DisplayData(rows).display_table(f"Fermi slice at x-p = {format_complex(args.xp)}")
    return 0


def cmd_fermi_trace(args, config: RunConfig, out: Path) -> int:
    K = cutoff_for(config)
    path = np.linspace(args.start, args.end, args.samples)
    start = slice_values(config.potential, config.lattice, path[0], K)
    target = args.seed_yp if args.seed_yp is not None else 1j * path[0]
    seed_yp = start[np.argmin(np.abs(start - target))]
    branch = trace_branch(config.potential, config.lattice, path, seed_yp, K)
    rows = [{"xp": complex(x), "yp": complex(y), "match": float(d), "runner_up": float(r)}
            for x, y, d, r in zip(branch.xp, branch.yp, branch.match_distance, branch.runner_up)]
    FileOperations(out / 'fermi_trace.csv').write_table(rows, ["xp", "yp", "match", "runner_up"])
    print(f"Traced {len(rows)} points, closed: {branch.closed}, endpoint mismatch {branch.endpoint_mismatch:.3e}")
    return 0


def _handles(config: RunConfig, modes: List[Tuple[int, int]], samples: int = 256):
    K = cutoff_for(config)
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        futures = [pool.submit(handle_modulus, config.potential, config.lattice, kappa, K, samples)
                   for kappa in modes]
        return [f.result() for f in futures]


def cmd_handles(args, config: RunConfig, out: Path) -> int:
    handles = _handles(config, args.kappa, args.samples)
    rows = [{"n1": h.kappa[0], "n2": h.kappa[1], "t": h.t_value, "orientation": h.orientation}
            for h in handles]
    FileOperations(out / 'handles.csv').write_table(rows, ["n1", "n2", "t", "orientation"])
    DisplayData(rows).display_table("Handle moduli")
    print(f"4 vol sum t = {format_complex(willmore_from_handles(handles, config.lattice), 12)}")
    return 0


def cmd_willmore(args, config: RunConfig, out: Path) -> int:
    methods = [m.strip() for m in args.methods.split(',') if m.strip()]
    unknown = sorted(set(methods) - {"pairing", "residue", "handles"})
    if unknown:
        raise ConfigError([f"--methods: unknown method {m!r}" for m in unknown])
    rows = []
    for method in methods:
        if method == "pairing":
            value = willmore_pairing(config.potential, config.lattice)
        elif method == "residue":
            value = willmore_residue_fit(config.potential, config.lattice, cutoff_for(config)).w_value
        else:
            modes = args.kappa or sorted(set(config.potential.coeffs_V) - {(0, 0)})
            value = willmore_from_handles(_handles(config, modes), config.lattice)
        rows.append({"method": method, "W": complex(value)})
        print(f"{method}: {format_complex(value, 10)}")
    FileOperations(out / 'willmore.csv').write_table(rows, ["method", "W"])
    return 0


def cmd_minbound(args, config: RunConfig, out: Path) -> int:
    taus = args.tau or [1j]
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        points = list(pool.map(wbound_of_tau, taus))
    rows = []
    for tau, point in zip(taus, points):
        for label, bound in point.classes.items():
            rows.append({"tau": complex(tau), "class": label, "case": bound.case_id,
                         "tau_prime": bound.tau_prime, "genus": bound.genus, "W": bound.w,
                         "upper_bound_only": bound.upper_bound_only, "w_min": point.w_min})
    FileOperations(out / 'minbound.csv').write_table(
        rows, ["tau", "class", "case", "tau_prime", "genus", "W", "upper_bound_only", "w_min"])
    DisplayData(rows).display_table("Minimal energies per half period class")
    return 0


def cmd_singtable(args, config: RunConfig, out: Path) -> int:
    rows = render_table(args.max_multiplier)
    FileOperations(out / 'singtable.csv').write_table(rows)
    DisplayData(rows).display_table("Local Willmore contributions")
    return 0


def cmd_tau(args, config: RunConfig, out: Path) -> int:
    if args.action == 'reduce':
        reduced, word = reduce_to_fundamental(args.tau)
        print(format_complex(reduced))
        print(f"word: {word}")
        return 0
    rows = []
    for c in HalfPeriodClass.nonzero():
        case = classify_sublattice_case(args.tau, c)
        rows.append({"class": c.label(), "case": case.case_id, "tau_prime": format_complex(case.tau_prime),
                     "curve": case.curve.label(), "genus": case.genus})
    DisplayData(rows).display_table(f"Sublattice cases at tau = {format_complex(args.tau)}")
    return 0


def cmd_backlund(args, config: RunConfig, out: Path) -> int:
    K = cutoff_for(config)
    kernel = kernel_at(config.potential, config.lattice, np.array(args.k, dtype=complex), K)
    if not kernel:
        raise FermiLabError(f"k={args.k} is not on the Fermi curve at cutoff {K}")
    n = args.grid or max(DEFAULT_GRID, 4 * max(K) + 4)
    chi = GridSpinor.from_kernel(kernel[0], n)
    result = backlund_potential(config.potential, chi, K)
    rows = [{"n1": key[0], "n2": key[1], "U": value} for key, value in sorted(result.potential.coeffs_V.items())]
    FileOperations(out / 'backlund_potential.csv').write_table(rows, ["n1", "n2", "U"])
    report = invariance_check(config.potential, result.potential, config.lattice, args.slices, K)
    print(f"Transformed potential with {len(rows)} modes, tail {result.tail_mass:.3e}, margin {result.margin:.3e}")
    print(f"Slice invariance: max distance {report.max_distance:.3e} ({'PASS' if report.passed else 'FAIL'})")
    return 0 if report.passed else 1


def cmd_immersion(args, config: RunConfig, out: Path) -> int:
    K = cutoff_for(config)
    kernel = kernel_at(config.potential, config.lattice, np.array(args.k, dtype=complex), K)
    solution = solve_periodicity_combination(kernel, seed=config.seed)
    grid = immersion_from_spinor(solution.spinor, args.grid or 2 * config.grid)
    FileOperations(out / 'immersion.txt').write_mesh(grid.points)
    energy = willmore_quadrature(grid)
    print(f"Kernel dimension {len(kernel)}, solution family dimension {solution.family_dimension}")
    print(f"Periodicity residuals {max(abs(v) for v in solution.integrals):.3e}")
    print(f"Conformality residual {conformality_residual(grid):.3e}")
    l2 = willmore_pairing(config.potential, config.lattice).real
    print(f"Integral of H^2 dmu = {energy:.10g}, 4 |U|^2 = {l2:.10g}")
    return 0


def cmd_verify(args, config: RunConfig, out: Path, stats: StatisticsTracker) -> int:
    results = []
    for name, check in CRITERIA:
        stats.start_phase(name)
        logger.info(f"Running check {name}")
        try:
            passed, detail = check(seed=config.seed)
        except FermiLabError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        seconds = stats.stop_phase(name)
        results.append({"criterion": name, "passed": bool(passed), "detail": detail, "seconds": seconds})
    display_verify_report(results)
    FileOperations(out / 'verify.csv').write_table(results, ["criterion", "passed", "seconds", "detail"])
    return 0 if all(r["passed"] for r in results) else 1


COMMANDS = {
    'fermi-slice': cmd_fermi_slice,
    'fermi-trace': cmd_fermi_trace,
    'handles': cmd_handles,
    'willmore': cmd_willmore,
    'minbound': cmd_minbound,
    'singtable': cmd_singtable,
    'tau': cmd_tau,
    'backlund': cmd_backlund,
    'immersion': cmd_immersion,
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Dispatch one subcommand; returns the exit code."""
    args = parse_arguments(argv)
    if args.debug:
        logger.set_level('DEBUG')
    stats = StatisticsTracker()
    try:
        config = build_config(args)
        out = Path(args.out)
        stats.start_phase(args.command)
        if args.command == 'verify':
            code = cmd_verify(args, config, out, stats)
        else:
            code = COMMANDS[args.command](args, config, out)
        stats.stop_phase(args.command)
        if args.stats:
            print("\nPhase statistics:")
            print(json.dumps(stats.get_final_stats(), indent=4))
        return code
    except (FermiLabError, FileNotFoundError, PermissionError) as e:
        error_trace = traceback.format_exc()
        logger.error(f"Error occurred:\n{error_trace}\nError message: {str(e)}")
        record = e.record() if isinstance(e, FermiLabError) else {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    except Exception as e:
        error_trace = traceback.format_exc()
        logger.error(f"Error occurred:\n{error_trace}\nError message: {str(e)}")
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, sort_keys=True), file=sys.stderr)
        return 1


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
