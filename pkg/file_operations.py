import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dirac_bloch import FourierPotential, clifford_potential
from errors import ConfigError, FermiLabError
from lattice_moduli import Lattice, make_lattice

TOP_LEVEL_KEYS = {"lattice", "potential", "cutoff", "grid", "tolerance", "seed", "commands"}
POTENTIAL_KEYS = {"symmetry", "V", "W", "max_mode"}
SYMMETRY_NAMES = {"general_pair", "eta_pair", "sigma_real", "clifford"}
COMMAND_NAMES = {"fermi-slice", "fermi-trace", "handles", "willmore", "minbound", "singtable",
                 "tau", "backlund", "immersion", "verify"}


class FileOperations:
    """Class to handle all file-related operations: config input and artifact output."""

    def __init__(self, filename: str):
        """Initialize FileOperations with a filename.

        Args:
            filename (str): Path to the file to be processed
        """
        self.filename = Path(filename)

    def read_file(self) -> str:
        """Read the whole file.

        Raises:
            FileNotFoundError: If the specified file doesn't exist
            PermissionError: If the program lacks permission to read the file
        """
        try:
            with self.filename.open('r') as file:
                return file.read()
        except FileNotFoundError:
            raise FileNotFoundError(f"The file {self.filename} was not found")
        except PermissionError:
            raise PermissionError(f"Permission denied when trying to read {self.filename}")

    def read_json(self) -> Dict[str, Any]:
        """Parse the file as JSON.

        Raises:
            ConfigError: If the file is not well-formed JSON
        """
        try:
            return json.loads(self.read_file())
        except json.JSONDecodeError as e:
            raise ConfigError([f"{self.filename}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}"])

    def write_json(self, data: Dict[str, Any]) -> None:
        """Write data as indented JSON with sorted keys."""
        self.filename.parent.mkdir(parents=True, exist_ok=True)
        with self.filename.open('w', newline='\n') as f:
            json.dump(data, f, indent=4, sort_keys=True, default=_json_default)
            f.write('\n')

    def write_table(self, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> None:
        """Write rows as CSV with a header.

        Numbers use '%.12g'; a complex cell 'name' becomes the two columns
        'name_re' and 'name_im'. Empty rows give a header-only file when
        columns are known.
        """
        if columns is None:
            columns = list(rows[0].keys()) if rows else []
        header = []
        for name in columns:
            sample = next((row[name] for row in rows if name in row), None)
            if _is_complex(sample):
                header.extend([f"{name}_re", f"{name}_im"])
            else:
                header.append(name)
        self.filename.parent.mkdir(parents=True, exist_ok=True)
        with self.filename.open('w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                cells = []
                for name in columns:
                    value = row.get(name, "")
                    if f"{name}_re" in header:
                        value = complex(value) if value != "" else complex("nan")
                        cells.extend([_format_number(value.real), _format_number(value.imag)])
                    else:
                        cells.append(_format_cell(value))
                writer.writerow(cells)

    def write_mesh(self, points: np.ndarray) -> None:
        """One 'x y z' line per grid node, row-major."""
        self.filename.parent.mkdir(parents=True, exist_ok=True)
        rows = np.asarray(points, dtype=float).reshape(-1, 3)
        with self.filename.open('w', newline='\n') as f:
            for x, y, z in rows:
                f.write(f"{x:.12g} {y:.12g} {z:.12g}\n")


def _is_complex(value: Any) -> bool:
    return isinstance(value, (complex, np.complexfloating))


def _format_number(value: float) -> str:
    return '%.12g' % value


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, float, np.integer, np.floating)):
        return _format_number(float(value)) if isinstance(value, (float, np.floating)) else str(int(value))
    return str(value)


def _json_default(value: Any):
    if _is_complex(value):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


@dataclass
class RunConfig:
    """Validated run configuration."""
    lattice: Lattice
    potential: FourierPotential
    cutoff: Union[int, Tuple[int, int]] = 4
    grid: int = 64
    tolerance: float = 1e-8
    seed: int = 0
    commands: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def command(self, name: str) -> Dict[str, Any]:
        return self.commands.get(name, {})


def _parse_coefficients(entries: Any, path: str, errors: List[str]) -> Dict:
    coeffs = {}
    if not isinstance(entries, list):
        errors.append(f"{path}: expected a list of [n1, n2, re, im]")
        return coeffs
    for i, entry in enumerate(entries):
        where = f"{path}[{i}]"
        if (not isinstance(entry, list) or len(entry) != 4
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
            errors.append(f"{where}: expected [n1, n2, re, im]")
            continue
        n1, n2, re, im = entry
        if int(n1) != n1 or int(n2) != n2:
            errors.append(f"{where}: mode indices must be integers")
            continue
        key = (int(n1), int(n2))
        if key in coeffs:
            errors.append(f"{where}: duplicate coefficient index {key}")
            continue
        coeffs[key] = complex(re, im)
    return coeffs


def _parse_potential(raw: Any, errors: List[str]) -> Optional[FourierPotential]:
    if not isinstance(raw, dict):
        errors.append("potential: expected an object")
        return None
    for key in sorted(set(raw) - POTENTIAL_KEYS):
        errors.append(f"potential.{key}: unknown key")
    symmetry = raw.get("symmetry", "eta_pair")
    if symmetry not in SYMMETRY_NAMES:
        errors.append(f"potential.symmetry: expected one of {sorted(SYMMETRY_NAMES)}, got {symmetry!r}")
        return None
    if symmetry == "clifford":
        max_mode = raw.get("max_mode", 24)
        if not isinstance(max_mode, int) or max_mode < 1:
            errors.append("potential.max_mode: expected a positive integer")
            return None
        return clifford_potential(max_mode)
    V = _parse_coefficients(raw.get("V", []), "potential.V", errors)
    if symmetry == "general_pair":
        W = _parse_coefficients(raw.get("W", []), "potential.W", errors)
    elif "W" in raw:
        errors.append(f"potential.W: only allowed with symmetry general_pair")
        return None
    try:
        if symmetry == "general_pair":
            return FourierPotential.general(V, W)
        if symmetry == "sigma_real":
            return FourierPotential.sigma_real(V)
        return FourierPotential.eta_pair(V)
    except FermiLabError as e:
        errors.append(f"potential: {e}")
        return None


def _parse_cutoff(raw: Any, errors: List[str]) -> Optional[Union[int, Tuple[int, int]]]:
    """A positive integer K or a pair [K1, K2]."""
    entries = raw if isinstance(raw, list) else [raw]
    if ((isinstance(raw, list) and len(entries) != 2)
            or not all(isinstance(c, int) and not isinstance(c, bool) for c in entries)):
        errors.append(f"cutoff: expected a positive integer or [K1, K2], got {raw!r}")
        return None
    if any(c <= 0 for c in entries):
        errors.append("cutoff: must be positive")
        return None
    return (entries[0], entries[1]) if isinstance(raw, list) else raw


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON run configuration.

    Raises:
        FileNotFoundError: If the file is missing
        ConfigError: With every problem found, each prefixed by its field path
    """
    raw = FileOperations(path).read_json()
    errors: List[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected an object"])
    for key in sorted(set(raw) - TOP_LEVEL_KEYS):
        errors.append(f"{key}: unknown key")

    lattice = None
    gens = raw.get("lattice", [[1.0, 0.0], [0.0, 1.0]])
    if (isinstance(gens, list) and len(gens) == 2
            and all(isinstance(g, list) and len(g) == 2 for g in gens)):
        try:
            lattice = make_lattice(gens[0], gens[1])
        except (FermiLabError, TypeError, ValueError) as e:
            errors.append(f"lattice: {e}")
    else:
        errors.append("lattice: expected [[g1x, g1y], [g2x, g2y]]")

    potential = _parse_potential(raw.get("potential", {"symmetry": "sigma_real"}), errors)

    values = {}
    cutoff = _parse_cutoff(raw.get("cutoff", 4), errors)
    if cutoff is not None:
        values["cutoff"] = cutoff
    for key, default, kind in (("grid", 64, int), ("seed", 0, int), ("tolerance", 1e-8, float)):
        value = raw.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or (kind is int and int(value) != value):
            errors.append(f"{key}: expected {kind.__name__}, got {value!r}")
            continue
        values[key] = kind(value)
    for key in ("grid", "tolerance"):
        if key in values and values[key] <= 0:
            errors.append(f"{key}: must be positive")
    if values.get("seed", 0) < 0:
        errors.append("seed: must be non-negative")

    commands = raw.get("commands", {})
    if not isinstance(commands, dict):
        errors.append("commands: expected an object")
        commands = {}
    for name, params in sorted(commands.items()):
        if name not in COMMAND_NAMES:
            errors.append(f"commands.{name}: unknown command")
        elif not isinstance(params, dict):
            errors.append(f"commands.{name}: expected an object")
        else:
            for key, value in params.items():
                if key.endswith("tol") and isinstance(value, (int, float)) and value <= 0:
                    errors.append(f"commands.{name}.{key}: tolerances must be positive")

    if errors:
        raise ConfigError(errors)
    return RunConfig(lattice, potential, values["cutoff"], values["grid"], values["tolerance"],
                     values["seed"], dict(commands))
