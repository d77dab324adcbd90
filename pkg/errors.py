"""Exception hierarchy for the Fermi curve toolkit.

Every failure a command can report is a FermiLabError; the command line
runner turns these into a one-line JSON error record.
"""
from typing import List, Optional


class FermiLabError(Exception):
    """Root of all domain errors."""

    def record(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class LatticeError(FermiLabError, ValueError):
    """Degenerate or zero lattice generators."""


class ModularDomainError(FermiLabError, ValueError):
    """A modulus outside the upper half plane or outside a case domain."""


class EllipticPoleError(FermiLabError, ValueError):
    """Evaluation requested on (or within the guard radius of) a lattice pole."""


class CutoffError(FermiLabError, ValueError):
    """Fourier cutoff smaller than the potential support."""


class PotentialSymmetryError(FermiLabError, ValueError):
    """Coefficients do not satisfy the declared symmetry flag."""


class NonHalfLatticeError(FermiLabError, ValueError):
    """Quasi-momentum is not a half period of the dual lattice."""


class EigenvalueCollisionError(FermiLabError):
    """Branch continuation could not separate two eigenvalues."""

    def __init__(self, message: str, location: Optional[complex] = None):
        super().__init__(message)
        self.location = location


class HandleNotIsolableError(FermiLabError):
    """A handle cycle could not be separated from neighbouring spectrum."""


class ResidueFitError(FermiLabError):
    """The asymptotic fit at infinity left a residual above the gate."""


class MonotonicityError(FermiLabError):
    """A sweep that must be strictly decreasing was not."""


class RootFindingError(FermiLabError):
    """A root finder failed to converge; the residual is attached."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class SingSetError(FermiLabError, ValueError):
    """Malformed singularity set."""


class NonvanishingError(FermiLabError, ValueError):
    """A generating spinor comes too close to zero on the grid."""


class KernelResidualError(FermiLabError, ValueError):
    """A spinor is not in the operator kernel to the required tolerance."""


class NoWeierstrassSpinorError(FermiLabError):
    """No kernel combination satisfies the periodicity condition."""


class PeriodicityError(FermiLabError, ValueError):
    """Periodicity integrals do not vanish, so the immersion does not close."""


class DegenerateMetricError(FermiLabError):
    """The induced metric degenerates somewhere on the grid."""


class SliceMismatchError(FermiLabError):
    """Two slices to be compared have different eigenvalue counts."""


class ConfigError(FermiLabError, ValueError):
    """Configuration could not be parsed or validated."""

    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)

    def record(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "errors": self.errors}
