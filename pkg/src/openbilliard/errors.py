"""Exception hierarchy for the open-billiard solver."""


class BilliardError(Exception):
    """Base class for all solver errors."""


class ConfigError(BilliardError):
    """Invalid or inconsistent run configuration."""


class DegenerateGeometry(BilliardError):
    """Geometry violates an invariant or is too coarse to discretize."""


class SnapFailure(BilliardError):
    """No admissible grid spacing within 5% of the requested one."""


class InvalidTheta(BilliardError):
    """Scaling parameter theta with non-positive real part."""


class LayerPlacement(BilliardError):
    """Scaling transition layer overlaps the barrier or the truncation column."""


class SolverError(BilliardError):
    """Base class for runtime solver failures (CLI exit code 3)."""


class SingularSystem(SolverError):
    """Scattering system is (numerically) singular at this energy."""


class UnitarityBreach(SolverError):
    """| |R| - 1 | exceeded the hard limit; discretization untrustworthy."""


class BranchAmbiguity(SolverError):
    """Phase unwrapping could not resolve a branch even at the minimum step."""


class FactorizationSingular(SolverError):
    """Sparse factorization of the shifted operator failed."""


class NoConvergence(SolverError):
    """Iterative eigensolver did not converge within the iteration budget."""


class PairingAmbiguity(SolverError):
    """Two eigenvalue candidates claimed the same partner during pairing."""


class NullRestriction(SolverError):
    """Eigenvector has (numerically) no weight inside the billiard."""
