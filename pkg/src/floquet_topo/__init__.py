"""Floquet quasienergies, rotating-frame (RWA) effective Hamiltonians and
frame-split topological invariants for the driven two-level system, the
driven SSH chain and the driven pi-flux lattice."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BracketError,
    ConfigError,
    ContractError,
    DegeneracyError,
    DomainError,
    FloquetTopoError,
    GaplessError,
    NonConvergenceError,
    RegimeWarning,
    ResolutionError,
)
from .models import PiFluxSpec, RabiSpec, SSHSpec  # noqa: E402

__all__ = [
    "__version__",
    "BracketError",
    "ConfigError",
    "ContractError",
    "DegeneracyError",
    "DomainError",
    "FloquetTopoError",
    "GaplessError",
    "NonConvergenceError",
    "RegimeWarning",
    "ResolutionError",
    "PiFluxSpec",
    "RabiSpec",
    "SSHSpec",
]
