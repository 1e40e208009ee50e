"""
Hybrid meet-in-the-middle solvers with simulated Grover search and exact query accounting.
"""

from .claw import (
    FunctionFamilyOracle,
    SymmetricClawOracle,
    solve_pair_claw,
    solve_samepoint_claw,
    solve_simultaneous_claw,
    solve_simultaneous_collision,
    solve_symmetric_claw,
)
from .cnfsat import solve_cnf
from .config import SolverConfiguration, load_configuration
from .errors import (
    CertificateError,
    ConfigurationError,
    FormatError,
    GuardError,
    InstanceError,
    QmitmError,
)
from .instances import Assignment, CnfFormula, IlpInstance, KnapsackInstance
from .mitm_ilp import solve_group_problem, solve_ilp, solve_knapsack
from .stats import SolveStats

try:
    from ._version import __version__
except ImportError:  # pragma: no cover
    __version__ = "0.0.0"

__all__ = [
    "__version__",
    "Assignment",
    "CertificateError",
    "CnfFormula",
    "ConfigurationError",
    "FormatError",
    "FunctionFamilyOracle",
    "GuardError",
    "IlpInstance",
    "InstanceError",
    "KnapsackInstance",
    "QmitmError",
    "SolveStats",
    "SolverConfiguration",
    "SymmetricClawOracle",
    "load_configuration",
    "solve_cnf",
    "solve_group_problem",
    "solve_ilp",
    "solve_knapsack",
    "solve_pair_claw",
    "solve_samepoint_claw",
    "solve_simultaneous_claw",
    "solve_simultaneous_collision",
    "solve_symmetric_claw",
]
