"""Exact expected returns for finite-horizon measured quantum walks."""

from .combinatorics import (
    TrajectoryClass,
    TransitionCountVector,
    enumerate_classes,
    flow_violations,
    multiplicity,
    reconstruct_counts,
)
from .errors import (
    ConstraintViolationError,
    InvalidModelError,
    InvalidPolicyError,
    MultiplicityOverflowError,
    NoCrossoverError,
    QRLError,
    ResourceLimitError,
)
from .models import ModelKind, ModelSpec, PolicyPoint, TransitionMatrices, build_transition_matrices
from .oracle import Trajectory, oracle_enumerate, oracle_return
from .returns import (
    ReturnValue,
    analytic_return,
    j_fourlevel,
    j_qubit_antiperiodic,
    j_qubit_closed,
    j_qutrit_common,
    j_qutrit_three,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolationError", "InvalidModelError", "InvalidPolicyError", "ModelKind",
    "ModelSpec", "MultiplicityOverflowError", "NoCrossoverError", "PolicyPoint", "QRLError",
    "ResourceLimitError", "ReturnValue", "Trajectory", "TrajectoryClass", "TransitionCountVector",
    "TransitionMatrices", "analytic_return", "build_transition_matrices", "enumerate_classes",
    "flow_violations", "j_fourlevel", "j_qubit_antiperiodic", "j_qubit_closed", "j_qutrit_common",
    "j_qutrit_three", "multiplicity", "oracle_enumerate", "oracle_return", "reconstruct_counts",
]
