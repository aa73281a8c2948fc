"""Design and verification of reactive IPT compensation ladders.

Two-port (ABCD) analysis of series/shunt ladders, resonant-tank conditions,
CC/CV/ZPA conditions for the S-SP topology, a multi-start design solver and
a sweep-based verification harness.
"""

from .circuit import (
    CompensationNetwork,
    CoupledCoils,
    Frequency,
    LadderStage,
    Orientation,
    build_ssp,
    capacitor,
    inductor,
    t_model,
)
from .conditions import SspReactances, equivalence_check
from .errors import IptError, ValidationError
from .harness import Tolerances, sweep, verify_cc, verify_cv
from .solver import DesignSpec, solve_css, solve_design
from .tanks import Mode, ResonantTank
from .twoport import TransferMatrix, analyze, network_matrix

__all__ = [
    "CompensationNetwork", "CoupledCoils", "DesignSpec", "Frequency", "IptError",
    "LadderStage", "Mode", "Orientation", "ResonantTank", "SspReactances", "Tolerances",
    "TransferMatrix", "ValidationError", "analyze", "build_ssp", "capacitor",
    "equivalence_check", "inductor", "network_matrix", "solve_css", "solve_design",
    "sweep", "t_model", "verify_cc", "verify_cv",
]
