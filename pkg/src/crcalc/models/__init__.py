"""Exact computations on the standard CR three-sphere and the Heisenberg group."""

from .functions import (OPERATORS, UnknownOperator, apply_operator, parse_function,
                        pluriharmonic_basis, standard, structure)
from .identities import MODEL_IDENTITIES, verify_model_identity
from .integrate import PiSquared, integrate, moment, moment_gate, volume
from .ring import MF, MODELS, ModelError, Poly
from .structure import (NotReal, PseudohermitianStructure, SolverDegenerate,
                        conformal_structure, standard_structure)

__all__ = [
    "MF", "MODELS", "MODEL_IDENTITIES", "ModelError", "NotReal", "OPERATORS", "PiSquared",
    "Poly", "PseudohermitianStructure", "SolverDegenerate", "UnknownOperator",
    "apply_operator", "conformal_structure", "integrate", "moment", "moment_gate",
    "parse_function", "pluriharmonic_basis", "standard", "standard_structure",
    "structure", "verify_model_identity", "volume",
]
