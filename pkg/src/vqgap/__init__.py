"""Variational quantum algorithms for the Generalized Assignment Problem.

Three formulations share one statevector engine: VQE over the full penalty
QUBO (assignment, task slack and binary residual registers), VQGAP over the
assignment qubits only with residuals computed classically, and VQGAPE with
``ceil(log2(A + 1))`` code qubits per task.
"""

from vqgap.instance import GapInstance, brute_force_solve, extended_objective, generate_instance, profit, validate
from vqgap.layout import LayoutKind, VariableLayout, layout

__version__ = "0.1.0"

__all__ = [
    "GapInstance",
    "LayoutKind",
    "VariableLayout",
    "brute_force_solve",
    "extended_objective",
    "generate_instance",
    "layout",
    "profit",
    "validate",
]
